#include "mlp.hpp"

#include <cmath>

#include "error.hpp"

namespace mvc {

void MlpConfig::validate() const {
  if (layer_dims.size() < 2) throw DomainError("mlp: need at least input and output widths");
  for (std::size_t w : layer_dims) {
    if (w < 1) throw DomainError("mlp: zero-width layer");
  }
}

Tensor xavier_uniform(std::size_t fan_in, std::size_t fan_out, Rng& rng) {
  const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  std::vector<double> values(fan_in * fan_out);
  for (double& v : values) v = rng.uniform(-bound, bound);
  return Tensor::from_values(fan_in, fan_out, std::move(values), true);
}

Mlp::Mlp(MlpConfig cfg, Rng& rng) : cfg_(std::move(cfg)) {
  cfg_.validate();
  for (std::size_t l = 0; l + 1 < cfg_.layer_dims.size(); ++l) {
    const std::size_t in = cfg_.layer_dims[l], out = cfg_.layer_dims[l + 1];
    params_.push_back(xavier_uniform(in, out, rng));
    params_.push_back(Tensor::zeros(1, out, true));
  }
}

Tensor Mlp::forward(const Tensor& x) const {
  if (x.cols() != in_dim()) {
    throw ShapeError("mlp: input is " + shape_str(x.rows(), x.cols()) + ", expected " +
                     std::to_string(in_dim()) + " columns");
  }
  Tensor h = x;
  const std::size_t layers = params_.size() / 2;
  for (std::size_t l = 0; l < layers; ++l) {
    h = add(matmul(h, params_[2 * l]), repeat_rows(params_[2 * l + 1], h.rows()));
    if (l + 1 < layers) {
      h = relu(h);
    } else if (cfg_.output_activation == Activation::kRelu) {
      h = relu(h);
    }
  }
  return h;
}

std::size_t Mlp::param_count() const {
  std::size_t total = 0;
  for (const Tensor& p : params_) total += p.values().size();
  return total;
}

ViewNetworks make_view_networks(std::size_t input_dim, const NetworkWidths& widths, Rng& rng) {
  ViewNetworks nets;
  nets.encoder = Mlp({{input_dim, widths.encoder_hidden, widths.embed_dim}}, rng);
  nets.decoder = Mlp({{widths.embed_dim, widths.encoder_hidden, input_dim}}, rng);
  nets.projector = Mlp({{widths.embed_dim, widths.projector_hidden, widths.consensus_dim}}, rng);
  return nets;
}

}  // namespace mvc

#pragma once

#include <cstddef>
#include <vector>

#include "rng.hpp"
#include "tensor.hpp"

namespace mvc {

enum class Activation { kLinear, kRelu };

struct MlpConfig {
  std::vector<std::size_t> layer_dims;  // input ... output, at least 2 entries
  Activation output_activation = Activation::kLinear;

  void validate() const;
};

/// Xavier-uniform weight init: U(-a, a) with a = sqrt(6 / (fan_in + fan_out)).
Tensor xavier_uniform(std::size_t fan_in, std::size_t fan_out, Rng& rng);

/// Fully connected network with ReLU hidden activations. Parameters are
/// ordered W0, b0, W1, b1, ... with W_i shaped in x out and b_i shaped 1 x out.
class Mlp {
 public:
  Mlp() = default;
  Mlp(MlpConfig cfg, Rng& rng);

  Tensor forward(const Tensor& x) const;

  std::vector<Tensor>& parameters() { return params_; }
  const std::vector<Tensor>& parameters() const { return params_; }
  std::size_t param_count() const;
  const MlpConfig& config() const { return cfg_; }
  std::size_t in_dim() const { return cfg_.layer_dims.front(); }
  std::size_t out_dim() const { return cfg_.layer_dims.back(); }

 private:
  MlpConfig cfg_;
  std::vector<Tensor> params_;
};

/// Encoder, decoder and contrastive projection head for one view. The three
/// nets share no parameters across views.
struct ViewNetworks {
  Mlp encoder;    // D_v -> d_v
  Mlp decoder;    // d_v -> D_v
  Mlp projector;  // d_v -> d_h
};

struct NetworkWidths {
  std::size_t encoder_hidden = 256;
  std::size_t embed_dim = 64;        // d_v
  std::size_t projector_hidden = 256;
  std::size_t consensus_dim = 128;   // d_h
};

ViewNetworks make_view_networks(std::size_t input_dim, const NetworkWidths& widths, Rng& rng);

}  // namespace mvc

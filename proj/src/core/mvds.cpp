#include "mvds.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "error.hpp"

namespace mvc {

namespace {

constexpr char kMagic[4] = {'M', 'V', 'D', 'S'};
constexpr std::uint32_t kVersion = 1;

void put_u32(std::string& out, std::uint32_t v) {
  out.push_back(static_cast<char>(v & 0xFF));
  out.push_back(static_cast<char>((v >> 8) & 0xFF));
  out.push_back(static_cast<char>((v >> 16) & 0xFF));
  out.push_back(static_cast<char>((v >> 24) & 0xFF));
}

void put_f64(std::string& out, double d) {
  const std::uint64_t v = std::bit_cast<std::uint64_t>(d);
  for (int b = 0; b < 8; ++b) out.push_back(static_cast<char>((v >> (8 * b)) & 0xFF));
}

std::uint32_t get_u32(const std::string& in, std::size_t off) {
  return static_cast<std::uint32_t>(static_cast<unsigned char>(in[off])) |
         (static_cast<std::uint32_t>(static_cast<unsigned char>(in[off + 1])) << 8) |
         (static_cast<std::uint32_t>(static_cast<unsigned char>(in[off + 2])) << 16) |
         (static_cast<std::uint32_t>(static_cast<unsigned char>(in[off + 3])) << 24);
}

double get_f64(const std::string& in, std::size_t off) {
  std::uint64_t v = 0;
  for (int b = 7; b >= 0; --b) {
    v = (v << 8) | static_cast<unsigned char>(in[off + static_cast<std::size_t>(b)]);
  }
  return std::bit_cast<double>(v);
}

std::string read_all(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path.string() + " for reading");
  std::string contents((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  return contents;
}

void write_all(const std::filesystem::path& path, const std::string& bytes) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open " + path.string() + " for writing");
  f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw IoError("short write to " + path.string());
}

}  // namespace

void write_matrix_file(const std::filesystem::path& path, const DenseMatrix& m) {
  std::string out;
  out.reserve(16 + m.size() * 8);
  out.append(kMagic, 4);
  put_u32(out, kVersion);
  put_u32(out, static_cast<std::uint32_t>(m.rows));
  put_u32(out, static_cast<std::uint32_t>(m.cols));
  for (double d : m.data) put_f64(out, d);
  write_all(path, out);
}

DenseMatrix read_matrix_file(const std::filesystem::path& path) {
  const std::string in = read_all(path);
  if (in.size() < 16) {
    throw IoError(path.string() + ": header truncated, expected 16 bytes, got " +
                  std::to_string(in.size()));
  }
  if (std::memcmp(in.data(), kMagic, 4) != 0) {
    throw IoError(path.string() + ": bad magic at byte offset 0, expected \"MVDS\"");
  }
  const std::uint32_t version = get_u32(in, 4);
  if (version != kVersion) {
    throw IoError(path.string() + ": unsupported version " + std::to_string(version) +
                  " at byte offset 4");
  }
  const std::size_t rows = get_u32(in, 8);
  const std::size_t cols = get_u32(in, 12);
  const std::size_t expected = 16 + rows * cols * 8;
  if (in.size() != expected) {
    throw IoError(path.string() + ": expected " + std::to_string(expected) +
                  " bytes for a " + shape_str(rows, cols) + " matrix, got " +
                  std::to_string(in.size()));
  }
  DenseMatrix m(rows, cols);
  for (std::size_t i = 0; i < rows * cols; ++i) m.data[i] = get_f64(in, 16 + i * 8);
  return m;
}

void write_labels_file(const std::filesystem::path& path,
                       const std::vector<std::uint32_t>& labels) {
  std::string out;
  out.reserve(labels.size() * 4);
  for (std::uint32_t v : labels) put_u32(out, v);
  write_all(path, out);
}

std::vector<std::uint32_t> read_labels_file(const std::filesystem::path& path) {
  const std::string in = read_all(path);
  if (in.size() % 4 != 0) {
    throw IoError(path.string() + ": label file size " + std::to_string(in.size()) +
                  " is not a multiple of 4");
  }
  std::vector<std::uint32_t> labels(in.size() / 4);
  for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = get_u32(in, i * 4);
  return labels;
}

void write_mask_file(const std::filesystem::path& path, const std::vector<std::uint8_t>& mask) {
  std::string out(mask.begin(), mask.end());
  write_all(path, out);
}

std::vector<std::uint8_t> read_mask_file(const std::filesystem::path& path,
                                         std::size_t expected_size) {
  const std::string in = read_all(path);
  if (in.size() != expected_size) {
    throw IoError(path.string() + ": expected " + std::to_string(expected_size) +
                  " mask bytes, got " + std::to_string(in.size()));
  }
  return std::vector<std::uint8_t>(in.begin(), in.end());
}

}  // namespace mvc

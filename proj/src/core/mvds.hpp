#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "matrix.hpp"

namespace mvc {

// Binary matrix file: magic "MVDS", then little-endian u32 version (=1),
// u32 rows, u32 cols, then rows*cols little-endian f64 values row-major.

void write_matrix_file(const std::filesystem::path& path, const DenseMatrix& m);
DenseMatrix read_matrix_file(const std::filesystem::path& path);

// Labels file: n little-endian u32 values.
void write_labels_file(const std::filesystem::path& path, const std::vector<std::uint32_t>& labels);
std::vector<std::uint32_t> read_labels_file(const std::filesystem::path& path);

// Mask file: n*v bytes row-major, 1 = view present.
void write_mask_file(const std::filesystem::path& path, const std::vector<std::uint8_t>& mask);
std::vector<std::uint8_t> read_mask_file(const std::filesystem::path& path,
                                         std::size_t expected_size);

}  // namespace mvc

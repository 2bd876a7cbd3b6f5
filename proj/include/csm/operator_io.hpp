#pragma once

#include <cstdint>
#include <filesystem>

#include <Eigen/Core>

namespace csm {

// Binary dump of a dense complex square matrix:
//   bytes 0-3   magic "CSMO"
//   bytes 4-7   format version, u32 little-endian
//   bytes 8-15  dimension, u64 little-endian
//   then dim*dim (re, im) pairs of little-endian f64 in row-major order.
inline constexpr std::uint32_t kDumpVersion = 1;

void write_matrix_dump(const std::filesystem::path& path, const Eigen::MatrixXcd& m);
// Throws NumericalError on a malformed or truncated file.
Eigen::MatrixXcd read_matrix_dump(const std::filesystem::path& path);

}  // namespace csm

#include "csm/operator_io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "csm/errors.hpp"

namespace csm {

namespace {

constexpr std::array<char, 4> kMagic = {'C', 'S', 'M', 'O'};

template <typename T>
void put_le(std::vector<char>& buf, T value) {
  static_assert(std::is_trivially_copyable_v<T>);
  std::array<char, sizeof(T)> bytes;
  std::memcpy(bytes.data(), &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
  buf.insert(buf.end(), bytes.begin(), bytes.end());
}

template <typename T>
T get_le(const char* p) {
  std::array<char, sizeof(T)> bytes;
  std::memcpy(bytes.data(), p, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
  T value;
  std::memcpy(&value, bytes.data(), sizeof(T));
  return value;
}

}  // namespace

void write_matrix_dump(const std::filesystem::path& path, const Eigen::MatrixXcd& m) {
  if (m.rows() != m.cols()) throw ConfigError("matrix dump requires a square matrix");
  const auto dim = static_cast<std::uint64_t>(m.rows());
  std::vector<char> buf;
  buf.reserve(16 + dim * dim * 16);
  buf.insert(buf.end(), kMagic.begin(), kMagic.end());
  put_le<std::uint32_t>(buf, kDumpVersion);
  put_le<std::uint64_t>(buf, dim);
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      put_le<double>(buf, m(r, c).real());
      put_le<double>(buf, m(r, c).imag());
    }
  }
  // Write to a sibling temp file first so concurrent readers never see a partial dump.
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw NumericalError("cannot open " + tmp.string() + " for writing");
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (!out) throw NumericalError("short write to " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

Eigen::MatrixXcd read_matrix_dump(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw NumericalError("cannot open matrix dump " + path.string());
  std::vector<char> buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (buf.size() < 16 || !std::equal(kMagic.begin(), kMagic.end(), buf.begin())) {
    throw NumericalError(path.string() + " is not a CSMO matrix dump");
  }
  const auto version = get_le<std::uint32_t>(buf.data() + 4);
  if (version != kDumpVersion) {
    throw NumericalError(path.string() + ": unsupported dump version " + std::to_string(version));
  }
  const auto dim = get_le<std::uint64_t>(buf.data() + 8);
  if (buf.size() != 16 + dim * dim * 16) throw NumericalError(path.string() + ": truncated matrix dump");

  const auto n = static_cast<Eigen::Index>(dim);
  Eigen::MatrixXcd m(n, n);
  const char* p = buf.data() + 16;
  for (Eigen::Index r = 0; r < n; ++r) {
    for (Eigen::Index c = 0; c < n; ++c) {
      m(r, c) = {get_le<double>(p), get_le<double>(p + 8)};
      p += 16;
    }
  }
  return m;
}

}  // namespace csm

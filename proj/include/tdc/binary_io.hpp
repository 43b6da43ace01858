#pragma once

// Little-endian byte encoding shared by the TDCF, TDCP and TDCS containers.

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tdc/numkernel.hpp"

namespace tdc::io {

class ByteWriter {
 public:
  void put_bytes(std::string_view bytes);
  void put_u8(std::uint8_t v);
  void put_u32(std::uint32_t v);
  void put_f32(float v);
  /// Rounds each value to 32-bit and writes it row-major.
  template <typename Derived>
  void put_matrix(const Eigen::MatrixBase<Derived>& m) {
    for (Eigen::Index r = 0; r < m.rows(); ++r)
      for (Eigen::Index c = 0; c < m.cols(); ++c) put_f32(static_cast<float>(m(r, c)));
  }

  const std::vector<std::uint8_t>& bytes() const { return buf_; }

 private:
  std::vector<std::uint8_t> buf_;
};

class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> data) : data_(data) {}

  /// Fails with kBadMagic unless the next bytes equal `magic`.
  void expect_magic(std::string_view magic);
  std::uint8_t get_u8(const char* what);
  std::uint32_t get_u32(const char* what);
  float get_f32(const char* what);
  std::string get_string(std::size_t len, const char* what);
  MatF get_matrix(std::size_t rows, std::size_t cols, const char* what);

  /// Throws kTruncated when fewer than `n` bytes remain.
  void require(std::uint64_t n, const char* what) const;
  std::uint64_t offset() const { return pos_; }
  std::uint64_t remaining() const { return data_.size() - pos_; }

 private:
  std::span<const std::uint8_t> data_;
  std::uint64_t pos_ = 0;
};

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

}  // namespace tdc::io

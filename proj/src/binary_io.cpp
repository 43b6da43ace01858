#include "tdc/binary_io.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

namespace tdc::io {

void ByteWriter::put_bytes(std::string_view bytes) {
  buf_.insert(buf_.end(), bytes.begin(), bytes.end());
}

void ByteWriter::put_u8(std::uint8_t v) { buf_.push_back(v); }

void ByteWriter::put_u32(std::uint32_t v) {
  for (int i = 0; i < 4; ++i) buf_.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xFFu));
}

void ByteWriter::put_f32(float v) { put_u32(std::bit_cast<std::uint32_t>(v)); }

void ByteReader::require(std::uint64_t n, const char* what) const {
  if (remaining() < n) {
    throw ParseError(ParseErrorKind::kTruncated, pos_,
                     std::string("need ") + std::to_string(n) + " bytes for " + what + ", have " +
                         std::to_string(remaining()));
  }
}

void ByteReader::expect_magic(std::string_view magic) {
  const std::size_t have = std::min(remaining(), magic.size());
  if (std::memcmp(data_.data() + pos_, magic.data(), have) != 0) {
    throw ParseError(ParseErrorKind::kBadMagic, pos_,
                     "expected \"" + std::string(magic) + "\"");
  }
  require(magic.size(), "magic");
  pos_ += magic.size();
}

std::uint8_t ByteReader::get_u8(const char* what) {
  require(1, what);
  return data_[pos_++];
}

std::uint32_t ByteReader::get_u32(const char* what) {
  require(4, what);
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(data_[pos_ + i]) << (8 * i);
  pos_ += 4;
  return v;
}

float ByteReader::get_f32(const char* what) { return std::bit_cast<float>(get_u32(what)); }

std::string ByteReader::get_string(std::size_t len, const char* what) {
  require(len, what);
  std::string s(reinterpret_cast<const char*>(data_.data() + pos_), len);
  pos_ += len;
  return s;
}

MatF ByteReader::get_matrix(std::size_t rows, std::size_t cols, const char* what) {
  require(static_cast<std::uint64_t>(rows) * cols * 4, what);
  MatF m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = get_f32(what);
  return m;
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string() + " for reading");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("read failed: " + path.string());
  return bytes;
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace tdc::io

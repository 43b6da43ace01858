#include "tdc/binary_io.hpp"
#include "tdc/compressor.hpp"

namespace tdc {

std::vector<std::uint8_t> encode_tdcs(const TdcStream& stream) {
  io::ByteWriter w;
  w.put_bytes(kTdcsMagic);
  w.put_u32(kTdcsVersion);
  w.put_u32(static_cast<std::uint32_t>(stream.size()));
  w.put_u32(static_cast<std::uint32_t>(stream.tokens.cols()));
  w.put_matrix(stream.tokens);
  for (const auto& tag : stream.tags) w.put_u8(static_cast<std::uint8_t>(tag.provenance));
  return w.bytes();
}

StoredStream decode_tdcs(std::span<const std::uint8_t> bytes) {
  io::ByteReader r(bytes);
  r.expect_magic(kTdcsMagic);
  const auto version_at = r.offset();
  const auto version = r.get_u32("version");
  if (version != kTdcsVersion) {
    throw ParseError(ParseErrorKind::kVersionMismatch, version_at,
                     "stream version " + std::to_string(version) + ", reader supports " +
                         std::to_string(kTdcsVersion));
  }
  const std::size_t n = r.get_u32("token count");
  const std::size_t dim = r.get_u32("dim");
  StoredStream s;
  s.tokens = r.get_matrix(n, dim, "tokens");
  r.require(n, "provenance");
  s.provenance.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto at = r.offset();
    const auto b = r.get_u8("provenance");
    if (b > 3) throw ParseError(ParseErrorKind::kMalformed, at, "provenance byte " + std::to_string(b));
    s.provenance.push_back(static_cast<Provenance>(b));
  }
  if (r.remaining() != 0) {
    throw ParseError(ParseErrorKind::kMalformed, r.offset(), std::to_string(r.remaining()) + " trailing bytes");
  }
  return s;
}

void write_tdcs(const TdcStream& stream, const std::filesystem::path& path) {
  io::write_file(path, encode_tdcs(stream));
}

StoredStream read_tdcs(const std::filesystem::path& path) { return decode_tdcs(io::read_file(path)); }

}  // namespace tdc

#include "tdc/binary_io.hpp"
#include "tdc/qformer.hpp"

namespace tdc {

std::vector<std::uint8_t> encode_tdcp(const QFormerParams& p, const QFormerConfig& cfg) {
  check_shapes(p, cfg);
  io::ByteWriter w;
  w.put_bytes(kTdcpMagic);
  w.put_u32(kTdcpVersion);
  for (std::size_t v : {cfg.model_dim, cfg.heads, cfg.layers, cfg.ffn_mult, cfg.queries}) {
    w.put_u32(static_cast<std::uint32_t>(v));
  }
  w.put_u32(cfg.query_type == QueryType::kLearned ? 1 : 0);
  w.put_u32(cfg.text_conditioning ? 1 : 0);
  for (std::size_t v : {cfg.vocab, cfg.visual_dim, cfg.audio_dim}) w.put_u32(static_cast<std::uint32_t>(v));

  std::uint32_t count = 0;
  p.for_each_tensor([&](const std::string&, const Mat&) { ++count; });
  w.put_u32(count);
  p.for_each_tensor([&](const std::string& name, const Mat& m) {
    w.put_u32(static_cast<std::uint32_t>(name.size()));
    w.put_bytes(name);
    w.put_u32(static_cast<std::uint32_t>(m.rows()));
    w.put_u32(static_cast<std::uint32_t>(m.cols()));
    w.put_matrix(m);
  });
  return w.bytes();
}

Checkpoint decode_tdcp(std::span<const std::uint8_t> bytes) {
  io::ByteReader r(bytes);
  r.expect_magic(kTdcpMagic);
  const auto version_at = r.offset();
  const auto version = r.get_u32("version");
  if (version != kTdcpVersion) {
    throw ParseError(ParseErrorKind::kVersionMismatch, version_at,
                     "checkpoint version " + std::to_string(version) + ", reader supports " +
                         std::to_string(kTdcpVersion));
  }
  const auto config_at = r.offset();
  Checkpoint ck;
  auto& cfg = ck.config;
  cfg.model_dim = r.get_u32("config");
  cfg.heads = r.get_u32("config");
  cfg.layers = r.get_u32("config");
  cfg.ffn_mult = r.get_u32("config");
  cfg.queries = r.get_u32("config");
  cfg.query_type = r.get_u32("config") == 1 ? QueryType::kLearned : QueryType::kAvgPool;
  cfg.text_conditioning = r.get_u32("config") != 0;
  cfg.vocab = r.get_u32("config");
  cfg.visual_dim = r.get_u32("config");
  cfg.audio_dim = r.get_u32("config");
  try {
    cfg.validate();
  } catch (const ArgumentError& e) {
    throw ParseError(ParseErrorKind::kMalformed, config_at, e.what());
  }

  ck.params = zero_params(cfg);
  std::uint32_t expected = 0;
  ck.params.for_each_tensor([&](const std::string&, const Mat&) { ++expected; });
  const auto count_at = r.offset();
  const auto count = r.get_u32("tensor count");
  if (count != expected) {
    throw ParseError(ParseErrorKind::kMalformed, count_at,
                     "expected " + std::to_string(expected) + " tensors, header says " + std::to_string(count));
  }
  ck.params.for_each_tensor([&](const std::string& name, Mat& m) {
    const auto header_at = r.offset();
    const auto len = r.get_u32("tensor name length");
    const auto got = r.get_string(len, "tensor name");
    const std::size_t rows = r.get_u32("tensor rows");
    const std::size_t cols = r.get_u32("tensor cols");
    if (got != name || rows != static_cast<std::size_t>(m.rows()) || cols != static_cast<std::size_t>(m.cols())) {
      throw ParseError(ParseErrorKind::kMalformed, header_at,
                       "tensor '" + got + "' (" + std::to_string(rows) + "x" + std::to_string(cols) +
                           ") where '" + name + "' " + shape_str(m) + " was expected");
    }
    m = r.get_matrix(rows, cols, "tensor data").cast<double>();
  });
  if (r.remaining() != 0) {
    throw ParseError(ParseErrorKind::kMalformed, r.offset(), std::to_string(r.remaining()) + " trailing bytes");
  }
  return ck;
}

void write_tdcp(const QFormerParams& p, const QFormerConfig& cfg, const std::filesystem::path& path) {
  io::write_file(path, encode_tdcp(p, cfg));
}

Checkpoint read_tdcp(const std::filesystem::path& path) { return decode_tdcp(io::read_file(path)); }

}  // namespace tdc

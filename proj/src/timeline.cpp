#include "tdc/timeline.hpp"

#include <cstring>
#include <sstream>

#include "tdc/binary_io.hpp"

namespace tdc {

namespace {

template <typename M>
bool bitwise_equal(const M& a, const M& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() &&
         std::memcmp(a.data(), b.data(), sizeof(float) * static_cast<std::size_t>(a.size())) == 0;
}

enum class Modality : std::uint8_t { kVisual = 0, kAudio = 1, kDescriptor = 2 };

}  // namespace

VideoTimeline::VideoTimeline(std::vector<MatF> visual, std::vector<MatF> audio,
                             std::vector<VecF> descriptors)
    : visual_(std::move(visual)), audio_(std::move(audio)), descriptors_(std::move(descriptors)) {
  if (visual_.empty()) throw ArgumentError("timeline needs at least one frame");
  if (audio_.size() != visual_.size() || descriptors_.size() != visual_.size()) {
    throw ShapeError("timeline streams differ in length: visual " + std::to_string(visual_.size()) +
                     ", audio " + std::to_string(audio_.size()) + ", descriptors " +
                     std::to_string(descriptors_.size()));
  }
  dims_.visual_tokens = static_cast<std::size_t>(visual_[0].rows());
  dims_.visual_dim = static_cast<std::size_t>(visual_[0].cols());
  dims_.audio_tokens = static_cast<std::size_t>(audio_[0].rows());
  dims_.audio_dim = static_cast<std::size_t>(audio_[0].cols());
  dims_.descriptor_dim = static_cast<std::size_t>(descriptors_[0].size());
  for (std::size_t t = 0; t < visual_.size(); ++t) {
    if (static_cast<std::size_t>(visual_[t].rows()) != dims_.visual_tokens ||
        static_cast<std::size_t>(visual_[t].cols()) != dims_.visual_dim ||
        static_cast<std::size_t>(audio_[t].rows()) != dims_.audio_tokens ||
        static_cast<std::size_t>(audio_[t].cols()) != dims_.audio_dim ||
        static_cast<std::size_t>(descriptors_[t].size()) != dims_.descriptor_dim) {
      throw ShapeError("frame " + std::to_string(t) + " does not match the shapes of frame 0");
    }
  }
}

VideoTimeline VideoTimeline::slice(std::size_t begin, std::size_t end) const {
  if (begin >= end || end > frame_count()) {
    throw ArgumentError("slice [" + std::to_string(begin) + "," + std::to_string(end) +
                        ") outside [0," + std::to_string(frame_count()) + ")");
  }
  const auto b = static_cast<std::ptrdiff_t>(begin);
  const auto e = static_cast<std::ptrdiff_t>(end);
  return VideoTimeline({visual_.begin() + b, visual_.begin() + e},
                       {audio_.begin() + b, audio_.begin() + e},
                       {descriptors_.begin() + b, descriptors_.begin() + e});
}

bool VideoTimeline::operator==(const VideoTimeline& other) const {
  if (frame_count() != other.frame_count() || !(dims_ == other.dims_)) return false;
  for (std::size_t t = 0; t < frame_count(); ++t) {
    if (!bitwise_equal(visual_[t], other.visual_[t]) || !bitwise_equal(audio_[t], other.audio_[t]) ||
        !bitwise_equal(descriptors_[t], other.descriptors_[t])) {
      return false;
    }
  }
  return true;
}

Vec frame_descriptor(const VideoTimeline& tl, std::size_t t, DescriptorMode mode) {
  if (mode == DescriptorMode::kPooled) {
    return tl.visual(t).cast<double>().colwise().mean().transpose();
  }
  return tl.descriptor(t).cast<double>();
}

std::vector<std::uint8_t> encode_tdcf(const VideoTimeline& tl) {
  io::ByteWriter w;
  w.put_bytes(kTdcfMagic);
  w.put_u32(kTdcfVersion);
  w.put_u32(static_cast<std::uint32_t>(tl.frame_count()));
  const auto d = tl.dims();

  w.put_u8(static_cast<std::uint8_t>(Modality::kVisual));
  w.put_u32(static_cast<std::uint32_t>(d.visual_tokens));
  w.put_u32(static_cast<std::uint32_t>(d.visual_dim));
  for (const auto& m : tl.visual_frames()) w.put_matrix(m);

  w.put_u8(static_cast<std::uint8_t>(Modality::kAudio));
  w.put_u32(static_cast<std::uint32_t>(d.audio_tokens));
  w.put_u32(static_cast<std::uint32_t>(d.audio_dim));
  for (const auto& m : tl.audio_frames()) w.put_matrix(m);

  w.put_u8(static_cast<std::uint8_t>(Modality::kDescriptor));
  w.put_u32(1);
  w.put_u32(static_cast<std::uint32_t>(d.descriptor_dim));
  for (const auto& v : tl.descriptors()) w.put_matrix(v.transpose());
  return w.bytes();
}

VideoTimeline decode_tdcf(std::span<const std::uint8_t> bytes) {
  io::ByteReader r(bytes);
  r.expect_magic(kTdcfMagic);
  const auto version_at = r.offset();
  const auto version = r.get_u32("version");
  if (version != kTdcfVersion) {
    throw ParseError(ParseErrorKind::kVersionMismatch, version_at,
                     "file version " + std::to_string(version) + ", reader supports " +
                         std::to_string(kTdcfVersion));
  }
  const auto frames_at = r.offset();
  const std::size_t frames = r.get_u32("frame count");
  if (frames == 0) throw ParseError(ParseErrorKind::kMalformed, frames_at, "frame count is zero");

  auto read_stream = [&](Modality expected, const char* name) {
    const auto tag_at = r.offset();
    const auto tag = r.get_u8("modality tag");
    if (tag != static_cast<std::uint8_t>(expected)) {
      throw ParseError(ParseErrorKind::kMalformed, tag_at,
                       std::string("expected ") + name + " stream tag " +
                           std::to_string(static_cast<int>(expected)) + ", found " +
                           std::to_string(static_cast<int>(tag)));
    }
    const std::size_t tokens = r.get_u32("tokens per frame");
    const std::size_t dim = r.get_u32("dim");
    r.require(static_cast<std::uint64_t>(frames) * tokens * dim * 4, name);
    std::vector<MatF> out;
    out.reserve(frames);
    for (std::size_t t = 0; t < frames; ++t) out.push_back(r.get_matrix(tokens, dim, name));
    return out;
  };

  auto visual = read_stream(Modality::kVisual, "visual");
  auto audio = read_stream(Modality::kAudio, "audio");
  const auto desc_at = r.offset();
  auto desc_rows = read_stream(Modality::kDescriptor, "descriptor");
  std::vector<VecF> descriptors;
  descriptors.reserve(frames);
  for (auto& m : desc_rows) {
    if (m.rows() != 1) {
      throw ParseError(ParseErrorKind::kMalformed, desc_at, "descriptor stream must hold 1 token per frame");
    }
    descriptors.emplace_back(m.row(0).transpose());
  }
  if (r.remaining() != 0) {
    throw ParseError(ParseErrorKind::kMalformed, r.offset(),
                     std::to_string(r.remaining()) + " trailing bytes");
  }
  return VideoTimeline(std::move(visual), std::move(audio), std::move(descriptors));
}

void write_tdcf(const VideoTimeline& tl, const std::filesystem::path& path) {
  io::write_file(path, encode_tdcf(tl));
}

VideoTimeline read_tdcf(const std::filesystem::path& path) { return decode_tdcf(io::read_file(path)); }

InstructionTokens tokenize_text(std::string_view text, std::size_t vocab) {
  if (vocab == 0) throw ArgumentError("tokenize_text: vocab must be positive");
  InstructionTokens out;
  std::istringstream words{std::string(text)};
  std::string word;
  while (words >> word) {
    std::uint32_t h = 2166136261u;
    for (unsigned char ch : word) {
      h ^= ch;
      h *= 16777619u;
    }
    out.ids.push_back(static_cast<std::uint32_t>(h % vocab));
  }
  return out;
}

}  // namespace tdc

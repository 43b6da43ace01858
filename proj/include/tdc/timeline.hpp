#pragma once

// Per-second multimodal token storage (1 fps, so frame t covers second t).

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tdc/numkernel.hpp"

namespace tdc {

/// Token counts and widths shared by every frame of a timeline.
struct TimelineDims {
  std::size_t visual_tokens = 144;  // M_v, aggregated visual tokens per frame
  std::size_t audio_tokens = 50;    // M_a, audio tokens per second
  std::size_t visual_dim = 32;
  std::size_t audio_dim = 32;
  std::size_t descriptor_dim = 32;

  bool operator==(const TimelineDims&) const = default;
};

/// Frame tokens are kept in 32-bit, which is exactly what the TDCF container stores.
class VideoTimeline {
 public:
  VideoTimeline(std::vector<MatF> visual, std::vector<MatF> audio, std::vector<VecF> descriptors);

  std::size_t frame_count() const { return visual_.size(); }
  TimelineDims dims() const { return dims_; }

  const MatF& visual(std::size_t t) const { return visual_.at(t); }
  const MatF& audio(std::size_t t) const { return audio_.at(t); }
  const VecF& descriptor(std::size_t t) const { return descriptors_.at(t); }

  const std::vector<MatF>& visual_frames() const { return visual_; }
  const std::vector<MatF>& audio_frames() const { return audio_; }
  const std::vector<VecF>& descriptors() const { return descriptors_; }

  /// Frames [begin, end) as a new timeline.
  VideoTimeline slice(std::size_t begin, std::size_t end) const;

  /// Bitwise equality of every stored value.
  bool operator==(const VideoTimeline& other) const;

 private:
  std::vector<MatF> visual_;
  std::vector<MatF> audio_;
  std::vector<VecF> descriptors_;
  TimelineDims dims_;
};

/// Where the per-frame similarity embedding comes from.
enum class DescriptorMode {
  kStored,  // the separate descriptor stream
  kPooled,  // column mean of the frame's visual tokens
};

Vec frame_descriptor(const VideoTimeline& tl, std::size_t t, DescriptorMode mode);

// TDCF container:
//   "TDCF" | u32 version=1 | u32 T |
//   3 x { u8 modality tag (0 visual, 1 audio, 2 descriptor) | u32 tokens/frame | u32 dim |
//         T*tokens*dim f32 row-major }
// All integers and floats little-endian.
inline constexpr std::string_view kTdcfMagic = "TDCF";
inline constexpr std::uint32_t kTdcfVersion = 1;

std::vector<std::uint8_t> encode_tdcf(const VideoTimeline& tl);
VideoTimeline decode_tdcf(std::span<const std::uint8_t> bytes);
void write_tdcf(const VideoTimeline& tl, const std::filesystem::path& path);
VideoTimeline read_tdcf(const std::filesystem::path& path);

/// Fixture generator parameters. Scenes are [0,b_1), [b_1,b_2), ..., [b_last,T).
struct SynthSpec {
  std::uint64_t seed = 0;
  std::size_t frames = 60;
  std::vector<std::size_t> boundaries;
  /// One descriptor center per scene; generated from the seed when empty.
  std::vector<Vec> centers;
  double noise = 0.1;
  TimelineDims dims;
};

VideoTimeline synth_generate(const SynthSpec& spec);

inline constexpr std::size_t kDefaultVocab = 1024;

/// Token ids of the instruction text.
struct InstructionTokens {
  std::vector<std::uint32_t> ids;
  bool empty() const { return ids.empty(); }
  std::size_t size() const { return ids.size(); }
  bool operator==(const InstructionTokens&) const = default;
};

/// Whitespace split, FNV-1a 32-bit hash of each word, reduced modulo `vocab`.
InstructionTokens tokenize_text(std::string_view text, std::size_t vocab = kDefaultVocab);

}  // namespace tdc

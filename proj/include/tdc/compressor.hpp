#pragma once

// Temporal dynamic context assembly. Each scene is tiled into windows of N
// frames; the first frame of a window keeps its full visual and audio tokens,
// a <Sep> embedding follows, then K compressed tokens per remaining frame.

#include <cstdint>
#include <filesystem>
#include <span>
#include <string_view>
#include <vector>

#include "tdc/qformer.hpp"
#include "tdc/segmenter.hpp"
#include "tdc/timeline.hpp"

namespace tdc {

struct Window {
  std::size_t scene = 0;
  Span frames;  // frames.begin is the static frame

  std::size_t static_frame() const { return frames.begin; }
  std::size_t dynamic_count() const { return frames.size() - 1; }
};

struct WindowPlan {
  std::size_t window_length = 0;  // N
  std::size_t scene_count = 0;
  std::vector<Window> windows;    // timeline order

  std::vector<Window> windows_of_scene(std::size_t scene) const;
  std::size_t frame_count() const;
};

/// Splits every scene into ceil(len / N) consecutive windows; the last may be short.
WindowPlan make_windows(const ScenePartition& partition, std::size_t window_length);

enum class Provenance : std::uint8_t { kStaticVisual = 0, kStaticAudio = 1, kSep = 2, kDynamic = 3 };

const char* to_string(Provenance p);

struct TokenTag {
  Provenance provenance;
  std::uint32_t frame;
  std::uint32_t window;

  bool operator==(const TokenTag&) const = default;
};

struct TdcStream {
  Mat tokens;  // one row per token
  std::vector<TokenTag> tags;

  std::size_t size() const { return tags.size(); }
};

struct TdcConfig {
  SegmenterConfig segmenter;
  std::size_t window_length = 8;
  QFormerConfig qformer;
  /// Worker threads for per-window compression; output is identical for any value.
  std::size_t threads = 1;
};

/// Queries for a window: pooled projected static tokens or the learned tensor.
Mat build_queries(const QFormerParams& p, const QFormerConfig& cfg, const MatF& static_visual);

/// Compressed tokens for one dynamic frame.
Mat compress_frame(const QFormerParams& p, const QFormerConfig& cfg, const Mat& queries,
                   const MatF& visual, const MatF& audio, const InstructionTokens& text);

TdcStream assemble_tdc(const VideoTimeline& tl, const WindowPlan& plan, const QFormerParams& p,
                       const TdcConfig& cfg, const InstructionTokens& text);

/// Segment `range`, window it, and assemble its stream.
TdcStream encode_range(const VideoTimeline& tl, Span range, const QFormerParams& p, const TdcConfig& cfg,
                       const InstructionTokens& text);

struct BudgetReport {
  std::vector<std::size_t> per_window;
  std::size_t total = 0;
  std::size_t naive = 0;  // every frame's visual + audio tokens
  double ratio = 0.0;     // naive / total
};

/// Per window M_v + M_a + 1 + (n_w - 1) K.
BudgetReport token_budget(const TimelineDims& dims, const WindowPlan& plan, std::size_t queries);
BudgetReport token_budget(const VideoTimeline& tl, const WindowPlan& plan, const QFormerConfig& cfg);

/// One example per dynamic frame: predict the mean of that frame's visual tokens.
std::vector<TrainingExample> training_batch(const VideoTimeline& tl, const WindowPlan& plan,
                                            const InstructionTokens& text);

// TDCS stream container:
//   "TDCS" | u32 version=1 | u32 token count n | u32 dim |
//   n*dim f32 row-major | n provenance bytes (0 static-visual, 1 static-audio, 2 sep, 3 dynamic)
inline constexpr std::string_view kTdcsMagic = "TDCS";
inline constexpr std::uint32_t kTdcsVersion = 1;

struct StoredStream {
  MatF tokens;
  std::vector<Provenance> provenance;
};

std::vector<std::uint8_t> encode_tdcs(const TdcStream& stream);
StoredStream decode_tdcs(std::span<const std::uint8_t> bytes);
void write_tdcs(const TdcStream& stream, const std::filesystem::path& path);
StoredStream read_tdcs(const std::filesystem::path& path);

}  // namespace tdc

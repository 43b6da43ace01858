#pragma once

#include <cstddef>
#include <vector>

#include "tdc/timeline.hpp"

namespace tdc {

/// Half-open frame range [begin, end).
struct Span {
  std::size_t begin = 0;
  std::size_t end = 0;

  std::size_t size() const { return end - begin; }
  bool operator==(const Span&) const = default;
};

struct SegmenterConfig {
  std::size_t max_scenes = 24;  // S_max
  /// Similarities strictly below tau propose a cut. tau = 1 leaves only the cap.
  double tau = 0.85;
  DescriptorMode descriptor = DescriptorMode::kStored;
};

/// Scenes over `range`. A cut at c means frame c starts a new scene.
struct ScenePartition {
  Span range;
  std::vector<std::size_t> cuts;
  /// Similarity between frames c-1 and c for each cut.
  std::vector<double> cut_similarities;

  std::size_t scene_count() const { return cuts.size() + 1; }
  std::vector<Span> scenes() const;
};

/// Entry t is cos(descriptor_t, descriptor_{t+1}); empty for a single frame.
std::vector<double> frame_similarities(const VideoTimeline& tl,
                                       DescriptorMode mode = DescriptorMode::kStored);

/// Keeps every similarity below tau, then the (max_scenes - 1) lowest of those,
/// ties going to the earlier index. Returns similarity indices in ascending order.
std::vector<std::size_t> select_cut_indices(const std::vector<double>& similarities,
                                            const SegmenterConfig& cfg);

ScenePartition segment_scenes(const VideoTimeline& tl, const SegmenterConfig& cfg = {});

/// Segments only frames inside `range`; similarities across its edges are ignored.
ScenePartition segment_scenes(const VideoTimeline& tl, Span range, const SegmenterConfig& cfg = {});

}  // namespace tdc

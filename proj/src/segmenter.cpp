#include "tdc/segmenter.hpp"

#include <algorithm>
#include <numeric>

namespace tdc {

std::vector<Span> ScenePartition::scenes() const {
  std::vector<Span> out;
  std::size_t start = range.begin;
  for (auto c : cuts) {
    out.push_back({start, c});
    start = c;
  }
  out.push_back({start, range.end});
  return out;
}

std::vector<double> frame_similarities(const VideoTimeline& tl, DescriptorMode mode) {
  std::vector<double> sims;
  if (tl.frame_count() < 2) return sims;
  sims.reserve(tl.frame_count() - 1);
  Vec prev = frame_descriptor(tl, 0, mode);
  for (std::size_t t = 1; t < tl.frame_count(); ++t) {
    Vec cur = frame_descriptor(tl, t, mode);
    try {
      sims.push_back(cosine_sim(prev, cur));
    } catch (const DegenerateInputError&) {
      throw DegenerateInputError("zero descriptor at frame " + std::to_string(prev.norm() > 0 ? t : t - 1));
    }
    prev = std::move(cur);
  }
  return sims;
}

namespace {

void validate(const SegmenterConfig& cfg) {
  if (cfg.max_scenes == 0) throw ArgumentError("segmenter: max_scenes must be >= 1");
  if (!(cfg.tau > -1.0 && cfg.tau <= 1.0)) throw ArgumentError("segmenter: tau must lie in (-1, 1]");
}

}  // namespace

std::vector<std::size_t> select_cut_indices(const std::vector<double>& similarities,
                                            const SegmenterConfig& cfg) {
  validate(cfg);
  std::vector<std::size_t> candidates;
  for (std::size_t i = 0; i < similarities.size(); ++i) {
    if (similarities[i] < cfg.tau) candidates.push_back(i);
  }
  const std::size_t cap = cfg.max_scenes - 1;
  if (candidates.size() > cap) {
    std::stable_sort(candidates.begin(), candidates.end(), [&](std::size_t a, std::size_t b) {
      return similarities[a] < similarities[b];
    });
    candidates.resize(cap);
    std::sort(candidates.begin(), candidates.end());
  }
  return candidates;
}

ScenePartition segment_scenes(const VideoTimeline& tl, const SegmenterConfig& cfg) {
  return segment_scenes(tl, Span{0, tl.frame_count()}, cfg);
}

ScenePartition segment_scenes(const VideoTimeline& tl, Span range, const SegmenterConfig& cfg) {
  validate(cfg);
  if (range.begin >= range.end || range.end > tl.frame_count()) {
    throw ArgumentError("segment range [" + std::to_string(range.begin) + "," +
                        std::to_string(range.end) + ") outside the timeline");
  }
  const auto sims = (range.begin == 0 && range.end == tl.frame_count())
                        ? frame_similarities(tl, cfg.descriptor)
                        : frame_similarities(tl.slice(range.begin, range.end), cfg.descriptor);
  ScenePartition p;
  p.range = range;
  for (auto i : select_cut_indices(sims, cfg)) {
    p.cuts.push_back(range.begin + i + 1);
    p.cut_similarities.push_back(sims[i]);
  }
  return p;
}

}  // namespace tdc

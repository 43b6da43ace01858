#include <cmath>
#include <random>

#include "tdc/timeline.hpp"

namespace tdc {

namespace {

class Gaussian {
 public:
  explicit Gaussian(std::uint64_t seed) : engine_(seed) {}

  MatF matrix(std::size_t rows, std::size_t cols, double scale) {
    MatF m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = static_cast<float>(scale * dist_(engine_));
    return m;
  }

  Vec vector(std::size_t n, double scale) {
    Vec v(static_cast<Eigen::Index>(n));
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = scale * dist_(engine_);
    return v;
  }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> dist_{0.0, 1.0};
};

void validate(const SynthSpec& spec) {
  if (spec.frames == 0) throw ArgumentError("synth: frames must be >= 1");
  std::size_t prev = 0;
  for (auto b : spec.boundaries) {
    if (b <= prev || b >= spec.frames) {
      throw ArgumentError("synth: boundary " + std::to_string(b) +
                          " must be strictly increasing and inside (0," + std::to_string(spec.frames) + ")");
    }
    prev = b;
  }
  if (!(spec.noise >= 0.0) || !std::isfinite(spec.noise)) throw ArgumentError("synth: noise must be >= 0");
  if (spec.dims.descriptor_dim == 0) throw ArgumentError("synth: descriptor dim must be >= 1");
  if (!spec.centers.empty()) {
    if (spec.centers.size() != spec.boundaries.size() + 1) {
      throw ArgumentError("synth: need one center per scene (" + std::to_string(spec.boundaries.size() + 1) +
                          "), got " + std::to_string(spec.centers.size()));
    }
    for (const auto& c : spec.centers) {
      if (static_cast<std::size_t>(c.size()) != spec.dims.descriptor_dim) {
        throw ShapeError("synth: center dim " + std::to_string(c.size()) + " != descriptor dim " +
                         std::to_string(spec.dims.descriptor_dim));
      }
    }
  }
}

}  // namespace

VideoTimeline synth_generate(const SynthSpec& spec) {
  validate(spec);
  const auto& d = spec.dims;
  Gaussian rng(spec.seed);

  std::vector<std::size_t> starts{0};
  starts.insert(starts.end(), spec.boundaries.begin(), spec.boundaries.end());
  starts.push_back(spec.frames);
  const std::size_t scenes = starts.size() - 1;

  // Consecutive generated centers are orthogonal unit vectors, so a planted cut
  // drops the descriptor similarity to about zero.
  std::vector<Vec> centers = spec.centers;
  if (centers.empty()) {
    for (std::size_t s = 0; s < scenes; ++s) {
      Vec c = rng.vector(d.descriptor_dim, 1.0);
      if (s > 0 && d.descriptor_dim > 1) c -= c.dot(centers.back()) * centers.back();
      c.normalize();
      centers.push_back(std::move(c));
    }
  }

  struct SceneContent {
    MatF visual_base, visual_drift, audio_base, audio_drift;
  };
  std::vector<SceneContent> content;
  for (std::size_t s = 0; s < scenes; ++s) {
    content.push_back({rng.matrix(d.visual_tokens, d.visual_dim, 1.0),
                       rng.matrix(d.visual_tokens, d.visual_dim, 0.5),
                       rng.matrix(d.audio_tokens, d.audio_dim, 1.0),
                       rng.matrix(d.audio_tokens, d.audio_dim, 0.5)});
  }

  std::vector<MatF> visual, audio;
  std::vector<VecF> descriptors;
  const double desc_noise = spec.noise / std::sqrt(static_cast<double>(d.descriptor_dim));
  for (std::size_t s = 0; s < scenes; ++s) {
    const std::size_t len = starts[s + 1] - starts[s];
    for (std::size_t i = 0; i < len; ++i) {
      const float u = len > 1 ? static_cast<float>(i) / static_cast<float>(len - 1) : 0.0f;
      const auto& sc = content[s];
      visual.push_back(sc.visual_base + u * sc.visual_drift +
                       rng.matrix(d.visual_tokens, d.visual_dim, spec.noise));
      audio.push_back(sc.audio_base + u * sc.audio_drift +
                      rng.matrix(d.audio_tokens, d.audio_dim, spec.noise));
      descriptors.push_back((centers[s] + rng.vector(d.descriptor_dim, desc_noise)).cast<float>());
    }
  }
  return VideoTimeline(std::move(visual), std::move(audio), std::move(descriptors));
}

}  // namespace tdc

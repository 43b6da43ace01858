#pragma once

// Independent reference computations used by the unit and acceptance suites.
// None of these call the code path they check.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "tdc/compressor.hpp"
#include "tdc/qformer.hpp"
#include "tdc/segmenter.hpp"
#include "tdc/timeline.hpp"

namespace tdc::oracle {

/// Cut positions (frame indices starting a scene) by rank counting: a candidate
/// survives when fewer than cap other candidates beat it on (similarity, index).
inline std::vector<std::size_t> brute_force_cuts(const std::vector<double>& sims, std::size_t max_scenes,
                                                 double tau) {
  std::vector<std::size_t> cand;
  for (std::size_t i = 0; i < sims.size(); ++i)
    if (sims[i] < tau) cand.push_back(i);
  std::vector<std::size_t> cuts;
  for (auto i : cand) {
    std::size_t better = 0;
    for (auto j : cand)
      if (sims[j] < sims[i] || (sims[j] == sims[i] && j < i)) ++better;
    if (better < max_scenes - 1) cuts.push_back(i + 1);
  }
  return cuts;
}

/// Plain dot-product cosine on doubles.
inline std::vector<double> naive_similarities(const VideoTimeline& tl) {
  std::vector<double> out;
  for (std::size_t t = 0; t + 1 < tl.frame_count(); ++t) {
    double dot = 0, na = 0, nb = 0;
    for (Eigen::Index i = 0; i < tl.descriptor(t).size(); ++i) {
      const double a = tl.descriptor(t)(i), b = tl.descriptor(t + 1)(i);
      dot += a * b;
      na += a * a;
      nb += b * b;
    }
    out.push_back(dot / std::sqrt(na * nb));
  }
  return out;
}

struct StreamTally {
  std::map<std::uint32_t, std::size_t> per_window;
  std::size_t static_visual = 0, static_audio = 0, sep = 0, dynamic = 0;
  bool order_ok = true;  // static-visual* static-audio* sep dynamic* per window
  std::size_t total() const { return static_visual + static_audio + sep + dynamic; }
};

/// Walks a stream token by token, tallying provenance and checking the per-window order.
inline StreamTally tally(const TdcStream& s) {
  StreamTally t;
  int phase = -1;
  std::int64_t window = -1;
  for (const auto& tag : s.tags) {
    if (static_cast<std::int64_t>(tag.window) != window) {
      if (window >= 0 && phase < 2) t.order_ok = false;
      if (static_cast<std::int64_t>(tag.window) != window + 1) t.order_ok = false;
      window = tag.window;
      phase = 0;
    }
    const int p = static_cast<int>(tag.provenance);
    if (p < phase || (p == 2 && phase == 2) || (phase == 3 && p != 3)) t.order_ok = false;
    if (phase < 2 && p == 3) t.order_ok = false;  // dynamic before sep
    phase = p;
    ++t.per_window[tag.window];
    switch (tag.provenance) {
      case Provenance::kStaticVisual: ++t.static_visual; break;
      case Provenance::kStaticAudio: ++t.static_audio; break;
      case Provenance::kSep: ++t.sep; break;
      case Provenance::kDynamic: ++t.dynamic; break;
    }
  }
  if (window >= 0 && phase < 2) t.order_ok = false;
  return t;
}

struct FdResult {
  double max_rel_error = 0.0;
  std::string worst;
};

/// Central differences of <upstream, compress_frame_tokens> over every parameter
/// entry, compared tensor by tensor against `analytic`, relative to each tensor's
/// largest gradient magnitude.
inline FdResult finite_difference_check(QFormerParams params, const QFormerConfig& cfg, const FrameInputs& in,
                                        const Mat& upstream, const GradientBundle& analytic,
                                        double step = 1e-5) {
  std::vector<Mat*> theta;
  std::vector<std::string> names;
  params.for_each_tensor([&](const std::string& n, Mat& m) {
    theta.push_back(&m);
    names.push_back(n);
  });
  std::vector<const Mat*> grads;
  analytic.for_each_tensor([&](const std::string&, const Mat& m) { grads.push_back(&m); });

  auto loss = [&] { return (upstream.array() * compress_frame_tokens(params, cfg, in).array()).sum(); };
  FdResult r;
  for (std::size_t t = 0; t < theta.size(); ++t) {
    Mat& m = *theta[t];
    double max_diff = 0.0, scale = 0.0;
    for (Eigen::Index i = 0; i < m.size(); ++i) {
      const double saved = m.data()[i];
      m.data()[i] = saved + step;
      const double up = loss();
      m.data()[i] = saved - step;
      const double down = loss();
      m.data()[i] = saved;
      const double numeric = (up - down) / (2 * step);
      const double a = grads[t]->data()[i];
      max_diff = std::max(max_diff, std::abs(a - numeric));
      scale = std::max({scale, std::abs(a), std::abs(numeric)});
    }
    const double rel = scale > 0 ? max_diff / scale : 0.0;
    if (rel > r.max_rel_error || r.worst.empty()) {
      r.max_rel_error = std::max(r.max_rel_error, rel);
      r.worst = names[t];
    }
  }
  return r;
}

inline Mat random_mat(std::mt19937_64& g, Eigen::Index r, Eigen::Index c, double scale = 1.0) {
  std::normal_distribution<double> n(0.0, scale);
  Mat m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = n(g);
  return m;
}

/// Random timeline with explicit descriptors; `levels` > 0 quantizes descriptor
/// entries so exact similarity ties occur.
inline VideoTimeline random_timeline(std::mt19937_64& g, std::size_t frames, std::size_t desc_dim = 6,
                                     int levels = 0) {
  std::vector<MatF> vis, aud;
  std::vector<VecF> desc;
  std::uniform_int_distribution<int> q(1, std::max(levels, 1));
  for (std::size_t t = 0; t < frames; ++t) {
    vis.push_back(random_mat(g, 3, 4).cast<float>());
    aud.push_back(random_mat(g, 2, 4).cast<float>());
    VecF d(static_cast<Eigen::Index>(desc_dim));
    if (levels > 0) {
      for (Eigen::Index i = 0; i < d.size(); ++i) d(i) = static_cast<float>(q(g));
    } else {
      d = random_mat(g, static_cast<Eigen::Index>(desc_dim), 1).cast<float>();
      d(0) += 2.5f;  // keep the norm away from zero
    }
    desc.push_back(d);
  }
  return VideoTimeline(std::move(vis), std::move(aud), std::move(desc));
}

}  // namespace tdc::oracle

#include "tdc/compressor.hpp"

#include <thread>

namespace tdc {

const char* to_string(Provenance p) {
  switch (p) {
    case Provenance::kStaticVisual:
      return "static-visual";
    case Provenance::kStaticAudio:
      return "static-audio";
    case Provenance::kSep:
      return "sep";
    case Provenance::kDynamic:
      return "dynamic";
  }
  return "?";
}

std::vector<Window> WindowPlan::windows_of_scene(std::size_t scene) const {
  std::vector<Window> out;
  for (const auto& w : windows)
    if (w.scene == scene) out.push_back(w);
  return out;
}

std::size_t WindowPlan::frame_count() const {
  std::size_t n = 0;
  for (const auto& w : windows) n += w.frames.size();
  return n;
}

WindowPlan make_windows(const ScenePartition& partition, std::size_t window_length) {
  if (window_length == 0) throw ArgumentError("window length N must be >= 1");
  WindowPlan plan;
  plan.window_length = window_length;
  const auto scenes = partition.scenes();
  plan.scene_count = scenes.size();
  for (std::size_t s = 0; s < scenes.size(); ++s) {
    for (std::size_t b = scenes[s].begin; b < scenes[s].end; b += window_length) {
      plan.windows.push_back({s, {b, std::min(b + window_length, scenes[s].end)}});
    }
  }
  return plan;
}

Mat build_queries(const QFormerParams& p, const QFormerConfig& cfg, const MatF& static_visual) {
  return queries_from_static(p, cfg, static_visual.cast<double>());
}

Mat compress_frame(const QFormerParams& p, const QFormerConfig& cfg, const Mat& queries,
                   const MatF& visual, const MatF& audio, const InstructionTokens& text) {
  return forward(p, cfg, queries, visual.cast<double>(), audio.cast<double>(), text);
}

namespace {

TdcStream assemble_window(const VideoTimeline& tl, const Window& w, std::uint32_t window_index,
                          const QFormerParams& p, const TdcConfig& cfg, const InstructionTokens& text) {
  const auto& q = cfg.qformer;
  const std::size_t s = w.static_frame();
  const MatF& sv = tl.visual(s);
  const MatF& sa = tl.audio(s);
  const Eigen::Index n = sv.rows() + sa.rows() + 1 +
                         static_cast<Eigen::Index>(w.dynamic_count() * q.queries);
  TdcStream out;
  out.tokens.resize(n, static_cast<Eigen::Index>(q.model_dim));
  out.tags.reserve(static_cast<std::size_t>(n));

  Eigen::Index row = 0;
  auto append = [&](const Mat& block, Provenance prov, std::size_t frame) {
    out.tokens.middleRows(row, block.rows()) = block;
    row += block.rows();
    for (Eigen::Index i = 0; i < block.rows(); ++i) {
      out.tags.push_back({prov, static_cast<std::uint32_t>(frame), window_index});
    }
  };

  append(matmul(sv.cast<double>(), p.proj_visual), Provenance::kStaticVisual, s);
  if (sa.rows() > 0) append(matmul(sa.cast<double>(), p.proj_audio), Provenance::kStaticAudio, s);
  append(p.sep, Provenance::kSep, s);
  if (w.dynamic_count() > 0) {
    const Mat queries = build_queries(p, q, sv);
    for (std::size_t f = w.frames.begin + 1; f < w.frames.end; ++f) {
      append(compress_frame(p, q, queries, tl.visual(f), tl.audio(f), text), Provenance::kDynamic, f);
    }
  }
  return out;
}

}  // namespace

TdcStream assemble_tdc(const VideoTimeline& tl, const WindowPlan& plan, const QFormerParams& p,
                       const TdcConfig& cfg, const InstructionTokens& text) {
  cfg.qformer.validate();
  check_shapes(p, cfg.qformer);
  const auto dims = tl.dims();
  if (dims.visual_dim != cfg.qformer.visual_dim || (dims.audio_tokens > 0 && dims.audio_dim != cfg.qformer.audio_dim)) {
    throw ShapeError("timeline token dims (" + std::to_string(dims.visual_dim) + ", " +
                     std::to_string(dims.audio_dim) + ") do not match compressor input dims (" +
                     std::to_string(cfg.qformer.visual_dim) + ", " + std::to_string(cfg.qformer.audio_dim) + ")");
  }
  for (const auto& w : plan.windows) {
    if (w.frames.end > tl.frame_count() || w.frames.size() == 0) {
      throw ArgumentError("window plan does not fit a timeline of " + std::to_string(tl.frame_count()) + " frames");
    }
  }

  std::vector<TdcStream> blocks(plan.windows.size());
  auto work = [&](std::size_t first, std::size_t stride) {
    for (std::size_t i = first; i < blocks.size(); i += stride) {
      blocks[i] = assemble_window(tl, plan.windows[i], static_cast<std::uint32_t>(i), p, cfg, text);
    }
  };
  const std::size_t threads = std::max<std::size_t>(1, std::min(cfg.threads, blocks.size()));
  if (threads == 1) {
    work(0, 1);
  } else {
    std::vector<std::exception_ptr> errors(threads);
    {
      std::vector<std::jthread> pool;
      for (std::size_t t = 0; t < threads; ++t) {
        pool.emplace_back([&, t] {
          try {
            work(t, threads);
          } catch (...) {
            errors[t] = std::current_exception();
          }
        });
      }
    }
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  }

  TdcStream out;
  Eigen::Index total = 0;
  for (const auto& b : blocks) total += b.tokens.rows();
  out.tokens.resize(total, static_cast<Eigen::Index>(cfg.qformer.model_dim));
  out.tags.reserve(static_cast<std::size_t>(total));
  Eigen::Index row = 0;
  for (const auto& b : blocks) {
    out.tokens.middleRows(row, b.tokens.rows()) = b.tokens;
    row += b.tokens.rows();
    out.tags.insert(out.tags.end(), b.tags.begin(), b.tags.end());
  }
  return out;
}

TdcStream encode_range(const VideoTimeline& tl, Span range, const QFormerParams& p, const TdcConfig& cfg,
                       const InstructionTokens& text) {
  const auto partition = segment_scenes(tl, range, cfg.segmenter);
  return assemble_tdc(tl, make_windows(partition, cfg.window_length), p, cfg, text);
}

BudgetReport token_budget(const TimelineDims& dims, const WindowPlan& plan, std::size_t queries) {
  BudgetReport r;
  for (const auto& w : plan.windows) {
    const std::size_t n = dims.visual_tokens + dims.audio_tokens + 1 + w.dynamic_count() * queries;
    r.per_window.push_back(n);
    r.total += n;
  }
  r.naive = plan.frame_count() * (dims.visual_tokens + dims.audio_tokens);
  r.ratio = r.total > 0 ? static_cast<double>(r.naive) / static_cast<double>(r.total) : 0.0;
  return r;
}

BudgetReport token_budget(const VideoTimeline& tl, const WindowPlan& plan, const QFormerConfig& cfg) {
  return token_budget(tl.dims(), plan, cfg.queries);
}

std::vector<TrainingExample> training_batch(const VideoTimeline& tl, const WindowPlan& plan,
                                            const InstructionTokens& text) {
  std::vector<TrainingExample> batch;
  for (const auto& w : plan.windows) {
    const Mat static_visual = tl.visual(w.static_frame()).cast<double>();
    for (std::size_t f = w.frames.begin + 1; f < w.frames.end; ++f) {
      TrainingExample ex;
      ex.inputs = {static_visual, tl.visual(f).cast<double>(), tl.audio(f).cast<double>(), text};
      ex.target = ex.inputs.visual.colwise().mean();
      batch.push_back(std::move(ex));
    }
  }
  return batch;
}

}  // namespace tdc

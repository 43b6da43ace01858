// Acceptance suite: one PASS/FAIL line per criterion, each timed against its limit.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "oracles.hpp"
#include "tdc/binary_io.hpp"
#include "tdc/compressor.hpp"
#include "tdc/lvcot.hpp"
#include "tdc/qformer_ops.hpp"

namespace {

using namespace tdc;

struct Outcome {
  bool pass = true;
  std::string detail;

  void check(bool ok, const std::string& what) {
    if (!ok && pass) {
      pass = false;
      detail = what;
    }
  }
};

ScenePartition single_scene(std::size_t frames) { return ScenePartition{{0, frames}, {}, {}}; }

QFormerConfig tiny_qformer(std::size_t k = 4) {
  QFormerConfig q;
  q.model_dim = 8;
  q.heads = 2;
  q.layers = 1;
  q.ffn_mult = 2;
  q.queries = k;
  q.vocab = 64;
  q.visual_dim = 4;
  q.audio_dim = 4;
  return q;
}

VideoTimeline tiny_timeline(std::uint64_t seed, std::size_t frames, std::vector<std::size_t> boundaries,
                            std::size_t mv = 8, std::size_t ma = 3) {
  SynthSpec s;
  s.seed = seed;
  s.frames = frames;
  s.boundaries = std::move(boundaries);
  s.dims = {mv, ma, 4, 4, 8};
  return synth_generate(s);
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

// 1
Outcome constants() {
  Outcome o;
  const TimelineDims dims;
  const TdcConfig cfg;
  o.check(dims.visual_tokens == 144, "visual tokens per frame != 144");
  o.check(dims.audio_tokens == 50, "audio tokens per frame != 50");
  o.check(cfg.qformer.queries == 16, "default K != 16");
  o.check(cfg.segmenter.max_scenes == 24, "default scene cap != 24");
  o.check(LvcotConfig{}.segments == 3, "default LVCoT segments != 3");
  const auto one = token_budget(dims, make_windows(single_scene(1), cfg.window_length), cfg.qformer.queries);
  o.check(one.total == 144 + 50 + 1, "static frame cost != 195");
  const auto two = token_budget(dims, make_windows(single_scene(2), cfg.window_length), cfg.qformer.queries);
  o.check(two.total - one.total == 16, "dynamic frame cost != 16");
  o.check(two.naive == 2 * (144 + 50), "naive per-frame cost != 194");
  if (o.pass) o.detail = "M_v=144 M_a=50 K=16 S_max=24 M=3";
  return o;
}

// 2
Outcome budget_oracle() {
  Outcome o;
  {
    SynthSpec s;
    s.seed = 2;
    const auto tl = synth_generate(s);
    TdcConfig cfg;
    cfg.qformer.layers = 1;  // structure only; depth does not change counts
    const auto plan = make_windows(single_scene(60), 8);
    const auto stream = assemble_tdc(tl, plan, init_params(cfg.qformer), cfg, {});
    const auto b = token_budget(tl, plan, cfg.qformer);
    o.check(stream.size() == 2392, "60-frame stream has " + std::to_string(stream.size()) + " tokens, want 2392");
    o.check(b.total == 2392 && b.naive == 11640, "budget total/naive != 2392/11640");
    o.check(std::abs(b.ratio - 4.87) <= 0.01, "ratio " + fmt(b.ratio) + " not 4.87 +- 0.01");
  }
  std::mt19937_64 g(2024);
  std::uniform_int_distribution<std::size_t> frames(1, 40), win(1, 12), mv(2, 10), ma(0, 5), k(1, 6), nb(0, 4);
  for (int trial = 0; trial < 200 && o.pass; ++trial) {
    const std::size_t t = frames(g);
    std::set<std::size_t> cuts;
    const std::size_t want = std::min(nb(g), t - 1);
    std::uniform_int_distribution<std::size_t> pos(1, std::max<std::size_t>(t - 1, 1));
    while (cuts.size() < want) cuts.insert(pos(g));
    const auto tl = tiny_timeline(static_cast<std::uint64_t>(trial), t, {cuts.begin(), cuts.end()}, mv(g), ma(g));
    TdcConfig cfg;
    cfg.window_length = win(g);
    cfg.qformer = tiny_qformer(std::min(k(g), tl.dims().visual_tokens));
    cfg.segmenter.max_scenes = 1 + trial % 6;
    const auto plan = make_windows(segment_scenes(tl, cfg.segmenter), cfg.window_length);
    const auto stream = assemble_tdc(tl, plan, init_params(cfg.qformer), cfg, {});
    const auto walk = oracle::tally(stream);
    const auto b = token_budget(tl, plan, cfg.qformer);
    std::size_t naive = 0;
    for (std::size_t f = 0; f < t; ++f) naive += tl.visual(f).rows() + tl.audio(f).rows();
    o.check(walk.total() == b.total && walk.order_ok && b.naive == naive,
            "trial " + std::to_string(trial) + ": walk " + std::to_string(walk.total()) + " vs budget " +
                std::to_string(b.total));
  }
  if (o.pass) o.detail = "2392 / 11640 / ratio 4.866; 200 random configs agree";
  return o;
}

// 3
Outcome segmentation_oracle() {
  Outcome o;
  std::mt19937_64 g(77);
  std::uniform_int_distribution<std::size_t> frames(1, 64), cap(1, 12);
  std::uniform_real_distribution<double> tau(-0.99, 1.0);
  std::size_t saturated = 0, ties = 0;
  for (int trial = 0; trial < 500 && o.pass; ++trial) {
    const int levels = trial % 3 == 0 ? 2 : 0;
    const auto tl = oracle::random_timeline(g, frames(g), 4, levels);
    SegmenterConfig cfg;
    cfg.max_scenes = cap(g);
    cfg.tau = trial % 10 == 0 ? 1.0 : tau(g);
    const auto sims = frame_similarities(tl);
    const auto naive = oracle::naive_similarities(tl);
    for (std::size_t i = 0; i < sims.size(); ++i) {
      o.check(std::abs(sims[i] - naive[i]) <= 1e-12, "similarity mismatch in trial " + std::to_string(trial));
    }
    const auto got = segment_scenes(tl, cfg);
    const auto want = oracle::brute_force_cuts(sims, cfg.max_scenes, cfg.tau);
    o.check(got.cuts == want, "cut mismatch in trial " + std::to_string(trial));
    std::size_t candidates = 0;
    for (double s : sims) candidates += s < cfg.tau;
    if (candidates >= cfg.max_scenes) {
      ++saturated;
      o.check(got.scene_count() == cfg.max_scenes, "saturated cap not reached in trial " + std::to_string(trial));
    }
    if (levels > 0 && std::set<double>(sims.begin(), sims.end()).size() < sims.size()) ++ties;
  }
  // All frames identical: one scene whatever the cap and threshold.
  std::vector<MatF> v(40, MatF::Ones(2, 3)), a(40, MatF::Ones(1, 3));
  std::vector<VecF> d(40, VecF::Constant(5, 0.3f));
  const VideoTimeline same(v, a, d);
  for (std::size_t c : {1u, 24u, 48u}) {
    o.check(segment_scenes(same, SegmenterConfig{c, 0.85, DescriptorMode::kStored}).scene_count() == 1,
            "identical frames split");
  }
  o.check(saturated > 50 && ties > 20, "too few saturated or tied cases exercised");
  if (o.pass) {
    o.detail = "500 timelines, " + std::to_string(saturated) + " cap-saturated, " + std::to_string(ties) +
               " with ties; identical frames -> 1 scene";
  }
  return o;
}

// 4
Outcome planted_recovery() {
  Outcome o;
  for (std::uint64_t seed = 0; seed < 50 && o.pass; ++seed) {
    std::mt19937_64 g(seed * 7919 + 1);
    std::uniform_int_distribution<std::size_t> count(1, 5), gap(3, 15);
    SynthSpec s;
    s.seed = seed;
    std::size_t at = 0;
    const std::size_t n = count(g);
    for (std::size_t i = 0; i < n; ++i) {
      at += gap(g);
      if (at + 3 > s.frames) break;
      s.boundaries.push_back(at);
    }
    const auto got = segment_scenes(synth_generate(s));
    o.check(got.cuts == s.boundaries, "seed " + std::to_string(seed) + " missed a planted boundary");
  }
  if (o.pass) o.detail = "50 seeds, 60 frames, noise 0.1: every planted boundary recovered exactly";
  return o;
}

// 5
Outcome gradient_check() {
  Outcome o;
  double worst = 0.0;
  std::string worst_name;
  for (QueryType qt : {QueryType::kAvgPool, QueryType::kLearned}) {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      QFormerConfig cfg = small_gradcheck_config();
      cfg.query_type = qt;
      const auto lib = grad_check(cfg, seed);
      o.check(lib.passed, "library check failed at seed " + std::to_string(seed));

      // Independent draw checked by the test-side finite-difference oracle.
      cfg.seed = seed + 1000;
      QFormerParams p = init_params(cfg);
      std::mt19937_64 g(seed);
      p.for_each_tensor([&](const std::string& name, Mat& m) {
        if (name.ends_with("gamma") || name.ends_with("beta") || name.ends_with("b1") || name.ends_with("b2")) {
          m += oracle::random_mat(g, m.rows(), m.cols(), 0.1);
        }
      });
      FrameInputs in;
      in.static_visual = oracle::random_mat(g, 8, static_cast<Eigen::Index>(cfg.visual_dim));
      in.visual = oracle::random_mat(g, 10, static_cast<Eigen::Index>(cfg.visual_dim));
      in.audio = oracle::random_mat(g, 3, static_cast<Eigen::Index>(cfg.audio_dim));
      in.text.ids = {1, 5, static_cast<std::uint32_t>(seed % cfg.vocab)};
      const Mat up = oracle::random_mat(g, static_cast<Eigen::Index>(cfg.queries),
                                        static_cast<Eigen::Index>(cfg.model_dim));
      const auto fd = oracle::finite_difference_check(p, cfg, in, up, compress_frame_backward(p, cfg, in, up));
      for (const auto& [err, name] : {std::pair{lib.max_rel_error, lib.worst_tensor},
                                      std::pair{fd.max_rel_error, fd.worst}}) {
        if (err > worst) {
          worst = err;
          worst_name = name;
        }
      }
      o.check(fd.max_rel_error <= 1e-5, "oracle rel error " + fmt(fd.max_rel_error) + " at " + fd.worst);
    }
  }
  o.detail = (o.pass ? "" : o.detail + "; ") + "max rel error " + fmt(worst) + " (" + worst_name +
             "), 10 seeds x both query types";
  return o;
}

// 6
Outcome attention_properties() {
  Outcome o;
  std::mt19937_64 g(6);
  std::uniform_int_distribution<int> nq(1, 8), nkv(1, 20), nt(0, 4);
  double perm_err = 0, sum_err = 0, hull_err = 0;
  for (int c = 0; c < 100; ++c) {
    QFormerConfig cfg = tiny_qformer(static_cast<std::size_t>(nq(g)));
    cfg.seed = static_cast<std::uint64_t>(c);
    cfg.query_type = QueryType::kLearned;
    const auto p = init_params(cfg);
    InstructionTokens text;
    for (int i = nt(g); i > 0; --i) text.ids.push_back(static_cast<std::uint32_t>(g() % cfg.vocab));

    // Joint permutation of key/value tokens leaves the output unchanged.
    const Mat kv = oracle::random_mat(g, nkv(g), static_cast<Eigen::Index>(cfg.model_dim));
    std::vector<Eigen::Index> order(static_cast<std::size_t>(kv.rows()));
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), g);
    Mat shuffled(kv.rows(), kv.cols());
    for (Eigen::Index r = 0; r < kv.rows(); ++r) shuffled.row(r) = kv.row(order[static_cast<std::size_t>(r)]);
    const Mat a = forward_projected(p, cfg, p.learned_queries, kv, text);
    const Mat b = forward_projected(p, cfg, p.learned_queries, shuffled, text);
    perm_err = std::max(perm_err, (a - b).cwiseAbs().maxCoeff());

    // A single attention block: probabilities and the per-head convex hull.
    const Mat xq = oracle::random_mat(g, static_cast<Eigen::Index>(cfg.queries), 8, 3.0);
    ops::AttentionCache cache;
    ops::attention_forward(p.layers[0].cross_attn, xq, kv, cfg.heads, &cache);
    const auto hd = static_cast<Eigen::Index>(cfg.head_dim());
    for (std::size_t h = 0; h < cfg.heads; ++h) {
      const Mat& pr = cache.probs[h];
      sum_err = std::max(sum_err, (pr.rowwise().sum().array() - 1.0).abs().maxCoeff());
      if (pr.minCoeff() < 0) sum_err = std::max(sum_err, -pr.minCoeff());
      const Mat vh = cache.v.middleCols(static_cast<Eigen::Index>(h) * hd, hd);
      const Mat out = cache.heads.middleCols(static_cast<Eigen::Index>(h) * hd, hd);
      const RowVec lo = vh.colwise().minCoeff(), hi = vh.colwise().maxCoeff();
      for (Eigen::Index r = 0; r < out.rows(); ++r) {
        hull_err = std::max(hull_err, (lo - out.row(r)).maxCoeff());
        hull_err = std::max(hull_err, (out.row(r) - hi).maxCoeff());
        hull_err = std::max(hull_err, (out.row(r) - pr.row(r) * vh).cwiseAbs().maxCoeff());
      }
    }
  }
  o.check(perm_err <= 1e-9, "permutation error " + fmt(perm_err));
  o.check(sum_err <= 1e-9, "softmax row-sum error " + fmt(sum_err));
  o.check(hull_err <= 1e-9, "convex hull violation " + fmt(hull_err));
  o.detail = (o.pass ? "" : o.detail + "; ") + "perm " + fmt(perm_err) + ", row sums " + fmt(sum_err) +
             ", hull " + fmt(hull_err) + " over 100 cases";
  return o;
}

// 7
Outcome toy_training() {
  Outcome o;
  SynthSpec s;
  s.seed = 7;
  s.frames = 8;
  const auto tl = synth_generate(s);
  QFormerConfig cfg;
  cfg.seed = 7;
  const auto batch = training_batch(tl, make_windows(single_scene(8), 8), tokenize_text("describe the scene"));
  QFormerParams p = init_params(cfg);
  const double initial = reconstruction_loss(p, cfg, batch);
  double last = initial;
  for (int step = 0; step < 200; ++step) {
    auto r = train_step(p, cfg, batch, 0.05);
    p = std::move(r.params);
  }
  last = reconstruction_loss(p, cfg, batch);
  o.check(last <= 0.5 * initial, "final loss " + fmt(last) + " > half of initial " + fmt(initial));
  o.detail = (o.pass ? "" : o.detail + "; ") + "loss " + fmt(initial) + " -> " + fmt(last) + " (" +
             fmt(last / initial) + "x) after 200 steps, " + std::to_string(batch.size()) + " frames";
  return o;
}

// 8
Outcome lvcot_trace() {
  Outcome o;
  SynthSpec s;
  s.seed = 8;
  s.frames = 90;
  s.boundaries = {25, 70};
  s.dims = {6, 2, 4, 4, 8};
  const auto tl = synth_generate(s);
  TdcConfig tdc;
  tdc.qformer = tiny_qformer(3);
  MockAnswerer mock({"A", "B", "C", "D"});
  const LvcotConfig cfg;
  const auto trace = run_lvcot(tl, "What happens?", mock, cfg, init_params(tdc.qformer), tdc);
  o.check(cfg.segments == 3 && trace.segments.size() == 3, "expected 3 segments");
  std::size_t next = 0;
  for (const auto& seg : trace.segments) {
    o.check(seg.span.begin == next && seg.span.size() == 30, "spans do not partition [0,90) evenly");
    next = seg.span.end;
    for (auto f : seg.frames) o.check(f >= seg.span.begin && f < seg.span.end, "segment stream leaks frames");
  }
  o.check(next == 90, "spans do not cover the video");
  o.check(mock.calls() == 4 && trace.answerer_calls == 4, "expected M+1 = 4 answerer calls");
  for (const char* line : {"[0s-30s]: A", "[30s-60s]: B", "[60s-90s]: C"}) {
    o.check(trace.final_prompt.find(line) != std::string::npos, std::string("final prompt lacks ") + line);
  }
  o.check(trace.final_answer == "D", "final answer is not the last scripted answer");
  MockAnswerer short_script({"A", "B"});
  bool raised = false;
  try {
    run_lvcot(tl, "What happens?", short_script, cfg, init_params(tdc.qformer), tdc);
  } catch (const OrchestrationError&) {
    raised = true;
  }
  o.check(raised, "exhausted script did not raise");
  if (o.pass) o.detail = "spans 0-30-60-90, 4 calls, tagged answers A/B/C in final prompt, answer D";
  return o;
}

// 9
Outcome ablation_knobs() {
  Outcome o;
  const auto tl = tiny_timeline(9, 30, {11, 20});
  TdcConfig cfg;
  cfg.window_length = 4;
  cfg.qformer = tiny_qformer(4);
  const auto plan = make_windows(segment_scenes(tl, cfg.segmenter), cfg.window_length);

  const auto avg = assemble_tdc(tl, plan, init_params(cfg.qformer), cfg, {});
  TdcConfig learned = cfg;
  learned.qformer.query_type = QueryType::kLearned;
  const auto lrn = assemble_tdc(tl, plan, init_params(learned.qformer), learned, {});
  o.check(avg.tags == lrn.tags, "query type changed the stream layout");
  o.check((avg.tokens - lrn.tokens).cwiseAbs().maxCoeff() > 1e-6, "query type did not change content");

  const TimelineDims dims;
  const auto big = synth_generate(SynthSpec{3, 60, {20, 40}, {}, 0.1, dims});
  const auto big_plan = make_windows(segment_scenes(big), 8);
  const auto b16 = token_budget(dims, big_plan, 16), b32 = token_budget(dims, big_plan, 32);
  for (std::size_t w = 0; w < big_plan.windows.size(); ++w) {
    o.check(b32.per_window[w] - b16.per_window[w] == big_plan.windows[w].dynamic_count() * 16,
            "K=32 vs 16 window " + std::to_string(w) + " differs by the wrong amount");
  }
  TdcConfig k8 = cfg;
  k8.qformer.queries = 8;
  const auto s8 = assemble_tdc(tl, plan, init_params(k8.qformer), k8, {});
  std::size_t dyn = 0;
  for (const auto& w : plan.windows) dyn += w.dynamic_count();
  o.check(s8.size() - avg.size() == dyn * 4, "stream length did not grow by (n_w - 1) * dK");

  const auto p = init_params(cfg.qformer);
  const auto text = tokenize_text("where is the dog", cfg.qformer.vocab);
  const auto with = assemble_tdc(tl, plan, p, cfg, text);
  const auto without = assemble_tdc(tl, plan, p, cfg, {});
  TdcConfig off = cfg;
  off.qformer.text_conditioning = false;
  const auto disabled = assemble_tdc(tl, plan, p, off, text);
  o.check(with.tags == without.tags && with.tags == disabled.tags, "text changed the token count");
  o.check((with.tokens - without.tokens).cwiseAbs().maxCoeff() > 1e-6, "text did not change content");
  o.check(disabled.tokens == without.tokens, "disabled conditioning still used the text");

  // Scene cap 1 / 24 / 48 on a fixture with 31 planted scenes.
  std::vector<std::size_t> planted;
  for (std::size_t b = 4; b < 124; b += 4) planted.push_back(b);
  const auto many = tiny_timeline(99, 124, planted);
  std::size_t counts[3];
  int i = 0;
  for (std::size_t cap : {1u, 24u, 48u}) {
    const auto part = segment_scenes(many, SegmenterConfig{cap, 0.85, DescriptorMode::kStored});
    counts[i++] = part.scene_count();
    for (auto c : part.cuts) {
      o.check(std::find(planted.begin(), planted.end(), c) != planted.end(), "cap kept a non-planted cut");
    }
  }
  o.check(counts[0] == 1 && counts[1] == 24 && counts[2] == 31,
          "scene counts " + std::to_string(counts[0]) + "/" + std::to_string(counts[1]) + "/" +
              std::to_string(counts[2]) + ", want 1/24/31");
  if (o.pass) o.detail = "query type, K, text and S_max (1/24/48 -> 1/24/31 scenes) behave as specified";
  return o;
}

// 10
Outcome format_round_trips() {
  Outcome o;
  std::mt19937_64 g(10);
  std::uniform_int_distribution<int> small(0, 6), frames(1, 12);
  for (int i = 0; i < 100 && o.pass; ++i) {
    std::vector<MatF> v, a;
    std::vector<VecF> d;
    const int t = frames(g), mv = 1 + small(g), ma = small(g), dv = 1 + small(g), da = 1 + small(g),
              dd = 1 + small(g);
    for (int f = 0; f < t; ++f) {
      v.push_back(oracle::random_mat(g, mv, dv).cast<float>());
      a.push_back(oracle::random_mat(g, ma, da).cast<float>());
      d.push_back(oracle::random_mat(g, dd, 1).cast<float>());
    }
    const VideoTimeline tl(v, a, d);
    const auto bytes = encode_tdcf(tl);
    const auto back = decode_tdcf(bytes);
    o.check(back == tl && encode_tdcf(back) == bytes, "TDCF payload " + std::to_string(i) + " not bitwise");

    QFormerConfig cfg = tiny_qformer(1 + static_cast<std::size_t>(small(g)) % 4);
    cfg.layers = 1 + static_cast<std::size_t>(i % 2);
    cfg.query_type = i % 3 ? QueryType::kAvgPool : QueryType::kLearned;
    cfg.text_conditioning = i % 4 != 0;
    QFormerParams p = init_params(cfg);
    p.for_each_tensor([&](const std::string&, Mat& m) {
      m = oracle::random_mat(g, m.rows(), m.cols()).cast<float>().cast<double>();
    });
    const auto pbytes = encode_tdcp(p, cfg);
    const auto ck = decode_tdcp(pbytes);
    o.check(encode_tdcp(ck.params, ck.config) == pbytes, "TDCP payload " + std::to_string(i) + " not bitwise");
    std::vector<const Mat*> want;
    p.for_each_tensor([&](const std::string&, const Mat& m) { want.push_back(&m); });
    std::size_t j = 0;
    ck.params.for_each_tensor([&](const std::string&, const Mat& m) {
      o.check(m == *want[j++], "TDCP tensor changed in payload " + std::to_string(i));
    });
  }

  auto expect_kind = [&](const std::vector<std::uint8_t>& b, ParseErrorKind kind, bool tdcf, const char* what) {
    try {
      if (tdcf) {
        decode_tdcf(b);
      } else {
        decode_tdcp(b);
      }
      o.check(false, std::string(what) + " decoded without error");
    } catch (const ParseError& e) {
      o.check(e.kind() == kind, std::string(what) + " raised " + to_string(e.kind()));
    }
  };
  const auto tl = tiny_timeline(1, 5, {});
  auto f = encode_tdcf(tl);
  auto bad = f;
  bad[1] = 'X';
  expect_kind(bad, ParseErrorKind::kBadMagic, true, "TDCF bad magic");
  bad = f;
  bad[4] = 2;
  expect_kind(bad, ParseErrorKind::kVersionMismatch, true, "TDCF version");
  for (std::size_t cut : {std::size_t{3}, std::size_t{10}, f.size() / 2, f.size() - 1}) {
    expect_kind({f.begin(), f.begin() + static_cast<std::ptrdiff_t>(cut)}, ParseErrorKind::kTruncated, true,
                "TDCF truncated");
  }
  const auto cfg = tiny_qformer();
  auto pb = encode_tdcp(init_params(cfg), cfg);
  bad = pb;
  bad[0] = 'Q';
  expect_kind(bad, ParseErrorKind::kBadMagic, false, "TDCP bad magic");
  expect_kind({pb.begin(), pb.end() - 5}, ParseErrorKind::kTruncated, false, "TDCP truncated");

  // The CLI maps both to exit code 2.
  const auto dir = std::filesystem::temp_directory_path() / "tdc_acceptance";
  std::filesystem::create_directories(dir);
  f[0] = 'Z';
  io::write_file(dir / "bad.tdcf", f);
  const std::string bad_path = (dir / "bad.tdcf").string();
  const char* argv[] = {"tdc", "segment", "--input", bad_path.c_str()};
  std::ostringstream out, err;
  o.check(cli::run(4, argv, out, err) == cli::kIo, "CLI did not exit 2 on a corrupt file");
  std::filesystem::remove_all(dir);

  if (o.pass) o.detail = "100 TDCF + 100 TDCP payloads bitwise; magic/version/truncation kinds; CLI exit 2";
  return o;
}

struct Criterion {
  int id;
  const char* name;
  double limit_s;
  std::function<Outcome()> run;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {1, "constants conformance", 1, constants},
      {2, "budget oracle", 5, budget_oracle},
      {3, "segmentation oracle", 10, segmentation_oracle},
      {4, "planted-boundary recovery", 10, planted_recovery},
      {5, "gradient check", 60, gradient_check},
      {6, "attention properties", 10, attention_properties},
      {7, "toy training", 60, toy_training},
      {8, "LVCoT trace", 1, lvcot_trace},
      {9, "ablation knobs", 10, ablation_knobs},
      {10, "format round trips", 5, format_round_trips},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (secs >= c.limit_s) {
      o.detail += "; exceeded time limit";
      o.pass = false;
    }
    failed += !o.pass;
    std::printf("%s %2d %-26s %7.2fs (limit %gs)  %s\n", o.pass ? "PASS" : "FAIL", c.id, c.name, secs, c.limit_s,
                o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}

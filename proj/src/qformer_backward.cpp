#include <cmath>
#include <random>

#include "tdc/qformer.hpp"
#include "tdc/qformer_ops.hpp"

namespace tdc {

namespace ops {

Mat layer_norm_backward(const Mat& dy, const Mat& gamma, const LayerNormCache& cache, Mat& dgamma,
                        Mat& dbeta) {
  dgamma.row(0) += (dy.array() * cache.normalized.array()).colwise().sum().matrix();
  dbeta.row(0) += dy.colwise().sum();
  Mat dxhat = dy.array().rowwise() * gamma.row(0).array();
  Mat dx(dy.rows(), dy.cols());
  const auto n = static_cast<double>(dy.cols());
  for (Eigen::Index r = 0; r < dy.rows(); ++r) {
    const double mean_d = dxhat.row(r).sum() / n;
    const double mean_dx = dxhat.row(r).dot(cache.normalized.row(r)) / n;
    dx.row(r) = cache.inv_std(r) *
                (dxhat.row(r).array() - mean_d - cache.normalized.row(r).array() * mean_dx).matrix();
  }
  return dx;
}

void attention_backward(const AttentionWeights& w, std::size_t heads, const AttentionCache& c,
                        const Mat& dout, AttentionWeights& gw, Mat& dxq, Mat& dxkv) {
  gw.wo += c.heads.transpose() * dout;
  const Mat dconcat = dout * w.wo.transpose();

  const auto dh = static_cast<Eigen::Index>(static_cast<std::size_t>(c.q.cols()) / heads);
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
  Mat dq(c.q.rows(), c.q.cols());
  Mat dk(c.k.rows(), c.k.cols());
  Mat dv(c.v.rows(), c.v.cols());
  for (std::size_t h = 0; h < heads; ++h) {
    const auto c0 = static_cast<Eigen::Index>(h) * dh;
    const Mat& pr = c.probs[h];
    const auto dhead = dconcat.middleCols(c0, dh);
    dv.middleCols(c0, dh) = pr.transpose() * dhead;
    const Mat dprobs = dhead * c.v.middleCols(c0, dh).transpose();
    // softmax: dS = P o (dP - rowsum(dP o P))
    const Vec row_dot = (dprobs.array() * pr.array()).rowwise().sum();
    const Mat dscores = (pr.array() * (dprobs.array().colwise() - row_dot.array())).matrix() * scale;
    dq.middleCols(c0, dh) = dscores * c.k.middleCols(c0, dh);
    dk.middleCols(c0, dh) = dscores.transpose() * c.q.middleCols(c0, dh);
  }
  gw.wq += c.xq.transpose() * dq;
  gw.wk += c.xkv.transpose() * dk;
  gw.wv += c.xkv.transpose() * dv;
  dxq = dq * w.wq.transpose();
  dxkv = dk * w.wk.transpose() + dv * w.wv.transpose();
}

BackwardResult backward_from_trace(const QFormerParams& p, const QFormerConfig& cfg, const ForwardTrace& tr,
                                   const Mat& visual, const Mat& audio, const InstructionTokens& text,
                                   const Mat& upstream) {
  if (upstream.rows() != tr.output.rows() || upstream.cols() != tr.output.cols()) {
    throw ShapeError("upstream gradient " + shape_str(upstream) + " vs output " + shape_str(tr.output));
  }
  const auto k = static_cast<Eigen::Index>(cfg.queries);
  const Eigen::Index n = tr.layers.empty() ? k : tr.layers[0].ln_self.normalized.rows();

  BackwardResult res{GradientBundle::zeros_like(p), Mat()};
  auto& g = res.grads;

  Mat dx = Mat::Zero(n, static_cast<Eigen::Index>(cfg.model_dim));
  dx.topRows(k) = layer_norm_backward(upstream, p.final_ln_gamma, tr.final_ln, g.final_ln_gamma,
                                           g.final_ln_beta);
  Mat dkv = Mat::Zero(tr.kv.rows(), tr.kv.cols());

  for (std::size_t li = cfg.layers; li-- > 0;) {
    const auto& w = p.layers[li];
    auto& gl = g.layers[li];
    const auto& c = tr.layers[li];

    // feed-forward residual
    gl.ffn_w2 += c.ffn_act.transpose() * dx;
    gl.ffn_b2.row(0) += dx.colwise().sum();
    Mat dpre = dx * w.ffn_w2.transpose();
    dpre.array() *= c.ffn_pre.unaryExpr([](double v) { return gelu_grad_scalar(v); }).array();
    gl.ffn_w1 += c.ffn_in.transpose() * dpre;
    gl.ffn_b1.row(0) += dpre.colwise().sum();
    dx += layer_norm_backward(dpre * w.ffn_w1.transpose(), w.ln_ffn_gamma, c.ln_ffn,
                                   gl.ln_ffn_gamma, gl.ln_ffn_beta);

    // cross-attention residual, query rows only
    Mat dhq, dkv_layer;
    attention_backward(w.cross_attn, cfg.heads, c.cross_attn, dx.topRows(k), gl.cross_attn, dhq,
                            dkv_layer);
    dkv += dkv_layer;
    dx.topRows(k) += layer_norm_backward(dhq, w.ln_cross_gamma, c.ln_cross, gl.ln_cross_gamma,
                                              gl.ln_cross_beta);

    // self-attention residual
    Mat dhq_self, dhkv_self;
    attention_backward(w.self_attn, cfg.heads, c.self_attn, dx, gl.self_attn, dhq_self, dhkv_self);
    dx += layer_norm_backward(dhq_self + dhkv_self, w.ln_self_gamma, c.ln_self, gl.ln_self_gamma,
                                   gl.ln_self_beta);
  }

  res.d_queries = dx.topRows(k);
  for (Eigen::Index i = k; i < n; ++i) {
    g.text_embedding.row(text.ids[static_cast<std::size_t>(i - k)]) += dx.row(i);
  }
  g.proj_visual += visual.transpose() * dkv.topRows(visual.rows());
  if (audio.rows() > 0) g.proj_audio += audio.transpose() * dkv.bottomRows(audio.rows());
  return res;
}

void accumulate_query_gradient(const QFormerConfig& cfg, const Mat& static_visual, const Mat& d_queries,
                               GradientBundle& grads) {
  if (cfg.query_type == QueryType::kLearned) {
    grads.learned_queries += d_queries;
  } else {
    // queries = Pool * static * W_v
    const Mat pooled_static =
        pooling_matrix<double>(static_cast<std::size_t>(static_visual.rows()), cfg.queries) * static_visual;
    grads.proj_visual += pooled_static.transpose() * d_queries;
  }
}

}  // namespace ops

BackwardResult backward(const QFormerParams& p, const QFormerConfig& cfg, const Mat& queries,
                        const Mat& visual, const Mat& audio, const InstructionTokens& text,
                        const Mat& upstream) {
  const auto tr = ops::forward_traced(p, cfg, queries, project_tokens(p, visual, audio), text);
  return ops::backward_from_trace(p, cfg, tr, visual, audio, text, upstream);
}

GradientBundle compress_frame_backward(const QFormerParams& p, const QFormerConfig& cfg,
                                       const FrameInputs& in, const Mat& upstream) {
  const Mat queries = queries_from_static(p, cfg, in.static_visual);
  BackwardResult res = backward(p, cfg, queries, in.visual, in.audio, in.text, upstream);
  ops::accumulate_query_gradient(cfg, in.static_visual, res.d_queries, res.grads);
  return std::move(res.grads);
}

QFormerConfig small_gradcheck_config() {
  QFormerConfig cfg;
  cfg.model_dim = 16;
  cfg.heads = 2;
  cfg.layers = 1;
  cfg.queries = 4;
  cfg.visual_dim = 8;
  cfg.audio_dim = 8;
  cfg.vocab = 32;
  return cfg;
}

namespace {

Mat random_matrix(std::mt19937_64& engine, Eigen::Index rows, Eigen::Index cols) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Mat m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = normal(engine);
  return m;
}

}  // namespace

GradCheckReport grad_check(const QFormerConfig& base, std::uint64_t seed, const GradientHook& hook) {
  QFormerConfig cfg = base;
  cfg.seed = seed;
  QFormerParams params = init_params(cfg);

  // Move gains and biases off their init values so their gradients are generic.
  std::mt19937_64 engine(seed ^ 0x9E3779B97F4A7C15ull);
  std::normal_distribution<double> normal(0.0, 1.0);
  params.for_each_tensor([&](const std::string& name, Mat& m) {
    if (name.ends_with(".gamma") || name.ends_with(".beta") || name.ends_with(".b1") ||
        name.ends_with(".b2")) {
      for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] += 0.1 * normal(engine);
    }
  });

  const auto visual_tokens = static_cast<Eigen::Index>(std::max<std::size_t>(2 * cfg.queries, 8));
  FrameInputs in;
  in.static_visual = random_matrix(engine, visual_tokens, static_cast<Eigen::Index>(cfg.visual_dim));
  in.visual = random_matrix(engine, visual_tokens, static_cast<Eigen::Index>(cfg.visual_dim));
  in.audio = random_matrix(engine, 4, static_cast<Eigen::Index>(cfg.audio_dim));
  std::uniform_int_distribution<std::uint32_t> token(0, static_cast<std::uint32_t>(cfg.vocab - 1));
  for (int i = 0; i < 3; ++i) in.text.ids.push_back(token(engine));
  const Mat upstream =
      random_matrix(engine, static_cast<Eigen::Index>(cfg.queries), static_cast<Eigen::Index>(cfg.model_dim));

  GradientBundle analytic = compress_frame_backward(params, cfg, in, upstream);
  if (hook) hook(analytic);

  auto loss = [&](const QFormerParams& p) {
    return (upstream.array() * compress_frame_tokens(p, cfg, in).array()).sum();
  };

  constexpr double kStep = 1e-5;
  GradCheckReport report;
  std::vector<Mat*> param_tensors;
  params.for_each_tensor([&](const std::string&, Mat& m) { param_tensors.push_back(&m); });
  std::vector<std::pair<std::string, const Mat*>> grad_tensors;
  analytic.for_each_tensor([&](const std::string& name, const Mat& m) { grad_tensors.push_back({name, &m}); });

  for (std::size_t t = 0; t < param_tensors.size(); ++t) {
    Mat& theta = *param_tensors[t];
    const Mat& ga = *grad_tensors[t].second;
    Mat numeric(theta.rows(), theta.cols());
    for (Eigen::Index i = 0; i < theta.size(); ++i) {
      const double saved = theta.data()[i];
      theta.data()[i] = saved + kStep;
      const double up = loss(params);
      theta.data()[i] = saved - kStep;
      const double down = loss(params);
      theta.data()[i] = saved;
      numeric.data()[i] = (up - down) / (2.0 * kStep);
    }
    TensorGradError e;
    e.name = grad_tensors[t].first;
    e.max_abs_error = theta.size() ? (ga - numeric).cwiseAbs().maxCoeff() : 0.0;
    const double scale = theta.size() ? std::max(ga.cwiseAbs().maxCoeff(), numeric.cwiseAbs().maxCoeff()) : 0.0;
    e.max_rel_error = scale > 0.0 ? e.max_abs_error / scale : 0.0;
    if (e.max_rel_error > report.max_rel_error || report.worst_tensor.empty()) {
      report.max_rel_error = e.max_rel_error;
      report.worst_tensor = e.name;
    }
    report.tensors.push_back(std::move(e));
  }
  report.passed = report.max_rel_error <= report.tolerance;
  return report;
}

}  // namespace tdc

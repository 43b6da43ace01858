#include "tdc/qformer.hpp"

#include <cmath>
#include <random>

#include "tdc/qformer_ops.hpp"

namespace tdc {

const char* to_string(QueryType q) { return q == QueryType::kLearned ? "learned" : "avgpool"; }

QueryType parse_query_type(std::string_view s) {
  if (s == "avgpool") return QueryType::kAvgPool;
  if (s == "learned") return QueryType::kLearned;
  throw ArgumentError("unknown query type '" + std::string(s) + "' (expected avgpool or learned)");
}

void QFormerConfig::validate() const {
  if (model_dim == 0 || heads == 0 || model_dim % heads != 0) {
    throw ArgumentError("qformer: model_dim " + std::to_string(model_dim) +
                        " must be a positive multiple of heads " + std::to_string(heads));
  }
  if (layers == 0) throw ArgumentError("qformer: layers must be >= 1");
  if (queries == 0) throw ArgumentError("qformer: query count must be >= 1");
  if (ffn_mult == 0) throw ArgumentError("qformer: ffn_mult must be >= 1");
  if (vocab == 0) throw ArgumentError("qformer: vocab must be >= 1");
  if (visual_dim == 0 || audio_dim == 0) throw ArgumentError("qformer: input dims must be >= 1");
  if (!(ln_eps > 0.0)) throw ArgumentError("qformer: ln_eps must be positive");
}

std::size_t QFormerTensors::parameter_count() const {
  std::size_t n = 0;
  for_each_tensor([&](const std::string&, const Mat& m) { n += static_cast<std::size_t>(m.size()); });
  return n;
}

bool QFormerTensors::all_finite() const {
  bool ok = true;
  for_each_tensor([&](const std::string&, const Mat& m) { ok = ok && m.allFinite(); });
  return ok;
}

GradientBundle GradientBundle::zeros_like(const QFormerParams& p) {
  GradientBundle g;
  static_cast<QFormerTensors&>(g) = p;
  g.for_each_tensor([](const std::string&, Mat& m) { m.setZero(); });
  return g;
}

namespace {

Mat zeros(std::size_t r, std::size_t c) {
  return Mat::Zero(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
}

AttentionWeights zero_attention(std::size_t d) {
  return {zeros(d, d), zeros(d, d), zeros(d, d), zeros(d, d)};
}

}  // namespace

QFormerParams zero_params(const QFormerConfig& cfg) {
  cfg.validate();
  const auto d = cfg.model_dim;
  QFormerParams p;
  p.proj_visual = zeros(cfg.visual_dim, d);
  p.proj_audio = zeros(cfg.audio_dim, d);
  p.text_embedding = zeros(cfg.vocab, d);
  p.learned_queries = zeros(cfg.queries, d);
  p.sep = zeros(1, d);
  for (std::size_t l = 0; l < cfg.layers; ++l) {
    LayerWeights w;
    w.ln_self_gamma = zeros(1, d);
    w.ln_self_beta = zeros(1, d);
    w.self_attn = zero_attention(d);
    w.ln_cross_gamma = zeros(1, d);
    w.ln_cross_beta = zeros(1, d);
    w.cross_attn = zero_attention(d);
    w.ln_ffn_gamma = zeros(1, d);
    w.ln_ffn_beta = zeros(1, d);
    w.ffn_w1 = zeros(d, cfg.ffn_dim());
    w.ffn_b1 = zeros(1, cfg.ffn_dim());
    w.ffn_w2 = zeros(cfg.ffn_dim(), d);
    w.ffn_b2 = zeros(1, d);
    p.layers.push_back(std::move(w));
  }
  p.final_ln_gamma = zeros(1, d);
  p.final_ln_beta = zeros(1, d);
  p.readout = zeros(d, cfg.visual_dim);
  return p;
}

QFormerParams init_params(const QFormerConfig& cfg) {
  QFormerParams p = zero_params(cfg);
  std::mt19937_64 engine(cfg.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  p.for_each_tensor([&](const std::string& name, Mat& m) {
    const bool is_gain = name.ends_with(".gamma");
    const bool is_bias = name.ends_with(".beta") || name.ends_with(".b1") || name.ends_with(".b2");
    if (is_gain) {
      m.setOnes();
    } else if (is_bias) {
      m.setZero();
    } else {
      const bool table = name == "text_embedding" || name == "learned_queries" || name == "sep";
      const double scale = table ? 1.0 : 1.0 / std::sqrt(static_cast<double>(m.rows()));
      // Rounded to float so a checkpoint round trip is exact.
      for (Eigen::Index i = 0; i < m.size(); ++i)
        m.data()[i] = static_cast<double>(static_cast<float>(scale * normal(engine)));
    }
  });
  return p;
}

void check_shapes(const QFormerTensors& p, const QFormerConfig& cfg) {
  const QFormerParams expected = zero_params(cfg);
  std::vector<std::pair<std::string, std::pair<Eigen::Index, Eigen::Index>>> shapes;
  expected.for_each_tensor(
      [&](const std::string& name, const Mat& m) { shapes.push_back({name, {m.rows(), m.cols()}}); });
  std::size_t i = 0;
  bool count_ok = p.layers.size() == cfg.layers;
  if (!count_ok) {
    throw ShapeError("params hold " + std::to_string(p.layers.size()) + " layers, config wants " +
                     std::to_string(cfg.layers));
  }
  p.for_each_tensor([&](const std::string& name, const Mat& m) {
    const auto& [want_name, want] = shapes[i++];
    if (m.rows() != want.first || m.cols() != want.second) {
      throw ShapeError("tensor " + name + " has shape " + shape_str(m) + ", config wants (" +
                       std::to_string(want.first) + "x" + std::to_string(want.second) + ")");
    }
  });
}

Mat project_tokens(const QFormerParams& p, const Mat& visual, const Mat& audio) {
  if (visual.cols() != p.proj_visual.rows()) {
    throw ShapeError("visual tokens " + shape_str(visual) + " do not fit projection " + shape_str(p.proj_visual));
  }
  if (audio.cols() != p.proj_audio.rows() && audio.rows() > 0) {
    throw ShapeError("audio tokens " + shape_str(audio) + " do not fit projection " + shape_str(p.proj_audio));
  }
  Mat kv(visual.rows() + audio.rows(), p.proj_visual.cols());
  kv.topRows(visual.rows()) = visual * p.proj_visual;
  if (audio.rows() > 0) kv.bottomRows(audio.rows()) = audio * p.proj_audio;
  return kv;
}

Mat queries_from_static(const QFormerParams& p, const QFormerConfig& cfg, const Mat& static_visual) {
  if (cfg.query_type == QueryType::kLearned) return p.learned_queries;
  if (cfg.queries > static_cast<std::size_t>(static_visual.rows())) {
    throw ArgumentError("avgpool queries: K=" + std::to_string(cfg.queries) + " exceeds " +
                        std::to_string(static_visual.rows()) + " static visual tokens");
  }
  return mean_pool_groups(matmul(static_visual, p.proj_visual), cfg.queries);
}

namespace ops {

Mat layer_norm_forward(const Mat& x, const Mat& gamma, const Mat& beta, double eps, LayerNormCache* cache) {
  if (gamma.size() != x.cols() || beta.size() != x.cols()) {
    throw ShapeError("layer norm: input " + shape_str(x) + " with gamma " + shape_str(gamma));
  }
  const auto n = static_cast<double>(x.cols());
  Mat xhat(x.rows(), x.cols());
  Vec inv(x.rows());
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    const double mean = x.row(r).sum() / n;
    xhat.row(r) = x.row(r).array() - mean;
    const double var = xhat.row(r).squaredNorm() / n;
    inv(r) = 1.0 / std::sqrt(var + eps);
    xhat.row(r) *= inv(r);
  }
  Mat y = (xhat.array().rowwise() * gamma.row(0).array()).rowwise() + beta.row(0).array();
  if (cache) *cache = {std::move(xhat), std::move(inv)};
  return y;
}

Mat attention_forward(const AttentionWeights& w, const Mat& xq, const Mat& xkv, std::size_t heads,
                      AttentionCache* cache) {
  Mat q = xq * w.wq;
  Mat k = xkv * w.wk;
  Mat v = xkv * w.wv;
  const auto dh = static_cast<Eigen::Index>(static_cast<std::size_t>(q.cols()) / heads);
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
  Mat concat(xq.rows(), q.cols());
  std::vector<Mat> probs;
  probs.reserve(heads);
  for (std::size_t h = 0; h < heads; ++h) {
    const auto c0 = static_cast<Eigen::Index>(h) * dh;
    Mat scores = (q.middleCols(c0, dh) * k.middleCols(c0, dh).transpose()) * scale;
    Mat pr = softmax_rows(scores);
    concat.middleCols(c0, dh) = pr * v.middleCols(c0, dh);
    probs.push_back(std::move(pr));
  }
  Mat out = concat * w.wo;
  if (cache) {
    *cache = {xq, xkv, std::move(q), std::move(k), std::move(v), std::move(probs), std::move(concat)};
  }
  return out;
}

ForwardTrace forward_traced(const QFormerParams& p, const QFormerConfig& cfg, const Mat& queries, Mat kv,
                            const InstructionTokens& text) {
  const auto k = static_cast<Eigen::Index>(cfg.queries);
  const auto d = static_cast<Eigen::Index>(cfg.model_dim);
  if (queries.rows() != k || queries.cols() != d) {
    throw ShapeError("queries " + shape_str(queries) + ", config wants (" + std::to_string(k) + "x" +
                     std::to_string(d) + ")");
  }
  if (kv.rows() == 0) throw ShapeError("frame has no visual or audio tokens");
  if (kv.cols() != d) throw ShapeError("key/value tokens " + shape_str(kv) + " are not model width");

  ForwardTrace tr;
  tr.queries = cfg.queries;
  tr.kv = std::move(kv);

  const bool use_text = cfg.text_conditioning && !text.empty();
  const Eigen::Index n_text = use_text ? static_cast<Eigen::Index>(text.size()) : 0;
  Mat x(k + n_text, d);
  x.topRows(k) = queries;
  for (Eigen::Index i = 0; i < n_text; ++i) {
    const auto id = text.ids[static_cast<std::size_t>(i)];
    if (id >= cfg.vocab) throw ArgumentError("text token id " + std::to_string(id) + " outside vocab");
    x.row(k + i) = p.text_embedding.row(id);
  }

  tr.layers.resize(cfg.layers);
  for (std::size_t l = 0; l < cfg.layers; ++l) {
    const auto& w = p.layers[l];
    auto& c = tr.layers[l];

    Mat h = layer_norm_forward(x, w.ln_self_gamma, w.ln_self_beta, cfg.ln_eps, &c.ln_self);
    x += attention_forward(w.self_attn, h, h, cfg.heads, &c.self_attn);

    Mat hq = layer_norm_forward(x.topRows(k), w.ln_cross_gamma, w.ln_cross_beta, cfg.ln_eps, &c.ln_cross);
    x.topRows(k) += attention_forward(w.cross_attn, hq, tr.kv, cfg.heads, &c.cross_attn);

    c.ffn_in = layer_norm_forward(x, w.ln_ffn_gamma, w.ln_ffn_beta, cfg.ln_eps, &c.ln_ffn);
    c.ffn_pre = (c.ffn_in * w.ffn_w1).rowwise() + w.ffn_b1.row(0);
    c.ffn_act = gelu(c.ffn_pre);
    x += (c.ffn_act * w.ffn_w2).rowwise() + w.ffn_b2.row(0);
  }
  tr.output = layer_norm_forward(x.topRows(k), p.final_ln_gamma, p.final_ln_beta, cfg.ln_eps, &tr.final_ln);
  if (!tr.output.allFinite()) throw NumericError("qformer forward produced non-finite values");
  return tr;
}

}  // namespace ops

Mat forward(const QFormerParams& p, const QFormerConfig& cfg, const Mat& queries, const Mat& visual,
            const Mat& audio, const InstructionTokens& text) {
  return ops::forward_traced(p, cfg, queries, project_tokens(p, visual, audio), text).output;
}

Mat forward_projected(const QFormerParams& p, const QFormerConfig& cfg, const Mat& queries, const Mat& kv,
                      const InstructionTokens& text) {
  return ops::forward_traced(p, cfg, queries, kv, text).output;
}

Mat compress_frame_tokens(const QFormerParams& p, const QFormerConfig& cfg, const FrameInputs& in) {
  return forward(p, cfg, queries_from_static(p, cfg, in.static_visual), in.visual, in.audio, in.text);
}

}  // namespace tdc

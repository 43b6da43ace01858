#pragma once

// Query transformer that compresses one frame's visual+audio tokens into K
// query tokens. Pre-norm residual blocks; each layer runs self-attention over
// [queries ; text], cross-attention from the queries onto the projected frame
// tokens, then a GELU feed-forward. Frame tokens carry no positional encoding.
//
// Row-vector convention throughout: a projection is `x * W` with W of shape
// (in_dim x out_dim).

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "tdc/numkernel.hpp"
#include "tdc/timeline.hpp"

namespace tdc {

enum class QueryType {
  kAvgPool,  // pooled from the window's static frame
  kLearned,  // a fixed learned K x D_m tensor
};

const char* to_string(QueryType q);
QueryType parse_query_type(std::string_view s);

struct QFormerConfig {
  std::size_t model_dim = 64;
  std::size_t heads = 4;
  std::size_t layers = 2;
  std::size_t ffn_mult = 4;
  std::size_t queries = 16;  // K
  QueryType query_type = QueryType::kAvgPool;
  bool text_conditioning = true;
  std::size_t vocab = kDefaultVocab;
  std::size_t visual_dim = 32;
  std::size_t audio_dim = 32;
  std::uint64_t seed = 0;
  double ln_eps = 1e-5;

  std::size_t head_dim() const { return model_dim / heads; }
  std::size_t ffn_dim() const { return ffn_mult * model_dim; }
  /// Throws ArgumentError on an unusable combination.
  void validate() const;
};

struct AttentionWeights {
  Mat wq, wk, wv, wo;
};

struct LayerWeights {
  Mat ln_self_gamma, ln_self_beta;
  AttentionWeights self_attn;
  Mat ln_cross_gamma, ln_cross_beta;
  AttentionWeights cross_attn;
  Mat ln_ffn_gamma, ln_ffn_beta;
  Mat ffn_w1, ffn_b1, ffn_w2, ffn_b2;
};

/// Every tensor of the compressor, addressable by name.
struct QFormerTensors {
  Mat proj_visual;      // D_v x D_m
  Mat proj_audio;       // D_a x D_m
  Mat text_embedding;   // vocab x D_m
  Mat learned_queries;  // K x D_m, read only in learned-query mode
  Mat sep;              // 1 x D_m separator embedding
  std::vector<LayerWeights> layers;
  Mat final_ln_gamma, final_ln_beta;
  Mat readout;  // D_m x D_v, used only by the reconstruction objective

  template <typename F>
  void for_each_tensor(F&& f) {
    visit(*this, f);
  }
  template <typename F>
  void for_each_tensor(F&& f) const {
    visit(*this, f);
  }

  std::size_t parameter_count() const;
  bool all_finite() const;

 private:
  template <typename Self, typename F>
  static void visit(Self& s, F& f) {
    f("proj_visual", s.proj_visual);
    f("proj_audio", s.proj_audio);
    f("text_embedding", s.text_embedding);
    f("learned_queries", s.learned_queries);
    f("sep", s.sep);
    for (std::size_t i = 0; i < s.layers.size(); ++i) {
      auto& l = s.layers[i];
      const std::string p = "layers." + std::to_string(i) + ".";
      f(p + "ln_self.gamma", l.ln_self_gamma);
      f(p + "ln_self.beta", l.ln_self_beta);
      f(p + "self_attn.wq", l.self_attn.wq);
      f(p + "self_attn.wk", l.self_attn.wk);
      f(p + "self_attn.wv", l.self_attn.wv);
      f(p + "self_attn.wo", l.self_attn.wo);
      f(p + "ln_cross.gamma", l.ln_cross_gamma);
      f(p + "ln_cross.beta", l.ln_cross_beta);
      f(p + "cross_attn.wq", l.cross_attn.wq);
      f(p + "cross_attn.wk", l.cross_attn.wk);
      f(p + "cross_attn.wv", l.cross_attn.wv);
      f(p + "cross_attn.wo", l.cross_attn.wo);
      f(p + "ln_ffn.gamma", l.ln_ffn_gamma);
      f(p + "ln_ffn.beta", l.ln_ffn_beta);
      f(p + "ffn.w1", l.ffn_w1);
      f(p + "ffn.b1", l.ffn_b1);
      f(p + "ffn.w2", l.ffn_w2);
      f(p + "ffn.b2", l.ffn_b2);
    }
    f(std::string("final_ln.gamma"), s.final_ln_gamma);
    f(std::string("final_ln.beta"), s.final_ln_beta);
    f(std::string("readout"), s.readout);
  }
};

struct QFormerParams : QFormerTensors {};

/// One gradient tensor per parameter tensor, same names and shapes.
struct GradientBundle : QFormerTensors {
  static GradientBundle zeros_like(const QFormerParams& p);
};

/// Seeded Gaussian init: weight matrices scaled by 1/sqrt(fan_in), embedding
/// tables and queries unit variance, layer-norm gains 1, all biases 0.
QFormerParams init_params(const QFormerConfig& cfg);

/// Zero-filled tensors with the shapes `init_params(cfg)` would produce.
QFormerParams zero_params(const QFormerConfig& cfg);

/// Throws ShapeError naming the first tensor whose shape disagrees with cfg.
void check_shapes(const QFormerTensors& p, const QFormerConfig& cfg);

/// [visual * W_v ; audio * W_a], the key/value tokens of cross-attention.
Mat project_tokens(const QFormerParams& p, const Mat& visual, const Mat& audio);

/// K query tokens: pooled projected static tokens, or the learned tensor.
Mat queries_from_static(const QFormerParams& p, const QFormerConfig& cfg, const Mat& static_visual);

/// K x D_m query outputs for one frame.
Mat forward(const QFormerParams& p, const QFormerConfig& cfg, const Mat& queries, const Mat& visual,
            const Mat& audio, const InstructionTokens& text);

/// forward() on key/value tokens that are already projected to D_m.
Mat forward_projected(const QFormerParams& p, const QFormerConfig& cfg, const Mat& queries, const Mat& kv,
                      const InstructionTokens& text);

struct BackwardResult {
  GradientBundle grads;
  Mat d_queries;
};

/// Gradients of <upstream, forward(...)> with respect to every parameter and the queries.
BackwardResult backward(const QFormerParams& p, const QFormerConfig& cfg, const Mat& queries,
                        const Mat& visual, const Mat& audio, const InstructionTokens& text,
                        const Mat& upstream);

/// Inputs of one dynamic frame, including the static frame of its window.
struct FrameInputs {
  Mat static_visual;
  Mat visual;
  Mat audio;
  InstructionTokens text;
};

/// queries_from_static followed by forward.
Mat compress_frame_tokens(const QFormerParams& p, const QFormerConfig& cfg, const FrameInputs& in);

/// Gradient of <upstream, compress_frame_tokens(...)>, including the query-construction path.
GradientBundle compress_frame_backward(const QFormerParams& p, const QFormerConfig& cfg,
                                       const FrameInputs& in, const Mat& upstream);

struct TensorGradError {
  std::string name;
  double max_abs_error = 0.0;
  /// max |analytic - numeric| over the tensor, divided by the larger of the two
  /// gradients' max-abs entries (0 when both are identically zero).
  double max_rel_error = 0.0;
};

struct GradCheckReport {
  std::vector<TensorGradError> tensors;
  double max_rel_error = 0.0;
  std::string worst_tensor;
  double tolerance = 1e-5;
  bool passed = false;
};

/// D_m=16, H=2, L=1, K=4 with small frame dims: about five thousand parameters.
QFormerConfig small_gradcheck_config();

/// Test hook applied to the analytic gradients before comparison.
using GradientHook = std::function<void(GradientBundle&)>;

/// Central finite differences (step 1e-5) against compress_frame_backward on
/// seeded random params and inputs.
GradCheckReport grad_check(const QFormerConfig& cfg, std::uint64_t seed, const GradientHook& hook = {});

struct TrainingExample {
  FrameInputs inputs;
  RowVec target;  // 1 x D_v
};

/// Mean over the batch of the squared error between mean(output rows) * readout
/// and the target, averaged over target coordinates.
double reconstruction_loss(const QFormerParams& p, const QFormerConfig& cfg,
                           const std::vector<TrainingExample>& batch);

struct TrainStepResult {
  QFormerParams params;
  double loss = 0.0;  // at the incoming params
};

/// One plain gradient-descent step on reconstruction_loss.
TrainStepResult train_step(const QFormerParams& p, const QFormerConfig& cfg,
                           const std::vector<TrainingExample>& batch, double learning_rate);

// TDCP checkpoint:
//   "TDCP" | u32 version=1 | 10 x u32 config (model_dim, heads, layers, ffn_mult,
//   queries, query_type, text_conditioning, vocab, visual_dim, audio_dim) |
//   u32 tensor count | per tensor: u32 name length, name bytes, u32 rows, u32 cols,
//   rows*cols f32 row-major. Little-endian.
inline constexpr std::string_view kTdcpMagic = "TDCP";
inline constexpr std::uint32_t kTdcpVersion = 1;

struct Checkpoint {
  QFormerConfig config;
  QFormerParams params;
};

std::vector<std::uint8_t> encode_tdcp(const QFormerParams& p, const QFormerConfig& cfg);
Checkpoint decode_tdcp(std::span<const std::uint8_t> bytes);
void write_tdcp(const QFormerParams& p, const QFormerConfig& cfg, const std::filesystem::path& path);
Checkpoint read_tdcp(const std::filesystem::path& path);

}  // namespace tdc

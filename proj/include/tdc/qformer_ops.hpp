#pragma once

// Forward/backward building blocks of the query transformer, exposed for tests.

#include <vector>

#include "tdc/qformer.hpp"

namespace tdc::ops {

struct LayerNormCache {
  Mat normalized;  // (x - mean) / sqrt(var + eps)
  Vec inv_std;
};

Mat layer_norm_forward(const Mat& x, const Mat& gamma, const Mat& beta, double eps,
                       LayerNormCache* cache);
/// Returns dx; accumulates into dgamma and dbeta.
Mat layer_norm_backward(const Mat& dy, const Mat& gamma, const LayerNormCache& cache, Mat& dgamma,
                        Mat& dbeta);

struct AttentionCache {
  Mat xq, xkv;
  Mat q, k, v;
  std::vector<Mat> probs;  // per head, rows(xq) x rows(xkv)
  Mat heads;               // concatenated head outputs before the output projection
};

/// Multi-head scaled dot-product attention from xq onto xkv.
Mat attention_forward(const AttentionWeights& w, const Mat& xq, const Mat& xkv, std::size_t heads,
                      AttentionCache* cache);

/// Accumulates weight gradients into `gw`; returns dxq and dxkv through the out params.
void attention_backward(const AttentionWeights& w, std::size_t heads, const AttentionCache& cache,
                        const Mat& dout, AttentionWeights& gw, Mat& dxq, Mat& dxkv);

struct LayerCache {
  LayerNormCache ln_self;
  AttentionCache self_attn;
  LayerNormCache ln_cross;
  AttentionCache cross_attn;
  LayerNormCache ln_ffn;
  Mat ffn_in, ffn_pre, ffn_act;
};

struct ForwardTrace {
  Mat kv;
  std::size_t queries = 0;
  std::vector<LayerCache> layers;
  LayerNormCache final_ln;
  Mat output;
};

/// `kv` is the already-projected [visual * W_v ; audio * W_a].
ForwardTrace forward_traced(const QFormerParams& p, const QFormerConfig& cfg, const Mat& queries, Mat kv,
                            const InstructionTokens& text);

/// Backward pass reusing a trace from forward_traced on the same inputs.
BackwardResult backward_from_trace(const QFormerParams& p, const QFormerConfig& cfg, const ForwardTrace& tr,
                                   const Mat& visual, const Mat& audio, const InstructionTokens& text,
                                   const Mat& upstream);

/// Adds the query-construction gradient (pooled path into W_v, or the learned tensor).
void accumulate_query_gradient(const QFormerConfig& cfg, const Mat& static_visual, const Mat& d_queries,
                               GradientBundle& grads);

}  // namespace tdc::ops

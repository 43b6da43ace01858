#include <cmath>

#include "tdc/qformer.hpp"
#include "tdc/qformer_ops.hpp"

namespace tdc {

namespace {

void check_batch(const QFormerConfig& cfg, const std::vector<TrainingExample>& batch) {
  if (batch.empty()) throw ArgumentError("training batch is empty");
  for (const auto& ex : batch) {
    if (static_cast<std::size_t>(ex.target.size()) != cfg.visual_dim) {
      throw ShapeError("training target " + shape_str(ex.target) + " does not match visual dim " +
                       std::to_string(cfg.visual_dim));
    }
  }
}

RowVec predict(const QFormerParams& p, const Mat& output) { return output.colwise().mean() * p.readout; }

}  // namespace

double reconstruction_loss(const QFormerParams& p, const QFormerConfig& cfg,
                           const std::vector<TrainingExample>& batch) {
  check_batch(cfg, batch);
  double total = 0.0;
  for (const auto& ex : batch) {
    const Mat out = compress_frame_tokens(p, cfg, ex.inputs);
    total += (predict(p, out) - ex.target).squaredNorm() / static_cast<double>(ex.target.size());
  }
  const double loss = total / static_cast<double>(batch.size());
  if (!std::isfinite(loss)) throw NumericError("reconstruction loss is not finite");
  return loss;
}

TrainStepResult train_step(const QFormerParams& p, const QFormerConfig& cfg,
                           const std::vector<TrainingExample>& batch, double learning_rate) {
  check_batch(cfg, batch);
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
    throw ArgumentError("learning rate must be a finite value >= 0");
  }
  GradientBundle total = GradientBundle::zeros_like(p);
  double loss = 0.0;
  const double batch_scale = 1.0 / static_cast<double>(batch.size());
  const auto k = static_cast<double>(cfg.queries);

  std::vector<Mat*> dst;
  total.for_each_tensor([&](const std::string&, Mat& m) { dst.push_back(&m); });

  for (const auto& ex : batch) {
    const auto& in = ex.inputs;
    const auto trace = ops::forward_traced(p, cfg, queries_from_static(p, cfg, in.static_visual),
                                           project_tokens(p, in.visual, in.audio), in.text);
    const RowVec pooled = trace.output.colwise().mean();
    const RowVec residual = pooled * p.readout - ex.target;
    const double dim = static_cast<double>(ex.target.size());
    loss += residual.squaredNorm() / dim * batch_scale;

    const RowVec dpred = residual * (2.0 / dim * batch_scale);
    total.readout += pooled.transpose() * dpred;
    const RowVec dpooled = dpred * p.readout.transpose();
    const Mat upstream = dpooled.replicate(trace.output.rows(), 1) / k;

    auto res = ops::backward_from_trace(p, cfg, trace, in.visual, in.audio, in.text, upstream);
    ops::accumulate_query_gradient(cfg, in.static_visual, res.d_queries, res.grads);
    std::size_t i = 0;
    res.grads.for_each_tensor([&](const std::string&, const Mat& m) { *dst[i++] += m; });
  }
  if (!std::isfinite(loss)) throw NumericError("reconstruction loss is not finite");

  TrainStepResult res{p, loss};
  if (learning_rate > 0.0) {
    std::vector<const Mat*> grads;
    total.for_each_tensor([&](const std::string&, const Mat& m) { grads.push_back(&m); });
    std::size_t i = 0;
    res.params.for_each_tensor([&](const std::string&, Mat& m) { m -= learning_rate * *grads[i++]; });
    if (!res.params.all_finite()) throw NumericError("parameters became non-finite after the update");
  }
  return res;
}

}  // namespace tdc

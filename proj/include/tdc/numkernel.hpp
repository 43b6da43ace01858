#pragma once

// Dense kernels shared by every stage of the pipeline. All functions are pure
// and templated on the scalar type; the pipeline itself runs in double.

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "tdc/errors.hpp"

namespace tdc {

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using RowVector = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>;

using Mat = Matrix<double>;
using Vec = Vector<double>;
using RowVec = RowVector<double>;
using MatF = Matrix<float>;
using VecF = Vector<float>;

template <typename Derived>
std::string shape_str(const Eigen::EigenBase<Derived>& m) {
  return "(" + std::to_string(m.rows()) + "x" + std::to_string(m.cols()) + ")";
}

template <typename A, typename B>
auto matmul(const Eigen::MatrixBase<A>& a, const Eigen::MatrixBase<B>& b) {
  using Scalar = typename A::Scalar;
  if (a.cols() != b.rows()) {
    throw ShapeError("matmul: " + shape_str(a) + " x " + shape_str(b) + " inner dimensions differ");
  }
  Matrix<Scalar> out = a * b;
  return out;
}

/// Row-wise softmax with max subtraction.
template <typename Derived>
auto softmax_rows(const Eigen::MatrixBase<Derived>& m) {
  using Scalar = typename Derived::Scalar;
  Matrix<Scalar> out(m.rows(), m.cols());
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    if (m.cols() == 0) continue;
    const Scalar mx = m.row(r).maxCoeff();
    out.row(r) = (m.row(r).array() - mx).exp().matrix();
    out.row(r) /= out.row(r).sum();
  }
  return out;
}

template <typename Derived, typename G, typename B>
auto layer_norm(const Eigen::MatrixBase<Derived>& m, const Eigen::MatrixBase<G>& gamma,
                const Eigen::MatrixBase<B>& beta, typename Derived::Scalar eps) {
  using Scalar = typename Derived::Scalar;
  if (gamma.size() != m.cols() || beta.size() != m.cols()) {
    throw ShapeError("layer_norm: input " + shape_str(m) + " with gamma " + shape_str(gamma) +
                     " and beta " + shape_str(beta));
  }
  if (!(eps > Scalar(0))) throw ArgumentError("layer_norm: eps must be positive");
  Matrix<Scalar> out(m.rows(), m.cols());
  const auto n = static_cast<Scalar>(m.cols());
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    const Scalar mean = m.row(r).sum() / n;
    const auto centered = (m.row(r).array() - mean).eval();
    const Scalar var = centered.square().sum() / n;
    const Scalar inv = Scalar(1) / std::sqrt(var + eps);
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      out(r, c) = gamma(c) * centered(c) * inv + beta(c);
    }
  }
  return out;
}

namespace gelu_constants {
// tanh approximation: 0.5 x (1 + tanh(sqrt(2/pi) (x + 0.044715 x^3)))
inline constexpr double kSqrt2OverPi = 0.7978845608028654;
inline constexpr double kCubic = 0.044715;
}  // namespace gelu_constants

template <typename Scalar>
Scalar gelu_scalar(Scalar x) {
  using namespace gelu_constants;
  const Scalar inner = Scalar(kSqrt2OverPi) * (x + Scalar(kCubic) * x * x * x);
  return Scalar(0.5) * x * (Scalar(1) + std::tanh(inner));
}

/// d gelu / dx for the tanh approximation.
template <typename Scalar>
Scalar gelu_grad_scalar(Scalar x) {
  using namespace gelu_constants;
  const Scalar inner = Scalar(kSqrt2OverPi) * (x + Scalar(kCubic) * x * x * x);
  const Scalar t = std::tanh(inner);
  const Scalar dinner = Scalar(kSqrt2OverPi) * (Scalar(1) + Scalar(3 * kCubic) * x * x);
  return Scalar(0.5) * (Scalar(1) + t) + Scalar(0.5) * x * (Scalar(1) - t * t) * dinner;
}

template <typename Derived>
auto gelu(const Eigen::MatrixBase<Derived>& m) {
  using Scalar = typename Derived::Scalar;
  Matrix<Scalar> out = m.unaryExpr([](Scalar x) { return gelu_scalar(x); });
  return out;
}

/// Sizes of `k` contiguous near-equal groups over `n` items, larger groups first.
inline std::vector<std::size_t> group_sizes(std::size_t n, std::size_t k) {
  if (k == 0 || k > n) {
    throw ArgumentError("group_sizes: need 1 <= k <= n, got k=" + std::to_string(k) +
                        " n=" + std::to_string(n));
  }
  std::vector<std::size_t> sizes(k, n / k);
  for (std::size_t g = 0; g < n % k; ++g) ++sizes[g];
  return sizes;
}

/// Averages `k` contiguous row groups (sizes from group_sizes).
template <typename Derived>
auto mean_pool_groups(const Eigen::MatrixBase<Derived>& m, std::size_t k) {
  using Scalar = typename Derived::Scalar;
  const auto sizes = group_sizes(static_cast<std::size_t>(m.rows()), k);
  Matrix<Scalar> out(static_cast<Eigen::Index>(k), m.cols());
  Eigen::Index start = 0;
  for (std::size_t g = 0; g < k; ++g) {
    const auto len = static_cast<Eigen::Index>(sizes[g]);
    out.row(static_cast<Eigen::Index>(g)) =
        m.middleRows(start, len).colwise().sum() / static_cast<Scalar>(len);
    start += len;
  }
  return out;
}

/// Linear map implementing mean_pool_groups as a (k x n) matrix product.
template <typename Scalar>
Matrix<Scalar> pooling_matrix(std::size_t n, std::size_t k) {
  const auto sizes = group_sizes(n, k);
  Matrix<Scalar> p = Matrix<Scalar>::Zero(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(n));
  Eigen::Index start = 0;
  for (std::size_t g = 0; g < k; ++g) {
    const auto len = static_cast<Eigen::Index>(sizes[g]);
    p.row(static_cast<Eigen::Index>(g)).segment(start, len).setConstant(Scalar(1) / Scalar(len));
    start += len;
  }
  return p;
}

template <typename A, typename B>
typename A::Scalar cosine_sim(const Eigen::MatrixBase<A>& u, const Eigen::MatrixBase<B>& v) {
  using Scalar = typename A::Scalar;
  if (u.size() != v.size()) {
    throw ShapeError("cosine_sim: " + shape_str(u) + " vs " + shape_str(v));
  }
  const Scalar nu = u.norm();
  const Scalar nv = v.norm();
  if (!(nu > Scalar(0)) || !(nv > Scalar(0))) {
    throw DegenerateInputError("cosine_sim: zero-norm vector");
  }
  Scalar c = u.cwiseProduct(v).sum() / (nu * nv);
  if (c > Scalar(1)) c = Scalar(1);
  if (c < Scalar(-1)) c = Scalar(-1);
  return c;
}

template <typename Derived>
bool all_finite(const Eigen::MatrixBase<Derived>& m) {
  return m.allFinite();
}

}  // namespace tdc

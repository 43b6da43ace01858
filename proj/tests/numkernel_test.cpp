#include "tdc/numkernel.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

namespace tdc {
namespace {

Mat random_mat(std::mt19937_64& g, Eigen::Index r, Eigen::Index c, double scale = 1.0) {
  std::normal_distribution<double> n(0.0, scale);
  Mat m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = n(g);
  return m;
}

TEST(Matmul, IdentityAndKnownProduct) {
  std::mt19937_64 g(1);
  const Mat m = random_mat(g, 3, 5);
  EXPECT_EQ(matmul(Mat::Identity(3, 3), m), m);

  Mat a(2, 2), b(2, 2), want(2, 2);
  a << 1, 2, 3, 4;
  b << 5, 6, 7, 8;
  want << 19, 22, 43, 50;
  EXPECT_EQ(matmul(a, b), want);
}

TEST(Matmul, ShapeErrorNamesBothShapes) {
  try {
    matmul(Mat::Zero(2, 3), Mat::Zero(2, 2));
    FAIL() << "expected ShapeError";
  } catch (const ShapeError& e) {
    const std::string what = e.what();
    EXPECT_NE(what.find("(2x3)"), std::string::npos);
    EXPECT_NE(what.find("(2x2)"), std::string::npos);
  }
}

TEST(Matmul, AssociativeOnRandomTriples) {
  std::mt19937_64 g(7);
  for (int trial = 0; trial < 50; ++trial) {
    const Mat a = random_mat(g, 4, 4), b = random_mat(g, 4, 4), c = random_mat(g, 4, 4);
    const Mat left = matmul(matmul(a, b), c);
    const Mat right = matmul(a, matmul(b, c));
    EXPECT_LE((left - right).cwiseAbs().maxCoeff(), 1e-9 * std::max(1.0, left.cwiseAbs().maxCoeff()));
  }
}

TEST(Softmax, UniformAndKnownRows) {
  Mat m(2, 3);
  m << 0, 0, 0, std::log(2.0), 0, -1e300;
  const Mat s = softmax_rows(m);
  for (int c = 0; c < 3; ++c) EXPECT_NEAR(s(0, c), 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(s(1, 0), 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(s(1, 1), 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(s(1, 2), 0.0, 1e-300);
}

TEST(Softmax, ShiftInvariantAndNormalizedAtLargeMagnitude) {
  std::mt19937_64 g(3);
  for (int trial = 0; trial < 100; ++trial) {
    const Mat m = random_mat(g, 5, 7, 1e4);
    const Mat s = softmax_rows(m);
    ASSERT_TRUE(s.allFinite());
    EXPECT_TRUE((s.array() >= 0.0).all());
    for (Eigen::Index r = 0; r < s.rows(); ++r) EXPECT_NEAR(s.row(r).sum(), 1.0, 1e-9);
    const Mat shifted = softmax_rows((m.array() + 123.25).matrix());
    EXPECT_LE((shifted - s).cwiseAbs().maxCoeff(), 1e-9);
  }
}

TEST(LayerNorm, EdgeCases) {
  const RowVec ones = RowVec::Ones(4), zeros = RowVec::Zero(4);
  const Mat constant = Mat::Constant(2, 4, 3.5);
  EXPECT_EQ(layer_norm(constant, ones, zeros, 1e-5), Mat::Zero(2, 4));

  Mat pm(1, 2);
  pm << 1, -1;
  const Mat y = layer_norm(pm, RowVec::Ones(2), RowVec::Zero(2), 1e-12);
  EXPECT_NEAR(y(0, 0), 1.0, 1e-9);
  EXPECT_NEAR(y(0, 1), -1.0, 1e-9);

  std::mt19937_64 g(5);
  RowVec beta(4);
  beta << 1, 2, 3, 4;
  const Mat collapsed = layer_norm(random_mat(g, 3, 4), RowVec::Zero(4), beta, 1e-5);
  for (Eigen::Index r = 0; r < 3; ++r) EXPECT_EQ(collapsed.row(r), beta);
}

TEST(LayerNorm, NormalizesRowsAndRejectsBadShapes) {
  std::mt19937_64 g(9);
  const Mat x = random_mat(g, 6, 16, 3.0);
  const Mat y = layer_norm(x, RowVec::Ones(16), RowVec::Zero(16), 1e-12);
  for (Eigen::Index r = 0; r < y.rows(); ++r) {
    EXPECT_NEAR(y.row(r).mean(), 0.0, 1e-12);
    EXPECT_NEAR(y.row(r).squaredNorm() / 16.0, 1.0, 1e-9);
  }
  EXPECT_THROW(layer_norm(x, RowVec::Ones(15), RowVec::Zero(16), 1e-5), ShapeError);
  EXPECT_THROW(layer_norm(x, RowVec::Ones(16), RowVec::Zero(16), 0.0), ArgumentError);
}

TEST(Gelu, FixedPointsAndAsymptotes) {
  Mat m(1, 3);
  m << 0.0, 10.0, -10.0;
  const Mat y = gelu(m);
  EXPECT_EQ(y(0, 0), 0.0);
  EXPECT_NEAR(y(0, 1), 10.0, 1e-6);
  EXPECT_NEAR(y(0, 2), 0.0, 1e-6);
}

TEST(Gelu, GradientMatchesCentralDifference) {
  for (double x = -4.0; x <= 4.0; x += 0.37) {
    const double h = 1e-6;
    const double numeric = (gelu_scalar(x + h) - gelu_scalar(x - h)) / (2 * h);
    EXPECT_NEAR(gelu_grad_scalar(x), numeric, 1e-8) << "x=" << x;
  }
}

TEST(MeanPool, GroupLayout) {
  EXPECT_EQ(group_sizes(144, 16), std::vector<std::size_t>(16, 9));
  EXPECT_EQ(group_sizes(10, 4), (std::vector<std::size_t>{3, 3, 2, 2}));
  EXPECT_THROW(group_sizes(3, 4), ArgumentError);
  EXPECT_THROW(mean_pool_groups(Mat::Zero(3, 2), 4), ArgumentError);
  EXPECT_THROW(mean_pool_groups(Mat::Zero(3, 2), 0), ArgumentError);
}

TEST(MeanPool, AveragesContiguousGroups) {
  Mat m(10, 1);
  for (int i = 0; i < 10; ++i) m(i, 0) = i;
  const Mat p = mean_pool_groups(m, 4);
  // groups {0,1,2} {3,4,5} {6,7} {8,9}
  EXPECT_DOUBLE_EQ(p(0, 0), 1.0);
  EXPECT_DOUBLE_EQ(p(1, 0), 4.0);
  EXPECT_DOUBLE_EQ(p(2, 0), 6.5);
  EXPECT_DOUBLE_EQ(p(3, 0), 8.5);

  std::mt19937_64 g(11);
  const Mat r = random_mat(g, 7, 3);
  EXPECT_EQ(mean_pool_groups(r, 7), r);
  EXPECT_LE((mean_pool_groups(r, 1) - r.colwise().mean()).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_LE((pooling_matrix<double>(7, 3) * r - mean_pool_groups(r, 3)).cwiseAbs().maxCoeff(), 1e-15);

  RowVec v(3);
  v << 0.25, -1.5, 2.0;
  const Mat same = v.replicate(144, 1);
  const Mat pooled = mean_pool_groups(same, 16);
  for (Eigen::Index i = 0; i < 16; ++i) EXPECT_LE((pooled.row(i) - v).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(CosineSim, KnownValuesAndErrors) {
  Vec u(3), w(3);
  u << 1, 2, 3;
  w << -2, 1, 0;
  EXPECT_NEAR(cosine_sim(u, u), 1.0, 1e-15);
  EXPECT_NEAR(cosine_sim(u, w), 0.0, 1e-15);
  EXPECT_NEAR(cosine_sim(u, Vec(-u)), -1.0, 1e-15);
  EXPECT_THROW(cosine_sim(u, Vec::Zero(3)), DegenerateInputError);
  EXPECT_THROW(cosine_sim(u, Vec::Ones(4)), ShapeError);
}

TEST(CosineSim, SymmetricAndScaleInvariant) {
  std::mt19937_64 g(13);
  std::uniform_real_distribution<double> pos(0.01, 100.0);
  for (int trial = 0; trial < 100; ++trial) {
    const Vec a = random_mat(g, 8, 1), b = random_mat(g, 8, 1);
    const double c = cosine_sim(a, b);
    EXPECT_GE(c, -1.0);
    EXPECT_LE(c, 1.0);
    EXPECT_NEAR(cosine_sim(b, a), c, 1e-15);
    EXPECT_NEAR(cosine_sim(Vec(pos(g) * a), Vec(pos(g) * b)), c, 1e-12);
  }
}

TEST(Kernels, WorkInSinglePrecision) {
  MatF m = MatF::Ones(4, 2);
  EXPECT_EQ(mean_pool_groups(m, 2).rows(), 2);
  EXPECT_NEAR(softmax_rows(m)(0, 0), 0.5f, 1e-7f);
}

}  // namespace
}  // namespace tdc

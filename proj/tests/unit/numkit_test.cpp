#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "perspectra/numkit/adamw.hpp"
#include "perspectra/numkit/grad_check.hpp"
#include "perspectra/numkit/kernels.hpp"
#include "perspectra/numkit/matrix.hpp"
#include "perspectra/rng.hpp"

namespace perspectra {
namespace {

Matrix<double> random_matrix(Rng& rng, std::size_t r, std::size_t c, double scale = 1.0) {
  Matrix<double> m(r, c);
  for (auto& v : m.flat()) v = rng.uniform(-scale, scale);
  return m;
}

TEST(Matmul, IdentityIsNeutral) {
  Rng rng(1);
  const auto m = random_matrix(rng, 3, 4);
  Matrix<double> eye(3, 3);
  for (std::size_t i = 0; i < 3; ++i) eye(i, i) = 1.0;
  EXPECT_EQ(matmul(eye, m), m);
}

TEST(Matmul, HandExample) {
  const Matrix<float> a(2, 2, {1, 2, 3, 4});
  const Matrix<float> b(2, 1, {5, 6});
  EXPECT_EQ(matmul(a, b), Matrix<float>(2, 1, {17, 39}));
}

TEST(Matmul, MatchesTripleLoop) {
  Rng rng(2);
  const auto a = random_matrix(rng, 7, 5);
  const auto b = random_matrix(rng, 5, 3);
  const auto c = matmul(a, b);
  for (std::size_t i = 0; i < 7; ++i) {
    for (std::size_t j = 0; j < 3; ++j) {
      double s = 0;
      for (std::size_t k = 0; k < 5; ++k) s += a(i, k) * b(k, j);
      EXPECT_NEAR(c(i, j), s, 1e-6);
    }
  }
}

TEST(Matmul, TransposedVariantsAndAccumulate) {
  Rng rng(3);
  const auto a = random_matrix(rng, 4, 6);
  const auto b = random_matrix(rng, 4, 2);
  Matrix<double> tn(6, 2);
  matmul_tn_into(a, b, tn, false);
  const auto c = random_matrix(rng, 3, 6);
  Matrix<double> nt(4, 3);
  matmul_nt_into(a, c, nt, false);
  for (std::size_t i = 0; i < 6; ++i) {
    for (std::size_t j = 0; j < 2; ++j) {
      double s = 0;
      for (std::size_t k = 0; k < 4; ++k) s += a(k, i) * b(k, j);
      EXPECT_NEAR(tn(i, j), s, 1e-12);
    }
  }
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = 0; j < 3; ++j) {
      double s = 0;
      for (std::size_t k = 0; k < 6; ++k) s += a(i, k) * c(j, k);
      EXPECT_NEAR(nt(i, j), s, 1e-12);
    }
  }
  auto twice = tn;
  matmul_tn_into(a, b, twice, true);
  for (std::size_t i = 0; i < twice.size(); ++i) EXPECT_NEAR(twice.data()[i], 2 * tn.data()[i], 1e-12);
}

TEST(Matmul, DimensionMismatchThrows) {
  EXPECT_THROW(matmul(Matrix<float>(2, 3), Matrix<float>(2, 3)), std::invalid_argument);
  Matrix<float> out(1, 1);
  EXPECT_THROW(matmul_into(Matrix<float>(2, 3), Matrix<float>(3, 2), out, false), std::invalid_argument);
}

TEST(Softmax, RowsSumToOneAndStayFinite) {
  Rng rng(4);
  auto logits = random_matrix(rng, 20, 11, 50.0);
  logits(0, 0) = 1e4;
  logits(1, 3) = -1e4;
  const auto p = softmax_rows(logits);
  for (std::size_t i = 0; i < p.rows(); ++i) {
    double s = 0;
    for (const double v : p.row(i)) {
      EXPECT_TRUE(std::isfinite(v));
      EXPECT_GE(v, 0.0);
      s += v;
    }
    EXPECT_NEAR(s, 1.0, 1e-12);
  }
}

TEST(SoftmaxCe, UniformLogits) {
  const std::vector<int> labels{0};
  const std::vector<std::uint8_t> mask{1};
  const auto r = softmax_ce(Matrix<double>(1, 2, {0, 0}), labels, mask);
  EXPECT_NEAR(r.loss, std::log(2.0), 1e-12);
  EXPECT_NEAR(r.grad(0, 0), -0.5, 1e-12);
  EXPECT_NEAR(r.grad(0, 1), 0.5, 1e-12);
}

TEST(SoftmaxCe, SaturatedLogitsAreStable) {
  const std::vector<int> labels{0, 1};
  const std::vector<std::uint8_t> mask{1, 1};
  const auto r = softmax_ce(Matrix<float>(2, 2, {1000, 0, 1000, 0}), labels, mask);
  EXPECT_TRUE(std::isfinite(r.loss));
  EXPECT_NEAR(r.loss, 500.0, 1e-3);
  const auto ok = softmax_ce(Matrix<float>(1, 2, {1000, 0}), std::vector<int>{0}, std::vector<std::uint8_t>{1});
  EXPECT_NEAR(ok.loss, 0.0, 1e-6);
}

TEST(SoftmaxCe, EmptyMaskGivesZero) {
  const auto r = softmax_ce(Matrix<double>(2, 3, 1.0), std::vector<int>{0, 2}, std::vector<std::uint8_t>{0, 0});
  EXPECT_EQ(r.loss, 0.0);
  for (const double g : r.grad.flat()) EXPECT_EQ(g, 0.0);
}

TEST(SoftmaxCe, MatchesFiniteDifferences) {
  Rng rng(5);
  const auto logits = random_matrix(rng, 5, 3, 2.0);
  const std::vector<int> labels{0, 2, 1, 1, 0};
  const std::vector<std::uint8_t> mask{1, 0, 1, 1, 1};
  const auto r = softmax_ce(logits, labels, mask);
  std::vector<double> x(logits.flat().begin(), logits.flat().end());
  const auto f = [&](std::span<const double> v) {
    return softmax_ce(Matrix<double>(5, 3, std::vector<double>(v.begin(), v.end())), labels, mask).loss;
  };
  EXPECT_LE(grad_check(f, x, r.grad.flat(), 1e-5).max_rel_error, 1e-4);
  for (std::size_t j = 0; j < 3; ++j) EXPECT_EQ(r.grad(1, j), 0.0);
}

TEST(L1Loss, HandExamples) {
  const Matrix<double> same(2, 2, {1, 2, 3, 4});
  const auto z = l1_loss(same, same);
  EXPECT_EQ(z.loss, 0.0);
  for (const double g : z.grad.flat()) EXPECT_EQ(g, 0.0);
  const auto r = l1_loss(Matrix<double>(1, 2, {1, -1}), Matrix<double>(1, 2, {0, 0}));
  EXPECT_EQ(r.loss, 1.0);
  EXPECT_EQ(r.grad, Matrix<double>(1, 2, {0.5, -0.5}));
  EXPECT_THROW(l1_loss(Matrix<double>(1, 2), Matrix<double>(2, 1)), std::invalid_argument);
}

TEST(L1Loss, MatchesFiniteDifferencesAwayFromKinks) {
  Rng rng(6);
  auto pred = random_matrix(rng, 4, 3);
  const auto target = random_matrix(rng, 4, 3);
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (std::abs(pred.data()[i] - target.data()[i]) <= 1e-3) pred.data()[i] += 0.01;
  }
  const auto r = l1_loss(pred, target);
  std::vector<double> x(pred.flat().begin(), pred.flat().end());
  const auto f = [&](std::span<const double> v) {
    return l1_loss(Matrix<double>(4, 3, std::vector<double>(v.begin(), v.end())), target).loss;
  };
  EXPECT_LE(grad_check(f, x, r.grad.flat(), 1e-5).max_rel_error, 1e-4);
}

TEST(AdamW, ZeroGradientWithoutDecayIsNoOp) {
  Matrix<float> p(2, 2, {1, -2, 3, 0.5});
  const auto before = p;
  const Matrix<float> g(2, 2, 0.0f);
  AdamWState<float> st;
  st.config.weight_decay = 0;
  for (int i = 0; i < 3; ++i) adamw_step<float>({&p}, {&g}, st);
  EXPECT_EQ(p, before);
  EXPECT_EQ(st.step, 3u);
}

TEST(AdamW, FirstStepClosedForm) {
  Matrix<double> p(1, 1, 0.0);
  const Matrix<double> g(1, 1, 1.0);
  AdamWState<double> st;
  adamw_step<double>({&p}, {&g}, st);
  EXPECT_NEAR(p(0, 0), -0.0005 / (1 + 1e-8), 1e-15);
}

TEST(AdamW, DecoupledDecayComesFirst) {
  Matrix<double> p(1, 1, 2.0);
  const Matrix<double> g(1, 1, 0.0);
  AdamWState<double> st;
  st.config.lr = 0.1;
  st.config.weight_decay = 0.5;
  adamw_step<double>({&p}, {&g}, st);
  EXPECT_NEAR(p(0, 0), 2.0 * (1 - 0.05), 1e-15);
}

TEST(AdamW, Deterministic) {
  const auto run = [] {
    Rng rng(7);
    Matrix<float> p(3, 4);
    for (auto& v : p.flat()) v = static_cast<float>(rng.uniform(-1, 1));
    AdamWState<float> st;
    for (int i = 0; i < 20; ++i) {
      Matrix<float> g(3, 4);
      for (auto& v : g.flat()) v = static_cast<float>(rng.uniform(-1, 1));
      adamw_step<float>({&p}, {&g}, st);
    }
    return p;
  };
  EXPECT_EQ(run(), run());
}

TEST(AdamW, ShapeMismatchThrows) {
  Matrix<float> p(2, 2);
  const Matrix<float> g(2, 3);
  AdamWState<float> st;
  EXPECT_THROW(adamw_step<float>({&p}, {&g}, st), std::invalid_argument);
}

TEST(GradCheck, ScalarSquareAndRestoresPoint) {
  std::vector<double> x{3.0};
  const std::vector<double> analytic{6.0};
  const auto r = grad_check([](std::span<const double> v) { return v[0] * v[0]; }, x, analytic, 1e-5);
  EXPECT_LE(r.max_rel_error, 1e-8);
  EXPECT_EQ(x[0], 3.0);
}

TEST(GradCheck, DetectsAWrongGradient) {
  std::vector<double> x{1.0, 2.0};
  const std::vector<double> wrong{2.0, 5.0};
  const auto r = grad_check([](std::span<const double> v) { return v[0] * v[0] + v[1] * v[1]; }, x, wrong);
  EXPECT_GT(r.max_rel_error, 0.1);
  EXPECT_EQ(r.worst_index, 1u);
}

TEST(Rng, DistributionsAreInRangeAndReproducible) {
  Rng a(9), b(9);
  for (int i = 0; i < 1000; ++i) {
    const auto u = a.uniform();
    EXPECT_GE(u, 0.0);
    EXPECT_LT(u, 1.0);
    EXPECT_EQ(u, b.uniform());
    const auto k = a.between(-2, 3);
    EXPECT_GE(k, -2);
    EXPECT_LE(k, 3);
    b.between(-2, 3);
  }
  const auto idx = a.sample_indices(10, 4);
  EXPECT_EQ(idx.size(), 4u);
  EXPECT_NE(derive_seed(1, 2), derive_seed(1, 3));
}

}  // namespace
}  // namespace perspectra

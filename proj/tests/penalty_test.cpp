#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include "sglpath/family.hpp"
#include "sglpath/penalty.hpp"
#include "test_support.hpp"

namespace sgl {
namespace {

using testing::random_dense;
using testing::random_vector;

constexpr double kInf = std::numeric_limits<double>::infinity();

PenaltyParams make_params(double alpha, double lambda, const GroupStructure& groups) {
  PenaltyParams p;
  p.alpha = alpha;
  p.lambda = lambda;
  p.resolve(groups);
  return p;
}

// (1/2t)||b - (b0 - t grad)||^2 + (1 - alpha) lambda w ||b|| + alpha lambda sum omega |b_j|
double majorizer(const std::vector<double>& b, const std::vector<double>& b0,
                 const std::vector<double>& grad, double t, const PenaltyParams& p, double w,
                 const std::vector<double>& omega) {
  double q = 0.0, nrm = 0.0, l1 = 0.0;
  for (std::size_t j = 0; j < b.size(); ++j) {
    const double d = b[j] - (b0[j] - t * grad[j]);
    q += d * d;
    nrm += b[j] * b[j];
    l1 += omega[j] * std::abs(b[j]);
  }
  return q / (2 * t) + (1 - p.alpha) * p.lambda * w * std::sqrt(nrm) + p.alpha * p.lambda * l1;
}

TEST(SoftThreshold, Examples) {
  EXPECT_EQ(soft_threshold(std::vector<double>{3, -1, 0.5}, std::vector<double>{1, 1, 1}),
            (std::vector<double>{2, 0, 0}));
  const std::vector<double> v{1.5, -2.25, 0.0, 7.0};
  EXPECT_EQ(soft_threshold(v, std::vector<double>(4, 0.0)), v);
  const auto z = soft_threshold(std::vector<double>{-2.5}, std::vector<double>{2.5});
  EXPECT_EQ(z[0], 0.0);
  EXPECT_FALSE(std::signbit(z[0]) && z[0] != 0.0);
}

TEST(SoftThreshold, RejectsBadInput) {
  EXPECT_THROW(soft_threshold(std::vector<double>{1, 2}, std::vector<double>{1}), Error);
  EXPECT_THROW(soft_threshold(std::vector<double>{1}, std::vector<double>{-1}), Error);
}

TEST(GroupProx, ZeroIsFixedPoint) {
  const auto groups = GroupStructure::equal_size(3, 3);
  const auto p = make_params(0.5, 0.3, groups);
  const std::vector<double> zero(3, 0.0);
  EXPECT_EQ(group_prox_update(zero, zero, 1.0, p, groups, 0), zero);
}

TEST(GroupProx, WorkedExampleMatchesGridMinimum) {
  const auto groups = GroupStructure::equal_size(2, 2);
  auto p = make_params(0.5, 0.2, groups);
  p.group_weights = {1.0};
  const std::vector<double> b0{1.0, 0.0}, grad{0.0, 0.0};
  const auto got = group_prox_update(b0, grad, 1.0, p, groups, 0);
  EXPECT_NEAR(got[0], 0.8, 1e-15);
  EXPECT_EQ(got[1], 0.0);

  // Brute-force minimization of the majorizer over a fine grid.
  double best = kInf;
  std::vector<double> arg(2);
  for (int a = -200; a <= 1200; ++a) {
    for (int b = -200; b <= 200; ++b) {
      const std::vector<double> cand{a * 1e-3, b * 1e-3};
      const double v = majorizer(cand, b0, grad, 1.0, p, 1.0, {1.0, 1.0});
      if (v < best) {
        best = v;
        arg = cand;
      }
    }
  }
  EXPECT_NEAR(arg[0], 0.8, 1e-3);
  EXPECT_NEAR(arg[1], 0.0, 1e-3);
}

TEST(GroupProx, LargeLambdaKillsGroup) {
  const auto groups = GroupStructure::equal_size(4, 4);
  std::mt19937_64 rng(2);
  const auto b0 = random_vector(4, rng);
  const auto grad = random_vector(4, rng);
  const auto p = make_params(0.3, 1e3, groups);
  EXPECT_EQ(group_prox_update(b0, grad, 0.5, p, groups, 0), std::vector<double>(4, 0.0));
}

TEST(GroupProx, MinimizesMajorizer) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const auto groups = GroupStructure::equal_size(5, 5);
  for (int rep = 0; rep < 200; ++rep) {
    auto p = make_params(u(rng), 0.5 * u(rng), groups);
    p.feature_weights = {u(rng), u(rng), 0.0, 1.0, 2.0 * u(rng)};
    const double t = 0.1 + u(rng);
    const auto b0 = random_vector(5, rng);
    const auto grad = random_vector(5, rng);
    const auto b = group_prox_update(b0, grad, t, p, groups, 0);
    const double w = p.group_weights[0];
    const double at = majorizer(b, b0, grad, t, p, w, p.feature_weights);
    EXPECT_LE(at, majorizer(b0, b0, grad, t, p, w, p.feature_weights) + 1e-12);
    for (int k = 0; k < 20; ++k) {
      auto other = b;
      for (auto& v : other) v += 1e-3 * random_vector(1, rng)[0];
      EXPECT_LE(at, majorizer(other, b0, grad, t, p, w, p.feature_weights) + 1e-12);
    }
  }
}

TEST(GroupProx, LassoAndGroupLassoReductions) {
  std::mt19937_64 rng(4);
  const auto groups = GroupStructure::equal_size(6, 6);
  const auto b0 = random_vector(6, rng);
  const auto grad = random_vector(6, rng);
  const double t = 0.7;
  std::vector<double> v(6);
  for (int j = 0; j < 6; ++j) v[j] = b0[j] - t * grad[j];

  const auto lasso = make_params(1.0, 0.4, groups);
  const auto soft = soft_threshold(v, std::vector<double>(6, t * 0.4));
  const auto got = group_prox_update(b0, grad, t, lasso, groups, 0);
  for (int j = 0; j < 6; ++j) EXPECT_NEAR(got[j], soft[j], 1e-15);

  const auto glasso = make_params(0.0, 0.4, groups);
  double nrm = 0.0;
  for (double x : v) nrm += x * x;
  nrm = std::sqrt(nrm);
  const double factor = std::max(0.0, 1.0 - t * 0.4 * std::sqrt(6.0) / nrm);
  const auto got_g = group_prox_update(b0, grad, t, glasso, groups, 0);
  for (int j = 0; j < 6; ++j) EXPECT_NEAR(got_g[j], factor * v[j], 1e-14);
}

TEST(GroupProx, OutputRespectsBounds) {
  std::mt19937_64 rng(9);
  const auto groups = GroupStructure::equal_size(4, 2);
  auto p = make_params(0.5, 0.01, groups);
  p.lower_bounds = {-0.1, 0.0, -kInf, -0.5};
  p.upper_bounds = {0.1, kInf, 0.0, 0.2};
  p.resolve(groups);
  for (int rep = 0; rep < 100; ++rep) {
    const auto b0 = random_vector(4, rng, 3.0);
    const auto grad = random_vector(4, rng, 3.0);
    for (Index g = 0; g < 2; ++g) {
      const auto cols = groups.range(g);
      const auto out = group_prox_update(std::span(b0).subspan(cols.begin, 2),
                                         std::span(grad).subspan(cols.begin, 2), 1.0, p, groups, g);
      for (Index j = cols.begin; j < cols.end; ++j) {
        EXPECT_GE(out[j - cols.begin], p.lower_bounds[j]);
        EXPECT_LE(out[j - cols.begin], p.upper_bounds[j]);
      }
    }
  }
}

TEST(GroupProx, RejectsNonFiniteInput) {
  const auto groups = GroupStructure::equal_size(2, 2);
  const auto p = make_params(0.5, 0.1, groups);
  const std::vector<double> bad{std::nan(""), 0.0}, ok{0.0, 0.0};
  EXPECT_THROW(group_prox_update(bad, ok, 1.0, p, groups, 0), Error);
  EXPECT_THROW(group_prox_update(ok, ok, 0.0, p, groups, 0), Error);
}

TEST(PenaltyParams, Validation) {
  const auto groups = GroupStructure::equal_size(4, 2);
  PenaltyParams p;
  p.alpha = 1.5;
  EXPECT_THROW(p.resolve(groups), Error);
  p.alpha = 0.5;
  p.lambda = -1.0;
  EXPECT_THROW(p.resolve(groups), Error);
  p.lambda = 0.1;
  p.group_weights = {1.0, 0.0};
  EXPECT_THROW(p.resolve(groups), Error);
  p.group_weights = {};
  p.lower_bounds = {0.1, 0, 0, 0};
  p.upper_bounds = {1, 1, 1, 1};
  EXPECT_THROW(p.resolve(groups), Error);
  p.lower_bounds = {};
  p.upper_bounds = {};
  p.feature_weights = {1.0, -1.0, 1.0, 1.0};
  EXPECT_THROW(p.resolve(groups), Error);
  p.feature_weights = {1.0, 0.0, 1.0, 1.0};
  EXPECT_NO_THROW(p.resolve(groups));
  EXPECT_NEAR(p.group_weights[0], std::sqrt(2.0), 1e-15);
}

TEST(SubgradNorm, Examples) {
  EXPECT_EQ(group_subgrad_norm(std::vector<double>{0, 0}, 0.5, 1.0, std::vector<double>{1, 1}), 0.0);
  EXPECT_EQ(group_subgrad_norm(std::vector<double>{2, -2}, 1.0, 2.0, std::vector<double>{1, 1}), 0.0);
  for (double scale : {0.0, 1.0, 17.0}) {
    EXPECT_DOUBLE_EQ(group_subgrad_norm(std::vector<double>{3, 4}, 0.0, scale, std::vector<double>{1, 1}), 5.0);
  }
}

TEST(Objective, ZeroCoefficientsGiveHalfMeanSquare) {
  std::mt19937_64 rng(1);
  const auto groups = GroupStructure::equal_size(6, 3);
  const DesignMatrix x = random_dense(10, 6, rng);
  const auto y = random_vector(10, rng);
  const auto p = make_params(0.5, 3.0, groups);
  double ss = 0.0;
  for (double v : y) ss += v * v;
  EXPECT_NEAR(objective(x, y, std::vector<double>(6, 0.0), 0.0, p, groups, Family::kGaussian), ss / 20,
              1e-14);
}

TEST(Objective, LambdaZeroIsTheLoss) {
  std::mt19937_64 rng(6);
  const auto groups = GroupStructure::equal_size(6, 3);
  const DesignMatrix x = random_dense(10, 6, rng);
  const auto y = random_vector(10, rng);
  const auto b = random_vector(6, rng);
  const auto p = make_params(0.5, 0.0, groups);
  auto eta = matvec(x, b);
  for (auto& e : eta) e += 0.3;
  EXPECT_DOUBLE_EQ(objective(x, y, b, 0.3, p, groups, Family::kGaussian),
                   family_loss(Family::kGaussian, y, eta));
}

// Written straight from the definition, row by row.
double direct_objective(const DenseMatrix& x, const std::vector<double>& y, const std::vector<double>& b,
                        double b0, double alpha, double lambda, const GroupStructure& groups,
                        const std::vector<double>& omega, bool binomial) {
  const Index n = x.rows();
  double loss = 0.0;
  for (Index i = 0; i < n; ++i) {
    double eta = b0;
    for (Index j = 0; j < x.cols(); ++j) eta += x(i, j) * b[j];
    loss += binomial ? std::log(1.0 + std::exp(-y[i] * eta)) : 0.5 * (y[i] - eta) * (y[i] - eta);
  }
  loss /= static_cast<double>(n);
  double pen = 0.0;
  for (Index g = 0; g < groups.n_groups(); ++g) {
    double ss = 0.0;
    for (Index j = groups.range(g).begin; j < groups.range(g).end; ++j) ss += b[j] * b[j];
    pen += (1 - alpha) * lambda * std::sqrt(static_cast<double>(groups.size(g))) * std::sqrt(ss);
  }
  for (std::size_t j = 0; j < b.size(); ++j) pen += alpha * lambda * omega[j] * std::abs(b[j]);
  return loss + pen;
}

TEST(Objective, MatchesDirectFormula) {
  std::mt19937_64 rng(33);
  const auto groups = GroupStructure::from_ids(std::vector<Index>{1, 1, 2, 3, 3, 3, 4});
  for (int rep = 0; rep < 20; ++rep) {
    const auto xd = random_dense(12, 7, rng);
    const DesignMatrix x = xd;
    const auto b = random_vector(7, rng);
    auto p = make_params(0.3, 0.2, groups);
    p.feature_weights = {1, 0.5, 2, 0, 1, 1, 3};
    auto y = random_vector(12, rng);
    EXPECT_NEAR(objective(x, y, b, 0.1, p, groups, Family::kGaussian),
                direct_objective(xd, y, b, 0.1, 0.3, 0.2, groups, p.feature_weights, false), 1e-12);
    for (auto& v : y) v = v > 0 ? 1.0 : -1.0;
    EXPECT_NEAR(objective(x, y, b, -0.2, p, groups, Family::kBinomial),
                direct_objective(xd, y, b, -0.2, 0.3, 0.2, groups, p.feature_weights, true), 1e-12);
  }
}

TEST(Objective, IsConvex) {
  std::mt19937_64 rng(71);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const auto groups = GroupStructure::equal_size(8, 3);
  const DesignMatrix x = random_dense(15, 8, rng);
  auto y = random_vector(15, rng);
  const auto p = make_params(0.4, 0.3, groups);
  for (Family fam : {Family::kGaussian, Family::kBinomial}) {
    if (fam == Family::kBinomial) {
      for (auto& v : y) v = v > 0 ? 1.0 : -1.0;
    }
    for (int rep = 0; rep < 100; ++rep) {
      const auto b1 = random_vector(8, rng), b2 = random_vector(8, rng);
      const double c1 = u(rng), c2 = u(rng), th = u(rng);
      std::vector<double> mid(8);
      for (int j = 0; j < 8; ++j) mid[j] = th * b1[j] + (1 - th) * b2[j];
      const double lhs = objective(x, y, mid, th * c1 + (1 - th) * c2, p, groups, fam);
      const double rhs = th * objective(x, y, b1, c1, p, groups, fam) +
                         (1 - th) * objective(x, y, b2, c2, p, groups, fam);
      EXPECT_LE(lhs, rhs + 1e-12);
    }
  }
}

TEST(Family, BinomialRecoding) {
  const auto r = prepare_response(std::vector<double>{3, 7, 7, 3}, Family::kBinomial);
  EXPECT_EQ(r.values, (std::vector<double>{-1, 1, 1, -1}));
  EXPECT_EQ(r.levels[0], 3.0);
  EXPECT_EQ(r.levels[1], 7.0);
  EXPECT_THROW(prepare_response(std::vector<double>{1, 1, 1}, Family::kBinomial), Error);
  EXPECT_THROW(prepare_response(std::vector<double>{0, 1, 2}, Family::kBinomial), Error);
  EXPECT_EQ(parse_family("binomial"), Family::kBinomial);
  EXPECT_THROW(parse_family("poisson"), Error);
}

TEST(Family, StableLogistic) {
  EXPECT_NEAR(softplus(800.0), 800.0, 1e-12);
  EXPECT_NEAR(softplus(-800.0), 0.0, 1e-300);
  EXPECT_NEAR(softplus(0.0), std::log(2.0), 1e-15);
  EXPECT_EQ(sigmoid(0.0), 0.5);
  EXPECT_NEAR(sigmoid(-800.0), 0.0, 1e-300);
  EXPECT_NEAR(sigmoid(40.0) + sigmoid(-40.0), 1.0, 1e-15);
}

}  // namespace
}  // namespace sgl

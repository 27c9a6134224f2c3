#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "sglpath/model.hpp"
#include "sglpath/solver.hpp"
#include "test_support.hpp"

namespace sgl {
namespace {

using testing::random_dense;
using testing::random_vector;

struct Fitted {
  DenseMatrix x;
  std::vector<double> y;
  GroupStructure groups;
  SolutionPath path;
};

Fitted gaussian_fit(std::uint64_t seed, Index nlambda = 20) {
  const auto sim = testing::simulate_alternating(60, 20, 4, 5.0, seed);
  FitConfig config;
  config.alpha = 0.5;
  config.nlambda = nlambda;
  config.lambda_min_ratio = 0.01;
  return {sim.x, sim.y, sim.groups, fit_path(DesignMatrix(sim.x), sim.y, sim.groups, config)};
}

Fitted binomial_fit(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto x = random_dense(80, 12, rng);
  auto beta = random_vector(12, rng);
  const auto y = testing::binary_labels(testing::dense_matvec(x, beta), rng);
  const auto groups = GroupStructure::equal_size(12, 3);
  FitConfig config;
  config.family = Family::kBinomial;
  config.nlambda = 15;
  config.lambda_min_ratio = 0.05;
  return {x, y, groups, fit_path(DesignMatrix(x), y, groups, config)};
}

TEST(CoefAt, GridHitsAreExact) {
  const auto f = gaussian_fit(1);
  const auto c = coef_at(f.path, f.path.lambdas);
  for (Index m = 0; m < f.path.size(); ++m) {
    const auto got = DesignMatrix(c.beta).to_dense();
    const auto want = f.path.beta(m);
    for (Index j = 0; j < 20; ++j) EXPECT_EQ(got(j, m), want[j]);
    EXPECT_EQ(c.intercepts[m], f.path.intercepts[m]);
    EXPECT_FALSE(c.clamped[m]);
  }
}

TEST(CoefAt, MidpointIsAverage) {
  const auto f = gaussian_fit(2);
  for (Index k = 0; k + 1 < f.path.size(); ++k) {
    const double s = 0.5 * (f.path.lambdas[k] + f.path.lambdas[k + 1]);
    const auto c = coef_at(f.path, std::vector<double>{s});
    const auto got = DesignMatrix(c.beta).to_dense();
    const auto a = f.path.beta(k), b = f.path.beta(k + 1);
    for (Index j = 0; j < 20; ++j) EXPECT_NEAR(got(j, 0), 0.5 * (a[j] + b[j]), 1e-15);
    EXPECT_NEAR(c.intercepts[0], 0.5 * (f.path.intercepts[k] + f.path.intercepts[k + 1]), 1e-14);
  }
}

TEST(CoefAt, InterpolationStaysBetweenNeighbours) {
  const auto f = gaussian_fit(3);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u;
  for (Index k = 0; k + 1 < f.path.size(); ++k) {
    const double th = u(rng);
    const double s = th * f.path.lambdas[k] + (1 - th) * f.path.lambdas[k + 1];
    const auto got = DesignMatrix(coef_at(f.path, std::vector<double>{s}).beta).to_dense();
    const auto a = f.path.beta(k), b = f.path.beta(k + 1);
    for (Index j = 0; j < 20; ++j) {
      EXPECT_GE(got(j, 0), std::min(a[j], b[j]) - 1e-15);
      EXPECT_LE(got(j, 0), std::max(a[j], b[j]) + 1e-15);
    }
  }
}

TEST(CoefAt, ClampsOutsideTheGrid) {
  const auto f = gaussian_fit(4);
  const Index last = f.path.size() - 1;
  const auto c = coef_at(f.path, std::vector<double>{f.path.lambdas[last] / 10, f.path.lambdas[0] * 10});
  EXPECT_TRUE(c.clamped[0]);
  EXPECT_TRUE(c.clamped[1]);
  const auto got = DesignMatrix(c.beta).to_dense();
  const auto want = f.path.beta(last);
  for (Index j = 0; j < 20; ++j) {
    EXPECT_EQ(got(j, 0), want[j]);
    EXPECT_EQ(got(j, 1), 0.0);
  }
  EXPECT_THROW(coef_at(f.path, std::vector<double>{}), Error);
}

TEST(Predict, ZeroColumnGivesIntercept) {
  const auto f = gaussian_fit(5);
  const auto pred = predict(f.path, DesignMatrix(f.x), std::vector<double>{f.path.lambdas[0]}, PredictKind::kLink);
  for (Index i = 0; i < f.x.rows(); ++i) EXPECT_EQ(pred(i, 0), f.path.intercepts[0]);
}

TEST(Predict, MatchesDenseMultiply) {
  const auto f = gaussian_fit(6);
  const Index m = f.path.size() - 1;
  const auto pred = predict(f.path, DesignMatrix(f.x), std::vector<double>{f.path.lambdas[m]}, PredictKind::kResponse);
  const auto ref = testing::dense_matvec(f.x, f.path.beta(m));
  for (Index i = 0; i < f.x.rows(); ++i) EXPECT_NEAR(pred(i, 0), ref[i] + f.path.intercepts[m], 1e-10);
}

TEST(Predict, LinkIsAffineInCoefficients) {
  const auto f = gaussian_fit(7);
  std::mt19937_64 rng(7);
  const auto newx = random_dense(10, 20, rng);
  const double l1 = f.path.lambdas[5], l2 = f.path.lambdas[6], th = 0.3;
  const auto p1 = predict(f.path, DesignMatrix(newx), std::vector<double>{l1}, PredictKind::kLink);
  const auto p2 = predict(f.path, DesignMatrix(newx), std::vector<double>{l2}, PredictKind::kLink);
  const auto mid = predict(f.path, DesignMatrix(newx), std::vector<double>{th * l1 + (1 - th) * l2}, PredictKind::kLink);
  for (Index i = 0; i < 10; ++i) EXPECT_NEAR(mid(i, 0), th * p1(i, 0) + (1 - th) * p2(i, 0), 1e-12);
}

TEST(Predict, BinomialResponseAndClass) {
  const auto f = binomial_fit(8);
  EXPECT_TRUE(f.path.all_converged());
  const auto s = f.path.lambdas;
  const auto link = predict(f.path, DesignMatrix(f.x), s, PredictKind::kLink);
  const auto resp = predict(f.path, DesignMatrix(f.x), s, PredictKind::kResponse);
  const auto cls = predict(f.path, DesignMatrix(f.x), s, PredictKind::kClass);
  for (Index i = 0; i < link.rows(); ++i) {
    for (Index k = 0; k < link.cols(); ++k) {
      EXPECT_NEAR(resp(i, k), 1.0 / (1.0 + std::exp(-link(i, k))), 1e-15);
      EXPECT_TRUE(cls(i, k) == 0.0 || cls(i, k) == 1.0);
      EXPECT_EQ(cls(i, k), resp(i, k) > 0.5 ? 1.0 : 0.0);
    }
  }
}

TEST(Predict, LinkZeroIsResponseHalf) {
  SolutionPath path;
  path.family = Family::kBinomial;
  path.alpha = 0.5;
  path.lambdas = {1.0};
  path.intercepts = {0.0};
  path.groups = GroupStructure::equal_size(2, 2);
  path.group_weights = path.groups.default_weights();
  path.feature_weights = {1.0, 1.0};
  path.coefficients = SparseColumnMatrix(2, 1, {0, 0}, {}, {});
  path.diagnostics.resize(1);
  path.finalize();
  const DesignMatrix x = DenseMatrix(3, 2, {1, 2, 3, 4, 5, 6});
  const auto resp = predict(path, x, std::vector<double>{1.0}, PredictKind::kResponse);
  for (Index i = 0; i < 3; ++i) EXPECT_EQ(resp(i, 0), 0.5);
}

TEST(Predict, Errors) {
  const auto f = gaussian_fit(9);
  std::mt19937_64 rng(9);
  EXPECT_THROW(predict(f.path, DesignMatrix(random_dense(4, 19, rng)), std::vector<double>{0.1}, PredictKind::kLink),
               Error);
  EXPECT_THROW(predict(f.path, DesignMatrix(f.x), std::vector<double>{0.1}, PredictKind::kClass), Error);
  EXPECT_THROW(parse_predict_kind("probability"), Error);
}

TEST(PathSummary, AllZeroPath) {
  const auto f = gaussian_fit(10);
  FitConfig config;
  config.lambdas = {f.path.lambda_max * 3, f.path.lambda_max * 2};
  const auto zero = fit_path(DesignMatrix(f.x), f.y, f.groups, config);
  for (const auto& r : path_summary(zero).rows) {
    EXPECT_EQ(r.nnzero, 0);
    EXPECT_EQ(r.active_groups, 0);
  }
}

TEST(PathSummary, SingleGroupOfFive) {
  // Only the first group of five carries signal and a single lambda below its threshold is fitted.
  std::mt19937_64 rng(11);
  const auto x = random_dense(100, 10, rng);
  std::vector<double> beta(10, 0.0);
  for (int j = 0; j < 5; ++j) beta[j] = 2.0;
  auto y = testing::dense_matvec(x, beta);
  const auto groups = GroupStructure::equal_size(10, 5);
  FitConfig config;
  config.alpha = 0.5;
  const double lmax = fit_path(DesignMatrix(x), y, groups, config).lambda_max;
  config.lambdas = {0.9 * lmax};
  const auto path = fit_path(DesignMatrix(x), y, groups, config);
  const auto rows = path_summary(path).rows;
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_LE(rows[0].nnzero, 5);
  EXPECT_GT(rows[0].nnzero, 0);
  EXPECT_EQ(rows[0].active_groups, 1);
}

TEST(PathSummary, CountsMatchBruteForce) {
  const auto sim = testing::simulate_alternating(100, 50, 10, 1.0, 12);
  FitConfig config;
  config.alpha = 0.2;
  const auto path = fit_path(DesignMatrix(sim.x), sim.y, sim.groups, config);
  const auto summary = path_summary(path);
  ASSERT_EQ(static_cast<Index>(summary.rows.size()), path.size());
  for (Index m = 0; m < path.size(); ++m) {
    const auto b = path.beta(m);
    Index nnz = 0, active = 0;
    for (Index g = 0; g < sim.groups.n_groups(); ++g) {
      bool any = false;
      for (Index j = sim.groups.range(g).begin; j < sim.groups.range(g).end; ++j) {
        if (b[j] != 0.0) {
          ++nnz;
          any = true;
        }
      }
      active += any;
    }
    EXPECT_EQ(summary.rows[m].nnzero, nnz);
    EXPECT_EQ(summary.rows[m].active_groups, active);
    EXPECT_EQ(summary.rows[m].index, m + 1);
    EXPECT_EQ(summary.rows[m].lambda, path.lambdas[m]);
  }
}

TEST(PathSummary, QuantileRows) {
  const auto f = gaussian_fit(13, 100);
  ASSERT_EQ(f.path.size(), 100);
  const auto q = path_summary(f.path).quantiles;
  ASSERT_EQ(q.size(), 5u);
  const std::vector<std::string> labels{"Max.", "3rd Qu.", "Median", "1st Qu.", "Min."};
  const std::vector<Index> index{1, 26, 50, 75, 100};
  for (int k = 0; k < 5; ++k) {
    EXPECT_EQ(q[k].label, labels[k]);
    EXPECT_EQ(q[k].index, index[k]);
    EXPECT_EQ(q[k].lambda, f.path.lambdas[index[k] - 1]);
  }
}

TEST(SolutionPath, FinalizeRejectsIncreasingLambdas) {
  auto f = gaussian_fit(14, 3);
  std::swap(f.path.lambdas[0], f.path.lambdas[1]);
  EXPECT_THROW(f.path.finalize(), Error);
}

}  // namespace
}  // namespace sgl

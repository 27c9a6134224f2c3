#pragma once

#include <span>
#include <string>
#include <vector>

#include "sglpath/groups.hpp"
#include "sglpath/linalg.hpp"
#include "sglpath/model.hpp"

namespace sgl {

struct DfResult {
  double df = 0.0;
  /// False when the approximation |A| was used instead.
  bool exact = true;
  /// Reason for falling back, empty otherwise.
  std::string warning;
};

struct DfOptions {
  /// Largest number of non-zero coefficients handled by the dense solve.
  Index max_active = 5000;
  /// Largest n * |A| for which X_A is materialized.
  Index max_dense_entries = 200'000'000;
  /// Rank tolerance relative to the largest pivot of X_A.
  double rank_tol = 1e-10;
};

/// Number of non-zero coefficients.
double approx_df(std::span<const double> beta);

/**
 * tr(X_A (X_A^T X_A + n Lambda K)^-1 X_A^T) over the non-zero coordinates A of beta.
 * Block g of Lambda K is n (1 - alpha) lambda w_g (I - b b^T / ||b||^2) / ||b|| with
 * b the non-zero part of beta_g. With `centered`, X_A is column-centered (the
 * contribution of a fitted intercept is then excluded). Falls back to
 * approx_df when X_A is rank deficient or too large.
 */
DfResult exact_df(const DesignMatrix& x, std::span<const double> beta, double lambda, double alpha,
                  const GroupStructure& groups, std::span<const double> group_weights,
                  bool centered, const DfOptions& options = {});

/// log(mse) + (2/n) df
double aic(double mse, double df, Index n);
/// log(mse) + (log(n)/n) df
double bic(double mse, double df, Index n);
/// mse / (1 - df/n)^2, +infinity once df >= n.
double gcv(double mse, double df, Index n);

struct RiskEstimates {
  std::vector<double> lambdas;
  std::vector<double> mse;
  std::vector<double> df;
  std::vector<double> aic;
  std::vector<double> bic;
  std::vector<double> gcv;
  /// Per lambda: whether df came from the exact formula.
  std::vector<bool> exact_df;
  std::vector<std::string> warnings;

  /// Index of the smallest value (first on ties) of aic, bic or gcv.
  Index argmin(const std::string& criterion) const;
};

/// Information criteria along a Gaussian path. `y` is the original response.
RiskEstimates estimate_risk(const SolutionPath& path, const DesignMatrix& x,
                            std::span<const double> y, bool use_approx,
                            const DfOptions& options = {});

}  // namespace sgl

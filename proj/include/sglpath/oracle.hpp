#pragma once

#include <functional>
#include <span>
#include <vector>

#include "sglpath/family.hpp"
#include "sglpath/groups.hpp"
#include "sglpath/linalg.hpp"
#include "sglpath/penalty.hpp"

// Reference implementations for tests and acceptance runs. Nothing here is
// used by the production solver.
namespace sgl::oracle {

struct OracleConfig {
  Index max_iter = 200'000;
  /// Stop once a plain proximal-gradient step lowers the objective by less
  /// than objective_tol * max(1, |objective|).
  double objective_tol = 1e-10;
  /// Monotone accelerated steps (falls back to the plain step whenever the
  /// accelerated candidate does not lower the objective).
  bool accelerate = true;
  bool intercept = true;
};

/// Applies the group update to every group with a common step.
std::vector<double> prox_full(std::span<const double> beta, std::span<const double> grad,
                              double step, const PenaltyParams& params,
                              const GroupStructure& groups);

struct ReferenceSolution {
  std::vector<double> beta;
  double intercept = 0.0;
  double objective = 0.0;
  Index iterations = 0;
  bool converged = false;
  /// Objective value after every accepted iteration.
  std::vector<double> trace;
};

/**
 * Proximal gradient on the full coefficient vector with step 1/L, L the
 * largest eigenvalue of (1/n) [1 X]^T [1 X] (times 1/4 for binomial). Works
 * on a dense copy of X. `y` is in solver form.
 */
ReferenceSolution solve_reference(const DesignMatrix& x, std::span<const double> y,
                                  const GroupStructure& groups, const PenaltyParams& params,
                                  Family family, const OracleConfig& config,
                                  std::span<const double> beta_start = {},
                                  double intercept_start = 0.0);

/// Central differences of f at beta.
std::vector<double> finite_diff_gradient(const std::function<double(std::span<const double>)>& f,
                                         std::span<const double> beta, double h = 1e-6);

/// Gradient of the unpenalized loss at (beta, intercept), computed row by row.
std::vector<double> loss_gradient(const DenseMatrix& x, std::span<const double> y,
                                  std::span<const double> beta, double intercept, Family family);

struct KktReport {
  /// Largest excess of ||S(grad_g, alpha lambda omega_g)||_2 over (1 - alpha) lambda w_g among zero groups.
  double zero_group_excess = 0.0;
  /// Largest stationarity residual over non-zero coordinates of non-zero groups.
  double stationarity = 0.0;
  /// Largest excess of |grad_j| over alpha lambda omega_j for zero coordinates of non-zero groups.
  double zero_coordinate_excess = 0.0;

  double worst() const;
};

/// First-order optimality residuals of (beta, intercept) at params.lambda; unbounded problems only.
KktReport check_optimality(const DenseMatrix& x, std::span<const double> y,
                           std::span<const double> beta, double intercept,
                           const PenaltyParams& params, const GroupStructure& groups,
                           Family family);

}  // namespace sgl::oracle

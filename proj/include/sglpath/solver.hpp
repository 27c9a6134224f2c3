#pragma once

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "sglpath/family.hpp"
#include "sglpath/groups.hpp"
#include "sglpath/linalg.hpp"
#include "sglpath/model.hpp"
#include "sglpath/penalty.hpp"

namespace sgl {

enum class Screening {
  /// Sequential strong rule with active-set iteration and KKT repair.
  kStrongRule,
  /// Every group is visited in every sweep.
  kNone,
};

struct SweepEvent {
  Index lambda_index = 0;
  /// Increments once per fit_fixed_lambda call.
  Index call = 0;
  /// 0 for the objective before the first sweep.
  Index sweep = 0;
  double objective = 0.0;
};

struct FitConfig {
  Family family = Family::kGaussian;
  double alpha = 0.95;
  Index nlambda = 100;
  /// Defaults to 1e-2 when n < p, else 1e-4.
  std::optional<double> lambda_min_ratio;
  /// User grid; must be strictly decreasing and positive. Overrides nlambda.
  std::vector<double> lambdas;
  double tol = 1e-8;
  /// Group-update budget per lambda.
  Index max_group_visits = 3'000'000;
  bool intercept = true;
  bool standardize = false;
  std::vector<double> group_weights;
  std::vector<double> feature_weights;
  std::vector<double> lower_bounds;
  std::vector<double> upper_bounds;
  Screening screening = Screening::kStrongRule;
  double kkt_slack = 1e-6;
  int max_kkt_loops = 100;
  double power_tol = 1e-6;
  int power_max_iter = 500;
  /// When set, called with the objective before and after every sweep (costly).
  std::function<void(const SweepEvent&)> sweep_observer;

  void validate() const;
};

/// The data a fit works on: X, the response in solver form and the grouping.
struct Problem {
  const DesignMatrix& x;
  const Response& y;
  const GroupStructure& groups;

  Family family() const { return y.family; }
  Index n() const { return x.rows(); }
};

/**
 * Mutable solver state. `work` holds the vector whose inner product with a
 * column gives -n times the gradient: the residual y - X beta - b for the
 * Gaussian family, y * sigmoid(-y eta) for the binomial family.
 */
struct SolverState {
  std::vector<double> beta;
  double intercept = 0.0;
  std::vector<double> work;
  /// Linear predictor X beta + b (binomial only).
  std::vector<double> eta;
  /// Step size t_g per group; 0 marks a group whose columns are all zero.
  std::vector<double> step;
  std::vector<char> in_active;
  std::vector<char> in_strong;
  /// Gradient at the most recent evaluation of each group.
  std::vector<double> grad;
  Index lambda_index = 0;
  Index observer_calls = 0;

  /// Zero coefficients with the null-model intercept (when `fit_intercept`).
  static SolverState initial(const Problem& problem, bool fit_intercept);

  /// Recomputes `work` (and `eta`) from beta and the intercept.
  void refresh(const Problem& problem);
};

/// Per-group step sizes from power iteration (quarter-scaled Lipschitz bound for binomial).
std::vector<double> group_step_sizes(const Problem& problem, const FitConfig& config);

/// Intercept of the model with all coefficients zero.
double null_intercept(const Response& y);

/// Gradient of the unpenalized loss with respect to beta_g at the current state.
std::vector<double> gradient_group(const Problem& problem, const SolverState& state, Index g);

struct ConvergenceReport {
  bool converged = true;
  Index sweeps = 0;
  Index group_visits = 0;
  double max_change = 0.0;
};

/**
 * Blockwise majorization-minimization sweeps over `groups_to_visit` at the
 * fixed penalty in `params`, each sweep followed by an intercept update.
 * Stops when the largest coefficient change is at most tol * max(1, ||beta||_inf)
 * or after `visit_budget` group updates.
 */
ConvergenceReport fit_fixed_lambda(const Problem& problem, SolverState& state,
                                   const PenaltyParams& params,
                                   std::span<const Index> groups_to_visit, const FitConfig& config,
                                   Index visit_budget);

/**
 * Sequential strong rule. Returns the groups outside the strong set whose
 * gradient at the previous solution (`grad_prev`) fails the discard test
 *   ||S(grad_g, alpha (2 lambda_curr - lambda_prev) omega_g)||_2
 *       <= (1 - alpha) w_g (2 lambda_curr - lambda_prev).
 */
std::vector<Index> strong_screen(std::span<const double> grad_prev,
                                 std::span<const char> in_strong, double lambda_prev,
                                 double lambda_curr, const PenaltyParams& params,
                                 const GroupStructure& groups);

/**
 * Groups among `groups_to_check` that are zero and violate
 *   ||S(grad_g, alpha lambda omega_g)||_2 <= (1 - alpha) lambda w_g (1 + slack).
 * Refreshes state.grad for every checked group.
 */
std::vector<Index> kkt_check(const Problem& problem, SolverState& state,
                             const PenaltyParams& params, std::span<const Index> groups_to_check,
                             double slack);

/// Smallest lambda at which beta_g = 0 is optimal given the gradient c_g at the null model.
double group_lambda_threshold(std::span<const double> c_g, double alpha, double group_weight,
                              std::span<const double> omega_g);

/**
 * Smallest lambda for which the all-zero coefficient vector is optimal.
 * `params` supplies alpha and (resolved) weights; lambda is ignored.
 */
double lambda_max(const DesignMatrix& x, const Response& y, const GroupStructure& groups,
                  const PenaltyParams& params, bool fit_intercept);

/// Validated user grid, or nlambda log-spaced values from lambda_max down to lambda_max * ratio.
std::vector<double> lambda_sequence(double lambda_max, const FitConfig& config, Index n, Index p);

/// Full regularization path.
SolutionPath fit_path(const DesignMatrix& x, std::span<const double> y,
                      const GroupStructure& groups, const FitConfig& config);

}  // namespace sgl

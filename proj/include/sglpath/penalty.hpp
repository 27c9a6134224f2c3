#pragma once

#include <span>
#include <vector>

#include "sglpath/family.hpp"
#include "sglpath/groups.hpp"
#include "sglpath/linalg.hpp"

namespace sgl {

/**
 * Penalty  (1 - alpha) lambda sum_g w_g ||beta_g||_2 + alpha lambda sum_j omega_j |beta_j|
 * plus the box constraint lower_j <= beta_j <= upper_j. Empty weight or bound
 * vectors mean the defaults (sqrt(group size), 1, unbounded).
 */
struct PenaltyParams {
  double alpha = 0.95;
  double lambda = 0.0;
  std::vector<double> group_weights;
  std::vector<double> feature_weights;
  std::vector<double> lower_bounds;
  std::vector<double> upper_bounds;

  /// Fills empty weight/bound vectors with defaults and checks every invariant.
  void resolve(const GroupStructure& groups);

  bool has_bounds() const { return !lower_bounds.empty(); }
};

/// out_j = sign(v_j) max(|v_j| - b_j, 0)
std::vector<double> soft_threshold(std::span<const double> v, std::span<const double> b);

/**
 * Majorized block update for group g:
 *   z = S(beta0 - t grad, t alpha lambda omega_g)
 *   result = (1 - t (1 - alpha) lambda w_g / ||z||_2)_+ z, clamped into the bounds.
 * The zero vector is returned when ||z||_2 = 0.
 */
std::vector<double> group_prox_update(std::span<const double> beta0, std::span<const double> grad,
                                      double t, const PenaltyParams& params,
                                      const GroupStructure& groups, Index g);

/// Allocation-free form of group_prox_update used by the solver; `out` has the group's size.
void group_prox_update_into(std::span<const double> beta0, std::span<const double> grad, double t,
                            const PenaltyParams& params, ColumnRange cols, double group_weight,
                            std::span<double> out);

/// ||S(grad_g, thresh_scale * alpha * omega_g)||_2
double group_subgrad_norm(std::span<const double> grad_g, double alpha, double thresh_scale,
                          std::span<const double> omega_g);

/// Penalty term at beta (lambda included).
double penalty_value(std::span<const double> beta, const PenaltyParams& params,
                     const GroupStructure& groups);

/// Full penalized objective; y is in solver form (see prepare_response).
double objective(const DesignMatrix& x, std::span<const double> y, std::span<const double> beta,
                 double intercept, const PenaltyParams& params, const GroupStructure& groups,
                 Family family);

}  // namespace sgl

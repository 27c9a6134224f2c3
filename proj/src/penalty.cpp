#include "sglpath/penalty.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace sgl {

void PenaltyParams::resolve(const GroupStructure& groups) {
  const Index p = groups.n_features();
  const Index n_groups = groups.n_groups();
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw Error("alpha must lie in [0, 1]");
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw Error("lambda must be finite and >= 0");

  if (group_weights.empty()) group_weights = groups.default_weights();
  if (static_cast<Index>(group_weights.size()) != n_groups) {
    throw Error("expected " + std::to_string(n_groups) + " group weights, got " +
                std::to_string(group_weights.size()));
  }
  for (double w : group_weights) {
    if (!(w > 0.0) || !std::isfinite(w)) throw Error("group weights must be finite and > 0");
  }

  if (feature_weights.empty()) feature_weights.assign(static_cast<std::size_t>(p), 1.0);
  if (static_cast<Index>(feature_weights.size()) != p) {
    throw Error("expected " + std::to_string(p) + " feature weights, got " +
                std::to_string(feature_weights.size()));
  }
  for (double w : feature_weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw Error("feature weights must be finite and >= 0");
  }

  if (lower_bounds.empty() != upper_bounds.empty()) {
    throw Error("lower and upper bounds must be given together");
  }
  if (!lower_bounds.empty()) {
    if (static_cast<Index>(lower_bounds.size()) != p ||
        static_cast<Index>(upper_bounds.size()) != p) {
      throw Error("expected " + std::to_string(p) + " bounds per side");
    }
    for (Index j = 0; j < p; ++j) {
      if (!(lower_bounds[j] <= 0.0) || !(upper_bounds[j] >= 0.0)) {
        throw Error("bounds for feature " + std::to_string(j + 1) + " must satisfy lower <= 0 <= upper");
      }
    }
    const bool trivial = std::all_of(lower_bounds.begin(), lower_bounds.end(),
                                     [](double v) { return std::isinf(v); }) &&
                         std::all_of(upper_bounds.begin(), upper_bounds.end(),
                                     [](double v) { return std::isinf(v); });
    if (trivial) {
      lower_bounds.clear();
      upper_bounds.clear();
    }
  }
}

std::vector<double> soft_threshold(std::span<const double> v, std::span<const double> b) {
  if (v.size() != b.size()) throw Error("soft_threshold: length mismatch");
  std::vector<double> out(v.size());
  for (std::size_t j = 0; j < v.size(); ++j) {
    if (!(b[j] >= 0.0)) throw Error("soft_threshold: thresholds must be >= 0");
    const double mag = std::abs(v[j]) - b[j];
    out[j] = mag > 0.0 ? std::copysign(mag, v[j]) : 0.0;
  }
  return out;
}

void group_prox_update_into(std::span<const double> beta0, std::span<const double> grad, double t,
                            const PenaltyParams& params, ColumnRange cols, double group_weight,
                            std::span<double> out) {
  const double l1 = t * params.alpha * params.lambda;
  double sq = 0.0;
  for (Index k = 0; k < cols.size(); ++k) {
    const double v = beta0[k] - t * grad[k];
    const double mag = std::abs(v) - l1 * params.feature_weights[cols.begin + k];
    const double z = mag > 0.0 ? std::copysign(mag, v) : 0.0;
    out[k] = z;
    sq += z * z;
  }
  const double norm = std::sqrt(sq);
  const double shrink = norm > 0.0
                            ? 1.0 - t * (1.0 - params.alpha) * params.lambda * group_weight / norm
                            : 0.0;
  if (shrink <= 0.0) {
    std::fill(out.begin(), out.end(), 0.0);
    return;
  }
  for (auto& v : out) v *= shrink;
  if (params.has_bounds()) {
    for (Index k = 0; k < cols.size(); ++k) {
      const Index j = cols.begin + k;
      out[k] = std::clamp(out[k], params.lower_bounds[j], params.upper_bounds[j]);
    }
  }
}

std::vector<double> group_prox_update(std::span<const double> beta0, std::span<const double> grad,
                                      double t, const PenaltyParams& params,
                                      const GroupStructure& groups, Index g) {
  if (g < 0 || g >= groups.n_groups()) throw Error("group index out of range");
  const auto cols = groups.range(g);
  if (static_cast<Index>(beta0.size()) != cols.size() ||
      static_cast<Index>(grad.size()) != cols.size()) {
    throw Error("group_prox_update: vectors must have the group's size");
  }
  if (!(t > 0.0) || !std::isfinite(t)) throw Error("group_prox_update: step must be finite and > 0");
  for (std::size_t k = 0; k < beta0.size(); ++k) {
    if (!std::isfinite(beta0[k]) || !std::isfinite(grad[k])) {
      throw Error("group_prox_update: non-finite input");
    }
  }
  std::vector<double> out(beta0.size());
  group_prox_update_into(beta0, grad, t, params, cols, params.group_weights.at(g), out);
  return out;
}

double group_subgrad_norm(std::span<const double> grad_g, double alpha, double thresh_scale,
                          std::span<const double> omega_g) {
  const double b = thresh_scale * alpha;
  double sq = 0.0;
  for (std::size_t k = 0; k < grad_g.size(); ++k) {
    const double mag = std::abs(grad_g[k]) - b * omega_g[k];
    if (mag > 0.0) sq += mag * mag;
  }
  return std::sqrt(sq);
}

double penalty_value(std::span<const double> beta, const PenaltyParams& params,
                     const GroupStructure& groups) {
  double group_part = 0.0;
  double l1_part = 0.0;
  for (Index g = 0; g < groups.n_groups(); ++g) {
    const auto cols = groups.range(g);
    double sq = 0.0;
    for (Index j = cols.begin; j < cols.end; ++j) {
      sq += beta[j] * beta[j];
      l1_part += params.feature_weights[j] * std::abs(beta[j]);
    }
    group_part += params.group_weights[g] * std::sqrt(sq);
  }
  return params.lambda * ((1.0 - params.alpha) * group_part + params.alpha * l1_part);
}

double objective(const DesignMatrix& x, std::span<const double> y, std::span<const double> beta,
                 double intercept, const PenaltyParams& params, const GroupStructure& groups,
                 Family family) {
  if (static_cast<Index>(y.size()) != x.rows() || static_cast<Index>(beta.size()) != x.cols() ||
      groups.n_features() != x.cols()) {
    throw Error("objective: inconsistent dimensions");
  }
  auto eta = matvec(x, beta);
  for (double& v : eta) v += intercept;
  return family_loss(family, y, eta) + penalty_value(beta, params, groups);
}

}  // namespace sgl

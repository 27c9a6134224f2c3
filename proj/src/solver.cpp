#include "sglpath/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace sgl {

namespace {

double max_abs(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

bool group_is_zero(std::span<const double> beta, ColumnRange cols) {
  for (Index j = cols.begin; j < cols.end; ++j) {
    if (beta[j] != 0.0) return false;
  }
  return true;
}

double binomial_work(double y, double eta) { return y * sigmoid(-y * eta); }

// Writes -(1/n) X_g^T work into out.
void gradient_into(const Problem& problem, const SolverState& state, ColumnRange cols,
                   std::span<double> out) {
  const double inv_n = 1.0 / static_cast<double>(problem.n());
  for (Index j = cols.begin; j < cols.end; ++j) {
    out[j - cols.begin] = -inv_n * problem.x.column_dot(j, state.work);
  }
}

double state_objective(const Problem& problem, const SolverState& state,
                       const PenaltyParams& params) {
  const double n = static_cast<double>(problem.n());
  double loss = 0.0;
  if (problem.family() == Family::kGaussian) {
    for (double r : state.work) loss += r * r;
    loss /= 2.0 * n;
  } else {
    const auto& y = problem.y.values;
    for (std::size_t i = 0; i < y.size(); ++i) loss += softplus(-y[i] * state.eta[i]);
    loss /= n;
  }
  return loss + penalty_value(state.beta, params, problem.groups);
}

// Gaussian: exact minimization over the intercept. Binomial: one Newton step,
// halved until the loss does not increase. Returns the size of the change.
double update_intercept(const Problem& problem, SolverState& state) {
  const auto n = static_cast<std::size_t>(problem.n());
  if (problem.family() == Family::kGaussian) {
    double sum = 0.0;
    for (double r : state.work) sum += r;
    const double delta = sum / static_cast<double>(n);
    if (delta == 0.0) return 0.0;
    state.intercept += delta;
    for (double& r : state.work) r -= delta;
    return std::abs(delta);
  }
  const auto& y = problem.y.values;
  double grad = 0.0;
  double hess = 0.0;
  double loss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    grad += state.work[i];
    const double p = sigmoid(state.eta[i]);
    hess += p * (1.0 - p);
    loss += softplus(-y[i] * state.eta[i]);
  }
  if (grad == 0.0 || !(hess > 0.0)) return 0.0;
  double delta = grad / hess;
  for (int halving = 0; halving < 30; ++halving, delta *= 0.5) {
    double trial = 0.0;
    double trial_grad = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      trial += softplus(-y[i] * (state.eta[i] + delta));
      trial_grad += binomial_work(y[i], state.eta[i] + delta);
    }
    // Near the optimum the loss change drops below rounding; a step that has not
    // passed the minimizer still lowers the (convex) loss.
    if (trial <= loss || trial_grad * delta >= 0.0) {
      state.intercept += delta;
      for (std::size_t i = 0; i < n; ++i) {
        state.eta[i] += delta;
        state.work[i] = binomial_work(y[i], state.eta[i]);
      }
      return std::abs(delta);
    }
  }
  return 0.0;
}

std::vector<Index> flagged(std::span<const char> flags, bool want) {
  std::vector<Index> out;
  for (std::size_t g = 0; g < flags.size(); ++g) {
    if (static_cast<bool>(flags[g]) == want) out.push_back(static_cast<Index>(g));
  }
  return out;
}

std::vector<Index> flagged_both(std::span<const char> a, bool want_a, std::span<const char> b,
                                bool want_b) {
  std::vector<Index> out;
  for (std::size_t g = 0; g < a.size(); ++g) {
    if (static_cast<bool>(a[g]) == want_a && static_cast<bool>(b[g]) == want_b) {
      out.push_back(static_cast<Index>(g));
    }
  }
  return out;
}

}  // namespace

void FitConfig::validate() const {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw Error("alpha must lie in [0, 1]");
  if (!(tol > 0.0)) throw Error("tol must be > 0");
  if (nlambda < 1) throw Error("nlambda must be at least 1");
  if (lambda_min_ratio && !(*lambda_min_ratio > 0.0 && *lambda_min_ratio < 1.0)) {
    throw Error("lambda_min_ratio must lie in (0, 1)");
  }
  for (std::size_t k = 0; k < lambdas.size(); ++k) {
    if (!(lambdas[k] > 0.0) || !std::isfinite(lambdas[k])) {
      throw Error("lambda values must be finite and > 0");
    }
    if (k > 0 && !(lambdas[k] < lambdas[k - 1])) {
      throw Error("lambda sequence must be strictly decreasing");
    }
  }
  if (max_group_visits < 1) throw Error("max_group_visits must be at least 1");
  if (!(kkt_slack >= 0.0)) throw Error("kkt_slack must be >= 0");
  if (max_kkt_loops < 1) throw Error("max_kkt_loops must be at least 1");
}

double null_intercept(const Response& y) {
  const double n = static_cast<double>(y.values.size());
  if (y.family == Family::kGaussian) {
    double s = 0.0;
    for (double v : y.values) s += v;
    return s / n;
  }
  double positives = 0.0;
  for (double v : y.values) positives += v > 0.0 ? 1.0 : 0.0;
  const double p = positives / n;
  return std::log(p / (1.0 - p));
}

SolverState SolverState::initial(const Problem& problem, bool fit_intercept) {
  SolverState state;
  const auto p = static_cast<std::size_t>(problem.x.cols());
  const auto n_groups = static_cast<std::size_t>(problem.groups.n_groups());
  state.beta.assign(p, 0.0);
  state.grad.assign(p, 0.0);
  state.in_active.assign(n_groups, 0);
  state.in_strong.assign(n_groups, 0);
  state.intercept = fit_intercept ? null_intercept(problem.y) : 0.0;
  state.refresh(problem);
  return state;
}

void SolverState::refresh(const Problem& problem) {
  const auto& y = problem.y.values;
  auto fitted = matvec(problem.x, beta);
  for (double& v : fitted) v += intercept;
  if (problem.family() == Family::kGaussian) {
    work.resize(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) work[i] = y[i] - fitted[i];
    eta.clear();
  } else {
    eta = std::move(fitted);
    work.resize(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) work[i] = binomial_work(y[i], eta[i]);
  }
}

std::vector<double> group_step_sizes(const Problem& problem, const FitConfig& config) {
  const double scale = 1.0 / static_cast<double>(problem.n());
  std::vector<double> steps(static_cast<std::size_t>(problem.groups.n_groups()));
  for (Index g = 0; g < problem.groups.n_groups(); ++g) {
    double lipschitz = group_lipschitz(problem.x, problem.groups.range(g), scale,
                                       config.power_tol, config.power_max_iter)
                           .value;
    if (problem.family() == Family::kBinomial) lipschitz *= 0.25;
    steps[g] = lipschitz > 0.0 ? 1.0 / lipschitz : 0.0;
  }
  return steps;
}

std::vector<double> gradient_group(const Problem& problem, const SolverState& state, Index g) {
  if (g < 0 || g >= problem.groups.n_groups()) throw Error("group index out of range");
  const auto cols = problem.groups.range(g);
  std::vector<double> out(static_cast<std::size_t>(cols.size()));
  gradient_into(problem, state, cols, out);
  return out;
}

ConvergenceReport fit_fixed_lambda(const Problem& problem, SolverState& state,
                                   const PenaltyParams& params,
                                   std::span<const Index> groups_to_visit, const FitConfig& config,
                                   Index visit_budget) {
  ConvergenceReport report;
  if (groups_to_visit.empty()) return report;

  const bool binomial = problem.family() == Family::kBinomial;
  const auto& x = problem.x;
  const auto& groups = problem.groups;
  const auto& y = problem.y.values;

  const Index call = state.observer_calls++;
  auto observe = [&](Index sweep) {
    if (config.sweep_observer) {
      config.sweep_observer(
          {state.lambda_index, call, sweep, state_objective(problem, state, params)});
    }
  };
  observe(0);

  Index max_size = 0;
  for (Index g : groups_to_visit) max_size = std::max(max_size, groups.size(g));
  std::vector<double> grad(static_cast<std::size_t>(max_size));
  std::vector<double> updated(static_cast<std::size_t>(max_size));

  while (true) {
    if (report.group_visits + static_cast<Index>(groups_to_visit.size()) > visit_budget) {
      report.converged = false;
      return report;
    }
    double max_change = 0.0;
    for (Index g : groups_to_visit) {
      ++report.group_visits;
      const double t = state.step[g];
      if (t == 0.0) continue;
      const auto cols = groups.range(g);
      const auto size = static_cast<std::size_t>(cols.size());
      std::span<double> grad_g(grad.data(), size);
      std::span<double> new_beta(updated.data(), size);
      std::span<const double> old_beta(state.beta.data() + cols.begin, size);
      gradient_into(problem, state, cols, grad_g);
      group_prox_update_into(old_beta, grad_g, t, params, cols, params.group_weights[g],
                             new_beta);

      bool changed = false;
      for (Index j = cols.begin; j < cols.end; ++j) {
        const double delta = new_beta[j - cols.begin] - state.beta[j];
        if (delta == 0.0) continue;
        changed = true;
        max_change = std::max(max_change, std::abs(delta));
        state.beta[j] = new_beta[j - cols.begin];
        if (binomial) {
          x.column_axpy(j, delta, state.eta);
        } else {
          x.column_axpy(j, -delta, state.work);
        }
      }
      if (binomial && changed) {
        if (x.is_sparse()) {
          for (Index j = cols.begin; j < cols.end; ++j) {
            for (Index i : x.sparse().column_rows(j)) state.work[i] = binomial_work(y[i], state.eta[i]);
          }
        } else {
          for (std::size_t i = 0; i < y.size(); ++i) state.work[i] = binomial_work(y[i], state.eta[i]);
        }
      }
    }
    if (config.intercept) max_change = std::max(max_change, update_intercept(problem, state));
    ++report.sweeps;
    observe(report.sweeps);

    double beta_scale = 0.0;
    for (Index g : groups_to_visit) {
      const auto cols = groups.range(g);
      beta_scale = std::max(
          beta_scale, max_abs({state.beta.data() + cols.begin, static_cast<std::size_t>(cols.size())}));
    }
    report.max_change = max_change / std::max(1.0, beta_scale);
    if (report.max_change <= config.tol) return report;
  }
}

std::vector<Index> strong_screen(std::span<const double> grad_prev,
                                 std::span<const char> in_strong, double lambda_prev,
                                 double lambda_curr, const PenaltyParams& params,
                                 const GroupStructure& groups) {
  const double level = 2.0 * lambda_curr - lambda_prev;
  std::vector<Index> added;
  for (Index g = 0; g < groups.n_groups(); ++g) {
    if (in_strong[g]) continue;
    const auto cols = groups.range(g);
    const auto size = static_cast<std::size_t>(cols.size());
    // A negative level means the rule cannot discard anything.
    if (level <= 0.0) {
      added.push_back(g);
      continue;
    }
    const double lhs = group_subgrad_norm({grad_prev.data() + cols.begin, size}, params.alpha,
                                          level, {params.feature_weights.data() + cols.begin, size});
    if (lhs > (1.0 - params.alpha) * params.group_weights[g] * level) added.push_back(g);
  }
  return added;
}

std::vector<Index> kkt_check(const Problem& problem, SolverState& state,
                             const PenaltyParams& params, std::span<const Index> groups_to_check,
                             double slack) {
  std::vector<Index> violators;
  for (Index g : groups_to_check) {
    const auto cols = problem.groups.range(g);
    const auto size = static_cast<std::size_t>(cols.size());
    std::span<double> grad_g(state.grad.data() + cols.begin, size);
    gradient_into(problem, state, cols, grad_g);
    if (!group_is_zero(state.beta, cols)) continue;
    const double lhs = group_subgrad_norm(grad_g, params.alpha, params.lambda,
                                          {params.feature_weights.data() + cols.begin, size});
    const double rhs =
        (1.0 - params.alpha) * params.lambda * params.group_weights[g] * (1.0 + slack);
    if (lhs > rhs) violators.push_back(g);
  }
  return violators;
}

double group_lambda_threshold(std::span<const double> c_g, double alpha, double group_weight,
                              std::span<const double> omega_g) {
  double norm_sq = 0.0;
  for (double c : c_g) norm_sq += c * c;
  if (norm_sq == 0.0) return 0.0;
  const double norm = std::sqrt(norm_sq);

  if (alpha == 1.0) {
    double best = 0.0;
    for (std::size_t k = 0; k < c_g.size(); ++k) {
      if (c_g[k] == 0.0) continue;
      if (omega_g[k] == 0.0) {
        throw Error("unpenalized feature has a non-zero gradient at zero; no finite lambda_max");
      }
      best = std::max(best, std::abs(c_g[k]) / omega_g[k]);
    }
    return best;
  }
  if (alpha == 0.0) return norm / group_weight;

  // ||S(c, alpha lambda omega)||_2 decreases in lambda while (1 - alpha) lambda w increases.
  auto feasible = [&](double lambda) {
    return group_subgrad_norm(c_g, alpha, lambda, omega_g) <= (1.0 - alpha) * lambda * group_weight;
  };
  double lo = 0.0;
  double hi = norm / ((1.0 - alpha) * group_weight);
  for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (feasible(mid)) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

double lambda_max(const DesignMatrix& x, const Response& y, const GroupStructure& groups,
                  const PenaltyParams& params, bool fit_intercept) {
  const Problem problem{x, y, groups};
  const auto state = SolverState::initial(problem, fit_intercept);
  double best = 0.0;
  std::vector<double> c;
  for (Index g = 0; g < groups.n_groups(); ++g) {
    const auto cols = groups.range(g);
    c.resize(static_cast<std::size_t>(cols.size()));
    gradient_into(problem, state, cols, c);
    best = std::max(best, group_lambda_threshold(
                              c, params.alpha, params.group_weights[g],
                              {params.feature_weights.data() + cols.begin, c.size()}));
  }
  return best;
}

std::vector<double> lambda_sequence(double lambda_max, const FitConfig& config, Index n, Index p) {
  if (!config.lambdas.empty()) {
    config.validate();
    return config.lambdas;
  }
  if (!(lambda_max > 0.0) || !std::isfinite(lambda_max)) {
    throw Error("lambda_max must be finite and > 0 to build a lambda sequence");
  }
  const Index m = config.nlambda;
  if (m < 1) throw Error("nlambda must be at least 1");
  const double ratio = config.lambda_min_ratio.value_or(n < p ? 1e-2 : 1e-4);
  std::vector<double> out(static_cast<std::size_t>(m));
  out[0] = lambda_max;
  for (Index k = 1; k < m; ++k) {
    const double frac = static_cast<double>(k) / static_cast<double>(m - 1);
    out[k] = lambda_max * std::exp(frac * std::log(ratio));
  }
  if (m > 1) out[m - 1] = lambda_max * ratio;
  return out;
}

SolutionPath fit_path(const DesignMatrix& x_in, std::span<const double> y_in,
                      const GroupStructure& groups, const FitConfig& config) {
  config.validate();
  const Index n = x_in.rows();
  const Index p = x_in.cols();
  if (static_cast<Index>(y_in.size()) != n) {
    throw Error("response has " + std::to_string(y_in.size()) + " values but X has " +
                std::to_string(n) + " rows");
  }
  if (groups.n_features() != p) {
    throw Error("group structure covers " + std::to_string(groups.n_features()) +
                " features but X has " + std::to_string(p) + " columns");
  }
  if (n < 1 || p < 1) throw Error("X must have at least one row and one column");

  const Response response = prepare_response(y_in, config.family);

  // Column scaling; centering is absorbed by the intercept.
  std::vector<double> scale(static_cast<std::size_t>(p), 1.0);
  std::optional<DesignMatrix> scaled;
  if (config.standardize) {
    std::vector<double> ones(static_cast<std::size_t>(n), 1.0);
    for (Index j = 0; j < p; ++j) {
      const double mean = config.intercept ? x_in.column_dot(j, ones) / static_cast<double>(n) : 0.0;
      const double var = x_in.column_squared_norm(j) / static_cast<double>(n) - mean * mean;
      if (var > 0.0) scale[j] = 1.0 / std::sqrt(var);
    }
    scaled = x_in.scale_columns(scale);
  }
  const DesignMatrix& x = scaled ? *scaled : x_in;

  PenaltyParams params;
  params.alpha = config.alpha;
  params.group_weights = config.group_weights;
  params.feature_weights = config.feature_weights;
  params.lower_bounds = config.lower_bounds;
  params.upper_bounds = config.upper_bounds;
  params.resolve(groups);
  if (params.has_bounds() && config.standardize) {
    for (Index j = 0; j < p; ++j) {
      params.lower_bounds[j] /= scale[j];
      params.upper_bounds[j] /= scale[j];
    }
  }

  const Problem problem{x, response, groups};
  SolverState state = SolverState::initial(problem, config.intercept);
  state.step = group_step_sizes(problem, config);

  const double lam_max = lambda_max(x, response, groups, params, config.intercept);
  const auto lambdas = lambda_sequence(lam_max, config, n, p);

  const Index n_groups = groups.n_groups();
  const bool screening = config.screening == Screening::kStrongRule;
  if (screening) {
    std::vector<Index> all(static_cast<std::size_t>(n_groups));
    for (Index g = 0; g < n_groups; ++g) all[g] = g;
    kkt_check(problem, state, params, all, config.kkt_slack);
  } else {
    std::fill(state.in_active.begin(), state.in_active.end(), 1);
    std::fill(state.in_strong.begin(), state.in_strong.end(), 1);
  }

  SolutionPath path;
  path.family = config.family;
  path.alpha = config.alpha;
  path.intercept = config.intercept;
  path.lambda_max = lam_max;
  path.groups = groups;
  path.group_weights = params.group_weights;
  path.feature_weights = params.feature_weights;
  path.class_levels = response.levels;

  std::vector<Index> col_ptr{0};
  std::vector<Index> row_idx;
  std::vector<double> values;

  double lambda_prev = std::max(lam_max, lambdas.front());
  for (std::size_t m = 0; m < lambdas.size(); ++m) {
    const double lambda = lambdas[m];
    params.lambda = lambda;
    state.lambda_index = static_cast<Index>(m);

    if (screening) {
      for (Index g : strong_screen(state.grad, state.in_strong, lambda_prev, lambda, params, groups)) {
        state.in_strong[g] = 1;
      }
    }

    LambdaDiagnostics diag;
    while (true) {
      const auto active = flagged(state.in_active, true);
      const auto report = fit_fixed_lambda(problem, state, params, active, config,
                                           config.max_group_visits - diag.group_visits);
      diag.sweeps += report.sweeps;
      diag.group_visits += report.group_visits;
      diag.max_change = report.max_change;
      if (!report.converged) {
        diag.converged = false;
        break;
      }
      if (!screening) break;
      if (++diag.kkt_loops > config.max_kkt_loops) {
        diag.converged = false;
        break;
      }
      auto violators = kkt_check(problem, state, params,
                                 flagged_both(state.in_strong, true, state.in_active, false),
                                 config.kkt_slack);
      if (violators.empty()) {
        violators = kkt_check(problem, state, params,
                              flagged_both(state.in_strong, false, state.in_active, false),
                              config.kkt_slack);
      }
      if (violators.empty()) break;
      for (Index g : violators) state.in_active[g] = 1;
    }
    for (Index g = 0; g < n_groups; ++g) {
      if (state.in_active[g]) state.in_strong[g] = 1;
    }
    diag.strong_set_size = std::count(state.in_strong.begin(), state.in_strong.end(), 1);
    diag.active_set_size = std::count(state.in_active.begin(), state.in_active.end(), 1);

    for (Index j = 0; j < p; ++j) {
      if (state.beta[j] != 0.0) {
        row_idx.push_back(j);
        values.push_back(state.beta[j] * scale[j]);
      }
    }
    col_ptr.push_back(static_cast<Index>(values.size()));
    path.lambdas.push_back(lambda);
    path.intercepts.push_back(state.intercept);
    path.diagnostics.push_back(diag);
    lambda_prev = lambda;

    if (!diag.converged) {
      path.truncated = m + 1 < lambdas.size();
      break;
    }
  }

  const auto m_fit = static_cast<Index>(path.lambdas.size());
  path.coefficients =
      SparseColumnMatrix(p, m_fit, std::move(col_ptr), std::move(row_idx), std::move(values));
  path.finalize();
  return path;
}

}  // namespace sgl

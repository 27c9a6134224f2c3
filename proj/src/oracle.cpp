#include "sglpath/oracle.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

namespace sgl::oracle {

namespace {

double loss_at(const DenseMatrix& x, std::span<const double> y, std::span<const double> beta,
               double intercept, Family family) {
  const Index n = x.rows();
  double s = 0.0;
  for (Index i = 0; i < n; ++i) {
    double eta = intercept;
    for (Index j = 0; j < x.cols(); ++j) eta += x(i, j) * beta[j];
    if (family == Family::kGaussian) {
      s += 0.5 * (y[i] - eta) * (y[i] - eta);
    } else {
      s += softplus(-y[i] * eta);
    }
  }
  return s / static_cast<double>(n);
}

// Derivative of the loss with respect to the linear predictor, row by row.
std::vector<double> dloss_deta(const DenseMatrix& x, std::span<const double> y,
                               std::span<const double> beta, double intercept, Family family) {
  const Index n = x.rows();
  std::vector<double> out(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    double eta = intercept;
    for (Index j = 0; j < x.cols(); ++j) eta += x(i, j) * beta[j];
    out[i] = family == Family::kGaussian ? (eta - y[i]) : -y[i] * sigmoid(-y[i] * eta);
    out[i] /= static_cast<double>(n);
  }
  return out;
}

}  // namespace

std::vector<double> prox_full(std::span<const double> beta, std::span<const double> grad,
                              double step, const PenaltyParams& params,
                              const GroupStructure& groups) {
  std::vector<double> out(beta.size());
  for (Index g = 0; g < groups.n_groups(); ++g) {
    const auto cols = groups.range(g);
    const auto size = static_cast<std::size_t>(cols.size());
    group_prox_update_into(beta.subspan(cols.begin, size), grad.subspan(cols.begin, size), step,
                           params, cols, params.group_weights[g],
                           std::span<double>(out.data() + cols.begin, size));
  }
  return out;
}

std::vector<double> loss_gradient(const DenseMatrix& x, std::span<const double> y,
                                  std::span<const double> beta, double intercept, Family family) {
  const auto d = dloss_deta(x, y, beta, intercept, family);
  std::vector<double> grad(static_cast<std::size_t>(x.cols()), 0.0);
  for (Index j = 0; j < x.cols(); ++j) {
    for (Index i = 0; i < x.rows(); ++i) grad[j] += x(i, j) * d[i];
  }
  return grad;
}

ReferenceSolution solve_reference(const DesignMatrix& design, std::span<const double> y,
                                  const GroupStructure& groups, const PenaltyParams& params,
                                  Family family, const OracleConfig& config,
                                  std::span<const double> beta_start, double intercept_start) {
  const DenseMatrix x = design.to_dense();
  const Index n = x.rows();
  const Index p = x.cols();

  // Lipschitz constant of the loss gradient in (intercept, beta), from a dense eigensolve.
  Eigen::MatrixXd aug(n, p + (config.intercept ? 1 : 0));
  for (Index j = 0; j < p; ++j) {
    for (Index i = 0; i < n; ++i) aug(i, j) = x(i, j);
  }
  if (config.intercept) aug.col(p).setOnes();
  const Eigen::MatrixXd gram = aug.transpose() * aug / static_cast<double>(n);
  double lipschitz = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(gram).eigenvalues().maxCoeff();
  if (family == Family::kBinomial) lipschitz *= 0.25;
  const double step = 1.0 / lipschitz;

  auto objective = [&](std::span<const double> b, double b0) {
    return loss_at(x, y, b, b0, family) + penalty_value(b, params, groups);
  };
  // One proximal-gradient step from (b, b0).
  auto prox_step = [&](std::span<const double> b, double b0, std::vector<double>& out_b,
                       double& out_b0) {
    const auto d = dloss_deta(x, y, b, b0, family);
    std::vector<double> grad(static_cast<std::size_t>(p), 0.0);
    double grad0 = 0.0;
    for (Index i = 0; i < n; ++i) grad0 += d[i];
    for (Index j = 0; j < p; ++j) {
      for (Index i = 0; i < n; ++i) grad[j] += x(i, j) * d[i];
    }
    out_b = prox_full(b, grad, step, params, groups);
    out_b0 = config.intercept ? b0 - step * grad0 : 0.0;
  };

  ReferenceSolution sol;
  sol.beta = beta_start.empty() ? std::vector<double>(static_cast<std::size_t>(p), 0.0)
                                : std::vector<double>(beta_start.begin(), beta_start.end());
  sol.intercept = config.intercept ? intercept_start : 0.0;
  sol.objective = objective(sol.beta, sol.intercept);
  sol.trace.push_back(sol.objective);

  // Beck-Teboulle monotone FISTA.
  std::vector<double> extrap = sol.beta;
  double extrap0 = sol.intercept;
  std::vector<double> prev = sol.beta;
  double prev0 = sol.intercept;
  double momentum = 1.0;
  std::vector<double> cand;
  double cand0 = 0.0;

  for (Index it = 1; it <= config.max_iter; ++it) {
    if (config.accelerate) {
      prox_step(extrap, extrap0, cand, cand0);
    } else {
      prox_step(sol.beta, sol.intercept, cand, cand0);
    }
    const double cand_obj = objective(cand, cand0);
    prev = sol.beta;
    prev0 = sol.intercept;
    const bool rejected = cand_obj > sol.objective;
    if (!rejected) {
      sol.beta = cand;
      sol.intercept = cand0;
      sol.objective = cand_obj;
    }
    sol.trace.push_back(sol.objective);
    sol.iterations = it;

    if (config.accelerate) {
      const double next_momentum = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * momentum * momentum));
      const double a = momentum / next_momentum;
      const double b = (momentum - 1.0) / next_momentum;
      for (Index j = 0; j < p; ++j) {
        extrap[j] = sol.beta[j] + a * (cand[j] - sol.beta[j]) + b * (sol.beta[j] - prev[j]);
      }
      extrap0 = sol.intercept + a * (cand0 - sol.intercept) + b * (sol.intercept - prev0);
      momentum = next_momentum;
    }

    if (!config.accelerate || rejected || it % 10 == 0) {
      std::vector<double> plain;
      double plain0 = 0.0;
      prox_step(sol.beta, sol.intercept, plain, plain0);
      const double plain_obj = objective(plain, plain0);
      const double decrease = sol.objective - plain_obj;
      if (plain_obj <= sol.objective) {
        sol.beta = plain;
        sol.intercept = plain0;
        sol.objective = plain_obj;
      }
      if (decrease < config.objective_tol * std::max(1.0, std::abs(sol.objective))) {
        sol.converged = true;
        return sol;
      }
      if (config.accelerate && rejected) {
        // Restart the momentum after a rejected accelerated step.
        extrap = sol.beta;
        extrap0 = sol.intercept;
        momentum = 1.0;
      }
    }
  }
  return sol;
}

std::vector<double> finite_diff_gradient(const std::function<double(std::span<const double>)>& f,
                                         std::span<const double> beta, double h) {
  std::vector<double> point(beta.begin(), beta.end());
  std::vector<double> grad(beta.size());
  for (std::size_t j = 0; j < beta.size(); ++j) {
    const double orig = point[j];
    point[j] = orig + h;
    const double up = f(point);
    point[j] = orig - h;
    const double down = f(point);
    point[j] = orig;
    grad[j] = (up - down) / (2.0 * h);
  }
  return grad;
}

double KktReport::worst() const {
  return std::max({zero_group_excess, stationarity, zero_coordinate_excess});
}

KktReport check_optimality(const DenseMatrix& x, std::span<const double> y,
                           std::span<const double> beta, double intercept,
                           const PenaltyParams& params, const GroupStructure& groups,
                           Family family) {
  const auto grad = loss_gradient(x, y, beta, intercept, family);
  const double lambda = params.lambda;
  const double alpha = params.alpha;
  KktReport report;
  for (Index g = 0; g < groups.n_groups(); ++g) {
    const auto cols = groups.range(g);
    double norm_sq = 0.0;
    for (Index j = cols.begin; j < cols.end; ++j) norm_sq += beta[j] * beta[j];
    const double group_level = (1.0 - alpha) * lambda * params.group_weights[g];
    if (norm_sq == 0.0) {
      double s = 0.0;
      for (Index j = cols.begin; j < cols.end; ++j) {
        const double mag = std::abs(grad[j]) - alpha * lambda * params.feature_weights[j];
        if (mag > 0.0) s += mag * mag;
      }
      report.zero_group_excess = std::max(report.zero_group_excess, std::sqrt(s) - group_level);
      continue;
    }
    const double norm = std::sqrt(norm_sq);
    for (Index j = cols.begin; j < cols.end; ++j) {
      const double l1_level = alpha * lambda * params.feature_weights[j];
      if (beta[j] == 0.0) {
        report.zero_coordinate_excess =
            std::max(report.zero_coordinate_excess, std::abs(grad[j]) - l1_level);
      } else {
        const double r = grad[j] + group_level * beta[j] / norm + l1_level * (beta[j] > 0 ? 1.0 : -1.0);
        report.stationarity = std::max(report.stationarity, std::abs(r));
      }
    }
  }
  return report;
}

}  // namespace sgl::oracle

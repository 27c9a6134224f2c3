#include "sglpath/risk.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <limits>

namespace sgl {

double approx_df(std::span<const double> beta) {
  double count = 0.0;
  for (double b : beta) count += b != 0.0 ? 1.0 : 0.0;
  return count;
}

DfResult exact_df(const DesignMatrix& x, std::span<const double> beta, double lambda, double alpha,
                  const GroupStructure& groups, std::span<const double> group_weights,
                  bool centered, const DfOptions& options) {
  if (static_cast<Index>(beta.size()) != x.cols() || groups.n_features() != x.cols()) {
    throw Error("exact_df: coefficient length does not match the design");
  }
  std::vector<Index> active;
  for (Index j = 0; j < x.cols(); ++j) {
    if (beta[j] != 0.0) active.push_back(j);
  }
  const auto k = static_cast<Index>(active.size());
  if (k == 0) return {0.0, true, {}};

  const Index n = x.rows();
  const double approx = static_cast<double>(k);
  if (k > options.max_active || n * k > options.max_dense_entries) {
    return {approx, false, "active set too large for the exact formula; using |A|"};
  }

  Eigen::MatrixXd xa = Eigen::MatrixXd::Zero(n, k);
  for (Index c = 0; c < k; ++c) {
    Eigen::Map<Eigen::VectorXd> col(xa.col(c).data(), n);
    x.column_axpy(active[c], 1.0, std::span<double>(col.data(), static_cast<std::size_t>(n)));
  }
  if (centered) xa.rowwise() -= xa.colwise().mean();

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(xa);
  qr.setThreshold(options.rank_tol);
  if (qr.rank() < k) {
    return {approx, false, "active columns are rank deficient; using |A|"};
  }
  const double scale = static_cast<double>(n) * (1.0 - alpha) * lambda;
  // Without the group term the trace is that of a projection onto rank k.
  if (scale == 0.0) return {approx, true, {}};

  const Eigen::MatrixXd gram = xa.transpose() * xa;
  Eigen::MatrixXd system = gram;
  {
    Index c = 0;
    while (c < k) {
      const Index g = groups.group_of(active[c]);
      Index end = c;
      while (end < k && groups.group_of(active[end]) == g) ++end;
      const Index size = end - c;
      Eigen::VectorXd b(size);
      for (Index t = 0; t < size; ++t) b[t] = beta[active[c + t]];
      const double norm = b.norm();
      const Eigen::MatrixXd block =
          (Eigen::MatrixXd::Identity(size, size) - b * b.transpose() / (norm * norm)) / norm;
      system.block(c, c, size, size) += scale * group_weights[g] * block;
      c = end;
    }
  }
  const Eigen::MatrixXd solved = system.ldlt().solve(gram);
  return {solved.trace(), true, {}};
}

double aic(double mse, double df, Index n) {
  return std::log(mse) + 2.0 / static_cast<double>(n) * df;
}

double bic(double mse, double df, Index n) {
  const double nd = static_cast<double>(n);
  return std::log(mse) + std::log(nd) / nd * df;
}

double gcv(double mse, double df, Index n) {
  const double nd = static_cast<double>(n);
  if (df >= nd) return std::numeric_limits<double>::infinity();
  const double denom = 1.0 - df / nd;
  return mse / (denom * denom);
}

Index RiskEstimates::argmin(const std::string& criterion) const {
  const std::vector<double>* values = nullptr;
  if (criterion == "aic") values = &aic;
  else if (criterion == "bic") values = &bic;
  else if (criterion == "gcv") values = &gcv;
  else throw Error("unknown criterion '" + criterion + "'");
  Index best = -1;
  for (std::size_t m = 0; m < values->size(); ++m) {
    if (!std::isfinite((*values)[m])) continue;
    if (best < 0 || (*values)[m] < (*values)[best]) best = static_cast<Index>(m);
  }
  return best;
}

RiskEstimates estimate_risk(const SolutionPath& path, const DesignMatrix& x,
                            std::span<const double> y, bool use_approx, const DfOptions& options) {
  if (path.family != Family::kGaussian) {
    throw Error("risk estimation supports the gaussian family only");
  }
  const Index n = x.rows();
  if (static_cast<Index>(y.size()) != n) throw Error("estimate_risk: response length != rows of X");
  if (x.cols() != path.n_features()) throw Error("estimate_risk: design does not match the fit");

  RiskEstimates out;
  for (Index m = 0; m < path.size(); ++m) {
    const auto beta = path.beta(m);
    const auto fitted = matvec(x, beta);
    double rss = 0.0;
    for (Index i = 0; i < n; ++i) {
      const double r = y[i] - fitted[i] - path.intercepts[m];
      rss += r * r;
    }
    const double mse = rss / static_cast<double>(n);

    DfResult df{approx_df(beta), false, {}};
    if (!use_approx) {
      df = exact_df(x, beta, path.lambdas[m], path.alpha, path.groups, path.group_weights,
                    path.intercept, options);
      if (!df.warning.empty()) {
        out.warnings.push_back("lambda index " + std::to_string(m + 1) + ": " + df.warning);
      }
    }
    out.lambdas.push_back(path.lambdas[m]);
    out.mse.push_back(mse);
    out.df.push_back(df.df);
    out.exact_df.push_back(df.exact);
    out.aic.push_back(aic(mse, df.df, n));
    out.bic.push_back(bic(mse, df.df, n));
    out.gcv.push_back(gcv(mse, df.df, n));
  }
  return out;
}

}  // namespace sgl

#include "sglpath/model.hpp"

#include <algorithm>
#include <cfenv>
#include <cmath>
#include <string>

namespace sgl {

bool SolutionPath::all_converged() const {
  return !truncated && std::all_of(diagnostics.begin(), diagnostics.end(),
                                   [](const LambdaDiagnostics& d) { return d.converged; });
}

std::vector<double> SolutionPath::beta(Index m) const {
  std::vector<double> out(static_cast<std::size_t>(coefficients.rows()), 0.0);
  const auto rows = coefficients.column_rows(m);
  const auto vals = coefficients.column_values(m);
  for (std::size_t k = 0; k < rows.size(); ++k) out[rows[k]] = vals[k];
  return out;
}

void SolutionPath::finalize() {
  const Index m = size();
  if (coefficients.cols() != m || static_cast<Index>(intercepts.size()) != m) {
    throw Error("solution path: coefficient, intercept and lambda counts differ");
  }
  if (groups.n_features() != coefficients.rows()) {
    throw Error("solution path: group structure does not match coefficient rows");
  }
  for (Index k = 0; k < m; ++k) {
    if (!(lambdas[k] > 0.0) || (k > 0 && !(lambdas[k] < lambdas[k - 1]))) {
      throw Error("solution path: lambdas must be positive and strictly decreasing");
    }
  }
  nnzero.assign(static_cast<std::size_t>(m), 0);
  active_groups.assign(static_cast<std::size_t>(m), 0);
  for (Index k = 0; k < m; ++k) {
    Index last_group = -1;
    const auto rows = coefficients.column_rows(k);
    const auto vals = coefficients.column_values(k);
    for (std::size_t t = 0; t < rows.size(); ++t) {
      if (vals[t] == 0.0) continue;
      ++nnzero[k];
      const Index g = groups.group_of(rows[t]);
      if (g != last_group) {
        ++active_groups[k];
        last_group = g;
      }
    }
  }
  if (diagnostics.size() != static_cast<std::size_t>(m)) diagnostics.resize(static_cast<std::size_t>(m));
}

Coefficients coef_at(const SolutionPath& path, std::span<const double> s) {
  if (s.empty()) throw Error("coef_at: no penalty values requested");
  const Index m = path.size();
  if (m == 0) throw Error("coef_at: empty solution path");
  const Index p = path.n_features();
  const auto& lambdas = path.lambdas;

  Coefficients out;
  std::vector<Index> col_ptr{0};
  std::vector<Index> row_idx;
  std::vector<double> values;

  auto push_column = [&](std::span<const double> dense) {
    for (Index j = 0; j < p; ++j) {
      if (dense[j] != 0.0) {
        row_idx.push_back(j);
        values.push_back(dense[j]);
      }
    }
    col_ptr.push_back(static_cast<Index>(values.size()));
  };

  for (double target : s) {
    if (!std::isfinite(target)) throw Error("coef_at: penalty values must be finite");
    Index hit = -1;
    bool clamped = false;
    if (target >= lambdas.front()) {
      hit = 0;
      clamped = target > lambdas.front();
    } else if (target <= lambdas.back()) {
      hit = m - 1;
      clamped = target < lambdas.back();
    } else {
      // lambdas decrease: find the first k with lambdas[k] <= target.
      const auto it = std::lower_bound(lambdas.begin(), lambdas.end(), target, std::greater<>());
      const auto k = static_cast<Index>(it - lambdas.begin());
      if (lambdas[k] == target) hit = k;
      else {
        const Index hi = k - 1;  // lambdas[hi] > target > lambdas[k]
        const double w = (target - lambdas[k]) / (lambdas[hi] - lambdas[k]);
        const auto upper = path.beta(hi);
        auto lower = path.beta(k);
        for (Index j = 0; j < p; ++j) lower[j] = w * upper[j] + (1.0 - w) * lower[j];
        push_column(lower);
        out.intercepts.push_back(w * path.intercepts[hi] + (1.0 - w) * path.intercepts[k]);
        out.clamped.push_back(false);
        continue;
      }
    }
    const auto rows = path.coefficients.column_rows(hit);
    const auto vals = path.coefficients.column_values(hit);
    row_idx.insert(row_idx.end(), rows.begin(), rows.end());
    values.insert(values.end(), vals.begin(), vals.end());
    col_ptr.push_back(static_cast<Index>(values.size()));
    out.intercepts.push_back(path.intercepts[hit]);
    out.clamped.push_back(clamped);
  }
  out.beta = SparseColumnMatrix(p, static_cast<Index>(s.size()), std::move(col_ptr),
                                std::move(row_idx), std::move(values));
  return out;
}

PredictKind parse_predict_kind(const std::string& name) {
  if (name == "link") return PredictKind::kLink;
  if (name == "response") return PredictKind::kResponse;
  if (name == "class") return PredictKind::kClass;
  throw Error("unknown prediction type '" + name + "' (expected link, response or class)");
}

DenseMatrix predict(const SolutionPath& path, const DesignMatrix& new_x, std::span<const double> s,
                    PredictKind kind) {
  if (new_x.cols() != path.n_features()) {
    throw Error("predict: new design has " + std::to_string(new_x.cols()) +
                " columns, the fit has " + std::to_string(path.n_features()) + " features");
  }
  if (kind == PredictKind::kClass && path.family == Family::kGaussian) {
    throw Error("predict: class predictions need a binomial fit");
  }
  const auto coefs = coef_at(path, s);
  const Index n = new_x.rows();
  DenseMatrix out(n, static_cast<Index>(s.size()));
  for (Index c = 0; c < static_cast<Index>(s.size()); ++c) {
    auto col = out.column(c);
    const auto rows = coefs.beta.column_rows(c);
    const auto vals = coefs.beta.column_values(c);
    for (std::size_t k = 0; k < rows.size(); ++k) new_x.column_axpy(rows[k], vals[k], col);
    for (auto& v : col) {
      v += coefs.intercepts[c];
      if (path.family == Family::kBinomial && kind != PredictKind::kLink) {
        v = sigmoid(v);
        if (kind == PredictKind::kClass) v = v > 0.5 ? 1.0 : 0.0;
      }
    }
  }
  return out;
}

PathSummary path_summary(const SolutionPath& path) {
  PathSummary summary;
  const Index m = path.size();
  for (Index k = 0; k < m; ++k) {
    summary.rows.push_back({"", path.lambdas[k], k + 1, path.nnzero[k], path.active_groups[k]});
  }
  if (m == 0) return summary;
  const std::pair<const char*, double> stats[] = {
      {"Max.", 1.0}, {"3rd Qu.", 0.75}, {"Median", 0.5}, {"1st Qu.", 0.25}, {"Min.", 0.0}};
  // Quantile q of lambda sits at 1-based position 1 + (1 - q)(M - 1), rounded half to even.
  const int saved = std::fegetround();
  std::fesetround(FE_TONEAREST);
  for (const auto& [label, q] : stats) {
    const double pos = 1.0 + (1.0 - q) * static_cast<double>(m - 1);
    const auto k = static_cast<Index>(std::nearbyint(pos)) - 1;
    auto row = summary.rows[k];
    row.label = label;
    summary.quantiles.push_back(row);
  }
  std::fesetround(saved);
  return summary;
}

}  // namespace sgl

#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include "sglpath/family.hpp"
#include "sglpath/groups.hpp"
#include "sglpath/linalg.hpp"

namespace sgl {

/// Per-lambda solver diagnostics.
struct LambdaDiagnostics {
  bool converged = true;
  Index sweeps = 0;
  Index group_visits = 0;
  int kkt_loops = 0;
  /// Final max coefficient change relative to max(1, ||beta||_inf).
  double max_change = 0.0;
  Index strong_set_size = 0;
  Index active_set_size = 0;
};

/**
 * A fitted regularization path. Coefficients are on the original feature
 * scale and stored as a sparse p x M matrix, one column per lambda.
 */
struct SolutionPath {
  Family family = Family::kGaussian;
  double alpha = 0.0;
  bool intercept = true;
  double lambda_max = 0.0;
  std::vector<double> lambdas;
  SparseColumnMatrix coefficients;
  std::vector<double> intercepts;
  std::vector<Index> nnzero;
  std::vector<Index> active_groups;
  GroupStructure groups;
  std::vector<double> group_weights;
  std::vector<double> feature_weights;
  /// Original response levels mapped to class 0 and class 1 (binomial).
  std::array<double, 2> class_levels{0.0, 1.0};
  std::vector<LambdaDiagnostics> diagnostics;
  /// True when fitting stopped early because some lambda failed to converge.
  bool truncated = false;

  Index n_features() const { return coefficients.rows(); }
  Index size() const { return static_cast<Index>(lambdas.size()); }
  bool all_converged() const;

  /// Dense copy of column m.
  std::vector<double> beta(Index m) const;

  /// Recomputes nnzero/active_groups from the coefficient matrix and checks invariants.
  void finalize();
};

struct Coefficients {
  /// p x |s| matrix.
  SparseColumnMatrix beta;
  std::vector<double> intercepts;
  /// Per requested s: true when it fell outside [lambda_M, lambda_1] and was clamped.
  std::vector<bool> clamped;
};

/// Coefficients at arbitrary penalty levels, interpolating linearly in lambda between grid points.
Coefficients coef_at(const SolutionPath& path, std::span<const double> s);

enum class PredictKind { kLink, kResponse, kClass };

PredictKind parse_predict_kind(const std::string& name);

/// n_new x |s| predictions. Class predictions are 0/1 (1 = larger response level).
DenseMatrix predict(const SolutionPath& path, const DesignMatrix& new_x, std::span<const double> s,
                    PredictKind kind);

struct SummaryRow {
  std::string label;
  double lambda = 0.0;
  Index index = 0;  // 1-based
  Index nnzero = 0;
  Index active_groups = 0;
};

struct PathSummary {
  std::vector<SummaryRow> rows;
  /// Max., 3rd Qu., Median, 1st Qu., Min. over the lambda grid.
  std::vector<SummaryRow> quantiles;
};

PathSummary path_summary(const SolutionPath& path);

}  // namespace sgl

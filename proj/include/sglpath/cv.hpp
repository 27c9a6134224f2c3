#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sglpath/model.hpp"
#include "sglpath/solver.hpp"

namespace sgl {

enum class CvLoss { kMse, kMae, kDeviance, kMisclass };

CvLoss parse_cv_loss(std::string_view name);
std::string_view cv_loss_name(CvLoss loss);
/// Throws unless the loss applies to the family (mse/mae: gaussian, deviance/misclass: binomial).
void check_loss_family(CvLoss loss, Family family);

/// Fold id in [0, k) per observation; balanced and deterministic given the seed.
std::vector<Index> make_folds(Index n, Index k, std::uint64_t seed);

struct CvOptions {
  Index nfolds = 10;
  CvLoss loss = CvLoss::kMse;
  std::uint64_t seed = 1;
  /// Worker threads used to fit folds.
  unsigned jobs = 1;
};

struct CvResult {
  CvLoss loss = CvLoss::kMse;
  std::vector<double> lambdas;
  std::vector<double> mean;
  /// Standard deviation of the fold losses.
  std::vector<double> sd;
  /// sd / sqrt(number of contributing folds).
  std::vector<double> se;
  /// Folds that produced a converged fit at each lambda.
  std::vector<Index> fold_count;
  Index index_min = 0;
  Index index_1se = 0;
  double lambda_min = 0.0;
  double lambda_1se = 0.0;
  std::vector<Index> folds;
  /// fold_loss[f][m]; NaN where the cell was dropped.
  std::vector<std::vector<double>> fold_loss;
  SolutionPath full_fit;
  Index fits = 0;
  std::vector<std::string> diagnostics;
};

/// Loss of a linear predictor against responses in solver form.
double observation_loss(CvLoss loss, double y, double eta);

/**
 * K-fold cross validation. The lambda grid comes from the full-data fit; each
 * fold refits on its complement with that grid and is scored on held-out rows.
 */
CvResult cross_validate(const DesignMatrix& x, std::span<const double> y,
                        const GroupStructure& groups, const FitConfig& config,
                        const CvOptions& options);

/// Fills index_min/index_1se and the matching lambdas from mean and se.
void select_lambdas(CvResult& result);

}  // namespace sgl

#include "sglpath/cv.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <numeric>
#include <random>
#include <string>
#include <thread>

namespace sgl {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Uniform integer in [0, bound) by rejection, independent of the standard
// library's distribution implementation.
std::uint64_t bounded(std::mt19937_64& rng, std::uint64_t bound) {
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t draw;
  do {
    draw = rng();
  } while (draw >= limit);
  return draw % bound;
}

struct FoldOutcome {
  std::vector<double> loss;
  std::string diagnostic;
};

}  // namespace

CvLoss parse_cv_loss(std::string_view name) {
  if (name == "mse") return CvLoss::kMse;
  if (name == "mae") return CvLoss::kMae;
  if (name == "deviance") return CvLoss::kDeviance;
  if (name == "misclass") return CvLoss::kMisclass;
  throw Error("unknown loss '" + std::string(name) + "' (expected mse, mae, deviance or misclass)");
}

std::string_view cv_loss_name(CvLoss loss) {
  switch (loss) {
    case CvLoss::kMse: return "mse";
    case CvLoss::kMae: return "mae";
    case CvLoss::kDeviance: return "deviance";
    case CvLoss::kMisclass: return "misclass";
  }
  return "mse";
}

void check_loss_family(CvLoss loss, Family family) {
  const bool gaussian_loss = loss == CvLoss::kMse || loss == CvLoss::kMae;
  if (gaussian_loss != (family == Family::kGaussian)) {
    throw Error("loss '" + std::string(cv_loss_name(loss)) + "' does not apply to the " +
                std::string(family_name(family)) + " family");
  }
}

std::vector<Index> make_folds(Index n, Index k, std::uint64_t seed) {
  if (k < 2 || k > n) {
    throw Error("number of folds must lie in [2, n]; got " + std::to_string(k) + " for n = " +
                std::to_string(n));
  }
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  std::mt19937_64 rng(seed);
  for (Index i = n - 1; i > 0; --i) {
    const auto j = static_cast<Index>(bounded(rng, static_cast<std::uint64_t>(i + 1)));
    std::swap(order[i], order[j]);
  }
  std::vector<Index> folds(static_cast<std::size_t>(n));
  for (Index pos = 0; pos < n; ++pos) folds[order[pos]] = pos % k;
  return folds;
}

double observation_loss(CvLoss loss, double y, double eta) {
  switch (loss) {
    case CvLoss::kMse: return (y - eta) * (y - eta);
    case CvLoss::kMae: return std::abs(y - eta);
    case CvLoss::kDeviance: return 2.0 * softplus(-y * eta);
    case CvLoss::kMisclass: return (eta > 0.0) == (y > 0.0) ? 0.0 : 1.0;
  }
  return kNaN;
}

void select_lambdas(CvResult& result) {
  const auto m = static_cast<Index>(result.mean.size());
  Index best = -1;
  for (Index k = 0; k < m; ++k) {
    if (std::isnan(result.mean[k])) continue;
    // `<=` keeps the smallest lambda among ties.
    if (best < 0 || result.mean[k] <= result.mean[best]) best = k;
  }
  if (best < 0) throw Error("cross validation produced no usable lambda");
  const double threshold = result.mean[best] + result.se[best];
  Index one_se = best;
  for (Index k = 0; k < m; ++k) {
    if (!std::isnan(result.mean[k]) && result.mean[k] <= threshold) {
      one_se = k;
      break;
    }
  }
  result.index_min = best;
  result.index_1se = one_se;
  result.lambda_min = result.lambdas[best];
  result.lambda_1se = result.lambdas[one_se];
}

CvResult cross_validate(const DesignMatrix& x, std::span<const double> y,
                        const GroupStructure& groups, const FitConfig& config,
                        const CvOptions& options) {
  check_loss_family(options.loss, config.family);
  const Index n = x.rows();
  if (static_cast<Index>(y.size()) != n) throw Error("response length != rows of X");

  CvResult result;
  result.loss = options.loss;
  result.full_fit = fit_path(x, y, groups, config);
  result.fits = 1;
  result.lambdas = result.full_fit.lambdas;
  result.folds = make_folds(n, options.nfolds, options.seed);
  const auto m = static_cast<Index>(result.lambdas.size());
  const Index k = options.nfolds;

  const Response full = prepare_response(y, config.family);
  FitConfig fold_config = config;
  fold_config.lambdas = result.lambdas;
  fold_config.sweep_observer = nullptr;

  std::vector<FoldOutcome> outcomes(static_cast<std::size_t>(k));
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(k));

  auto run_fold = [&](Index f) {
    std::vector<Index> train;
    std::vector<Index> test;
    for (Index i = 0; i < n; ++i) (result.folds[i] == f ? test : train).push_back(i);
    std::vector<double> y_train;
    y_train.reserve(train.size());
    for (Index i : train) y_train.push_back(y[i]);
    if (config.family == Family::kBinomial) {
      const bool one_class = std::all_of(y_train.begin(), y_train.end(),
                                         [&](double v) { return v == y_train.front(); });
      if (one_class) {
        throw Error("fold " + std::to_string(f + 1) +
                    " leaves a single response class in its training set");
      }
    }
    const auto x_train = x.select_rows(train);
    const auto x_test = x.select_rows(test);
    const auto fit = fit_path(x_train, y_train, groups, fold_config);

    FoldOutcome out;
    out.loss.assign(static_cast<std::size_t>(m), kNaN);
    for (Index c = 0; c < fit.size(); ++c) {
      if (!fit.diagnostics[c].converged) {
        out.diagnostic = "fold " + std::to_string(f + 1) + ": lambda index " + std::to_string(c + 1) +
                         " did not converge; cell dropped";
        continue;
      }
      const auto beta = fit.beta(c);
      auto eta = matvec(x_test, beta);
      double total = 0.0;
      for (std::size_t t = 0; t < test.size(); ++t) {
        total += observation_loss(options.loss, full.values[test[t]], eta[t] + fit.intercepts[c]);
      }
      out.loss[c] = total / static_cast<double>(test.size());
    }
    outcomes[f] = std::move(out);
  };

  const unsigned workers = std::max(1u, std::min<unsigned>(options.jobs, static_cast<unsigned>(k)));
  std::atomic<Index> next{0};
  auto worker = [&]() {
    for (Index f = next++; f < k; f = next++) {
      try {
        run_fold(f);
      } catch (...) {
        errors[f] = std::current_exception();
      }
    }
  };
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  result.fits += k;

  result.mean.assign(static_cast<std::size_t>(m), kNaN);
  result.sd.assign(static_cast<std::size_t>(m), kNaN);
  result.se.assign(static_cast<std::size_t>(m), kNaN);
  result.fold_count.assign(static_cast<std::size_t>(m), 0);
  for (const auto& o : outcomes) {
    result.fold_loss.push_back(o.loss);
    if (!o.diagnostic.empty()) result.diagnostics.push_back(o.diagnostic);
  }
  for (Index c = 0; c < m; ++c) {
    double sum = 0.0;
    Index count = 0;
    for (const auto& o : outcomes) {
      if (std::isnan(o.loss[c])) continue;
      sum += o.loss[c];
      ++count;
    }
    if (count == 0) continue;
    const double mean = sum / static_cast<double>(count);
    double ss = 0.0;
    for (const auto& o : outcomes) {
      if (!std::isnan(o.loss[c])) ss += (o.loss[c] - mean) * (o.loss[c] - mean);
    }
    const double sd = count > 1 ? std::sqrt(ss / static_cast<double>(count - 1)) : 0.0;
    result.mean[c] = mean;
    result.sd[c] = sd;
    result.se[c] = sd / std::sqrt(static_cast<double>(count));
    result.fold_count[c] = count;
  }
  select_lambdas(result);
  return result;
}

}  // namespace sgl

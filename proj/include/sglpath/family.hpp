#pragma once

#include <array>
#include <cmath>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sglpath/linalg.hpp"

namespace sgl {

enum class Family { kGaussian, kBinomial };

Family parse_family(std::string_view name);
std::string_view family_name(Family f);

/// log(1 + exp(x)) without overflow.
inline double softplus(double x) {
  return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

inline double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

/**
 * Response vector in the form the solver works with. Gaussian responses are
 * copied; binomial responses are recoded to -1/+1, the larger of the two
 * observed levels becoming +1.
 */
struct Response {
  Family family = Family::kGaussian;
  std::vector<double> values;
  /// Original (negative, positive) levels; binomial only.
  std::array<double, 2> levels{0.0, 1.0};
};

Response prepare_response(std::span<const double> y, Family family);

/**
 * Unpenalized loss for a linear predictor eta.
 * Gaussian: (1/2n) ||y - eta||^2. Binomial (y in {-1,+1}): (1/n) sum log(1 + exp(-y eta)).
 */
double family_loss(Family family, std::span<const double> y, std::span<const double> eta);

}  // namespace sgl

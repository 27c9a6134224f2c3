#include "sglpath/family.hpp"

#include <algorithm>
#include <string>

namespace sgl {

Family parse_family(std::string_view name) {
  if (name == "gaussian") return Family::kGaussian;
  if (name == "binomial") return Family::kBinomial;
  throw Error("unknown family '" + std::string(name) + "' (expected gaussian or binomial)");
}

std::string_view family_name(Family f) {
  return f == Family::kGaussian ? "gaussian" : "binomial";
}

Response prepare_response(std::span<const double> y, Family family) {
  Response r;
  r.family = family;
  for (double v : y) {
    if (!std::isfinite(v)) throw Error("response contains a non-finite value");
  }
  if (family == Family::kGaussian) {
    r.values.assign(y.begin(), y.end());
    return r;
  }
  std::vector<double> levels(y.begin(), y.end());
  std::sort(levels.begin(), levels.end());
  levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
  if (levels.size() != 2) {
    throw Error("binomial response needs exactly two distinct values, found " +
                std::to_string(levels.size()));
  }
  r.levels = {levels[0], levels[1]};
  r.values.resize(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) r.values[i] = y[i] == levels[1] ? 1.0 : -1.0;
  return r;
}

double family_loss(Family family, std::span<const double> y, std::span<const double> eta) {
  if (y.size() != eta.size()) throw Error("loss: response and predictor lengths differ");
  const double n = static_cast<double>(y.size());
  double s = 0.0;
  if (family == Family::kGaussian) {
    for (std::size_t i = 0; i < y.size(); ++i) {
      const double d = y[i] - eta[i];
      s += d * d;
    }
    return s / (2.0 * n);
  }
  for (std::size_t i = 0; i < y.size(); ++i) s += softplus(-y[i] * eta[i]);
  return s / n;
}

}  // namespace sgl

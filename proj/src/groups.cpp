#include "sglpath/groups.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace sgl {

GroupStructure GroupStructure::from_ids(std::span<const Index> ids) {
  GroupStructure gs;
  if (ids.empty()) return gs;
  for (std::size_t j = 1; j < ids.size(); ++j) {
    const Index step = ids[j] - ids[j - 1];
    if (step != 0 && step != 1) {
      throw Error("groups must be contiguous runs of consecutive labels; feature " +
                  std::to_string(j + 1) + " has label " + std::to_string(ids[j]) +
                  " after label " + std::to_string(ids[j - 1]));
    }
    if (step == 1) gs.starts_.push_back(static_cast<Index>(j));
  }
  gs.starts_.push_back(static_cast<Index>(ids.size()));
  return gs;
}

GroupStructure GroupStructure::equal_size(Index n_features, Index size) {
  if (size < 1) throw Error("group size must be at least 1");
  if (n_features < 0) throw Error("negative feature count");
  GroupStructure gs;
  for (Index s = size; s < n_features; s += size) gs.starts_.push_back(s);
  if (n_features > 0) gs.starts_.push_back(n_features);
  return gs;
}

Index GroupStructure::group_of(Index feature) const {
  if (feature < 0 || feature >= n_features()) throw Error("feature index out of range");
  const auto it = std::upper_bound(starts_.begin(), starts_.end(), feature);
  return static_cast<Index>(it - starts_.begin()) - 1;
}

std::vector<Index> GroupStructure::labels() const {
  std::vector<Index> out(static_cast<std::size_t>(n_features()));
  for (Index g = 0; g < n_groups(); ++g) {
    for (Index j = starts_[g]; j < starts_[g + 1]; ++j) out[j] = g + 1;
  }
  return out;
}

std::vector<double> GroupStructure::default_weights() const {
  std::vector<double> w(static_cast<std::size_t>(n_groups()));
  for (Index g = 0; g < n_groups(); ++g) w[g] = std::sqrt(static_cast<double>(size(g)));
  return w;
}

}  // namespace sgl

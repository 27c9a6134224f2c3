#pragma once

#include <span>
#include <vector>

#include "sglpath/linalg.hpp"

namespace sgl {

/// Partition of the p features into G contiguous, non-overlapping groups.
class GroupStructure {
 public:
  GroupStructure() = default;

  /**
   * Builds the structure from one group label per feature. Labels must form
   * consecutive runs that increase by exactly one, e.g. 1 1 2 2 2 3. Any other
   * arrangement (including 1 2 1) is rejected rather than permuted.
   */
  static GroupStructure from_ids(std::span<const Index> ids);

  /// p features split into consecutive groups of `size` (the last may be shorter).
  static GroupStructure equal_size(Index n_features, Index size);

  Index n_groups() const { return static_cast<Index>(starts_.size()) - 1; }
  Index n_features() const { return starts_.empty() ? 0 : starts_.back(); }
  ColumnRange range(Index g) const { return {starts_[g], starts_[g + 1]}; }
  Index size(Index g) const { return starts_[g + 1] - starts_[g]; }
  Index group_of(Index feature) const;

  /// First feature of every group followed by p.
  std::span<const Index> starts() const { return starts_; }

  /// 1-based label per feature.
  std::vector<Index> labels() const;

  /// sqrt(group size) per group.
  std::vector<double> default_weights() const;

  bool operator==(const GroupStructure&) const = default;

 private:
  std::vector<Index> starts_{0};
};

}  // namespace sgl

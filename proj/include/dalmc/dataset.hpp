#pragma once

#include <optional>
#include <vector>

#include "dalmc/matrix.hpp"

namespace dalmc {

// v feature matrices over the same n samples: view p is d^p x n
// (features x samples). Labels, when present, are per-sample class ids.
struct MultiViewDataset {
  std::vector<DenseMatrix> views;
  std::optional<std::vector<int>> labels;

  Index view_count() const { return static_cast<Index>(views.size()); }
  Index sample_count() const { return views.empty() ? 0 : views.front().cols(); }
  Index dim(Index p) const { return views[static_cast<std::size_t>(p)].rows(); }
  const DenseMatrix& view(Index p) const { return views[static_cast<std::size_t>(p)]; }

  // Throws InvalidShape / InvalidInput when the type invariants fail:
  // at least one view, all views share n >= min_samples columns, every
  // d^p >= 1, finite entries, labels (if any) of length n. Loading and
  // clustering require n >= 2; the solver itself works from n = 1.
  void validate(Index min_samples = 2) const;
};

}  // namespace dalmc

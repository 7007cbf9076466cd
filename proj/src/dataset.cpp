#include "dalmc/dataset.hpp"

namespace dalmc {

void MultiViewDataset::validate(Index min_samples) const {
  if (views.empty()) throw InvalidShape("dataset: needs at least one view");
  const Index n = views.front().cols();
  if (n < min_samples) {
    throw InvalidShape("dataset: needs at least " + std::to_string(min_samples) +
                       " samples");
  }
  for (std::size_t p = 0; p < views.size(); ++p) {
    const DenseMatrix& x = views[p];
    if (x.rows() < 1) {
      throw InvalidShape("dataset: view " + std::to_string(p) + " has no features");
    }
    if (x.cols() != n) {
      throw InvalidShape("dataset: view " + std::to_string(p) + " has " +
                         std::to_string(x.cols()) + " samples, expected " +
                         std::to_string(n));
    }
    require_finite(x, "dataset");
  }
  if (labels && static_cast<Index>(labels->size()) != n) {
    throw InvalidShape("dataset: labels length " + std::to_string(labels->size()) +
                       " does not match sample count " + std::to_string(n));
  }
}

}  // namespace dalmc

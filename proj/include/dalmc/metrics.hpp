#pragma once

#include <vector>

#include "dalmc/matrix.hpp"

namespace dalmc {

// Ground-truth class ids and predicted cluster ids for the same n samples.
// Label values are arbitrary ints; metrics are invariant to relabeling.
struct LabelPair {
  std::vector<int> truth;
  std::vector<int> pred;

  void validate() const {
    if (truth.size() != pred.size()) {
      throw InvalidShape("labels: truth and pred lengths differ");
    }
    if (truth.empty()) throw InvalidShape("labels: need at least one sample");
  }
};

struct MetricBundle {
  double acc = 0.0;
  double nmi = 0.0;
  double f1 = 0.0;
  double purity = 0.0;
};

// Minimum-cost assignment on a square cost matrix; result[row] = column.
// Among all minimizers, returns the lexicographically smallest permutation.
std::vector<Index> hungarian(const DenseMatrix& cost);

// Clustering accuracy under the best cluster-to-class matching.
double acc(const LabelPair& lp);

// Normalized mutual information, sqrt(H_t * H_p) normalization, natural
// logs. Identical partitions (up to relabeling) give 1; a zero-entropy side
// against a differing partition gives 0.
double nmi(const LabelPair& lp);

// Pairwise F1 over all n(n-1)/2 sample pairs.
double pairwise_f1(const LabelPair& lp);

// Fraction of samples in their cluster's majority class.
double purity(const LabelPair& lp);

MetricBundle evaluate(const LabelPair& lp);

}  // namespace dalmc

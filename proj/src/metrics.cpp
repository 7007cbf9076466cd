#include "dalmc/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace dalmc {

namespace {

// Contingency counts: rows indexed by truth classes, columns by predicted
// clusters, both remapped to dense 0-based ids in sorted value order.
struct Contingency {
  std::vector<std::vector<long>> counts;
  std::vector<long> row_sums;
  std::vector<long> col_sums;
  long n = 0;
};

std::vector<int> dense_ids(const std::vector<int>& labels,
                           std::size_t& distinct) {
  std::map<int, int> remap;
  for (int v : labels) remap.emplace(v, 0);
  int next = 0;
  for (auto& [value, id] : remap) id = next++;
  std::vector<int> out(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) out[i] = remap[labels[i]];
  distinct = remap.size();
  return out;
}

Contingency contingency(const LabelPair& lp) {
  lp.validate();
  std::size_t kt = 0, kp = 0;
  const std::vector<int> t = dense_ids(lp.truth, kt);
  const std::vector<int> p = dense_ids(lp.pred, kp);
  Contingency c;
  c.n = static_cast<long>(t.size());
  c.counts.assign(kt, std::vector<long>(kp, 0));
  for (std::size_t i = 0; i < t.size(); ++i) {
    c.counts[static_cast<std::size_t>(t[i])][static_cast<std::size_t>(p[i])]++;
  }
  c.row_sums.assign(kt, 0);
  c.col_sums.assign(kp, 0);
  for (std::size_t i = 0; i < kt; ++i) {
    for (std::size_t j = 0; j < kp; ++j) {
      c.row_sums[i] += c.counts[i][j];
      c.col_sums[j] += c.counts[i][j];
    }
  }
  return c;
}

// One nonzero per row and per column means the partitions agree up to
// relabeling.
bool identical_partitions(const Contingency& c) {
  if (c.counts.size() != c.counts[0].size()) return false;
  for (const auto& row : c.counts) {
    if (std::count_if(row.begin(), row.end(), [](long x) { return x > 0; }) != 1) {
      return false;
    }
  }
  for (std::size_t j = 0; j < c.counts[0].size(); ++j) {
    long nonzero = 0;
    for (const auto& row : c.counts) nonzero += row[j] > 0 ? 1 : 0;
    if (nonzero != 1) return false;
  }
  return true;
}

// Shortest-augmenting-path assignment (potentials formulation), O(k^3).
// Only the optimal total is needed here; the permutation itself comes from
// the lexicographic construction in hungarian().
double min_assignment_cost(const DenseMatrix& cost) {
  const Index n = cost.rows();
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(static_cast<std::size_t>(n) + 1, 0.0);
  std::vector<double> v(static_cast<std::size_t>(n) + 1, 0.0);
  std::vector<Index> match(static_cast<std::size_t>(n) + 1, 0);  // col -> row
  std::vector<Index> way(static_cast<std::size_t>(n) + 1, 0);

  for (Index i = 1; i <= n; ++i) {
    match[0] = i;
    Index j0 = 0;
    std::vector<double> minv(static_cast<std::size_t>(n) + 1, inf);
    std::vector<char> used(static_cast<std::size_t>(n) + 1, 0);
    do {
      used[static_cast<std::size_t>(j0)] = 1;
      const Index i0 = match[static_cast<std::size_t>(j0)];
      double delta = inf;
      Index j1 = 0;
      for (Index j = 1; j <= n; ++j) {
        if (used[static_cast<std::size_t>(j)]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[static_cast<std::size_t>(i0)] -
                           v[static_cast<std::size_t>(j)];
        if (cur < minv[static_cast<std::size_t>(j)]) {
          minv[static_cast<std::size_t>(j)] = cur;
          way[static_cast<std::size_t>(j)] = j0;
        }
        if (minv[static_cast<std::size_t>(j)] < delta) {
          delta = minv[static_cast<std::size_t>(j)];
          j1 = j;
        }
      }
      for (Index j = 0; j <= n; ++j) {
        if (used[static_cast<std::size_t>(j)]) {
          u[static_cast<std::size_t>(match[static_cast<std::size_t>(j)])] += delta;
          v[static_cast<std::size_t>(j)] -= delta;
        } else {
          minv[static_cast<std::size_t>(j)] -= delta;
        }
      }
      j0 = j1;
    } while (match[static_cast<std::size_t>(j0)] != 0);
    do {
      const Index j1 = way[static_cast<std::size_t>(j0)];
      match[static_cast<std::size_t>(j0)] = match[static_cast<std::size_t>(j1)];
      j0 = j1;
    } while (j0 != 0);
  }

  double total = 0.0;
  for (Index j = 1; j <= n; ++j) {
    total += cost(match[static_cast<std::size_t>(j)] - 1, j - 1);
  }
  return total;
}

DenseMatrix submatrix(const DenseMatrix& cost, Index first_row,
                      const std::vector<char>& col_taken) {
  const Index n = cost.rows();
  const Index m = n - first_row;
  DenseMatrix sub(m, m);
  Index jj = 0;
  for (Index j = 0; j < n; ++j) {
    if (col_taken[static_cast<std::size_t>(j)]) continue;
    for (Index i = 0; i < m; ++i) sub(i, jj) = cost(first_row + i, j);
    ++jj;
  }
  return sub;
}

}  // namespace

std::vector<Index> hungarian(const DenseMatrix& cost) {
  if (cost.rows() != cost.cols()) {
    throw InvalidShape("hungarian: cost matrix must be square");
  }
  require_nonempty(cost, "hungarian");
  require_finite(cost, "hungarian");

  const Index n = cost.rows();
  const double optimal = min_assignment_cost(cost);
  const double slack = 1e-9 * (1.0 + std::abs(optimal));

  // Fix rows in order, taking the smallest column that still allows an
  // optimal completion; this yields the lexicographically smallest
  // minimizing permutation.
  std::vector<Index> perm(static_cast<std::size_t>(n), -1);
  std::vector<char> col_taken(static_cast<std::size_t>(n), 0);
  double spent = 0.0;
  for (Index i = 0; i < n; ++i) {
    Index fallback = -1;
    double fallback_total = std::numeric_limits<double>::infinity();
    for (Index j = 0; j < n; ++j) {
      if (col_taken[static_cast<std::size_t>(j)]) continue;
      double completion = 0.0;
      if (i + 1 < n) {
        col_taken[static_cast<std::size_t>(j)] = 1;
        completion = min_assignment_cost(submatrix(cost, i + 1, col_taken));
        col_taken[static_cast<std::size_t>(j)] = 0;
      }
      const double total = spent + cost(i, j) + completion;
      if (total <= optimal + slack) {
        perm[static_cast<std::size_t>(i)] = j;
        break;
      }
      if (total < fallback_total) {
        fallback_total = total;
        fallback = j;
      }
    }
    if (perm[static_cast<std::size_t>(i)] < 0) perm[static_cast<std::size_t>(i)] = fallback;
    const Index j = perm[static_cast<std::size_t>(i)];
    col_taken[static_cast<std::size_t>(j)] = 1;
    spent += cost(i, j);
  }
  return perm;
}

double acc(const LabelPair& lp) {
  const Contingency c = contingency(lp);
  const Index k = static_cast<Index>(std::max(c.counts.size(), c.counts[0].size()));
  // Pad to square and negate: maximum agreement = minimum negated count.
  DenseMatrix costm = DenseMatrix::Zero(k, k);
  for (std::size_t i = 0; i < c.counts.size(); ++i) {
    for (std::size_t j = 0; j < c.counts[i].size(); ++j) {
      costm(static_cast<Index>(i), static_cast<Index>(j)) =
          -static_cast<double>(c.counts[i][j]);
    }
  }
  const std::vector<Index> perm = hungarian(costm);
  double matched = 0.0;
  for (Index i = 0; i < k; ++i) {
    matched -= costm(i, perm[static_cast<std::size_t>(i)]);
  }
  return matched / static_cast<double>(c.n);
}

double nmi(const LabelPair& lp) {
  const Contingency c = contingency(lp);
  if (identical_partitions(c)) return 1.0;

  const double n = static_cast<double>(c.n);
  double ht = 0.0, hp = 0.0, mi = 0.0;
  for (long r : c.row_sums) {
    if (r > 0) ht -= (r / n) * std::log(r / n);
  }
  for (long s : c.col_sums) {
    if (s > 0) hp -= (s / n) * std::log(s / n);
  }
  if (ht <= 0.0 || hp <= 0.0) return 0.0;
  for (std::size_t i = 0; i < c.counts.size(); ++i) {
    for (std::size_t j = 0; j < c.counts[i].size(); ++j) {
      const long nij = c.counts[i][j];
      if (nij == 0) continue;
      mi += (nij / n) *
            std::log(n * nij / (static_cast<double>(c.row_sums[i]) *
                                static_cast<double>(c.col_sums[j])));
    }
  }
  const double value = mi / std::sqrt(ht * hp);
  return std::clamp(value, 0.0, 1.0);
}

double pairwise_f1(const LabelPair& lp) {
  const Contingency c = contingency(lp);
  auto pairs = [](long m) { return m * (m - 1) / 2; };
  long tp = 0, same_truth = 0, same_pred = 0;
  for (const auto& row : c.counts) {
    for (long nij : row) tp += pairs(nij);
  }
  for (long r : c.row_sums) same_truth += pairs(r);
  for (long s : c.col_sums) same_pred += pairs(s);
  const long fp = same_pred - tp;
  const long fn = same_truth - tp;
  const long denom = 2 * tp + fp + fn;
  if (denom == 0) return 1.0;  // both partitions all singletons
  return 2.0 * static_cast<double>(tp) / static_cast<double>(denom);
}

double purity(const LabelPair& lp) {
  const Contingency c = contingency(lp);
  long majority = 0;
  for (std::size_t j = 0; j < c.counts[0].size(); ++j) {
    long best = 0;
    for (const auto& row : c.counts) best = std::max(best, row[j]);
    majority += best;
  }
  return static_cast<double>(majority) / static_cast<double>(c.n);
}

MetricBundle evaluate(const LabelPair& lp) {
  return MetricBundle{acc(lp), nmi(lp), pairwise_f1(lp), purity(lp)};
}

}  // namespace dalmc

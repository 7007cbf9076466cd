#pragma once

#include <string>
#include <vector>

#include "dalmc/dataset.hpp"
#include "dalmc/matrix.hpp"

namespace dalmc {

// Alternating-minimization engine. Per-view embeddings H^p (d'^p x n, row
// orthonormal) and bases Z^p (d^p x d'^p) factorize each view, per-view
// anchors A^p (d'^p x l, column orthonormal) and the consensus anchor
// graph S (l x n, row orthonormal) couple the views, and alpha holds the
// adaptive simplex weights. The objective being minimized is
//
//   sum_p 1/2 alpha_p^2 ||X^p - Z^p H^p||_F^2 - beta sum_p Tr(H^p (A^p S)^T).

struct SolverConfig {
  Index anchors = 0;               // l
  std::vector<Index> embed_dims;   // d'^p, one per view
  double beta = 0.1;
  Index max_iter = 100;
  double rel_tol = 1e-6;
  std::uint64_t seed = 0;

  // Throws InvalidConfig unless 1 <= l <= min_p d'^p, l <= n,
  // 1 <= d'^p <= min(d^p, n), beta >= 0, max_iter >= 1, rel_tol >= 0.
  void validate(const MultiViewDataset& x) const;
};

// d'^p = min(d^p, max(2k, l)): the embedding must at least carry k
// clusters, and must be able to host l orthonormal anchor columns.
std::vector<Index> default_embed_dims(const MultiViewDataset& x, Index k, Index l);

struct SolverState {
  std::vector<DenseMatrix> h;      // H^p: d'^p x n, H H^T = I
  std::vector<DenseMatrix> z;      // Z^p: d^p x d'^p
  std::vector<DenseMatrix> a;      // A^p: d'^p x l, A^T A = I
  DenseMatrix s;                   // S: l x n, S S^T = I
  std::vector<double> alpha;       // simplex weights, length v
  std::vector<double> objective_trace;  // entry 0 is the initial objective,
                                        // then one entry per full sweep
};

struct FitReport {
  SolverState state;
  Index iterations = 0;            // full sweeps performed
  bool converged = false;
  double lower_bound = 0.0;
  double wall_time = 0.0;          // seconds
  std::vector<std::string> degeneracies;  // e.g. rank-deficient subproblems
};

// Objective value for a consistent (dataset, state, config) triple.
double objective(const MultiViewDataset& x, const SolverState& st,
                 const SolverConfig& cfg);

// H^p-subproblem: maximize Tr(H B) with B = alpha_p^2 X^p^T Z^p + beta S^T A^p^T
// over row-orthonormal H. Returns the new H^p.
DenseMatrix update_h(const MultiViewDataset& x, const SolverState& st,
                     const SolverConfig& cfg, Index p);

// Z^p-subproblem: closed form Z^p = X^p H^p^T, the unconstrained minimizer
// of the factorization residual for row-orthonormal H^p.
DenseMatrix update_z(const MultiViewDataset& x, const SolverState& st, Index p);

// S-subproblem: maximize sum_p Tr(H^p (A^p S)^T) over S with S S^T = I.
// `degenerate` is set when the stacked coefficient matrix is rank deficient
// and the maximizer is therefore not unique.
DenseMatrix update_s(const SolverState& st, const SolverConfig& cfg);
DenseMatrix update_s(const SolverState& st, const SolverConfig& cfg, bool& degenerate);

// A^p-subproblem: maximize Tr(H^p (A^p S)^T) over A^p with A^p^T A^p = I.
DenseMatrix update_a(const SolverState& st, Index p);
DenseMatrix update_a(const SolverState& st, Index p, bool& degenerate);

// alpha-subproblem: alpha_p proportional to 1 / (r_p + eps) with
// r_p = ||X^p - Z^p H^p||_F^2 and eps = 1e-12 guarding exact factorizations.
std::vector<double> update_alpha(const MultiViewDataset& x, const SolverState& st);

// Feasible deterministic starting point: H^p from the top-d'^p right
// singular vectors of X^p, Z^p = X^p H^p^T, seeded random orthonormal A^p
// and S, uniform alpha.
SolverState init_state(const MultiViewDataset& x, const SolverConfig& cfg);

// Full algorithm: sweeps of (H^p, Z^p, S, A^p, alpha) updates until the
// relative objective change drops below rel_tol or max_iter is reached.
// Single-threaded and bit-deterministic for a fixed (dataset, config).
FitReport fit(const MultiViewDataset& x, const SolverConfig& cfg);

// Same loop from a caller-supplied starting state (used by equivariance and
// warm-start tests).
FitReport fit_from(const MultiViewDataset& x, const SolverConfig& cfg,
                   SolverState state);

// -max(1, beta) * sum_p l * sqrt(d'^p); every trace entry sits above this.
double lower_bound(const SolverConfig& cfg);

}  // namespace dalmc

#include "dalmc/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "dalmc/linalg.hpp"
#include "dalmc/rng.hpp"

namespace dalmc {

namespace {

constexpr std::uint64_t kStreamAnchorInit = 101;
constexpr std::uint64_t kStreamGraphInit = 102;
constexpr double kAlphaEps = 1e-12;

void check_state_shapes(const MultiViewDataset& x, const SolverState& st,
                        const SolverConfig& cfg) {
  const Index v = x.view_count();
  const Index n = x.sample_count();
  if (static_cast<Index>(st.h.size()) != v || static_cast<Index>(st.z.size()) != v ||
      static_cast<Index>(st.a.size()) != v || static_cast<Index>(st.alpha.size()) != v) {
    throw InvalidShape("solver: state holds a different view count than the dataset");
  }
  for (Index p = 0; p < v; ++p) {
    const Index dp = x.dim(p);
    const Index ep = cfg.embed_dims[static_cast<std::size_t>(p)];
    const auto& hp = st.h[static_cast<std::size_t>(p)];
    const auto& zp = st.z[static_cast<std::size_t>(p)];
    const auto& ap = st.a[static_cast<std::size_t>(p)];
    if (hp.rows() != ep || hp.cols() != n) {
      throw InvalidShape("solver: H^" + std::to_string(p) + " must be " +
                         std::to_string(ep) + "x" + std::to_string(n));
    }
    if (zp.rows() != dp || zp.cols() != ep) {
      throw InvalidShape("solver: Z^" + std::to_string(p) + " must be " +
                         std::to_string(dp) + "x" + std::to_string(ep));
    }
    if (ap.rows() != ep || ap.cols() != cfg.anchors) {
      throw InvalidShape("solver: A^" + std::to_string(p) + " must be " +
                         std::to_string(ep) + "x" + std::to_string(cfg.anchors));
    }
  }
  if (st.s.rows() != cfg.anchors || st.s.cols() != n) {
    throw InvalidShape("solver: S must be " + std::to_string(cfg.anchors) + "x" +
                       std::to_string(n));
  }
}

double view_residual(const MultiViewDataset& x, const SolverState& st, Index p) {
  const auto& xp = x.view(p);
  const auto& zp = st.z[static_cast<std::size_t>(p)];
  const auto& hp = st.h[static_cast<std::size_t>(p)];
  return (xp - zp * hp).squaredNorm();
}

}  // namespace

void SolverConfig::validate(const MultiViewDataset& x) const {
  x.validate(1);
  const Index v = x.view_count();
  const Index n = x.sample_count();
  if (static_cast<Index>(embed_dims.size()) != v) {
    throw InvalidConfig("config: embed_dims must list one dimension per view");
  }
  if (anchors < 1) throw InvalidConfig("config: anchor count must be >= 1");
  if (anchors > n) throw InvalidConfig("config: anchor count exceeds sample count");
  for (Index p = 0; p < v; ++p) {
    const Index ep = embed_dims[static_cast<std::size_t>(p)];
    const Index cap = std::min(x.dim(p), n);
    if (ep < 1 || ep > cap) {
      throw InvalidConfig("config: embed dim for view " + std::to_string(p) +
                          " must lie in [1, " + std::to_string(cap) + "]");
    }
    if (anchors > ep) {
      throw InvalidConfig("config: anchor count " + std::to_string(anchors) +
                          " exceeds embed dim " + std::to_string(ep) + " of view " +
                          std::to_string(p));
    }
  }
  if (beta < 0.0) throw InvalidConfig("config: beta must be >= 0");
  if (max_iter < 1) throw InvalidConfig("config: max_iter must be >= 1");
  if (rel_tol < 0.0) throw InvalidConfig("config: rel_tol must be >= 0");
}

std::vector<Index> default_embed_dims(const MultiViewDataset& x, Index k, Index l) {
  std::vector<Index> dims;
  dims.reserve(static_cast<std::size_t>(x.view_count()));
  const Index n = x.sample_count();
  for (Index p = 0; p < x.view_count(); ++p) {
    const Index want = std::max(2 * k, l);
    dims.push_back(std::min({x.dim(p), n, want}));
  }
  return dims;
}

double objective(const MultiViewDataset& x, const SolverState& st,
                 const SolverConfig& cfg) {
  check_state_shapes(x, st, cfg);
  double value = 0.0;
  for (Index p = 0; p < x.view_count(); ++p) {
    const double ap = st.alpha[static_cast<std::size_t>(p)];
    value += 0.5 * ap * ap * view_residual(x, st, p);
    const DenseMatrix anchored =
        st.a[static_cast<std::size_t>(p)] * st.s;  // d'^p x n
    value -= cfg.beta *
             (st.h[static_cast<std::size_t>(p)].cwiseProduct(anchored)).sum();
  }
  if (!std::isfinite(value)) {
    throw NumericalFailure("objective: non-finite value", -1);
  }
  return value;
}

DenseMatrix update_h(const MultiViewDataset& x, const SolverState& st,
                     const SolverConfig& cfg, Index p) {
  const double ap = st.alpha[static_cast<std::size_t>(p)];
  // B = alpha_p^2 X^p^T Z^p + beta S^T A^p^T, n x d'^p
  const DenseMatrix b =
      ap * ap * (x.view(p).transpose() * st.z[static_cast<std::size_t>(p)]) +
      cfg.beta * (st.s.transpose() * st.a[static_cast<std::size_t>(p)].transpose());
  return linear_orthogonal_max(b).transpose();
}

DenseMatrix update_z(const MultiViewDataset& x, const SolverState& st, Index p) {
  const auto& hp = st.h[static_cast<std::size_t>(p)];
  if (x.view(p).cols() != hp.cols()) {
    throw InvalidShape("update_z: H^p column count does not match the view");
  }
  return x.view(p) * hp.transpose();
}

DenseMatrix update_s(const SolverState& st, const SolverConfig& cfg) {
  bool ignored = false;
  return update_s(st, cfg, ignored);
}

DenseMatrix update_s(const SolverState& st, const SolverConfig& cfg,
                     bool& degenerate) {
  // M = sum_p A^p^T H^p (l x n); beta scales the objective, not the argmax.
  DenseMatrix m = DenseMatrix::Zero(cfg.anchors, st.s.cols());
  for (std::size_t p = 0; p < st.h.size(); ++p) {
    m.noalias() += st.a[p].transpose() * st.h[p];
  }
  return linear_orthogonal_max(m.transpose(), degenerate).transpose();
}

DenseMatrix update_a(const SolverState& st, Index p) {
  bool ignored = false;
  return update_a(st, p, ignored);
}

DenseMatrix update_a(const SolverState& st, Index p, bool& degenerate) {
  const DenseMatrix n = st.h[static_cast<std::size_t>(p)] * st.s.transpose();
  return linear_orthogonal_max(n, degenerate);
}

std::vector<double> update_alpha(const MultiViewDataset& x, const SolverState& st) {
  const Index v = x.view_count();
  std::vector<double> inv(static_cast<std::size_t>(v));
  double total = 0.0;
  for (Index p = 0; p < v; ++p) {
    inv[static_cast<std::size_t>(p)] = 1.0 / (view_residual(x, st, p) + kAlphaEps);
    total += inv[static_cast<std::size_t>(p)];
  }
  std::vector<double> alpha(static_cast<std::size_t>(v));
  for (Index p = 0; p < v; ++p) {
    alpha[static_cast<std::size_t>(p)] = inv[static_cast<std::size_t>(p)] / total;
  }
  return alpha;
}

SolverState init_state(const MultiViewDataset& x, const SolverConfig& cfg) {
  cfg.validate(x);
  const Index v = x.view_count();
  const Index n = x.sample_count();

  SolverState st;
  st.h.reserve(static_cast<std::size_t>(v));
  st.z.reserve(static_cast<std::size_t>(v));
  st.a.reserve(static_cast<std::size_t>(v));
  for (Index p = 0; p < v; ++p) {
    const Index ep = cfg.embed_dims[static_cast<std::size_t>(p)];
    const ThinSvd svd = thin_svd(x.view(p));
    // Top-d'^p right singular vectors as rows.
    st.h.push_back(svd.v.leftCols(ep).transpose());
    st.z.push_back(x.view(p) * st.h.back().transpose());

    Rng rng(derive_seed(cfg.seed, kStreamAnchorInit, static_cast<std::uint64_t>(p)));
    st.a.push_back(linear_orthogonal_max(gaussian_matrix(ep, cfg.anchors, rng)));
  }
  Rng rng(derive_seed(cfg.seed, kStreamGraphInit, 0));
  st.s = linear_orthogonal_max(gaussian_matrix(cfg.anchors, n, rng).transpose())
             .transpose();
  st.alpha.assign(static_cast<std::size_t>(v), 1.0 / static_cast<double>(v));
  return st;
}

FitReport fit(const MultiViewDataset& x, const SolverConfig& cfg) {
  return fit_from(x, cfg, init_state(x, cfg));
}

FitReport fit_from(const MultiViewDataset& x, const SolverConfig& cfg,
                   SolverState state) {
  cfg.validate(x);
  check_state_shapes(x, state, cfg);
  const auto start = std::chrono::steady_clock::now();
  const Index v = x.view_count();

  FitReport report;
  report.lower_bound = lower_bound(cfg);

  double prev = 0.0;
  try {
    prev = objective(x, state, cfg);
  } catch (const NumericalFailure&) {
    throw NumericalFailure("fit: non-finite objective", 0);
  }
  state.objective_trace.clear();
  state.objective_trace.push_back(prev);

  for (Index sweep = 1; sweep <= cfg.max_iter; ++sweep) {
    for (Index p = 0; p < v; ++p) {
      state.h[static_cast<std::size_t>(p)] = update_h(x, state, cfg, p);
    }
    for (Index p = 0; p < v; ++p) {
      state.z[static_cast<std::size_t>(p)] = update_z(x, state, p);
    }
    bool s_degenerate = false;
    state.s = update_s(state, cfg, s_degenerate);
    if (s_degenerate) {
      report.degeneracies.push_back("sweep " + std::to_string(sweep) +
                                    ": S-subproblem rank deficient");
    }
    for (Index p = 0; p < v; ++p) {
      bool a_degenerate = false;
      state.a[static_cast<std::size_t>(p)] = update_a(state, p, a_degenerate);
      if (a_degenerate) {
        report.degeneracies.push_back("sweep " + std::to_string(sweep) +
                                      ": A-subproblem rank deficient, view " +
                                      std::to_string(p));
      }
    }
    state.alpha = update_alpha(x, state);

    double value = 0.0;
    try {
      value = objective(x, state, cfg);
    } catch (const NumericalFailure&) {
      throw NumericalFailure("fit: non-finite objective", sweep);
    }
    state.objective_trace.push_back(value);
    report.iterations = sweep;

    const double rel_change = std::abs(prev - value) / (1.0 + std::abs(prev));
    if (rel_change <= cfg.rel_tol) {
      report.converged = true;
      break;
    }
    prev = value;
  }

  report.state = std::move(state);
  report.wall_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

double lower_bound(const SolverConfig& cfg) {
  double sum = 0.0;
  for (const Index ep : cfg.embed_dims) {
    sum += static_cast<double>(cfg.anchors) * std::sqrt(static_cast<double>(ep));
  }
  return -std::max(1.0, cfg.beta) * sum;
}

}  // namespace dalmc

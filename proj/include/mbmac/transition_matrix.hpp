#pragma once

#include <algorithm>
#include <cstdint>
#include <utility>
#include <vector>

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "mbmac/errors.hpp"
#include "mbmac/markov.hpp"

// Explicit single-step transition matrix of the backoff chain and a
// numerical stationary solver. This path shares no algebra with the
// closed forms in markov.hpp; the two are cross-checked in the tests.

namespace mbmac {

// Row-stochastic sparse matrix over the chain state index. The transfer
// state (last index) is present only when beta > 0; with beta = 0 it is
// unreachable and dropping it keeps the chain irreducible.
struct TransitionMatrix {
  int W = 1, m = 0;
  double p = 0.0, alpha = 0.0, beta = 0.0;
  std::int64_t n = 0;
  bool has_mmw_state = false;
  std::vector<std::vector<std::pair<std::int32_t, double>>> rows;
};

inline TransitionMatrix build_transition_matrix(double p, double alpha, double beta, int W,
                                                int m, std::int64_t max_states = 1'000'000) {
  detail::check_chain_args(p, alpha, beta, W, m);
  const bool with_mmw = beta > 0.0;
  const std::int64_t n_backoff = backoff_state_count(W, m);
  const std::int64_t n = n_backoff + (with_mmw ? 1 : 0);
  if (n > max_states)
    throw SizeError("transition matrix: " + std::to_string(n) + " states exceeds cap of " +
                    std::to_string(max_states));

  TransitionMatrix M;
  M.W = W;
  M.m = m;
  M.p = p;
  M.alpha = alpha;
  M.beta = beta;
  M.n = n;
  M.has_mmw_state = with_mmw;
  M.rows.resize(static_cast<std::size_t>(n));

  const std::int64_t mmw_idx = n_backoff;
  auto idx = [&](int stage, std::int64_t k) {
    return static_cast<std::int32_t>((static_cast<std::int64_t>(W) << stage) - W + k);
  };
  auto add = [&](std::int64_t row, std::int32_t col, double value) {
    if (value != 0.0) M.rows[static_cast<std::size_t>(row)].emplace_back(col, value);
  };
  // Uniform landing over one stage's counter range.
  auto spread = [&](std::int64_t row, int stage, double mass) {
    const std::int64_t w = window_at_stage(W, stage);
    const double per_state = mass / static_cast<double>(w);
    for (std::int64_t k = 0; k < w; ++k) add(row, idx(stage, k), per_state);
  };

  for (int stage = 0; stage <= m; ++stage) {
    const std::int64_t w = window_at_stage(W, stage);
    // Countdown: (i,k) -> (i,k-1) with probability one.
    for (std::int64_t k = 1; k < w; ++k)
      add(idx(stage, k), idx(stage, k - 1), 1.0);

    // Transmission outcome from (i,0).
    const std::int64_t row = idx(stage, 0);
    spread(row, 0, 1.0 - p);  // success: fresh draw at stage 0
    if (stage < m) {
      spread(row, stage + 1, p);  // escalation
    } else {
      spread(row, m, p * (1.0 - beta));  // redraw at stage m
      if (with_mmw) add(row, static_cast<std::int32_t>(mmw_idx), beta * p);
    }
  }
  if (with_mmw) {
    spread(mmw_idx, 0, alpha);        // transfer done, back to stage 0
    spread(mmw_idx, m, 1.0 - alpha);  // beam training failed, redraw at stage m
  }

  // Merge duplicate columns (stage 0 and stage m coincide when m = 0).
  for (auto& row : M.rows) {
    std::sort(row.begin(), row.end());
    std::size_t out = 0;
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (out > 0 && row[out - 1].first == row[i].first)
        row[out - 1].second += row[i].second;
      else
        row[out++] = row[i];
    }
    row.resize(out);
  }
  return M;
}

// Damped power iteration on the transpose, v <- (v + vM)/2 renormalized.
// The damping removes the periodicity of the deterministic countdown
// lanes. Residual is the max-norm of vM - v.
inline std::vector<double> power_iteration_stationary(const TransitionMatrix& M,
                                                      double tol = 1e-12,
                                                      std::int64_t max_iters = 5'000'000) {
  const std::size_t n = static_cast<std::size_t>(M.n);
  if (n == 0) throw DomainError("stationary: empty matrix");
  std::vector<double> v(n, 1.0 / static_cast<double>(n)), next(n, 0.0);
  double residual = 1.0;
  for (std::int64_t iter = 0; iter < max_iters; ++iter) {
    std::fill(next.begin(), next.end(), 0.0);
    for (std::size_t r = 0; r < n; ++r)
      for (const auto& [c, value] : M.rows[r]) next[static_cast<std::size_t>(c)] += v[r] * value;

    if ((iter & 15) == 0) {
      residual = 0.0;
      for (std::size_t i = 0; i < n; ++i) residual = std::max(residual, std::abs(next[i] - v[i]));
      if (residual < tol) {
        double sum = 0.0;
        for (double x : next) sum += x;
        for (double& x : next) x /= sum;
        return next;
      }
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      v[i] = 0.5 * (v[i] + next[i]);
      sum += v[i];
    }
    for (double& x : v) x /= sum;
  }
  throw SolverError("stationary: power iteration did not converge, residual " +
                    std::to_string(residual));
}

namespace detail {

// Direct solve of v^T M = v^T with sum(v) = 1: assemble (M^T - I) with the
// last balance equation replaced by the normalization row, then sparse LU.
inline std::vector<double> direct_stationary(const TransitionMatrix& M) {
  const auto n = static_cast<Eigen::Index>(M.n);
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(4 * M.n));
  for (std::int64_t r = 0; r < M.n; ++r)
    for (const auto& [c, value] : M.rows[static_cast<std::size_t>(r)])
      if (c != M.n - 1) trip.emplace_back(c, static_cast<Eigen::Index>(r), value);
  for (std::int64_t d = 0; d < M.n - 1; ++d) trip.emplace_back(d, d, -1.0);
  for (std::int64_t c = 0; c < M.n; ++c) trip.emplace_back(n - 1, c, 1.0);

  Eigen::SparseMatrix<double> A(n, n);
  A.setFromTriplets(trip.begin(), trip.end());
  A.makeCompressed();

  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.analyzePattern(A);
  lu.factorize(A);
  if (lu.info() != Eigen::Success)
    throw SolverError("stationary: sparse LU factorization failed");

  Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
  b[n - 1] = 1.0;
  Eigen::VectorXd x = lu.solve(b);
  return std::vector<double>(x.data(), x.data() + n);
}

}  // namespace detail

inline double stationary_residual(const TransitionMatrix& M, const std::vector<double>& v) {
  std::vector<double> image(static_cast<std::size_t>(M.n), 0.0);
  for (std::size_t r = 0; r < static_cast<std::size_t>(M.n); ++r)
    for (const auto& [c, value] : M.rows[r]) image[static_cast<std::size_t>(c)] += v[r] * value;
  double res = 0.0;
  for (std::size_t i = 0; i < image.size(); ++i) res = std::max(res, std::abs(image[i] - v[i]));
  return res;
}

// Stationary vector of a row-stochastic chain: direct sparse solve for
// chains that fit comfortably in an LU factorization, damped power
// iteration beyond that.
inline std::vector<double> solve_stationary_numeric(const TransitionMatrix& M,
                                                    double tol = 1e-12) {
  constexpr std::int64_t kDirectSolveMaxStates = 50'000;
  std::vector<double> v = (M.n <= kDirectSolveMaxStates) ? detail::direct_stationary(M)
                                                         : power_iteration_stationary(M, tol);
  const double res = stationary_residual(M, v);
  if (!(res < 1e-10))
    throw SolverError("stationary: residual " + std::to_string(res) + " exceeds tolerance");
  return v;
}

}  // namespace mbmac

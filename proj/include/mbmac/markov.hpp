#pragma once

#include <cmath>
#include <cstdint>
#include <ostream>
#include <vector>

#include "mbmac/errors.hpp"

// Closed-form analysis of the dual-band backoff chain.
//
// A saturated station contends on the sub-6 GHz band with binary
// exponential backoff over stages 0..m; the stage-i window is W_i = 2^i W
// and the counter is drawn uniformly from [0, W_i - 1]. Every slot the
// counter drops by one; at zero the station transmits and the attempt
// collides with a fixed, state-independent probability p. A collision at
// stage i < m escalates to stage i+1. A collision at stage m either
// redraws at stage m (probability 1 - beta) or enters the band-transfer
// state m_hat (probability beta), which lasts one slot: beam training
// succeeds with probability alpha, moving the packet to the 60 GHz band
// and resetting the station to stage 0; otherwise the station redraws at
// stage m.
//
// h(i,k) below is the stationary probability of backoff state (i,k) and
// h(m_hat) that of the transfer state. theta_uw / theta_mmw are the
// per-slot transmission probabilities on the two bands.

namespace mbmac {

// Chain state: backoff (stage, counter) or the transfer state, encoded
// as stage == kMmwStage (the same encoding is used in CSV output).
struct ChainState {
  static constexpr int kMmwStage = -1;

  int stage = 0;
  int counter = 0;

  bool is_mmw() const { return stage == kMmwStage; }
  static ChainState backoff(int stage, int counter) { return {stage, counter}; }
  static ChainState mmw() { return {kMmwStage, 0}; }

  bool operator==(const ChainState&) const = default;
};

inline std::int64_t window_at_stage(int W, int stage) {
  return static_cast<std::int64_t>(W) << stage;
}

// Number of backoff states: sum over stages of 2^i W = W (2^{m+1} - 1).
inline std::int64_t backoff_state_count(int W, int m) {
  return (static_cast<std::int64_t>(W) << (m + 1)) - W;
}

// Stable state indexing: (i,k) -> W (2^i - 1) + k, transfer state last.
inline std::int64_t state_index(int W, int m, const ChainState& s) {
  if (s.is_mmw()) return backoff_state_count(W, m);
  return (static_cast<std::int64_t>(W) << s.stage) - W + s.counter;
}

namespace detail {

inline void check_chain_args(double p, double alpha, double beta, int W, int m) {
  if (!(p >= 0.0 && p <= 1.0)) throw DomainError("chain: p must be in [0,1]");
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw DomainError("chain: alpha must be in [0,1]");
  if (!(beta >= 0.0 && beta <= 1.0)) throw DomainError("chain: beta must be in [0,1]");
  if (W < 1) throw DomainError("chain: W must be >= 1");
  if (m < 0) throw DomainError("chain: m must be >= 0");
  if (m > 40) throw DomainError("chain: m above 40 is not supported");
  if (p == 1.0 && alpha * beta == 0.0)
    throw DomainError("chain: p = 1 with alpha*beta = 0 has a divergent stage-m sojourn");
}

// sum_{i=0}^{n-1} x^i, evaluated termwise. Free of the removable
// singularities of (1 - x^n)/(1 - x); exact at x = 1.
inline double geometric_sum(double x, int n) {
  double sum = 0.0, term = 1.0;
  for (int i = 0; i < n; ++i) {
    sum += term;
    term *= x;
  }
  return sum;
}

}  // namespace detail

// Stationary probability of state (0,0).
//
// For m >= 1 this is the closed form
//   h00 = 2 / [ W sum_{i<m} (2p)^i + sum_{i<m} p^i
//               + (2^m W + 1 + 2 beta p) p^m / (1 - p + alpha beta p) ].
// m = 0 degenerates: stage m *is* stage 0, so the stage-m re-entry flows
// land back in stage 0 and the normalization reduces to
//   h00 = 2 / (W + 1 + 2 beta p).
inline double h00(double p, double alpha, double beta, int W, int m) {
  detail::check_chain_args(p, alpha, beta, W, m);
  if (m == 0) return 2.0 / (W + 1.0 + 2.0 * beta * p);
  const double d = 1.0 - p + alpha * beta * p;
  const double w_m = std::ldexp(static_cast<double>(W), m);
  const double denom = W * detail::geometric_sum(2.0 * p, m) +
                       detail::geometric_sum(p, m) +
                       (w_m + 1.0 + 2.0 * beta * p) * std::pow(p, m) / d;
  return 2.0 / denom;
}

// Full stationary distribution. Stage heads follow
//   h(i,0) = p^i h00                       for i < m,
//   h(m,0) = p^m h00 / (1 - p + alpha beta p),
//   h(m_hat) = beta p^{m+1} h00 / (1 - p + alpha beta p),
// and within a stage h(i,k) = (W_i - k)/W_i * h(i,0).
struct StationaryDistribution {
  double p = 0.0, alpha = 0.0, beta = 0.0;
  int W = 1, m = 0;
  std::vector<double> h;  // backoff states in index order, transfer state last

  double prob(const ChainState& s) const {
    return h[static_cast<std::size_t>(state_index(W, m, s))];
  }
  double at(int stage, int counter) const { return prob(ChainState::backoff(stage, counter)); }
  double mmw() const { return h.back(); }

  double sum() const {
    double s = 0.0;
    for (double v : h) s += v;
    return s;
  }
};

inline StationaryDistribution stationary_distribution(double p, double alpha, double beta,
                                                      int W, int m) {
  const double h0 = h00(p, alpha, beta, W, m);
  StationaryDistribution sd;
  sd.p = p;
  sd.alpha = alpha;
  sd.beta = beta;
  sd.W = W;
  sd.m = m;
  sd.h.assign(static_cast<std::size_t>(backoff_state_count(W, m)) + 1, 0.0);

  const double d = 1.0 - p + alpha * beta * p;
  std::size_t idx = 0;
  for (int stage = 0; stage <= m; ++stage) {
    double head;
    if (stage < m)
      head = std::pow(p, stage) * h0;
    else
      head = (m == 0) ? h0 : std::pow(p, m) * h0 / d;
    const double w_i = static_cast<double>(window_at_stage(W, stage));
    for (std::int64_t k = 0; k < window_at_stage(W, stage); ++k)
      sd.h[idx++] = (w_i - static_cast<double>(k)) / w_i * head;
  }
  sd.h[idx] = (m == 0) ? beta * p * h0 : beta * std::pow(p, m + 1) * h0 / d;
  return sd;
}

// Per-slot transmission probability on the sub-6 GHz band: the summed
// stage-head probabilities sum_i h(i,0).
inline double theta_uw(double p, double alpha, double beta, int W, int m) {
  const double h0 = h00(p, alpha, beta, W, m);
  if (m == 0) return h0;
  const double d = 1.0 - p + alpha * beta * p;
  return h0 * (detail::geometric_sum(p, m) + std::pow(p, m) / d);
}

// Per-slot transmission probability on the 60 GHz band: alpha * h(m_hat).
inline double theta_mmw(double p, double alpha, double beta, int W, int m) {
  const double h0 = h00(p, alpha, beta, W, m);
  if (m == 0) return alpha * beta * p * h0;
  const double d = 1.0 - p + alpha * beta * p;
  return alpha * beta * std::pow(p, m + 1) * h0 / d;
}

// Classic single-band DCF transmission probability,
//   theta = 2 (1-2p) / ( (1-2p)(W+1) + p W (1 - (2p)^m) ),
// the beta = 0 reduction of theta_uw. Kept as an independently coded
// route for cross-checks. The p = 1/2 removable singularity is evaluated
// by its limit.
inline double theta_uw_basic_dcf(double p, int W, int m) {
  detail::check_chain_args(p, 0.0, 0.0, W, m);
  const double one_minus_2p = 1.0 - 2.0 * p;
  if (std::abs(one_minus_2p) < 1e-12)
    return 4.0 / (2.0 * (W + 1.0) + static_cast<double>(m) * W);
  return 2.0 * one_minus_2p /
         (one_minus_2p * (W + 1.0) + p * W * (1.0 - std::pow(2.0 * p, m)));
}

// CSV dump: stage, counter, probability; the transfer state is stage -1.
inline void write_stationary_csv(std::ostream& os, const StationaryDistribution& sd) {
  os << "stage,counter,probability\n";
  std::size_t idx = 0;
  os.precision(17);
  for (int stage = 0; stage <= sd.m; ++stage)
    for (std::int64_t k = 0; k < window_at_stage(sd.W, stage); ++k)
      os << stage << ',' << k << ',' << sd.h[idx++] << '\n';
  os << ChainState::kMmwStage << ",0," << sd.h[idx] << '\n';
}

}  // namespace mbmac

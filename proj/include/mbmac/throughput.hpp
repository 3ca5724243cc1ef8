#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "mbmac/config.hpp"
#include "mbmac/equilibrium.hpp"
#include "mbmac/errors.hpp"

// Network-level metrics: slot outcome probabilities, average slot time,
// 60 GHz scheduling capacity, and the aggregated saturation throughput
//   R = (P_s P_t B_uw + E[J_mmw] B_mmw) / (E[T] + E[J_mmw] T_fst).

namespace mbmac {

struct ThroughputReport {
  double p_t = 0.0;     // some station transmits in the slot
  double p_s = 0.0;     // conditional on a transmission, it succeeds
  double e_t_us = 0.0;  // average slot duration
  std::int64_t j_hat = 0;
  double e_j_mmw = 0.0;  // average 60 GHz transmitters per slot
  double r_bps = 0.0;
  double uw_component_bps = 0.0;
  double mmw_component_bps = 0.0;
};

struct ThroughputOptions {
  // The per-slot 60 GHz transmitter average is, by default, the plain
  // subset-sum form sum_{u=1..j_hat} e_u(theta), which carries no
  // complement factors and so overshoots a capped-binomial mean for
  // large theta. Set this to use E[min(N, j_hat)] instead.
  bool mmw_capped_mean = false;
};

namespace detail {

inline void check_thetas(std::span<const double> thetas, const char* what) {
  if (thetas.empty()) throw DomainError(std::string(what) + ": empty theta vector");
  for (double t : thetas)
    if (!(t >= 0.0 && t <= 1.0))
      throw DomainError(std::string(what) + ": theta outside [0,1]");
}

}  // namespace detail

// Probability that at least one station transmits: 1 - prod(1 - theta_j).
inline double p_transmit(std::span<const double> thetas) {
  detail::check_thetas(thetas, "p_transmit");
  double idle = 1.0;
  for (double t : thetas) idle *= 1.0 - t;
  return 1.0 - idle;
}

inline double p_transmit_homogeneous(double theta, int J) {
  const double v[] = {theta};
  detail::check_thetas(v, "p_transmit");
  if (J < 1) throw DomainError("p_transmit: J must be >= 1");
  return 1.0 - std::pow(1.0 - theta, J);
}

// Probability that a transmission slot carries exactly one transmitter:
//   sum_j theta_j prod_{j' != j} (1 - theta_j')  /  P_t.
inline double p_success(std::span<const double> thetas) {
  detail::check_thetas(thetas, "p_success");
  const double pt = p_transmit(thetas);
  if (!(pt > 0.0)) throw DomainError("p_success: undefined when no station ever transmits");
  const std::size_t n = thetas.size();
  // prefix[j] = prod_{i<j} (1-theta_i); suffix likewise, so zeros are fine.
  std::vector<double> suffix(n + 1, 1.0);
  for (std::size_t j = n; j-- > 0;) suffix[j] = suffix[j + 1] * (1.0 - thetas[j]);
  double single = 0.0, prefix = 1.0;
  for (std::size_t j = 0; j < n; ++j) {
    single += thetas[j] * prefix * suffix[j + 1];
    prefix *= 1.0 - thetas[j];
  }
  // Roundoff can push the quotient a hair past one (e.g. J = 1).
  return std::min(1.0, single / pt);
}

inline double p_success_homogeneous(double theta, int J) {
  const double v[] = {theta};
  detail::check_thetas(v, "p_success");
  if (J < 1) throw DomainError("p_success: J must be >= 1");
  const double pt = p_transmit_homogeneous(theta, J);
  if (!(pt > 0.0)) throw DomainError("p_success: undefined when no station ever transmits");
  return std::min(1.0, J * theta * std::pow(1.0 - theta, J - 1) / pt);
}

// Average slot duration: (1-P_t) sigma + P_t P_s T_s + P_t (1-P_s) T_c.
inline double expected_slot_time_us(double p_t, double p_s, const DerivedTimings& t) {
  if (!(p_t >= 0.0 && p_t <= 1.0) || !(p_s >= 0.0 && p_s <= 1.0))
    throw DomainError("expected_slot_time: probabilities must be in [0,1]");
  return (1.0 - p_t) * t.sigma_us + p_t * p_s * t.t_s_us + p_t * (1.0 - p_s) * t.t_c_us;
}

// Stations schedulable on the 60 GHz band within one average slot:
// floor(E[T] r_mmw / B_mmw), never more than J.
inline std::int64_t max_mmw_stas(double e_t_us, const ProtocolConfig& cfg) {
  if (!(e_t_us > 0.0)) throw DomainError("max_mmw_stas: E[T] must be positive");
  const double raw =
      std::floor(e_t_us * 1e-6 * cfg.rate_mmw_bps / static_cast<double>(cfg.payload_mmw_bits));
  return std::min<std::int64_t>(static_cast<std::int64_t>(raw), cfg.J);
}

// sum_{u=1..j_hat} e_u(theta_1..theta_J), where e_u is the elementary
// symmetric polynomial: the sum over all station subsets of size u of the
// product of their transfer probabilities. The one-station-at-a-time
// recurrence e_u += theta_j e_{u-1} gives the same value as subset
// enumeration without the combinatorial blowup.
inline double expected_mmw_transmitters(std::span<const double> thetas_mmw,
                                        std::int64_t j_hat) {
  if (j_hat < 0) throw DomainError("expected_mmw_transmitters: j_hat must be >= 0");
  if (j_hat == 0) return 0.0;
  detail::check_thetas(thetas_mmw, "expected_mmw_transmitters");
  const std::int64_t u_max = std::min<std::int64_t>(j_hat, thetas_mmw.size());
  std::vector<double> e(static_cast<std::size_t>(u_max) + 1, 0.0);
  e[0] = 1.0;
  for (double theta : thetas_mmw)
    for (std::int64_t u = u_max; u >= 1; --u)
      e[static_cast<std::size_t>(u)] += theta * e[static_cast<std::size_t>(u - 1)];
  double sum = 0.0;
  for (std::int64_t u = 1; u <= u_max; ++u) sum += e[static_cast<std::size_t>(u)];
  return sum;
}

// Homogeneous collapse: sum_{u=1..j_hat} C(J,u) theta^u.
inline double expected_mmw_transmitters_homogeneous(double theta_mmw, int J,
                                                    std::int64_t j_hat) {
  if (j_hat < 0) throw DomainError("expected_mmw_transmitters: j_hat must be >= 0");
  if (J < 1) throw DomainError("expected_mmw_transmitters: J must be >= 1");
  const double v[] = {theta_mmw};
  detail::check_thetas(v, "expected_mmw_transmitters");
  const std::int64_t u_max = std::min<std::int64_t>(j_hat, J);
  double sum = 0.0, term = 1.0;
  for (std::int64_t u = 1; u <= u_max; ++u) {
    term *= theta_mmw * static_cast<double>(J - u + 1) / static_cast<double>(u);
    sum += term;
  }
  return sum;
}

// Opt-in corrected estimator: E[min(N, j_hat)] where N counts stations in
// the transfer state, Poisson-binomial over the theta vector.
inline double expected_mmw_transmitters_capped_mean(std::span<const double> thetas_mmw,
                                                    std::int64_t j_hat) {
  if (j_hat < 0) throw DomainError("expected_mmw_transmitters: j_hat must be >= 0");
  if (j_hat == 0) return 0.0;
  detail::check_thetas(thetas_mmw, "expected_mmw_transmitters");
  std::vector<double> pmf(thetas_mmw.size() + 1, 0.0);
  pmf[0] = 1.0;
  std::size_t count = 0;
  for (double theta : thetas_mmw) {
    ++count;
    for (std::size_t u = count; u >= 1; --u)
      pmf[u] = pmf[u] * (1.0 - theta) + pmf[u - 1] * theta;
    pmf[0] *= 1.0 - theta;
  }
  double mean = 0.0;
  for (std::size_t u = 1; u < pmf.size(); ++u)
    mean += static_cast<double>(std::min<std::int64_t>(u, j_hat)) * pmf[u];
  return mean;
}

inline double expected_mmw_transmitters_capped_mean_homogeneous(double theta_mmw, int J,
                                                                std::int64_t j_hat) {
  std::vector<double> thetas(static_cast<std::size_t>(J), theta_mmw);
  return expected_mmw_transmitters_capped_mean(thetas, j_hat);
}

namespace detail {

inline ThroughputReport assemble_report(const ProtocolConfig& cfg, double pt, double ps,
                                        double e_j_mmw_at, std::int64_t j_hat,
                                        const DerivedTimings& t) {
  ThroughputReport r;
  r.p_t = pt;
  r.p_s = ps;
  r.e_t_us = expected_slot_time_us(pt, ps, t);
  r.j_hat = j_hat;
  r.e_j_mmw = e_j_mmw_at;
  const double denom_us = r.e_t_us + r.e_j_mmw * t.t_fst_us;
  r.uw_component_bps = 1e6 * ps * pt * static_cast<double>(cfg.payload_uw_bits) / denom_us;
  r.mmw_component_bps = 1e6 * r.e_j_mmw * static_cast<double>(cfg.payload_mmw_bits) / denom_us;
  r.r_bps = r.uw_component_bps + r.mmw_component_bps;
  return r;
}

}  // namespace detail

// Saturation throughput for a homogeneous network at its operating point.
inline ThroughputReport saturation_throughput(const ProtocolConfig& cfg, const Equilibrium& eq,
                                              const ThroughputOptions& opt = {}) {
  cfg.validate();
  const DerivedTimings t = derive_timings(cfg);
  const double pt = p_transmit_homogeneous(eq.theta_uw, cfg.J);
  const double ps = (pt > 0.0) ? p_success_homogeneous(eq.theta_uw, cfg.J) : 0.0;
  const double et = expected_slot_time_us(pt, ps, t);
  const std::int64_t j_hat = max_mmw_stas(et, cfg);
  const double e_j = opt.mmw_capped_mean
                         ? expected_mmw_transmitters_capped_mean_homogeneous(eq.theta_mmw, cfg.J, j_hat)
                         : expected_mmw_transmitters_homogeneous(eq.theta_mmw, cfg.J, j_hat);
  return detail::assemble_report(cfg, pt, ps, e_j, j_hat, t);
}

// Heterogeneous form: per-station transmission probabilities supplied by
// the caller (the closed-form chain only covers the homogeneous case).
inline ThroughputReport saturation_throughput(const ProtocolConfig& cfg,
                                              std::span<const double> thetas_uw,
                                              std::span<const double> thetas_mmw,
                                              const ThroughputOptions& opt = {}) {
  cfg.validate();
  if (thetas_uw.size() != thetas_mmw.size() ||
      thetas_uw.size() != static_cast<std::size_t>(cfg.J))
    throw DomainError("saturation_throughput: theta vectors must have J entries");
  const DerivedTimings t = derive_timings(cfg);
  const double pt = p_transmit(thetas_uw);
  const double ps = (pt > 0.0) ? p_success(thetas_uw) : 0.0;
  const double et = expected_slot_time_us(pt, ps, t);
  const std::int64_t j_hat = max_mmw_stas(et, cfg);
  const double e_j = opt.mmw_capped_mean
                         ? expected_mmw_transmitters_capped_mean(thetas_mmw, j_hat)
                         : expected_mmw_transmitters(thetas_mmw, j_hat);
  return detail::assemble_report(cfg, pt, ps, e_j, j_hat, t);
}

}  // namespace mbmac

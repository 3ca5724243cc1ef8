#pragma once

#include <cmath>
#include <string>

#include "mbmac/config.hpp"
#include "mbmac/errors.hpp"
#include "mbmac/markov.hpp"

// Self-consistent operating point of a homogeneous network of J
// stations. The chain takes the conditional collision probability p as
// given; the network closes it: a tagged transmission collides iff at
// least one of the other J-1 stations transmits in the same slot,
//   p = 1 - (1 - theta_uw(p))^(J-1).
// The fixed point is found by bisection, which cannot oscillate the way
// the direct iteration p <- closure(theta(p)) can for small W.

namespace mbmac {

struct Equilibrium {
  double p = 0.0;
  double theta_uw = 0.0;
  double theta_mmw = 0.0;
  int iterations = 0;
  double residual = 0.0;
};

inline double collision_closure(double theta_uw, int J) {
  if (J < 1) throw DomainError("closure: J must be >= 1");
  if (!(theta_uw >= 0.0 && theta_uw <= 1.0)) throw DomainError("closure: theta must be in [0,1]");
  return 1.0 - std::pow(1.0 - theta_uw, J - 1);
}

inline Equilibrium solve_fixed_point(const ProtocolConfig& cfg, double tol = 1e-10) {
  cfg.validate();
  if (!(tol > 0.0)) throw DomainError("fixed point: tol must be positive");

  auto gap = [&](double p) {
    return p - collision_closure(theta_uw(p, cfg.alpha, cfg.beta, cfg.W, cfg.m), cfg.J);
  };

  Equilibrium eq;
  if (cfg.J == 1) {
    eq.p = 0.0;
  } else {
    double lo = 0.0, hi = 1.0 - 1e-12;
    const double g_lo = gap(lo), g_hi = gap(hi);
    if (!(g_lo <= 0.0 && g_hi >= 0.0))
      throw SolverError("fixed point: no sign change on [0,1): g(0)=" + std::to_string(g_lo) +
                        ", g(1-)=" + std::to_string(g_hi));
    double mid = 0.5 * (lo + hi);
    int iter = 0;
    for (; iter < 200; ++iter) {
      mid = 0.5 * (lo + hi);
      const double g_mid = gap(mid);
      if (std::abs(g_mid) < tol) break;
      if (g_mid < 0.0)
        lo = mid;
      else
        hi = mid;
      if (hi - lo < 1e-16) break;
    }
    eq.p = mid;
    eq.iterations = iter;
    eq.residual = std::abs(gap(mid));
    if (!(eq.residual < tol))
      throw SolverError("fixed point: bisection stalled, residual " +
                        std::to_string(eq.residual));
  }
  eq.theta_uw = theta_uw(eq.p, cfg.alpha, cfg.beta, cfg.W, cfg.m);
  eq.theta_mmw = theta_mmw(eq.p, cfg.alpha, cfg.beta, cfg.W, cfg.m);
  if (cfg.J == 1) eq.residual = 0.0;
  return eq;
}

}  // namespace mbmac

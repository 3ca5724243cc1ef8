#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <sstream>

#include "mbmac/markov.hpp"
#include "mbmac/transition_matrix.hpp"

using namespace mbmac;
using Catch::Approx;

namespace {

double max_componentwise_diff(const StationaryDistribution& sd, const TransitionMatrix& M,
                              const std::vector<double>& v) {
  // With beta = 0 the matrix drops the unreachable transfer state; the
  // closed form gives it probability zero.
  REQUIRE(v.size() == static_cast<std::size_t>(M.n));
  double diff = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) diff = std::max(diff, std::abs(v[i] - sd.h[i]));
  if (!M.has_mmw_state) diff = std::max(diff, std::abs(sd.h.back()));
  return diff;
}

}  // namespace

TEST_CASE("h00 closed form at p = 0") {
  // All collision terms vanish: h00 = 2/(W+1).
  CHECK(h00(0.0, 0.3, 0.7, 32, 3) == Approx(2.0 / 33.0).epsilon(1e-14));
  CHECK(h00(0.0, 1.0, 1.0, 8, 1) == Approx(2.0 / 9.0).epsilon(1e-14));
}

TEST_CASE("h00 domain checks") {
  CHECK_THROWS_AS(h00(-0.1, 0.5, 0.5, 32, 3), DomainError);
  CHECK_THROWS_AS(h00(1.1, 0.5, 0.5, 32, 3), DomainError);
  CHECK_THROWS_AS(h00(0.5, -0.2, 0.5, 32, 3), DomainError);
  CHECK_THROWS_AS(h00(0.5, 0.5, 1.2, 32, 3), DomainError);
  CHECK_THROWS_AS(h00(0.5, 0.5, 0.5, 0, 3), DomainError);
  CHECK_THROWS_AS(h00(0.5, 0.5, 0.5, 32, -1), DomainError);
  // p = 1 diverges unless the transfer path can drain stage m.
  CHECK_THROWS_AS(h00(1.0, 0.0, 1.0, 32, 3), DomainError);
  CHECK_THROWS_AS(h00(1.0, 1.0, 0.0, 32, 3), DomainError);
  CHECK(std::isfinite(h00(1.0, 0.5, 0.5, 32, 3)));
}

TEST_CASE("h00 at the p = 1/2 removable singularity matches the oracle") {
  const auto M = build_transition_matrix(0.5, 1.0, 1.0, 16, 2);
  const auto v = solve_stationary_numeric(M);
  CHECK(h00(0.5, 1.0, 1.0, 16, 2) == Approx(v[0]).margin(1e-8));
}

TEST_CASE("beta = 0 theta matches the independently coded DCF form") {
  // Cross-check h00 through the transmission probability: at beta = 0,
  // theta_uw must equal the single-band closed form.
  CHECK(theta_uw(0.25, 0.7, 0.0, 32, 3) == Approx(1.0 / 23.5).epsilon(1e-13));
  for (int ip = 1; ip <= 19; ++ip) {
    const double p = 0.05 * ip;
    for (int W : {2, 4, 8, 16, 32})
      for (int m : {0, 1, 2, 3, 5})
        CHECK(theta_uw(p, 0.3, 0.0, W, m) ==
              Approx(theta_uw_basic_dcf(p, W, m)).margin(1e-12));
  }
}

TEST_CASE("stationary distribution sums to one") {
  std::mt19937 gen(12345);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const double p = 0.99 * unit(gen);
    const double a = unit(gen), b = unit(gen);
    const int W = 1 + static_cast<int>(unit(gen) * 32);
    const int m = static_cast<int>(unit(gen) * 6);
    const auto sd = stationary_distribution(p, a, b, W, m);
    CHECK(sd.sum() == Approx(1.0).margin(1e-10));
  }
}

TEST_CASE("stationary distribution at p = 0 collapses to stage 0") {
  const auto sd = stationary_distribution(0.0, 0.6, 0.8, 8, 3);
  for (int i = 1; i <= 3; ++i)
    for (int k = 0; k < 8 << i; ++k) CHECK(sd.at(i, k) == 0.0);
  CHECK(sd.mmw() == 0.0);
  CHECK(sd.at(0, 0) == Approx(2.0 / 9.0).epsilon(1e-14));
}

TEST_CASE("closed form equals the transition-matrix oracle") {
  const auto M = build_transition_matrix(0.3, 0.6, 0.5, 4, 2);
  const auto v = solve_stationary_numeric(M);
  const auto sd = stationary_distribution(0.3, 0.6, 0.5, 4, 2);
  CHECK(max_componentwise_diff(sd, M, v) < 1e-8);
}

TEST_CASE("closed form equals the oracle in the degenerate m = 0 chain") {
  for (double p : {0.05, 0.3, 0.7, 0.95})
    for (double b : {0.0, 0.5, 1.0}) {
      const auto M = build_transition_matrix(p, 0.5, b, 8, 0);
      const auto v = solve_stationary_numeric(M);
      const auto sd = stationary_distribution(p, 0.5, b, 8, 0);
      CHECK(max_componentwise_diff(sd, M, v) < 1e-8);
    }
}

TEST_CASE("closed form equals the oracle at p = 1 when the transfer path drains") {
  const auto M = build_transition_matrix(1.0, 0.5, 0.5, 4, 2);
  const auto v = solve_stationary_numeric(M);
  const auto sd = stationary_distribution(1.0, 0.5, 0.5, 4, 2);
  CHECK(max_componentwise_diff(sd, M, v) < 1e-8);
}

TEST_CASE("theta_uw properties") {
  // p = 0: single stage, theta = 2/(W+1).
  CHECK(theta_uw(0.0, 0.5, 0.5, 32, 3) == Approx(2.0 / 33.0).epsilon(1e-14));

  // theta_uw is the summed stage-head mass of the distribution.
  std::mt19937 gen(999);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    const double p = 0.99 * unit(gen), a = unit(gen), b = unit(gen);
    const int W = 1 + static_cast<int>(unit(gen) * 32);
    const int m = static_cast<int>(unit(gen) * 6);
    const auto sd = stationary_distribution(p, a, b, W, m);
    double heads = 0.0;
    for (int i = 0; i <= m; ++i) heads += sd.at(i, 0);
    CHECK(theta_uw(p, a, b, W, m) == Approx(heads).margin(1e-12));
    CHECK(theta_mmw(p, a, b, W, m) == Approx(a * sd.mmw()).margin(1e-15));
  }
}

TEST_CASE("theta_mmw vanishes when either transfer gate closes") {
  CHECK(theta_mmw(0.4, 0.7, 0.0, 32, 3) == 0.0);
  CHECK(theta_mmw(0.4, 0.0, 0.7, 32, 3) == 0.0);
}

TEST_CASE("theta_mmw at p = 1/2 matches the oracle") {
  const auto M = build_transition_matrix(0.5, 1.0, 1.0, 16, 2);
  const auto v = solve_stationary_numeric(M);
  CHECK(theta_mmw(0.5, 1.0, 1.0, 16, 2) == Approx(1.0 * v.back()).margin(1e-8));
}

TEST_CASE("h(i,k) is non-increasing in the counter") {
  const auto sd = stationary_distribution(0.37, 0.4, 0.8, 8, 3);
  for (int i = 0; i <= 3; ++i)
    for (int k = 1; k < 8 << i; ++k) CHECK(sd.at(i, k) <= sd.at(i, k - 1));
}

TEST_CASE("chain outputs stay in [0,1] across the domain") {
  for (int ip = 0; ip <= 20; ++ip) {
    const double p = std::min(0.05 * ip, 0.999);
    for (double a : {0.0, 0.5, 1.0})
      for (double b : {0.0, 0.5, 1.0})
        for (int W : {1, 2, 32})
          for (int m : {0, 3}) {
            const double h0 = h00(p, a, b, W, m);
            const double tu = theta_uw(p, a, b, W, m);
            const double tm = theta_mmw(p, a, b, W, m);
            CHECK(std::isfinite(h0));
            CHECK((h0 >= 0.0 && h0 <= 1.0));
            CHECK((tu >= 0.0 && tu <= 1.0));
            CHECK((tm >= 0.0 && tm <= 1.0));
          }
  }
}

TEST_CASE("degenerate one-state chain") {
  const auto M = build_transition_matrix(0.5, 0.5, 0.0, 1, 0);
  REQUIRE(M.n == 1);
  REQUIRE(M.rows[0].size() == 1);
  CHECK(M.rows[0][0].first == 0);
  CHECK(M.rows[0][0].second == Approx(1.0).epsilon(1e-15));
  const auto v = solve_stationary_numeric(M);
  CHECK(v[0] == Approx(1.0).epsilon(1e-12));
}

TEST_CASE("transition rows read off the protocol rules") {
  // W=2, m=1, p=0.5, beta=1, alpha=1: from (1,0) mass beta*p = 0.5 goes to
  // the transfer state and 1-p = 0.5 spreads over stage 0.
  const auto M = build_transition_matrix(0.5, 1.0, 1.0, 2, 1);
  REQUIRE(M.n == 7);
  const auto row =
      M.rows[static_cast<std::size_t>(state_index(2, 1, ChainState::backoff(1, 0)))];
  double to_mmw = 0.0, to_stage0 = 0.0;
  for (const auto& [c, value] : row) {
    if (c == M.n - 1)
      to_mmw += value;
    else if (c < 2)
      to_stage0 += value;
    else
      FAIL("unexpected transition target");
  }
  CHECK(to_mmw == Approx(0.5).epsilon(1e-15));
  CHECK(to_stage0 == Approx(0.5).epsilon(1e-15));

  // Countdown: (0,1) -> (0,0) with probability one.
  const auto cd = M.rows[static_cast<std::size_t>(state_index(2, 1, ChainState::backoff(0, 1)))];
  REQUIRE(cd.size() == 1);
  CHECK(cd[0].first == 0);
  CHECK(cd[0].second == 1.0);
}

TEST_CASE("transition rows are stochastic") {
  std::mt19937 gen(777);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    const double p = unit(gen), a = unit(gen), b = unit(gen);
    const int W = 1 + static_cast<int>(unit(gen) * 16);
    const int m = static_cast<int>(unit(gen) * 5);
    const auto M = build_transition_matrix(p, a, b, W, m);
    for (const auto& row : M.rows) {
      double sum = 0.0;
      for (const auto& [c, value] : row) {
        sum += value;
        CHECK(value >= 0.0);
      }
      CHECK(sum == Approx(1.0).margin(1e-12));
    }
  }
}

TEST_CASE("transition matrix size cap") {
  CHECK_THROWS_AS(build_transition_matrix(0.3, 0.5, 0.5, 32, 3, 100), SizeError);
  CHECK_NOTHROW(build_transition_matrix(0.3, 0.5, 0.5, 32, 3, 1000));
}

TEST_CASE("numeric solver on a two-state symmetric chain") {
  TransitionMatrix M;
  M.n = 2;
  M.rows = {{{0, 0.5}, {1, 0.5}}, {{0, 0.5}, {1, 0.5}}};
  const auto v = solve_stationary_numeric(M);
  CHECK(v[0] == Approx(0.5).margin(1e-12));
  CHECK(v[1] == Approx(0.5).margin(1e-12));
}

TEST_CASE("power iteration agrees with the closed form") {
  const auto M = build_transition_matrix(0.3, 0.6, 0.5, 4, 2);
  const auto v = power_iteration_stationary(M, 1e-12);
  CHECK(stationary_residual(M, v) < 1e-12);
  const auto sd = stationary_distribution(0.3, 0.6, 0.5, 4, 2);
  CHECK(max_componentwise_diff(sd, M, v) < 1e-8);
}

TEST_CASE("direct and iterative stationary solvers agree") {
  const auto M = build_transition_matrix(0.45, 0.2, 0.9, 8, 2);
  const auto direct = solve_stationary_numeric(M);
  const auto iter = power_iteration_stationary(M, 1e-13);
  for (std::size_t i = 0; i < direct.size(); ++i)
    CHECK(direct[i] == Approx(iter[i]).margin(1e-10));
}

TEST_CASE("stationary CSV dump encodes the transfer state as stage -1") {
  const auto sd = stationary_distribution(0.2, 0.5, 0.5, 2, 1);
  std::ostringstream os;
  write_stationary_csv(os, sd);
  const std::string text = os.str();
  CHECK(text.find("stage,counter,probability\n") == 0);
  CHECK(text.find("\n-1,0,") != std::string::npos);
}

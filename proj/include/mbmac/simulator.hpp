#pragma once

#include <cmath>
#include <cstdint>
#include <deque>
#include <random>
#include <vector>

#include "mbmac/config.hpp"
#include "mbmac/errors.hpp"
#include "mbmac/markov.hpp"

// Slotted simulation of J saturated stations running the dual-band MAC.
//
// The slot here is the embedded-chain slot of the analytical model:
// every station advances one backoff step per slot, and the slot's real
// duration (sigma, T_s or T_c) is charged by its outcome. Stations whose
// counter reads zero transmit; a lone transmitter succeeds and redraws
// at stage 0, two or more collide. A collider below stage m escalates;
// a stage-m collider starts a band transfer with probability beta, else
// redraws at stage m.
//
// A transfer parks the station for exactly one slot (the chain's
// transfer state), after which it either moves its payload to the
// 60 GHz band and resets to stage 0 (beam training succeeded,
// probability alpha) or redraws at stage m. Transfer signalling runs on
// a separate control channel: the contention channel is not blocked,
// and the signalling cost T_fst is charged to the global time ledger at
// the moment the transfer starts. 60 GHz payloads drain through a
// per-slot TDMA window of floor(slot_time * r_mmw / B_mmw)
// transmissions; the excess waits in FIFO order.

namespace mbmac {

struct StaState {
  enum class Mode { Backoff, AwaitingMmw };

  int id = 0;
  Mode mode = Mode::Backoff;
  int stage = 0;
  std::int64_t counter = 0;

  // Transfer bookkeeping: remaining park slots and whether beam
  // training already came up good.
  std::int64_t park_slots = 0;
  bool transfer_good = false;

  std::int64_t packets_sent_uw = 0;
  std::int64_t packets_sent_mmw = 0;
  std::int64_t collisions = 0;
  std::int64_t fst_attempts = 0;
  std::int64_t fst_failures = 0;
};

struct SimConfig {
  ProtocolConfig cfg;
  std::int64_t slots = 1'000'000;
  std::uint64_t seed = 1;
  // Tally per-state occupancy for chain-level validation (adds one
  // array increment per station per slot).
  bool track_occupancy = false;
  // Extra transfer park time, uniform in [0, mmw_wait_slots), modelling
  // the wait for the next beacon interval. Zero keeps the analytical
  // one-slot abstraction.
  std::int64_t mmw_wait_slots = 0;

  void validate() const {
    cfg.validate();
    if (slots < 1) throw ConfigError("sim: slots must be >= 1");
    if (mmw_wait_slots < 0) throw ConfigError("sim: mmw_wait_slots must be >= 0");
  }
};

struct SimMetrics {
  std::int64_t slots_elapsed = 0;
  std::int64_t idle_slots = 0;
  std::int64_t success_slots = 0;
  std::int64_t collision_slots = 0;
  std::int64_t fst_overhead_slots = 0;
  std::int64_t fst_attempts = 0;
  std::int64_t fst_failures = 0;
  std::int64_t mmw_transmissions = 0;
  std::int64_t uw_successes = 0;
  std::int64_t uw_transmissions = 0;
  std::int64_t uw_collision_events = 0;  // per-station colliding transmissions

  double measured_theta_uw = 0.0;
  double measured_theta_mmw = 0.0;
  double measured_p = 0.0;
  double time_elapsed_us = 0.0;
  double throughput_bps = 0.0;

  // Per-state visit frequencies in chain index order (transfer state
  // last); empty unless track_occupancy was set.
  std::vector<double> occupancy;

  bool operator==(const SimMetrics&) const = default;
};

enum class SlotOutcome { Idle, Success, Collision };

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// One independent stream per station, derived from the master seed, so
// runs stay reproducible when the station count changes.
struct StationRng {
  std::mt19937_64 eng;

  explicit StationRng(std::uint64_t stream_seed) : eng(stream_seed) {}

  double uniform01() { return static_cast<double>(eng() >> 11) * 0x1.0p-53; }
  bool bernoulli(double q) { return uniform01() < q; }
  std::int64_t uniform_below(std::int64_t n) {
    return static_cast<std::int64_t>(
        (static_cast<unsigned __int128>(eng()) * static_cast<unsigned __int128>(n)) >> 64);
  }
};

struct NullObserver {
  void operator()(std::int64_t, int, SlotOutcome, int, const std::vector<StaState>&) {}
};

}  // namespace detail

template <class Observer>
SimMetrics run_simulation(const SimConfig& sc, Observer&& observe) {
  sc.validate();
  const ProtocolConfig& cfg = sc.cfg;
  const DerivedTimings t = derive_timings(cfg);
  const int J = cfg.J;
  const std::int64_t fst_slots =
      cfg.sigma_us > 0.0 ? static_cast<std::int64_t>(std::ceil(t.t_fst_us / cfg.sigma_us)) : 0;
  const double mmw_bits_per_us = cfg.rate_mmw_bps * 1e-6;

  std::uint64_t seed_state = sc.seed;
  std::vector<detail::StationRng> rng;
  rng.reserve(static_cast<std::size_t>(J));
  for (int j = 0; j < J; ++j) rng.emplace_back(detail::splitmix64(seed_state));

  std::vector<StaState> sta(static_cast<std::size_t>(J));
  for (int j = 0; j < J; ++j) {
    sta[static_cast<std::size_t>(j)].id = j;
    sta[static_cast<std::size_t>(j)].counter = rng[static_cast<std::size_t>(j)].uniform_below(cfg.W);
  }

  SimMetrics mx;
  std::vector<double> occupancy;
  if (sc.track_occupancy)
    occupancy.assign(static_cast<std::size_t>(backoff_state_count(cfg.W, cfg.m)) + 1, 0.0);

  std::vector<int> transmitters;
  transmitters.reserve(static_cast<std::size_t>(J));
  std::deque<int> mmw_queue;

  auto redraw = [&](StaState& s, int stage) {
    s.stage = stage;
    s.counter = rng[static_cast<std::size_t>(s.id)].uniform_below(window_at_stage(cfg.W, stage));
  };

  for (std::int64_t slot = 0; slot < sc.slots; ++slot) {
    transmitters.clear();
    for (int j = 0; j < J; ++j) {
      const StaState& s = sta[static_cast<std::size_t>(j)];
      if (s.mode == StaState::Mode::Backoff && s.counter == 0) transmitters.push_back(j);
    }

    if (sc.track_occupancy) {
      for (const StaState& s : sta) {
        const std::size_t idx =
            s.mode == StaState::Mode::AwaitingMmw
                ? occupancy.size() - 1
                : static_cast<std::size_t>(state_index(cfg.W, cfg.m,
                                                       ChainState::backoff(s.stage, static_cast<int>(s.counter))));
        occupancy[idx] += 1.0;
      }
    }

    // Count down everyone who is not transmitting. Done before the
    // outcome handling so freshly drawn counters and freshly parked
    // stations are untouched this slot.
    for (int j = 0; j < J; ++j) {
      StaState& s = sta[static_cast<std::size_t>(j)];
      if (s.mode == StaState::Mode::Backoff) {
        if (s.counter > 0) --s.counter;
      } else if (--s.park_slots == 0) {
        if (s.transfer_good) {
          mmw_queue.push_back(j);
          redraw(s, 0);
        } else {
          redraw(s, cfg.m);
        }
        s.mode = StaState::Mode::Backoff;
      }
    }

    SlotOutcome outcome;
    double slot_us;
    int fst_events = 0;
    if (transmitters.empty()) {
      outcome = SlotOutcome::Idle;
      slot_us = cfg.sigma_us;
      ++mx.idle_slots;
    } else if (transmitters.size() == 1) {
      outcome = SlotOutcome::Success;
      slot_us = t.t_s_us;
      ++mx.success_slots;
      ++mx.uw_successes;
      ++mx.uw_transmissions;
      StaState& s = sta[static_cast<std::size_t>(transmitters.front())];
      ++s.packets_sent_uw;
      redraw(s, 0);  // saturation: the next packet is already queued
    } else {
      outcome = SlotOutcome::Collision;
      slot_us = t.t_c_us;
      ++mx.collision_slots;
      for (int j : transmitters) {
        StaState& s = sta[static_cast<std::size_t>(j)];
        ++mx.uw_transmissions;
        ++mx.uw_collision_events;
        ++s.collisions;
        if (s.stage < cfg.m) {
          redraw(s, s.stage + 1);
        } else if (rng[static_cast<std::size_t>(j)].bernoulli(cfg.beta)) {
          // Band transfer: signalling cost lands on the ledger now, the
          // station parks in the transfer state, and beam training is
          // resolved up front.
          ++s.fst_attempts;
          ++mx.fst_attempts;
          ++fst_events;
          mx.fst_overhead_slots += fst_slots;
          mx.time_elapsed_us += t.t_fst_us;
          s.transfer_good = rng[static_cast<std::size_t>(j)].bernoulli(cfg.alpha);
          if (!s.transfer_good) {
            ++s.fst_failures;
            ++mx.fst_failures;
          }
          s.mode = StaState::Mode::AwaitingMmw;
          s.park_slots =
              1 + (sc.mmw_wait_slots > 0
                       ? rng[static_cast<std::size_t>(j)].uniform_below(sc.mmw_wait_slots)
                       : 0);
        } else {
          redraw(s, cfg.m);
        }
      }
    }
    mx.time_elapsed_us += slot_us;

    // TDMA drain of queued 60 GHz payloads within this slot's window.
    if (!mmw_queue.empty()) {
      std::int64_t window = static_cast<std::int64_t>(
          std::floor(slot_us * mmw_bits_per_us / static_cast<double>(cfg.payload_mmw_bits)));
      while (window-- > 0 && !mmw_queue.empty()) {
        ++sta[static_cast<std::size_t>(mmw_queue.front())].packets_sent_mmw;
        mmw_queue.pop_front();
        ++mx.mmw_transmissions;
      }
    }

    observe(slot, static_cast<int>(transmitters.size()), outcome, fst_events, sta);
  }

  mx.slots_elapsed = sc.slots;
  const double station_slots = static_cast<double>(J) * static_cast<double>(sc.slots);
  mx.measured_theta_uw = static_cast<double>(mx.uw_transmissions) / station_slots;
  mx.measured_theta_mmw = static_cast<double>(mx.mmw_transmissions) / station_slots;
  mx.measured_p = mx.uw_transmissions > 0 ? static_cast<double>(mx.uw_collision_events) /
                                                static_cast<double>(mx.uw_transmissions)
                                          : 0.0;
  if (mx.time_elapsed_us > 0.0)
    mx.throughput_bps = 1e6 *
                        (static_cast<double>(mx.uw_successes) * static_cast<double>(cfg.payload_uw_bits) +
                         static_cast<double>(mx.mmw_transmissions) * static_cast<double>(cfg.payload_mmw_bits)) /
                        mx.time_elapsed_us;
  if (sc.track_occupancy) {
    for (double& v : occupancy) v /= station_slots;
    mx.occupancy = std::move(occupancy);
  }
  return mx;
}

inline SimMetrics run_simulation(const SimConfig& sc) {
  return run_simulation(sc, detail::NullObserver{});
}

}  // namespace mbmac

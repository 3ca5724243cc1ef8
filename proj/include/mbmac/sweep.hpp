#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"
#include "mbmac/config.hpp"
#include "mbmac/equilibrium.hpp"
#include "mbmac/errors.hpp"
#include "mbmac/simulator.hpp"
#include "mbmac/throughput.hpp"

// Parameter-sweep harness. One sweep varies a single named parameter
// over a value list, runs the analytical pipeline and/or replicated
// simulations per point, and emits plot-ready rows. Points are
// independent jobs; workers race through them but rows always come back
// ordered by axis value.

namespace mbmac {

enum class SweepAxis { J, W, m, alpha, beta };
enum class SweepMode { analytic, simulate, both };

inline const char* to_string(SweepAxis a) {
  switch (a) {
    case SweepAxis::J: return "J";
    case SweepAxis::W: return "W";
    case SweepAxis::m: return "m";
    case SweepAxis::alpha: return "alpha";
    case SweepAxis::beta: return "beta";
  }
  return "?";
}
inline const char* to_string(SweepMode m) {
  switch (m) {
    case SweepMode::analytic: return "analytic";
    case SweepMode::simulate: return "simulate";
    case SweepMode::both: return "both";
  }
  return "?";
}

inline SweepAxis sweep_axis_from_string(const std::string& s) {
  if (s == "J") return SweepAxis::J;
  if (s == "W") return SweepAxis::W;
  if (s == "m") return SweepAxis::m;
  if (s == "alpha") return SweepAxis::alpha;
  if (s == "beta") return SweepAxis::beta;
  throw ConfigError("sweep: unknown axis '" + s + "'");
}
inline SweepMode sweep_mode_from_string(const std::string& s) {
  if (s == "analytic") return SweepMode::analytic;
  if (s == "simulate") return SweepMode::simulate;
  if (s == "both") return SweepMode::both;
  throw ConfigError("sweep: unknown mode '" + s + "'");
}

struct SweepSpec {
  ProtocolConfig base;
  SweepAxis axis = SweepAxis::J;
  std::vector<double> values;
  SweepMode mode = SweepMode::analytic;
  int replications = 5;
  std::uint64_t seed_base = 1;
  std::int64_t slots = 1'000'000;
  std::string label;  // free-form tag echoed into rows (curve id in figures)

  void validate() const {
    base.validate();
    if (values.empty()) throw ConfigError("sweep: values must be non-empty");
    if (mode != SweepMode::analytic && replications < 1)
      throw ConfigError("sweep: replications must be >= 1 when simulating");
    if (slots < 1) throw ConfigError("sweep: slots must be >= 1");
  }
};

// Sample mean and standard deviation over replications.
struct Aggregate {
  double mean = 0.0;
  double sd = 0.0;
};

struct SweepRow {
  ProtocolConfig cfg;  // fully resolved parameters at this point
  SweepAxis axis = SweepAxis::J;
  double axis_value = 0.0;
  SweepMode mode = SweepMode::analytic;
  int replications = 0;
  std::int64_t slots = 0;
  std::uint64_t seed_base = 0;
  std::string label;

  bool has_analytic = false;
  Equilibrium eq;
  ThroughputReport report;

  bool has_sim = false;
  Aggregate sim_throughput_bps, sim_p, sim_theta_uw, sim_theta_mmw;
  Aggregate sim_collision_slots, sim_fst_overhead_slots, sim_mmw_transmissions, sim_uw_successes;

  // |sim mean - analytic| / analytic on throughput; only in mode both.
  double analytic_sim_rel_error = std::numeric_limits<double>::quiet_NaN();

  std::string error;  // point failure, sweep continues
};

namespace detail {

inline void apply_axis(ProtocolConfig& cfg, SweepAxis axis, double value) {
  auto as_int = [&](const char* name) {
    const double r = std::round(value);
    if (std::abs(value - r) > 1e-9)
      throw ConfigError(std::string("sweep: axis ") + name + " needs integer values");
    return static_cast<int>(r);
  };
  switch (axis) {
    case SweepAxis::J: cfg.J = as_int("J"); break;
    case SweepAxis::W: cfg.W = as_int("W"); break;
    case SweepAxis::m: cfg.m = as_int("m"); break;
    case SweepAxis::alpha: cfg.alpha = value; break;
    case SweepAxis::beta: cfg.beta = value; break;
  }
}

inline Aggregate aggregate(const std::vector<double>& xs) {
  Aggregate a;
  if (xs.empty()) return a;
  double sum = 0.0;
  for (double x : xs) sum += x;
  a.mean = sum / static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - a.mean) * (x - a.mean);
    a.sd = std::sqrt(ss / static_cast<double>(xs.size() - 1));
  }
  return a;
}

inline void run_point(SweepRow& row) {
  row.cfg.validate();
  if (row.mode != SweepMode::simulate) {
    row.eq = solve_fixed_point(row.cfg);
    row.report = saturation_throughput(row.cfg, row.eq);
    row.has_analytic = true;
  }
  if (row.mode != SweepMode::analytic) {
    std::vector<double> tput, p, th_uw, th_mmw, coll, fst, mmw, succ;
    for (int r = 0; r < row.replications; ++r) {
      SimConfig sc;
      sc.cfg = row.cfg;
      sc.slots = row.slots;
      sc.seed = row.seed_base + static_cast<std::uint64_t>(r);
      const SimMetrics mx = run_simulation(sc);
      tput.push_back(mx.throughput_bps);
      p.push_back(mx.measured_p);
      th_uw.push_back(mx.measured_theta_uw);
      th_mmw.push_back(mx.measured_theta_mmw);
      coll.push_back(static_cast<double>(mx.collision_slots));
      fst.push_back(static_cast<double>(mx.fst_overhead_slots));
      mmw.push_back(static_cast<double>(mx.mmw_transmissions));
      succ.push_back(static_cast<double>(mx.uw_successes));
    }
    row.sim_throughput_bps = aggregate(tput);
    row.sim_p = aggregate(p);
    row.sim_theta_uw = aggregate(th_uw);
    row.sim_theta_mmw = aggregate(th_mmw);
    row.sim_collision_slots = aggregate(coll);
    row.sim_fst_overhead_slots = aggregate(fst);
    row.sim_mmw_transmissions = aggregate(mmw);
    row.sim_uw_successes = aggregate(succ);
    row.has_sim = true;
  }
  if (row.has_analytic && row.has_sim && row.report.r_bps > 0.0)
    row.analytic_sim_rel_error =
        std::abs(row.sim_throughput_bps.mean - row.report.r_bps) / row.report.r_bps;
}

}  // namespace detail

// Progress callback: (points done, points total). May be empty.
using SweepProgress = std::function<void(std::size_t, std::size_t)>;

inline std::vector<SweepRow> run_sweep(const SweepSpec& spec, int workers = 1,
                                       const SweepProgress& progress = {}) {
  spec.validate();
  std::vector<SweepRow> rows(spec.values.size());
  for (std::size_t i = 0; i < spec.values.size(); ++i) {
    SweepRow& row = rows[i];
    row.cfg = spec.base;
    row.axis = spec.axis;
    row.axis_value = spec.values[i];
    row.mode = spec.mode;
    row.replications = spec.mode == SweepMode::analytic ? 0 : spec.replications;
    row.slots = spec.slots;
    row.seed_base = spec.seed_base;
    row.label = spec.label;
  }

  std::atomic<std::size_t> next{0}, done{0};
  auto work = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= rows.size()) return;
      SweepRow& row = rows[i];
      try {
        detail::apply_axis(row.cfg, row.axis, row.axis_value);
        detail::run_point(row);
      } catch (const std::exception& e) {
        row.error = e.what();
      }
      const std::size_t d = done.fetch_add(1) + 1;
      if (progress) progress(d, rows.size());
    }
  };

  const int n_workers = std::max(1, std::min<int>(workers, static_cast<int>(rows.size())));
  if (n_workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(n_workers));
    for (int w = 0; w < n_workers; ++w) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }

  std::stable_sort(rows.begin(), rows.end(),
                   [](const SweepRow& a, const SweepRow& b) { return a.axis_value < b.axis_value; });
  return rows;
}

// Analytic fixed point vs replicated simulation on one configuration.
struct ValidationReport {
  ProtocolConfig cfg;
  std::int64_t slots = 0;
  int seeds = 0;
  std::uint64_t seed_base = 0;
  double bound = 0.05;

  Equilibrium eq;
  ThroughputReport analytic;
  double sim_p = 0.0, sim_theta_uw = 0.0, sim_theta_mmw = 0.0, sim_throughput_bps = 0.0;
  double err_p = 0.0, err_theta_uw = 0.0, err_theta_mmw = 0.0, err_throughput = 0.0;
  bool pass = false;
};

namespace detail {

inline double rel_error(double simulated, double analytic) {
  if (analytic == 0.0)
    return simulated == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return std::abs(simulated - analytic) / std::abs(analytic);
}

}  // namespace detail

inline ValidationReport validate(const ProtocolConfig& cfg, std::int64_t slots, int seeds,
                                 double bound = 0.05, std::uint64_t seed_base = 1) {
  cfg.validate();
  if (slots < 1) throw ConfigError("validate: slots must be >= 1");
  if (seeds < 1) throw ConfigError("validate: seeds must be >= 1");

  ValidationReport v;
  v.cfg = cfg;
  v.slots = slots;
  v.seeds = seeds;
  v.seed_base = seed_base;
  v.bound = bound;
  v.eq = solve_fixed_point(cfg);
  v.analytic = saturation_throughput(cfg, v.eq);

  for (int r = 0; r < seeds; ++r) {
    SimConfig sc;
    sc.cfg = cfg;
    sc.slots = slots;
    sc.seed = seed_base + static_cast<std::uint64_t>(r);
    const SimMetrics mx = run_simulation(sc);
    v.sim_p += mx.measured_p;
    v.sim_theta_uw += mx.measured_theta_uw;
    v.sim_theta_mmw += mx.measured_theta_mmw;
    v.sim_throughput_bps += mx.throughput_bps;
  }
  v.sim_p /= seeds;
  v.sim_theta_uw /= seeds;
  v.sim_theta_mmw /= seeds;
  v.sim_throughput_bps /= seeds;

  v.err_p = detail::rel_error(v.sim_p, v.eq.p);
  v.err_theta_uw = detail::rel_error(v.sim_theta_uw, v.eq.theta_uw);
  v.err_theta_mmw = detail::rel_error(v.sim_theta_mmw, v.eq.theta_mmw);
  v.err_throughput = detail::rel_error(v.sim_throughput_bps, v.analytic.r_bps);
  v.pass = v.err_p < bound && v.err_theta_uw < bound && v.err_theta_mmw < bound &&
           v.err_throughput < bound;
  return v;
}

// --- serialization ---------------------------------------------------------

inline nlohmann::ordered_json to_json(const Equilibrium& eq) {
  return {{"p", eq.p},
          {"theta_uw", eq.theta_uw},
          {"theta_mmw", eq.theta_mmw},
          {"iterations", eq.iterations},
          {"residual", eq.residual}};
}

inline nlohmann::ordered_json to_json(const ThroughputReport& r) {
  return {{"p_t", r.p_t},
          {"p_s", r.p_s},
          {"e_t_us", r.e_t_us},
          {"j_hat", r.j_hat},
          {"e_j_mmw", r.e_j_mmw},
          {"r_bps", r.r_bps},
          {"uw_component_bps", r.uw_component_bps},
          {"mmw_component_bps", r.mmw_component_bps}};
}

inline nlohmann::ordered_json to_json(const SimMetrics& m) {
  return {{"slots_elapsed", m.slots_elapsed},
          {"idle_slots", m.idle_slots},
          {"success_slots", m.success_slots},
          {"collision_slots", m.collision_slots},
          {"fst_overhead_slots", m.fst_overhead_slots},
          {"fst_attempts", m.fst_attempts},
          {"fst_failures", m.fst_failures},
          {"mmw_transmissions", m.mmw_transmissions},
          {"uw_successes", m.uw_successes},
          {"uw_transmissions", m.uw_transmissions},
          {"uw_collision_events", m.uw_collision_events},
          {"measured_theta_uw", m.measured_theta_uw},
          {"measured_theta_mmw", m.measured_theta_mmw},
          {"measured_p", m.measured_p},
          {"time_elapsed_us", m.time_elapsed_us},
          {"throughput_bps", m.throughput_bps}};
}

inline nlohmann::ordered_json to_json(const ValidationReport& v) {
  nlohmann::ordered_json j;
  j["config"] = config_to_json(v.cfg);
  j["slots"] = v.slots;
  j["seeds"] = v.seeds;
  j["seed_base"] = v.seed_base;
  j["bound"] = v.bound;
  j["analytic"] = to_json(v.eq);
  j["analytic"]["r_bps"] = v.analytic.r_bps;
  j["simulated"] = {{"p", v.sim_p},
                    {"theta_uw", v.sim_theta_uw},
                    {"theta_mmw", v.sim_theta_mmw},
                    {"throughput_bps", v.sim_throughput_bps}};
  j["rel_error"] = {{"p", v.err_p},
                    {"theta_uw", v.err_theta_uw},
                    {"theta_mmw", v.err_theta_mmw},
                    {"throughput", v.err_throughput}};
  j["pass"] = v.pass;
  return j;
}

inline nlohmann::ordered_json to_json(const SweepRow& row) {
  nlohmann::ordered_json j;
  j["axis"] = to_string(row.axis);
  j["axis_value"] = row.axis_value;
  j["label"] = row.label;
  j["mode"] = to_string(row.mode);
  j["config"] = config_to_json(row.cfg);
  if (row.mode != SweepMode::analytic) {
    j["replications"] = row.replications;
    j["slots"] = row.slots;
    j["seed_base"] = row.seed_base;
  }
  if (row.has_analytic) {
    j["analytic"] = to_json(row.eq);
    j["analytic"]["report"] = to_json(row.report);
  }
  if (row.has_sim) {
    j["sim"] = {{"throughput_bps", {{"mean", row.sim_throughput_bps.mean}, {"sd", row.sim_throughput_bps.sd}}},
                {"p", {{"mean", row.sim_p.mean}, {"sd", row.sim_p.sd}}},
                {"theta_uw", {{"mean", row.sim_theta_uw.mean}, {"sd", row.sim_theta_uw.sd}}},
                {"theta_mmw", {{"mean", row.sim_theta_mmw.mean}, {"sd", row.sim_theta_mmw.sd}}},
                {"collision_slots", {{"mean", row.sim_collision_slots.mean}, {"sd", row.sim_collision_slots.sd}}},
                {"fst_overhead_slots", {{"mean", row.sim_fst_overhead_slots.mean}, {"sd", row.sim_fst_overhead_slots.sd}}},
                {"mmw_transmissions", {{"mean", row.sim_mmw_transmissions.mean}, {"sd", row.sim_mmw_transmissions.sd}}},
                {"uw_successes", {{"mean", row.sim_uw_successes.mean}, {"sd", row.sim_uw_successes.sd}}}};
  }
  if (!std::isnan(row.analytic_sim_rel_error))
    j["analytic_sim_rel_error"] = row.analytic_sim_rel_error;
  if (!row.error.empty()) j["error"] = row.error;
  return j;
}

// Stable CSV schema for sweep rows; empty cells where a section does not
// apply to the row's mode.
inline const char* sweep_csv_header() {
  return "axis,axis_value,label,mode,J,W,m,alpha,beta,replications,slots,seed_base,"
         "p,theta_uw,theta_mmw,p_t,p_s,e_t_us,j_hat,e_j_mmw,r_bps,uw_component_bps,"
         "mmw_component_bps,sim_throughput_bps_mean,sim_throughput_bps_sd,sim_p_mean,"
         "sim_p_sd,sim_theta_uw_mean,sim_theta_uw_sd,sim_theta_mmw_mean,sim_theta_mmw_sd,"
         "sim_collision_slots_mean,sim_collision_slots_sd,sim_fst_overhead_slots_mean,"
         "sim_fst_overhead_slots_sd,sim_mmw_transmissions_mean,sim_mmw_transmissions_sd,"
         "sim_uw_successes_mean,sim_uw_successes_sd,analytic_sim_rel_error,error";
}

inline void write_sweep_csv_row(std::ostream& os, const SweepRow& row) {
  os.precision(17);
  auto cell = [&os](auto v) { os << ',' << v; };
  auto empty = [&os](int n = 1) {
    for (int i = 0; i < n; ++i) os << ',';
  };
  os << to_string(row.axis);
  cell(row.axis_value);
  cell(row.label);
  cell(to_string(row.mode));
  cell(row.cfg.J);
  cell(row.cfg.W);
  cell(row.cfg.m);
  cell(row.cfg.alpha);
  cell(row.cfg.beta);
  if (row.mode != SweepMode::analytic) {
    cell(row.replications);
    cell(row.slots);
    cell(row.seed_base);
  } else {
    empty(3);
  }
  if (row.has_analytic) {
    cell(row.eq.p);
    cell(row.eq.theta_uw);
    cell(row.eq.theta_mmw);
    cell(row.report.p_t);
    cell(row.report.p_s);
    cell(row.report.e_t_us);
    cell(row.report.j_hat);
    cell(row.report.e_j_mmw);
    cell(row.report.r_bps);
    cell(row.report.uw_component_bps);
    cell(row.report.mmw_component_bps);
  } else {
    empty(11);
  }
  if (row.has_sim) {
    for (const Aggregate* a :
         {&row.sim_throughput_bps, &row.sim_p, &row.sim_theta_uw, &row.sim_theta_mmw,
          &row.sim_collision_slots, &row.sim_fst_overhead_slots, &row.sim_mmw_transmissions,
          &row.sim_uw_successes}) {
      cell(a->mean);
      cell(a->sd);
    }
  } else {
    empty(16);
  }
  if (!std::isnan(row.analytic_sim_rel_error))
    cell(row.analytic_sim_rel_error);
  else
    empty();
  cell(row.error);
  os << '\n';
}

// --- sweep spec JSON -------------------------------------------------------

// Accepts {"config": {...}, "axis": "J", "values": [...], "mode": "both",
// "replications": 5, "seed_base": 1, "slots": 1000000, "label": "..."}.
// The base argument seeds the config before the spec's own "config"
// object is applied.
inline SweepSpec sweep_spec_from_json(const nlohmann::json& j, const ProtocolConfig& base = {}) {
  if (!j.is_object()) throw ConfigError("sweep spec: expected a JSON object");
  SweepSpec spec;
  spec.base = base;
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& key = it.key();
    const nlohmann::json& val = it.value();
    if (key == "config") {
      apply_config_json(spec.base, val);
    } else if (key == "axis") {
      spec.axis = sweep_axis_from_string(val.get<std::string>());
    } else if (key == "values") {
      if (!val.is_array()) throw ConfigError("sweep spec: 'values' must be an array");
      spec.values.clear();
      for (const auto& v : val) {
        if (!v.is_number()) throw ConfigError("sweep spec: 'values' entries must be numbers");
        spec.values.push_back(v.get<double>());
      }
    } else if (key == "mode") {
      spec.mode = sweep_mode_from_string(val.get<std::string>());
    } else if (key == "replications") {
      spec.replications = val.get<int>();
    } else if (key == "seed_base") {
      spec.seed_base = val.get<std::uint64_t>();
    } else if (key == "slots") {
      spec.slots = val.get<std::int64_t>();
    } else if (key == "label") {
      spec.label = val.get<std::string>();
    } else {
      throw ConfigError("sweep spec: unknown field '" + key + "'");
    }
  }
  spec.validate();
  return spec;
}

}  // namespace mbmac

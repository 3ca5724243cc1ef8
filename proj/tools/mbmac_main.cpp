// mbmac — dual-band WLAN MAC model: closed-form analysis, slotted
// simulation, parameter sweeps, and analytic-vs-simulation validation.
//
// Exit codes: 0 success, 2 configuration error, 3 solver/numerical
// failure, 4 validation failed.

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <mutex>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "mbmac/mbmac.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitSolver = 3;
constexpr int kExitValidation = 4;

struct CommonOpts {
  std::string config_path;
  std::vector<std::string> overrides;
  std::string output_path;
  std::string format = "json";
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("--config", opts.config_path,
                  "JSON config file (default: $MBMAC_CONFIG if set)");
  cmd->add_option("--set", opts.overrides, "Override a config field, key=value (repeatable)");
  cmd->add_option("-o,--output", opts.output_path, "Output file (default: stdout)");
  cmd->add_option("--format", opts.format, "Output format: json or csv")
      ->check(CLI::IsMember({"json", "csv"}));
}

mbmac::ProtocolConfig resolve_config(const CommonOpts& opts) {
  mbmac::ProtocolConfig cfg;
  std::string path = opts.config_path;
  if (path.empty())
    if (const char* env = std::getenv("MBMAC_CONFIG")) path = env;
  if (!path.empty()) cfg = mbmac::load_config_file(path);

  std::vector<std::string> seen;
  for (const std::string& kv : opts.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos)
      throw mbmac::ConfigError("--set expects key=value, got '" + kv + "'");
    const std::string key = kv.substr(0, eq);
    if (std::find(seen.begin(), seen.end(), key) != seen.end())
      std::cerr << "warning: duplicate --set " << key << ", last value wins\n";
    seen.push_back(key);
    mbmac::apply_override(cfg, key, kv.substr(eq + 1));
  }
  cfg.validate();
  return cfg;
}

// Writes to the chosen sink; stdout when no path given.
struct Sink {
  std::ofstream file;
  std::ostream* os = &std::cout;
  explicit Sink(const std::string& path) {
    if (!path.empty()) {
      file.open(path);
      if (!file) throw mbmac::ConfigError("cannot open output file '" + path + "'");
      os = &file;
    }
  }
  std::ostream& out() { return *os; }
};

void emit_object(const CommonOpts& opts, const nlohmann::ordered_json& j) {
  Sink sink(opts.output_path);
  if (opts.format == "json") {
    sink.out() << j.dump(2) << "\n";
  } else {
    // Flattened one-row CSV.
    const auto flat = j.flatten();
    std::string header, row;
    for (auto it = flat.begin(); it != flat.end(); ++it) {
      if (!header.empty()) {
        header += ',';
        row += ',';
      }
      std::string key = it.key();  // "/analytic/p" -> "analytic.p"
      key.erase(0, 1);
      for (char& c : key)
        if (c == '/') c = '.';
      header += key;
      row += it.value().is_string() ? it.value().get<std::string>() : it.value().dump();
    }
    sink.out() << header << "\n" << row << "\n";
  }
}

int run_analyze(const CommonOpts& opts, bool dump_config, bool capped_mean) {
  const auto cfg = resolve_config(opts);
  if (dump_config) {
    Sink sink(opts.output_path);
    sink.out() << mbmac::config_to_json(cfg).dump(2) << "\n";
    return 0;
  }
  const auto eq = mbmac::solve_fixed_point(cfg);
  mbmac::ThroughputOptions topt;
  topt.mmw_capped_mean = capped_mean;
  const auto rep = mbmac::saturation_throughput(cfg, eq, topt);

  nlohmann::ordered_json j;
  j["config"] = mbmac::config_to_json(cfg);
  j["equilibrium"] = mbmac::to_json(eq);
  j["report"] = mbmac::to_json(rep);
  emit_object(opts, j);
  std::cerr << "analyze: p=" << eq.p << " theta_uw=" << eq.theta_uw
            << " theta_mmw=" << eq.theta_mmw << " R=" << rep.r_bps << " bit/s\n";
  return 0;
}

int run_simulate(const CommonOpts& opts, std::int64_t slots, std::uint64_t seed,
                 const std::string& trace_path, bool track_occupancy,
                 std::int64_t mmw_wait_slots, const std::string& occupancy_csv) {
  mbmac::SimConfig sc;
  sc.cfg = resolve_config(opts);
  sc.slots = slots;
  sc.seed = seed;
  sc.track_occupancy = track_occupancy || !occupancy_csv.empty();
  sc.mmw_wait_slots = mmw_wait_slots;

  mbmac::SimMetrics mx;
  if (!trace_path.empty()) {
    std::ofstream trace(trace_path);
    if (!trace) throw mbmac::ConfigError("cannot open trace file '" + trace_path + "'");
    trace << "slot,n_transmitters,outcome,fst_events\n";
    mx = mbmac::run_simulation(sc, [&](std::int64_t slot, int ntx, mbmac::SlotOutcome o,
                                       int fst, const std::vector<mbmac::StaState>&) {
      static const char* names[] = {"idle", "success", "collision"};
      trace << slot << ',' << ntx << ',' << names[static_cast<int>(o)] << ',' << fst << '\n';
    });
  } else {
    mx = mbmac::run_simulation(sc);
  }

  if (!occupancy_csv.empty()) {
    std::ofstream occ(occupancy_csv);
    if (!occ) throw mbmac::ConfigError("cannot open occupancy file '" + occupancy_csv + "'");
    occ << "stage,counter,frequency\n";
    occ.precision(17);
    std::size_t idx = 0;
    for (int stage = 0; stage <= sc.cfg.m; ++stage)
      for (std::int64_t k = 0; k < mbmac::window_at_stage(sc.cfg.W, stage); ++k)
        occ << stage << ',' << k << ',' << mx.occupancy[idx++] << '\n';
    occ << mbmac::ChainState::kMmwStage << ",0," << mx.occupancy[idx] << '\n';
  }

  auto j = mbmac::to_json(mx);
  nlohmann::ordered_json out;
  out["config"] = mbmac::config_to_json(sc.cfg);
  out["slots"] = sc.slots;
  out["seed"] = sc.seed;
  out["metrics"] = j;
  emit_object(opts, out);
  std::cerr << "simulate: " << slots << " slots, measured p=" << mx.measured_p
            << " throughput=" << mx.throughput_bps << " bit/s\n";
  return 0;
}

int run_sweep_cmd(const CommonOpts& opts, const std::string& spec_path, int workers) {
  std::ifstream in(spec_path);
  if (!in) throw mbmac::ConfigError("cannot open sweep spec '" + spec_path + "'");
  nlohmann::json spec_json;
  try {
    in >> spec_json;
  } catch (const nlohmann::json::exception& e) {
    throw mbmac::ConfigError("invalid JSON in '" + spec_path + "': " + e.what());
  }

  // Base config: defaults, then --config/--set, then the spec's own
  // "config" object on top.
  const mbmac::ProtocolConfig base = resolve_config(opts);
  std::vector<mbmac::SweepSpec> specs;
  if (spec_json.is_array())
    for (const auto& one : spec_json) specs.push_back(mbmac::sweep_spec_from_json(one, base));
  else
    specs.push_back(mbmac::sweep_spec_from_json(spec_json, base));

  std::size_t total = 0;
  for (const auto& s : specs) total += s.values.size();
  std::size_t offset = 0;

  Sink sink(opts.output_path);
  if (opts.format == "csv") sink.out() << mbmac::sweep_csv_header() << "\n";
  std::mutex ticker_mu;
  for (const auto& s : specs) {
    const auto rows = mbmac::run_sweep(s, workers, [&](std::size_t d, std::size_t) {
      std::lock_guard<std::mutex> lock(ticker_mu);
      std::cerr << "\rsweep: " << offset + d << "/" << total << std::flush;
    });
    offset += s.values.size();
    for (const auto& row : rows) {
      if (opts.format == "csv")
        mbmac::write_sweep_csv_row(sink.out(), row);
      else
        sink.out() << mbmac::to_json(row).dump() << "\n";  // JSON lines
    }
  }
  std::cerr << "\rsweep: " << total << "/" << total << " done\n";
  return 0;
}

int run_validate(const CommonOpts& opts, std::int64_t slots, int seeds, double bound,
                 std::uint64_t seed_base) {
  const auto cfg = resolve_config(opts);
  const auto v = mbmac::validate(cfg, slots, seeds, bound, seed_base);
  emit_object(opts, mbmac::to_json(v));
  std::cerr << "validate: " << (v.pass ? "PASS" : "FAIL") << " (worst rel error "
            << std::max({v.err_p, v.err_theta_uw, v.err_theta_mmw, v.err_throughput})
            << ", bound " << bound << ")\n";
  return v.pass ? 0 : kExitValidation;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dual-band (sub-6 GHz + 60 GHz) WLAN MAC model"};
  app.require_subcommand(1);

  CommonOpts analyze_opts, simulate_opts, sweep_opts, validate_opts;

  auto* analyze = app.add_subcommand("analyze", "Closed-form operating point and throughput");
  add_common(analyze, analyze_opts);
  bool dump_config = false, capped_mean = false;
  analyze->add_flag("--dump-config", dump_config, "Echo the effective config and exit");
  analyze->add_flag("--mmw-capped-mean", capped_mean,
                    "Use the capped-binomial mean for the 60 GHz transmitter average");

  auto* simulate = app.add_subcommand("simulate", "Slotted simulation of the protocol");
  add_common(simulate, simulate_opts);
  std::int64_t slots = 1'000'000;
  std::uint64_t seed = 1;
  std::string trace_path, occupancy_csv;
  bool track_occupancy = false;
  std::int64_t mmw_wait_slots = 0;
  simulate->add_option("--slots", slots, "Slot budget");
  simulate->add_option("--seed", seed, "Master RNG seed");
  simulate->add_option("--trace", trace_path, "Write a per-slot event trace CSV");
  simulate->add_flag("--track-occupancy", track_occupancy, "Tally per-state occupancy");
  simulate->add_option("--occupancy-csv", occupancy_csv, "Write state occupancy CSV");
  simulate->add_option("--mmw-wait-slots", mmw_wait_slots,
                       "Extra transfer wait, uniform in [0,N) slots");

  auto* sweep = app.add_subcommand("sweep", "Run a parameter sweep from a spec file");
  add_common(sweep, sweep_opts);
  std::string spec_path;
  int workers = 1;
  sweep->add_option("--spec", spec_path, "Sweep spec JSON (object or array of objects)")
      ->required();
  sweep->add_option("--workers", workers, "Parallel point workers");

  auto* val = app.add_subcommand("validate", "Cross-validate analysis against simulation");
  add_common(val, validate_opts);
  std::int64_t v_slots = 1'000'000;
  int v_seeds = 5;
  double v_bound = 0.05;
  std::uint64_t v_seed_base = 1;
  val->add_option("--slots", v_slots, "Slot budget per seed");
  val->add_option("--seeds", v_seeds, "Number of replications");
  val->add_option("--bound", v_bound, "Relative error bound");
  val->add_option("--seed-base", v_seed_base, "First seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (analyze->parsed()) return run_analyze(analyze_opts, dump_config, capped_mean);
    if (simulate->parsed())
      return run_simulate(simulate_opts, slots, seed, trace_path, track_occupancy,
                          mmw_wait_slots, occupancy_csv);
    if (sweep->parsed()) return run_sweep_cmd(sweep_opts, spec_path, workers);
    if (val->parsed()) return run_validate(validate_opts, v_slots, v_seeds, v_bound, v_seed_base);
  } catch (const mbmac::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const mbmac::DomainError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const mbmac::SizeError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const mbmac::SolverError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitSolver;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitSolver;
  }
  return 0;
}

#pragma once

#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"
#include "mbmac/errors.hpp"

namespace mbmac {

// Full experiment definition for the dual-band MAC model: contention
// parameters (W, m), band-transfer knobs (alpha, beta), network size J,
// and the frame/timing constants shared by the analytical pipeline and
// the simulator.
//
// Defaults describe a 1 Mb/s basic-rate station paired with a 1 Gb/s
// 60 GHz data channel. The default 50 us slot time is deliberately
// coarse (it keeps slot counts small in long studies); override
// sigma_us when modelling specific hardware.
struct ProtocolConfig {
  int W = 32;          // minimum contention window, slots
  int m = 3;           // maximum backoff stage
  double alpha = 0.6;  // beam-training (mmW link) success probability
  double beta = 1.0;   // band-transfer control parameter
  int J = 10;          // number of stations

  std::int64_t h_mac_bits = 272;
  std::int64_t h_phy_bits = 128;
  std::int64_t payload_uw_bits = 8184;
  std::int64_t payload_mmw_bits = 81840;
  std::int64_t ack_bits = 112;  // ACK body; PHY header is added on air

  double sifs_us = 28.0;
  double difs_us = 128.0;
  double sigma_us = 50.0;  // empty-slot duration
  double delta_us = 1.0;   // propagation delay

  double rate_uw_bps = 1e6;
  double rate_mmw_bps = 1e9;

  std::int64_t fst_setup_req_bits = 240;
  std::int64_t fst_setup_res_bits = 240;

  void validate() const {
    auto fail = [](const std::string& msg) { throw ConfigError("config: " + msg); };
    if (W < 1) fail("W must be >= 1");
    if (m < 0) fail("m must be >= 0");
    if (m > 40) fail("m above 40 is not supported (2^m W overflows slot counters)");
    if (!(alpha >= 0.0 && alpha <= 1.0)) fail("alpha must be in [0,1]");
    if (!(beta >= 0.0 && beta <= 1.0)) fail("beta must be in [0,1]");
    if (J < 1) fail("J must be >= 1");
    if (h_mac_bits <= 0 || h_phy_bits <= 0 || payload_uw_bits <= 0 ||
        payload_mmw_bits <= 0 || ack_bits <= 0 || fst_setup_req_bits <= 0 ||
        fst_setup_res_bits <= 0)
      fail("all bit counts must be positive");
    if (!(rate_uw_bps > 0.0) || !(rate_mmw_bps > 0.0)) fail("bit rates must be positive");
    if (sifs_us < 0.0 || difs_us < 0.0 || sigma_us < 0.0 || delta_us < 0.0)
      fail("durations must be non-negative");
  }

  bool operator==(const ProtocolConfig&) const = default;
};

// Slot-level time quantities derived once from a ProtocolConfig, all in
// microseconds. t_s/t_c are the busy-slot durations for success and
// collision; t_fst is the control-channel cost of one band transfer
// (setup request + response, each acknowledged).
struct DerivedTimings {
  double gamma_us = 0.0;  // full data frame (PHY + MAC header + payload) on air
  double t_s_us = 0.0;
  double t_c_us = 0.0;
  double t_fst_us = 0.0;
  double sigma_us = 0.0;
  double delta_us = 0.0;
};

// bits / rate expressed in microseconds.
inline double frame_time_us(std::int64_t bits, double rate_bps) {
  if (bits <= 0) throw ConfigError("frame_time: bits must be positive");
  if (!(rate_bps > 0.0)) throw ConfigError("frame_time: rate must be positive");
  return 1e6 * static_cast<double>(bits) / rate_bps;
}

inline DerivedTimings derive_timings(const ProtocolConfig& cfg) {
  cfg.validate();
  const double gamma = frame_time_us(
      cfg.h_phy_bits + cfg.h_mac_bits + cfg.payload_uw_bits, cfg.rate_uw_bps);
  const double ack = frame_time_us(cfg.ack_bits + cfg.h_phy_bits, cfg.rate_uw_bps);
  DerivedTimings t;
  t.gamma_us = gamma;
  t.t_s_us = gamma + cfg.sifs_us + ack + cfg.difs_us + 2.0 * cfg.delta_us;
  t.t_c_us = gamma + cfg.difs_us + cfg.delta_us;
  // The transfer ACK exchange on the 60 GHz side runs in parallel with the
  // data channel and carries no slot cost here.
  t.t_fst_us = frame_time_us(cfg.fst_setup_req_bits, cfg.rate_uw_bps) +
               frame_time_us(cfg.fst_setup_res_bits, cfg.rate_uw_bps) +
               2.0 * ack + 4.0 * cfg.delta_us;
  t.sigma_us = cfg.sigma_us;
  t.delta_us = cfg.delta_us;
  return t;
}

namespace detail {

// Single listing of the config fields; JSON load/dump and key=value
// overrides all go through it so the schema cannot drift.
template <class Visitor>
void visit_config_fields(ProtocolConfig& c, Visitor&& v) {
  v("W", c.W);
  v("m", c.m);
  v("alpha", c.alpha);
  v("beta", c.beta);
  v("J", c.J);
  v("h_mac_bits", c.h_mac_bits);
  v("h_phy_bits", c.h_phy_bits);
  v("payload_uw_bits", c.payload_uw_bits);
  v("payload_mmw_bits", c.payload_mmw_bits);
  v("ack_bits", c.ack_bits);
  v("sifs_us", c.sifs_us);
  v("difs_us", c.difs_us);
  v("sigma_us", c.sigma_us);
  v("delta_us", c.delta_us);
  v("rate_uw_bps", c.rate_uw_bps);
  v("rate_mmw_bps", c.rate_mmw_bps);
  v("fst_setup_req_bits", c.fst_setup_req_bits);
  v("fst_setup_res_bits", c.fst_setup_res_bits);
}

inline void assign_field(const nlohmann::json& j, const std::string& key, int& out) {
  if (!j.is_number_integer())
    throw ConfigError("config: field '" + key + "' must be an integer");
  out = j.get<int>();
}
inline void assign_field(const nlohmann::json& j, const std::string& key, std::int64_t& out) {
  if (!j.is_number_integer())
    throw ConfigError("config: field '" + key + "' must be an integer");
  out = j.get<std::int64_t>();
}
inline void assign_field(const nlohmann::json& j, const std::string& key, double& out) {
  if (!j.is_number())
    throw ConfigError("config: field '" + key + "' must be a number");
  out = j.get<double>();
}

inline void parse_field(const std::string& text, const std::string& key, int& out) {
  std::size_t pos = 0;
  int v = 0;
  try {
    v = std::stoi(text, &pos);
  } catch (const std::exception&) {
    throw ConfigError("config: cannot parse '" + text + "' for field '" + key + "'");
  }
  if (pos != text.size())
    throw ConfigError("config: trailing junk in value '" + text + "' for field '" + key + "'");
  out = v;
}
inline void parse_field(const std::string& text, const std::string& key, std::int64_t& out) {
  std::size_t pos = 0;
  long long v = 0;
  try {
    v = std::stoll(text, &pos);
  } catch (const std::exception&) {
    throw ConfigError("config: cannot parse '" + text + "' for field '" + key + "'");
  }
  if (pos != text.size())
    throw ConfigError("config: trailing junk in value '" + text + "' for field '" + key + "'");
  out = v;
}
inline void parse_field(const std::string& text, const std::string& key, double& out) {
  std::size_t pos = 0;
  double v = 0;
  try {
    v = std::stod(text, &pos);
  } catch (const std::exception&) {
    throw ConfigError("config: cannot parse '" + text + "' for field '" + key + "'");
  }
  if (pos != text.size())
    throw ConfigError("config: trailing junk in value '" + text + "' for field '" + key + "'");
  out = v;
}

}  // namespace detail

// Applies a JSON object onto `cfg`. Missing fields keep their current
// values; unknown fields are an error so typos do not silently fall back
// to defaults.
inline void apply_config_json(ProtocolConfig& cfg, const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("config: top-level JSON value must be an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool known = false;
    detail::visit_config_fields(cfg, [&](const char* name, auto& field) {
      if (it.key() == name) {
        detail::assign_field(it.value(), it.key(), field);
        known = true;
      }
    });
    if (!known) throw ConfigError("config: unknown field '" + it.key() + "'");
  }
}

inline ProtocolConfig config_from_json(const nlohmann::json& j) {
  ProtocolConfig cfg;
  apply_config_json(cfg, j);
  cfg.validate();
  return cfg;
}

inline nlohmann::ordered_json config_to_json(const ProtocolConfig& cfg) {
  nlohmann::ordered_json j;
  detail::visit_config_fields(const_cast<ProtocolConfig&>(cfg),
                              [&](const char* name, auto& field) { j[name] = field; });
  return j;
}

inline ProtocolConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config: invalid JSON in '" + path + "': " + e.what());
  }
  return config_from_json(j);
}

// `key=value` override, e.g. from a command line.
inline void apply_override(ProtocolConfig& cfg, const std::string& key, const std::string& value) {
  bool known = false;
  detail::visit_config_fields(cfg, [&](const char* name, auto& field) {
    if (key == name) {
      detail::parse_field(value, key, field);
      known = true;
    }
  });
  if (!known) throw ConfigError("config: unknown field '" + key + "'");
}

}  // namespace mbmac

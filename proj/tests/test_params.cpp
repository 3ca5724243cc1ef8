#include <catch2/catch_amalgamated.hpp>

#include "mbmac/config.hpp"

using namespace mbmac;
using Catch::Approx;

TEST_CASE("frame_time is bits over rate in microseconds") {
  CHECK(frame_time_us(8184, 1e6) == Approx(8184.0).epsilon(1e-15));
  CHECK(frame_time_us(240, 1e6) == Approx(240.0).epsilon(1e-15));
  CHECK(frame_time_us(81840, 1e9) == Approx(81.84).epsilon(1e-15));
}

TEST_CASE("frame_time rejects non-positive input") {
  CHECK_THROWS_AS(frame_time_us(0, 1e6), ConfigError);
  CHECK_THROWS_AS(frame_time_us(-8, 1e6), ConfigError);
  CHECK_THROWS_AS(frame_time_us(100, 0.0), ConfigError);
  CHECK_THROWS_AS(frame_time_us(100, -1.0), ConfigError);
}

TEST_CASE("default config carries the reference parameter set") {
  const ProtocolConfig cfg;
  CHECK(cfg.h_mac_bits == 272);
  CHECK(cfg.h_phy_bits == 128);
  CHECK(cfg.payload_uw_bits == 8184);
  CHECK(cfg.payload_mmw_bits == 81840);
  CHECK(cfg.ack_bits == 112);
  CHECK(cfg.delta_us == 1.0);
  CHECK(cfg.sigma_us == 50.0);
  CHECK(cfg.sifs_us == 28.0);
  CHECK(cfg.difs_us == 128.0);
  CHECK(cfg.rate_uw_bps == 1e6);
  CHECK(cfg.rate_mmw_bps == 1e9);
  CHECK(cfg.fst_setup_req_bits == 240);
  CHECK(cfg.fst_setup_res_bits == 240);
  CHECK_NOTHROW(cfg.validate());
}

TEST_CASE("derived timings match hand arithmetic for the defaults") {
  const DerivedTimings t = derive_timings(ProtocolConfig{});
  CHECK(t.gamma_us == Approx(8584.0).epsilon(1e-15));  // (128+272+8184)/1e6 s
  CHECK(t.t_s_us == Approx(8982.0).epsilon(1e-15));    // gamma+28+240+128+2
  CHECK(t.t_c_us == Approx(8713.0).epsilon(1e-15));    // gamma+128+1
  CHECK(t.t_fst_us == Approx(964.0).epsilon(1e-15));   // 240+240+2*240+4
  CHECK(t.sigma_us == 50.0);
  CHECK(t.delta_us == 1.0);
  CHECK(t.t_s_us > t.t_c_us);
  CHECK(t.t_c_us > t.sigma_us);
}

TEST_CASE("derive_timings is deterministic and rate-covariant") {
  ProtocolConfig cfg;
  const DerivedTimings a = derive_timings(cfg);
  const DerivedTimings b = derive_timings(cfg);
  CHECK(a.t_s_us == b.t_s_us);
  CHECK(a.t_fst_us == b.t_fst_us);

  // Doubling the channel rate halves exactly the on-air components.
  cfg.rate_uw_bps *= 2.0;
  const DerivedTimings d = derive_timings(cfg);
  const double fixed_s = cfg.sifs_us + cfg.difs_us + 2.0 * cfg.delta_us;
  const double fixed_c = cfg.difs_us + cfg.delta_us;
  const double fixed_fst = 4.0 * cfg.delta_us;
  CHECK(d.gamma_us == Approx(a.gamma_us / 2.0).epsilon(1e-12));
  CHECK(d.t_s_us - fixed_s == Approx((a.t_s_us - fixed_s) / 2.0).epsilon(1e-12));
  CHECK(d.t_c_us - fixed_c == Approx((a.t_c_us - fixed_c) / 2.0).epsilon(1e-12));
  CHECK(d.t_fst_us - fixed_fst == Approx((a.t_fst_us - fixed_fst) / 2.0).epsilon(1e-12));
}

TEST_CASE("config validation rejects out-of-range fields") {
  auto tweak = [](auto fn) {
    ProtocolConfig cfg;
    fn(cfg);
    return cfg;
  };
  CHECK_THROWS_AS(tweak([](ProtocolConfig& c) { c.W = 0; }).validate(), ConfigError);
  CHECK_THROWS_AS(tweak([](ProtocolConfig& c) { c.m = -1; }).validate(), ConfigError);
  CHECK_THROWS_AS(tweak([](ProtocolConfig& c) { c.alpha = 1.5; }).validate(), ConfigError);
  CHECK_THROWS_AS(tweak([](ProtocolConfig& c) { c.beta = -0.1; }).validate(), ConfigError);
  CHECK_THROWS_AS(tweak([](ProtocolConfig& c) { c.J = 0; }).validate(), ConfigError);
  CHECK_THROWS_AS(tweak([](ProtocolConfig& c) { c.payload_uw_bits = 0; }).validate(), ConfigError);
  CHECK_THROWS_AS(tweak([](ProtocolConfig& c) { c.rate_mmw_bps = 0.0; }).validate(), ConfigError);
  CHECK_THROWS_AS(tweak([](ProtocolConfig& c) { c.sigma_us = -1.0; }).validate(), ConfigError);
}

TEST_CASE("JSON config: missing fields default, unknown fields error") {
  const auto j = nlohmann::json::parse(R"({"J": 20, "beta": 0.9})");
  const ProtocolConfig cfg = config_from_json(j);
  CHECK(cfg.J == 20);
  CHECK(cfg.beta == 0.9);
  CHECK(cfg.W == ProtocolConfig{}.W);
  CHECK(cfg.payload_uw_bits == 8184);

  const auto bad = nlohmann::json::parse(R"({"J": 20, "betta": 0.9})");
  CHECK_THROWS_AS(config_from_json(bad), ConfigError);

  const auto bad_type = nlohmann::json::parse(R"({"J": "twenty"})");
  CHECK_THROWS_AS(config_from_json(bad_type), ConfigError);

  const auto not_object = nlohmann::json::parse(R"([1,2,3])");
  CHECK_THROWS_AS(config_from_json(not_object), ConfigError);
}

TEST_CASE("JSON config round-trips exactly") {
  ProtocolConfig cfg;
  cfg.J = 37;
  cfg.alpha = 0.123456789012345;
  cfg.sigma_us = 9.5;
  cfg.payload_mmw_bits = 123456;
  const ProtocolConfig back = config_from_json(config_to_json(cfg));
  CHECK(back == cfg);
}

TEST_CASE("key=value overrides parse by field type") {
  ProtocolConfig cfg;
  apply_override(cfg, "J", "25");
  apply_override(cfg, "alpha", "0.35");
  apply_override(cfg, "payload_uw_bits", "4096");
  CHECK(cfg.J == 25);
  CHECK(cfg.alpha == 0.35);
  CHECK(cfg.payload_uw_bits == 4096);
  CHECK_THROWS_AS(apply_override(cfg, "nope", "1"), ConfigError);
  CHECK_THROWS_AS(apply_override(cfg, "J", "2.5"), ConfigError);
  CHECK_THROWS_AS(apply_override(cfg, "alpha", "abc"), ConfigError);
}

#include "doctest.h"
#include "oracles.hpp"
#include "rsma/scenario.hpp"

#include <cmath>
#include <stdexcept>

using namespace rsma;

TEST_CASE("default configuration matches the simulation table") {
  const ScenarioConfig c;
  CHECK(c.num_antennas == 32);
  CHECK(c.num_users == 8);
  CHECK(c.num_subcarriers == 3);
  CHECK(c.bandwidth_hz == 1e6);
  CHECK(c.total_blocklength == 1000);
  CHECK(c.error_threshold == 1e-5);
  CHECK(c.max_total_power_dbm == 30.0);
  CHECK(c.noise_power_dbm == -113.0);
  CHECK(c.estimation_error_var == 0.05);
  CHECK(c.min_rate_bps_hz == 1.0);
  CHECK(c.distance_range_m.first == 10.0);
  CHECK(c.distance_range_m.second == 300.0);
  CHECK(c.rzf_regularization_mode.kind == RegularizationMode::Kind::per_group_noise_scaled);
}

TEST_CASE("derived quantities") {
  ScenarioConfig c;
  CHECK(c.max_total_power_w() == doctest::Approx(1.0));
  CHECK(c.noise_power_w() == doctest::Approx(std::pow(10.0, -14.3)));
  CHECK(dbm_to_watt(0.0) == doctest::Approx(1e-3));
  CHECK(c.blocklength_per_subcarrier() == 333);
  CHECK(c.bandwidth_per_subcarrier_hz() == doctest::Approx(1e6 / 3));
  CHECK(c.symbol_duration_s() == doctest::Approx(1e-6));
  CHECK(c.latency_threshold_s() == doctest::Approx(1e-3));
}

TEST_CASE("validation warns on indivisible blocklength and rejects bad fields") {
  ScenarioConfig c;
  auto w = c.validate();
  REQUIRE(w.size() == 1);
  CHECK(w[0].find("not divisible") != std::string::npos);
  c.num_subcarriers = 4;
  CHECK(c.validate().empty());

  auto rejects = [](auto mutate) {
    ScenarioConfig bad;
    mutate(bad);
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  };
  rejects([](ScenarioConfig& x) { x.num_antennas = 0; });
  rejects([](ScenarioConfig& x) { x.num_users = 0; });
  rejects([](ScenarioConfig& x) { x.num_subcarriers = 0; });
  rejects([](ScenarioConfig& x) { x.bandwidth_hz = -1.0; });
  rejects([](ScenarioConfig& x) { x.error_threshold = 0.5; });
  rejects([](ScenarioConfig& x) { x.error_threshold = 0.0; });
  rejects([](ScenarioConfig& x) { x.estimation_error_var = 1.5; });
  rejects([](ScenarioConfig& x) { x.min_rate_bps_hz = -0.1; });
  rejects([](ScenarioConfig& x) { x.distance_range_m = {300.0, 10.0}; });
  rejects([](ScenarioConfig& x) { x.distance_range_m = {0.0, 10.0}; });
  rejects([](ScenarioConfig& x) { x.rzf_regularization_mode = {RegularizationMode::Kind::fixed, -1.0}; });
}

TEST_CASE("theta against the quadrature oracle") {
  const double qinv = oracle::q_inverse_by_bisection(1e-5);
  ScenarioConfig c;
  c.num_subcarriers = 1;
  CHECK(derive_theta(c) == doctest::Approx(qinv / (std::sqrt(1000.0) * std::log(2.0))).epsilon(1e-7));
  CHECK(derive_theta(c) == doctest::Approx(0.1946).epsilon(1e-3));
  // Three subcarriers: N_j is floored to 333.
  c.num_subcarriers = 3;
  CHECK(derive_theta(c) == doctest::Approx(qinv / (std::sqrt(333.0) * std::log(2.0))).epsilon(1e-7));
  CHECK(std::abs(derive_theta(c) - 0.3370) < 3e-4);
  // Symmetric point of Q.
  c.error_threshold = 0.5 - 1e-15;
  c.num_subcarriers = 1;
  c.total_blocklength = 100;
  CHECK(std::abs(derive_theta(c)) < 1e-12);
}

TEST_CASE("theta is positive and decreases in the blocklength") {
  ScenarioConfig c;
  c.num_subcarriers = 1;
  double prev = INFINITY;
  for (int n : {10, 50, 100, 333, 1000, 5000}) {
    c.total_blocklength = n;
    const double t = derive_theta(c);
    CHECK(t > 0.0);
    CHECK(t < prev);
    prev = t;
  }
}

TEST_CASE("rng streams are deterministic and disjoint") {
  ScenarioConfig c;
  c.master_seed = 7;
  auto draw = [](RngStream r) {
    std::vector<std::uint64_t> v(100);
    for (auto& x : v) x = r();
    return v;
  };
  CHECK(draw(derive_rng_stream(c, 0)) == draw(derive_rng_stream(c, 0)));
  CHECK(draw(derive_rng_stream(c, 0)) != draw(derive_rng_stream(c, 1)));
  CHECK(draw(derive_rng_stream(c, 0, kStreamChannel)) != draw(derive_rng_stream(c, 0, kStreamPositions)));
  ScenarioConfig d = c;
  d.master_seed = 8;
  CHECK(draw(derive_rng_stream(c, 0)) != draw(derive_rng_stream(d, 0)));
}

TEST_CASE("config json round trip and strictness") {
  ScenarioConfig c;
  c.num_users = 5;
  c.max_total_power_dbm = 24.0;
  c.rzf_regularization_mode = {RegularizationMode::Kind::fixed, 0.25};
  c.distance_range_m = {20.0, 150.0};
  c.master_seed = 0xFFFFFFFFFFFFull;
  c.literal_balanced_rule = true;
  CHECK(config_from_json(to_json(c)) == c);
  CHECK(config_from_json(to_json(ScenarioConfig{})) == ScenarioConfig{});
  // Text round trip keeps doubles exactly.
  c.estimation_error_var = 0.1 + 0.2;
  CHECK(config_from_json(nlohmann::json::parse(to_json(c).dump())) == c);

  CHECK(config_from_json(nlohmann::json::object()) == ScenarioConfig{});
  CHECK_THROWS_AS(config_from_json({{"num_user", 3}}), std::invalid_argument);
  CHECK_THROWS_AS(config_from_json({{"num_users", "three"}}), std::invalid_argument);
  CHECK_THROWS_AS(config_from_json({{"num_users", 0}}), std::invalid_argument);
  CHECK_THROWS_AS(config_from_json({{"rzf_regularization_mode", "other"}}), std::invalid_argument);
  CHECK_THROWS_AS(config_from_json({{"distance_range_m", {1.0}}}), std::invalid_argument);
  CHECK_THROWS_AS(config_from_json(nlohmann::json::array()), std::invalid_argument);
  CHECK_THROWS(load_config("/nonexistent/config.json"));
}

#include "rsma/scenario.hpp"

#include "rsma/fbl.hpp"

#include "json.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <stdexcept>

namespace rsma {

using nlohmann::json;

double dbm_to_watt(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

std::vector<std::string> ScenarioConfig::validate() const {
  auto bad = [](const std::string& what) { throw std::invalid_argument("config: " + what); };
  if (num_antennas < 1) bad("num_antennas must be >= 1");
  if (num_users < 1) bad("num_users must be >= 1");
  if (num_subcarriers < 1) bad("num_subcarriers must be >= 1");
  if (!(bandwidth_hz > 0.0) || !std::isfinite(bandwidth_hz)) bad("bandwidth_hz must be positive");
  if (total_blocklength < num_subcarriers) bad("total_blocklength must be >= num_subcarriers");
  if (!(error_threshold > 0.0 && error_threshold < 0.5)) bad("error_threshold must lie in (0, 0.5)");
  if (!std::isfinite(dbm_to_watt(max_total_power_dbm))) bad("max_total_power_dbm not finite");
  if (!std::isfinite(noise_power_dbm) || !(dbm_to_watt(noise_power_dbm) > 0.0)) {
    bad("noise_power_dbm not finite");
  }
  if (!(estimation_error_var >= 0.0 && estimation_error_var <= 1.0)) {
    bad("estimation_error_var must lie in [0, 1]");
  }
  if (!(min_rate_bps_hz >= 0.0) || !std::isfinite(min_rate_bps_hz)) {
    bad("min_rate_bps_hz must be nonnegative");
  }
  if (rzf_regularization_mode.kind == RegularizationMode::Kind::fixed &&
      !(rzf_regularization_mode.value >= 0.0 && std::isfinite(rzf_regularization_mode.value))) {
    bad("fixed regularization must be nonnegative");
  }
  const auto [lo, hi] = distance_range_m;
  if (!(lo > 0.0) || !(hi > lo) || !std::isfinite(hi)) bad("distance_range_m must satisfy 0 < min < max");

  std::vector<std::string> warnings;
  if (total_blocklength % num_subcarriers != 0) {
    warnings.push_back("total_blocklength " + std::to_string(total_blocklength) +
                       " not divisible by num_subcarriers " + std::to_string(num_subcarriers) +
                       "; using floor, " + std::to_string(total_blocklength % num_subcarriers) +
                       " channel uses discarded");
  }
  return warnings;
}

double ScenarioConfig::max_total_power_w() const { return dbm_to_watt(max_total_power_dbm); }
double ScenarioConfig::noise_power_w() const { return dbm_to_watt(noise_power_dbm); }
int ScenarioConfig::blocklength_per_subcarrier() const { return total_blocklength / num_subcarriers; }
double ScenarioConfig::bandwidth_per_subcarrier_hz() const { return bandwidth_hz / num_subcarriers; }
double ScenarioConfig::symbol_duration_s() const { return 1.0 / bandwidth_hz; }
double ScenarioConfig::latency_threshold_s() const { return total_blocklength * symbol_duration_s(); }

double derive_theta(const ScenarioConfig& config) {
  config.validate();
  return fbl::rate_penalty(config.error_threshold, config.blocklength_per_subcarrier());
}

RngStream derive_rng_stream(const ScenarioConfig& config, std::uint64_t trial_index,
                            std::uint64_t purpose) {
  const std::uint64_t s = config.master_seed;
  std::seed_seq seq{static_cast<std::uint32_t>(s), static_cast<std::uint32_t>(s >> 32),
                    static_cast<std::uint32_t>(trial_index),
                    static_cast<std::uint32_t>(trial_index >> 32),
                    static_cast<std::uint32_t>(purpose), 0x5253u};
  return RngStream(seq);
}

json to_json(const ScenarioConfig& c) {
  json reg;
  if (c.rzf_regularization_mode.kind == RegularizationMode::Kind::fixed) {
    reg = json{{"fixed", c.rzf_regularization_mode.value}};
  } else {
    reg = "per_group_noise_scaled";
  }
  return json{{"num_antennas", c.num_antennas},
              {"num_users", c.num_users},
              {"num_subcarriers", c.num_subcarriers},
              {"bandwidth_hz", c.bandwidth_hz},
              {"total_blocklength", c.total_blocklength},
              {"error_threshold", c.error_threshold},
              {"max_total_power_dbm", c.max_total_power_dbm},
              {"noise_power_dbm", c.noise_power_dbm},
              {"estimation_error_var", c.estimation_error_var},
              {"min_rate_bps_hz", c.min_rate_bps_hz},
              {"rzf_regularization_mode", reg},
              {"distance_range_m", {c.distance_range_m.first, c.distance_range_m.second}},
              {"master_seed", c.master_seed},
              {"rho_uses_error_vector", c.rho_uses_error_vector},
              {"resample_positions", c.resample_positions},
              {"literal_balanced_rule", c.literal_balanced_rule}};
}

ScenarioConfig config_from_json(const json& j) {
  if (!j.is_object()) throw std::invalid_argument("config: expected a JSON object");
  static const std::set<std::string> known = {
      "num_antennas",        "num_users",          "num_subcarriers",
      "bandwidth_hz",        "total_blocklength",  "error_threshold",
      "max_total_power_dbm", "noise_power_dbm",    "estimation_error_var",
      "min_rate_bps_hz",     "rzf_regularization_mode", "distance_range_m",
      "master_seed",         "rho_uses_error_vector", "resample_positions",
      "literal_balanced_rule"};
  for (const auto& [key, value] : j.items()) {
    if (!known.count(key)) throw std::invalid_argument("config: unknown key '" + key + "'");
  }
  ScenarioConfig c;
  try {
    auto get = [&](const char* key, auto& field) {
      if (j.contains(key)) j.at(key).get_to(field);
    };
    get("num_antennas", c.num_antennas);
    get("num_users", c.num_users);
    get("num_subcarriers", c.num_subcarriers);
    get("bandwidth_hz", c.bandwidth_hz);
    get("total_blocklength", c.total_blocklength);
    get("error_threshold", c.error_threshold);
    get("max_total_power_dbm", c.max_total_power_dbm);
    get("noise_power_dbm", c.noise_power_dbm);
    get("estimation_error_var", c.estimation_error_var);
    get("min_rate_bps_hz", c.min_rate_bps_hz);
    get("master_seed", c.master_seed);
    get("rho_uses_error_vector", c.rho_uses_error_vector);
    get("resample_positions", c.resample_positions);
    get("literal_balanced_rule", c.literal_balanced_rule);
    if (j.contains("distance_range_m")) {
      const auto& r = j.at("distance_range_m");
      if (!r.is_array() || r.size() != 2) {
        throw std::invalid_argument("config: distance_range_m must be [min, max]");
      }
      c.distance_range_m = {r[0].get<double>(), r[1].get<double>()};
    }
    if (j.contains("rzf_regularization_mode")) {
      const auto& r = j.at("rzf_regularization_mode");
      if (r.is_string() && r.get<std::string>() == "per_group_noise_scaled") {
        c.rzf_regularization_mode = {};
      } else if (r.is_object() && r.size() == 1 && r.contains("fixed")) {
        c.rzf_regularization_mode = {RegularizationMode::Kind::fixed, r.at("fixed").get<double>()};
      } else {
        throw std::invalid_argument(
            "config: rzf_regularization_mode must be \"per_group_noise_scaled\" or {\"fixed\": v}");
      }
    }
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw std::invalid_argument("config " + path + ": " + e.what());
  }
  return config_from_json(j);
}

}  // namespace rsma

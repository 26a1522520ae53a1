#pragma once

// Experiment configuration: the simulation parameters, derived per-subcarrier
// quantities and deterministic per-trial random streams.

#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

namespace rsma {

struct RegularizationMode {
  enum class Kind { per_group_noise_scaled, fixed };
  Kind kind = Kind::per_group_noise_scaled;
  double value = 0.0;  // used when kind == fixed

  bool operator==(const RegularizationMode&) const = default;
};

struct ScenarioConfig {
  int num_antennas = 32;
  int num_users = 8;
  int num_subcarriers = 3;
  double bandwidth_hz = 1e6;
  int total_blocklength = 1000;
  double error_threshold = 1e-5;
  double max_total_power_dbm = 30.0;
  double noise_power_dbm = -113.0;
  double estimation_error_var = 0.05;
  double min_rate_bps_hz = 1.0;
  RegularizationMode rzf_regularization_mode;
  std::pair<double, double> distance_range_m{10.0, 300.0};
  std::uint64_t master_seed = 1;

  // Optional switches, all default to the documented reading.
  bool rho_uses_error_vector = false;  // literal symbol in the link-gain formula
  bool resample_positions = true;      // redraw user distances every trial
  bool literal_balanced_rule = false;  // extra users go to the last groups

  bool operator==(const ScenarioConfig&) const = default;

  /// Throws std::invalid_argument on any out-of-range field. Returns
  /// non-fatal warnings (currently: N^th not divisible by J).
  std::vector<std::string> validate() const;

  double max_total_power_w() const;
  double noise_power_w() const;
  /// N_j = floor(N^th / J).
  int blocklength_per_subcarrier() const;
  double bandwidth_per_subcarrier_hz() const;
  double symbol_duration_s() const;    // T_s = 1 / B
  double latency_threshold_s() const;  // D^th = N^th T_s
};

/// Converts dBm to watts.
double dbm_to_watt(double dbm);

/// Q^{-1}(eps^th) / (sqrt(N_j) ln 2).
double derive_theta(const ScenarioConfig& config);

using RngStream = std::mt19937_64;

/// Deterministic stream for (master_seed, trial_index, purpose). Distinct
/// purposes give independent streams within one trial.
RngStream derive_rng_stream(const ScenarioConfig& config, std::uint64_t trial_index,
                            std::uint64_t purpose = 0);

// Stream purposes used by the harness.
inline constexpr std::uint64_t kStreamChannel = 0;
inline constexpr std::uint64_t kStreamPositions = 1;
inline constexpr std::uint64_t kStreamGrouping = 2;

nlohmann::json to_json(const ScenarioConfig& config);
/// Strict parse: every key must be known; missing keys keep their defaults.
ScenarioConfig config_from_json(const nlohmann::json& j);
ScenarioConfig load_config(const std::string& path);

}  // namespace rsma

#pragma once

// Large-scale path loss plus Rayleigh small-scale fading with an additive
// estimation error: g = g_hat + g_err, g_hat ~ CN(0, 1 - s2), g_err ~ CN(0, s2).

#include "rsma/scenario.hpp"

#include <Eigen/Dense>

#include "json.hpp"

namespace rsma {

struct ChannelRealization {
  Eigen::VectorXd distances_m;         // K
  Eigen::VectorXd large_scale;         // K, linear gains alpha_k
  Eigen::MatrixXcd true_small_scale;   // K x M_t, rows g_k
  Eigen::MatrixXcd est_small_scale;    // K x M_t, rows g_hat_k
  Eigen::MatrixXcd err_small_scale;    // K x M_t, rows g_err_k

  int num_users() const { return static_cast<int>(distances_m.size()); }
  int num_antennas() const { return static_cast<int>(est_small_scale.cols()); }
};

/// K i.i.d. uniform distances on the configured range.
Eigen::VectorXd sample_positions(const ScenarioConfig& config, RngStream& rng);

/// 10^(-(35.3 + 37.6 log10 d) / 10). Throws on d <= 0.
double path_loss_linear(double distance_m);

/// Draws estimate and error rows, true = estimate + error.
ChannelRealization sample_channels(const ScenarioConfig& config, const Eigen::VectorXd& distances,
                                   RngStream& rng);

/// |a^H b| / (||a|| ||b||). Throws on a zero vector.
double correlation(const Eigen::VectorXcd& a, const Eigen::VectorXcd& b);

/// Complex entries are written as [re, im] pairs.
nlohmann::json to_json(const ChannelRealization& r);
ChannelRealization realization_from_json(const nlohmann::json& j);

}  // namespace rsma

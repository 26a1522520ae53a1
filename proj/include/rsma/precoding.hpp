#pragma once

// Regularized zero-forcing precoders per group and the scalar link
// coefficients that enter every SINR expression.

#include "rsma/channel.hpp"
#include "rsma/scenario.hpp"

#include <Eigen/Dense>

#include <vector>

namespace rsma {

struct PrecoderSet {
  Eigen::MatrixXcd private_vectors;  // M_t x I_j, unit columns
  Eigen::VectorXcd common_vector;    // M_t, unit norm
  double combining_weight = 0.0;     // 1 / sqrt(M_t I_j)
  double regularization = 0.0;       // kappa
};

/// Per-group coefficients. Indices are local to the group (0..I_j-1).
///   rho_common(k)     = alpha_k |g_k^H w_c|^2
///   rho_private(k, l) = alpha_k |g_k^H w_l|^2   (stream l seen at user k)
///   a(k, l) = rho_private(k, l) + s2 alpha_k,  b(k) = s2 alpha_k,  c = noise
struct LinkCoefficients {
  std::vector<int> users;  // global user indices
  Eigen::VectorXd rho_common;
  Eigen::MatrixXd rho_private;
  Eigen::MatrixXd a;
  Eigen::VectorXd b;
  double c = 0.0;

  int size() const { return static_cast<int>(users.size()); }
};

/// Columns of (G G^H + kappa I)^{-1} G normalized to unit norm; G is M_t x I_j.
/// Throws std::invalid_argument when the system is singular (kappa = 0 with a
/// rank-deficient G, including overloaded groups).
PrecoderSet rzf_precoders(const Eigen::MatrixXcd& est_group_channels, double kappa);

/// Unit-norm sum of the private columns with equal weights 1/sqrt(M_t I_j).
/// Throws if the sum vanishes.
Eigen::VectorXcd common_precoder(const PrecoderSet& private_set, int num_antennas, int group_size);

/// kappa for a group of the given size under the configured mode.
double regularization_for_group(const ScenarioConfig& config, int group_size);

/// Full precoder set for one group of users (private and common).
PrecoderSet group_precoders(const ChannelRealization& realization, const std::vector<int>& group,
                            const ScenarioConfig& config);

LinkCoefficients link_coefficients(const ChannelRealization& realization,
                                   const std::vector<int>& group, const PrecoderSet& precoders,
                                   const ScenarioConfig& config);

/// Precoders plus coefficients for every group; empty groups yield empty links.
std::vector<LinkCoefficients> all_link_coefficients(const ChannelRealization& realization,
                                                    const std::vector<std::vector<int>>& groups,
                                                    const ScenarioConfig& config);

}  // namespace rsma

#include "rsma/precoding.hpp"

#include <cmath>
#include <stdexcept>

namespace rsma {

PrecoderSet rzf_precoders(const Eigen::MatrixXcd& g, double kappa) {
  const int m = static_cast<int>(g.rows());
  const int n = static_cast<int>(g.cols());
  if (n < 1 || m < 1) throw std::invalid_argument("rzf_precoders: empty channel matrix");
  if (!g.allFinite()) throw std::invalid_argument("rzf_precoders: non-finite channel");
  if (!(kappa >= 0.0)) throw std::invalid_argument("rzf_precoders: negative regularization");

  // (G G^H + kI)^{-1} G = G (G^H G + kI)^{-1}; solve in the smaller dimension.
  Eigen::MatrixXcd w;
  if (n <= m) {
    Eigen::MatrixXcd gram = g.adjoint() * g;
    gram.diagonal().array() += kappa;
    Eigen::FullPivLU<Eigen::MatrixXcd> lu(gram);
    lu.setThreshold(1e-12);
    if (!lu.isInvertible()) {
      throw std::invalid_argument("rzf_precoders: singular system (kappa = 0 with rank-deficient channels)");
    }
    w = g * lu.solve(Eigen::MatrixXcd::Identity(n, n));
  } else {
    Eigen::MatrixXcd outer = g * g.adjoint();
    outer.diagonal().array() += kappa;
    Eigen::FullPivLU<Eigen::MatrixXcd> lu(outer);
    // Overloaded groups rely on kappa alone; compare against the Gram scale.
    lu.setThreshold(1e-14);
    if (!(kappa > 0.0) || !lu.isInvertible()) {
      throw std::invalid_argument("rzf_precoders: overloaded group requires kappa > 0");
    }
    w = lu.solve(g);
  }
  for (int k = 0; k < n; ++k) {
    const double nk = w.col(k).norm();
    if (!(nk > 0.0) || !std::isfinite(nk)) throw std::invalid_argument("rzf_precoders: zero precoder column");
    w.col(k) /= nk;
  }
  PrecoderSet out;
  out.private_vectors = std::move(w);
  out.regularization = kappa;
  out.combining_weight = 1.0 / std::sqrt(static_cast<double>(m) * n);
  return out;
}

Eigen::VectorXcd common_precoder(const PrecoderSet& p, int num_antennas, int group_size) {
  const double omega = 1.0 / std::sqrt(static_cast<double>(num_antennas) * group_size);
  Eigen::VectorXcd s = omega * p.private_vectors.rowwise().sum();
  const double ns = s.norm();
  if (!(ns > 1e-12 * omega)) throw std::invalid_argument("common_precoder: private columns cancel");
  return s / ns;
}

double regularization_for_group(const ScenarioConfig& config, int group_size) {
  if (config.rzf_regularization_mode.kind == RegularizationMode::Kind::fixed) {
    return config.rzf_regularization_mode.value;
  }
  return group_size * config.noise_power_w();
}

PrecoderSet group_precoders(const ChannelRealization& r, const std::vector<int>& group,
                            const ScenarioConfig& config) {
  const int n = static_cast<int>(group.size());
  Eigen::MatrixXcd g(r.num_antennas(), n);
  for (int i = 0; i < n; ++i) g.col(i) = r.est_small_scale.row(group[i]).transpose();
  PrecoderSet p = rzf_precoders(g, regularization_for_group(config, n));
  p.common_vector = common_precoder(p, r.num_antennas(), n);
  return p;
}

LinkCoefficients link_coefficients(const ChannelRealization& r, const std::vector<int>& group,
                                   const PrecoderSet& p, const ScenarioConfig& config) {
  const int n = static_cast<int>(group.size());
  const double s2 = config.estimation_error_var;
  const Eigen::MatrixXcd& gains = config.rho_uses_error_vector ? r.err_small_scale : r.est_small_scale;
  LinkCoefficients lc;
  lc.users = group;
  lc.rho_common.resize(n);
  lc.rho_private.resize(n, n);
  lc.a.resize(n, n);
  lc.b.resize(n);
  lc.c = config.noise_power_w();
  for (int k = 0; k < n; ++k) {
    const int u = group[k];
    const double alpha = r.large_scale(u);
    const Eigen::VectorXcd gk = gains.row(u).transpose();
    lc.rho_common(k) = alpha * std::norm(gk.dot(p.common_vector));
    for (int l = 0; l < n; ++l) {
      lc.rho_private(k, l) = alpha * std::norm(gk.dot(p.private_vectors.col(l)));
      lc.a(k, l) = lc.rho_private(k, l) + s2 * alpha;
    }
    lc.b(k) = s2 * alpha;
  }
  return lc;
}

std::vector<LinkCoefficients> all_link_coefficients(const ChannelRealization& r,
                                                    const std::vector<std::vector<int>>& groups,
                                                    const ScenarioConfig& config) {
  std::vector<LinkCoefficients> out;
  out.reserve(groups.size());
  for (const auto& g : groups) {
    if (g.empty()) {
      LinkCoefficients empty;
      empty.c = config.noise_power_w();
      out.push_back(std::move(empty));
      continue;
    }
    out.push_back(link_coefficients(r, g, group_precoders(r, g, config), config));
  }
  return out;
}

}  // namespace rsma

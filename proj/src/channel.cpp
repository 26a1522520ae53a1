#include "rsma/channel.hpp"

#include <cmath>
#include <stdexcept>

namespace rsma {

using nlohmann::json;

Eigen::VectorXd sample_positions(const ScenarioConfig& config, RngStream& rng) {
  const auto [lo, hi] = config.distance_range_m;
  if (!(lo > 0.0 && hi > lo)) throw std::invalid_argument("sample_positions: invalid distance range");
  std::uniform_real_distribution<double> u(lo, hi);
  Eigen::VectorXd d(config.num_users);
  for (int k = 0; k < config.num_users; ++k) d(k) = u(rng);
  return d;
}

double path_loss_linear(double distance_m) {
  if (!(distance_m > 0.0)) throw std::invalid_argument("path_loss_linear: distance must be positive");
  const double loss_db = 35.3 + 37.6 * std::log10(distance_m);
  return std::pow(10.0, -loss_db / 10.0);
}

ChannelRealization sample_channels(const ScenarioConfig& config, const Eigen::VectorXd& distances,
                                   RngStream& rng) {
  const double s2 = config.estimation_error_var;
  if (!(s2 >= 0.0 && s2 <= 1.0)) {
    throw std::invalid_argument("sample_channels: estimation error variance outside [0, 1]");
  }
  const int k_users = static_cast<int>(distances.size());
  const int m = config.num_antennas;
  ChannelRealization r;
  r.distances_m = distances;
  r.large_scale.resize(k_users);
  for (int k = 0; k < k_users; ++k) r.large_scale(k) = path_loss_linear(distances(k));

  // Real and imaginary parts each carry half of the variance.
  std::normal_distribution<double> n01(0.0, 1.0);
  const double sd_est = std::sqrt((1.0 - s2) / 2.0);
  const double sd_err = std::sqrt(s2 / 2.0);
  r.est_small_scale.resize(k_users, m);
  r.err_small_scale.resize(k_users, m);
  for (int k = 0; k < k_users; ++k) {
    for (int i = 0; i < m; ++i) {
      const double a = n01(rng), b = n01(rng), c = n01(rng), d = n01(rng);
      r.est_small_scale(k, i) = {sd_est * a, sd_est * b};
      r.err_small_scale(k, i) = {sd_err * c, sd_err * d};
    }
  }
  r.true_small_scale = r.est_small_scale + r.err_small_scale;
  return r;
}

double correlation(const Eigen::VectorXcd& a, const Eigen::VectorXcd& b) {
  const double na = a.norm(), nb = b.norm();
  if (!(na > 0.0) || !(nb > 0.0)) throw std::invalid_argument("correlation: zero channel vector");
  return std::min(1.0, std::abs(a.dot(b)) / (na * nb));
}

namespace {

json complex_matrix(const Eigen::MatrixXcd& m) {
  json rows = json::array();
  for (int i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (int j = 0; j < m.cols(); ++j) row.push_back({m(i, j).real(), m(i, j).imag()});
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXcd complex_matrix(const json& j) {
  const int rows = static_cast<int>(j.size());
  const int cols = rows ? static_cast<int>(j[0].size()) : 0;
  Eigen::MatrixXcd m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    if (static_cast<int>(j[i].size()) != cols) throw std::invalid_argument("realization: ragged matrix");
    for (int c = 0; c < cols; ++c) m(i, c) = {j[i][c][0].get<double>(), j[i][c][1].get<double>()};
  }
  return m;
}

}  // namespace

json to_json(const ChannelRealization& r) {
  return json{{"distances_m", std::vector<double>(r.distances_m.data(), r.distances_m.data() + r.distances_m.size())},
              {"large_scale", std::vector<double>(r.large_scale.data(), r.large_scale.data() + r.large_scale.size())},
              {"true_small_scale", complex_matrix(r.true_small_scale)},
              {"est_small_scale", complex_matrix(r.est_small_scale)},
              {"err_small_scale", complex_matrix(r.err_small_scale)}};
}

ChannelRealization realization_from_json(const json& j) {
  ChannelRealization r;
  const auto d = j.at("distances_m").get<std::vector<double>>();
  const auto a = j.at("large_scale").get<std::vector<double>>();
  r.distances_m = Eigen::Map<const Eigen::VectorXd>(d.data(), static_cast<int>(d.size()));
  r.large_scale = Eigen::Map<const Eigen::VectorXd>(a.data(), static_cast<int>(a.size()));
  r.true_small_scale = complex_matrix(j.at("true_small_scale"));
  r.est_small_scale = complex_matrix(j.at("est_small_scale"));
  r.err_small_scale = complex_matrix(j.at("err_small_scale"));
  return r;
}

}  // namespace rsma

#include "doctest.h"
#include "rsma/channel.hpp"

#include <cmath>
#include <complex>
#include <stdexcept>

using namespace rsma;

TEST_CASE("path loss values") {
  CHECK(path_loss_linear(100.0) == doctest::Approx(std::pow(10.0, -11.05)).epsilon(1e-12));
  CHECK(-10.0 * std::log10(path_loss_linear(10.0)) == doctest::Approx(72.9).epsilon(1e-12));
  CHECK(-10.0 * std::log10(path_loss_linear(300.0)) == doctest::Approx(128.44).epsilon(1e-4));
  CHECK_THROWS_AS(path_loss_linear(0.0), std::invalid_argument);
  CHECK_THROWS_AS(path_loss_linear(-5.0), std::invalid_argument);
}

TEST_CASE("positions are uniform on the configured range") {
  ScenarioConfig c;
  c.num_users = 100000;
  auto rng = derive_rng_stream(c, 0, kStreamPositions);
  const Eigen::VectorXd d = sample_positions(c, rng);
  CHECK(d.minCoeff() > 10.0);
  CHECK(d.maxCoeff() < 300.0);
  CHECK(std::abs(d.mean() - 155.0) < 2.0);

  c.num_users = 50;
  c.distance_range_m = {10.0, 10.0 + 1e-9};
  auto rng2 = derive_rng_stream(c, 0);
  const Eigen::VectorXd e = sample_positions(c, rng2);
  CHECK((e.array() - 10.0).abs().maxCoeff() < 1e-8);

  auto r1 = derive_rng_stream(c, 3), r2 = derive_rng_stream(c, 3);
  CHECK(sample_positions(c, r1) == sample_positions(c, r2));

  c.distance_range_m = {20.0, 10.0};
  CHECK_THROWS_AS(sample_positions(c, r1), std::invalid_argument);
}

TEST_CASE("channel decomposition and error variance") {
  ScenarioConfig c;
  c.num_users = 40;
  c.num_antennas = 250;
  auto rng = derive_rng_stream(c, 0);
  Eigen::VectorXd d = Eigen::VectorXd::Constant(c.num_users, 100.0);
  const auto r = sample_channels(c, d, rng);
  CHECK(r.true_small_scale == r.est_small_scale + r.err_small_scale);
  CHECK(r.large_scale(0) == path_loss_linear(100.0));

  // 10^4 samples each: sample variance within a few standard errors.
  const double n = static_cast<double>(r.err_small_scale.size());
  const double var_err = r.err_small_scale.squaredNorm() / n;
  const double var_est = r.est_small_scale.squaredNorm() / n;
  CHECK(std::abs(var_err - 0.05) < 0.005);
  CHECK(std::abs(var_est - 0.95) < 0.05);
  // Real and imaginary halves.
  CHECK(std::abs(r.err_small_scale.real().squaredNorm() / n - 0.025) < 0.003);
  CHECK(std::abs(r.est_small_scale.mean()) < 0.03);
}

TEST_CASE("perfect and useless channel estimates") {
  ScenarioConfig c;
  c.num_users = 3;
  c.num_antennas = 4;
  Eigen::VectorXd d = Eigen::VectorXd::Constant(3, 50.0);
  c.estimation_error_var = 0.0;
  auto rng = derive_rng_stream(c, 1);
  auto r = sample_channels(c, d, rng);
  CHECK(r.err_small_scale.isZero(0.0));
  CHECK(r.true_small_scale == r.est_small_scale);
  c.estimation_error_var = 1.0;
  r = sample_channels(c, d, rng);
  CHECK(r.est_small_scale.isZero(0.0));
  c.estimation_error_var = 1.2;
  CHECK_THROWS_AS(sample_channels(c, d, rng), std::invalid_argument);
}

TEST_CASE("correlation coefficient") {
  Eigen::VectorXcd a(3), b(3);
  a << std::complex<double>(1, 2), std::complex<double>(0, -1), std::complex<double>(3, 0.5);
  b << std::complex<double>(0, 1), std::complex<double>(2, 2), std::complex<double>(-1, 0);
  CHECK(correlation(a, a) == doctest::Approx(1.0));
  CHECK(correlation(a, 5.0 * std::polar(1.0, 0.7) * a) == doctest::Approx(1.0));
  Eigen::VectorXcd e1 = Eigen::VectorXcd::Zero(3), e2 = Eigen::VectorXcd::Zero(3);
  e1(0) = 1.0;
  e2(1) = std::complex<double>(0, 1);
  CHECK(correlation(e1, e2) == 0.0);
  CHECK(correlation(a, b) == correlation(b, a));
  // |sum conj(a_i) b_i| / (|a| |b|) by hand.
  std::complex<double> inner = 0;
  for (int i = 0; i < 3; ++i) inner += std::conj(a(i)) * b(i);
  CHECK(correlation(a, b) == doctest::Approx(std::abs(inner) / (a.norm() * b.norm())).epsilon(1e-14));
  CHECK_THROWS_AS(correlation(a, Eigen::VectorXcd::Zero(3)), std::invalid_argument);
}

TEST_CASE("correlation is symmetric and bounded on random channels") {
  ScenarioConfig c;
  c.num_users = 12;
  auto rng = derive_rng_stream(c, 2);
  const auto r = sample_channels(c, Eigen::VectorXd::Constant(12, 80.0), rng);
  for (int i = 0; i < 12; ++i) {
    for (int k = 0; k < 12; ++k) {
      const double u = correlation(r.est_small_scale.row(i).transpose(), r.est_small_scale.row(k).transpose());
      CHECK(u <= 1.0 + 1e-12);
      CHECK(u >= 0.0);
      CHECK(u == correlation(r.est_small_scale.row(k).transpose(), r.est_small_scale.row(i).transpose()));
    }
  }
}

TEST_CASE("realization json round trip") {
  ScenarioConfig c;
  c.num_users = 3;
  c.num_antennas = 5;
  auto rng = derive_rng_stream(c, 4);
  const auto d = sample_positions(c, rng);
  const auto r = sample_channels(c, d, rng);
  const auto back = realization_from_json(nlohmann::json::parse(to_json(r).dump()));
  CHECK(back.distances_m == r.distances_m);
  CHECK(back.large_scale == r.large_scale);
  CHECK(back.true_small_scale == r.true_small_scale);
  CHECK(back.est_small_scale == r.est_small_scale);
  CHECK(back.err_small_scale == r.err_small_scale);
  CHECK(back.num_users() == 3);
  CHECK(back.num_antennas() == 5);
}

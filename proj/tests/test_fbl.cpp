#include "doctest.h"
#include "oracles.hpp"
#include "rsma/fbl.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

using namespace rsma::fbl;

using oracle::q_by_quadrature;
using oracle::q_inverse_by_bisection;

TEST_CASE("q function matches quadrature") {
  for (double x : {0.0, 0.5, 1.0, 1.96, 3.0, 4.5}) {
    CHECK(q_function(x) == doctest::Approx(q_by_quadrature(x)).epsilon(1e-9));
  }
  CHECK(q_function(1.96) == doctest::Approx(0.0249979).epsilon(1e-5));
  CHECK(q_function(-1.0) == doctest::Approx(1.0 - q_function(1.0)));
}

TEST_CASE("q inverse agrees with a bisection oracle") {
  CHECK(std::abs(q_inverse(1e-5) - q_inverse_by_bisection(1e-5)) < 1e-7);
  CHECK(std::abs(q_inverse(1e-5) - 4.26489) < 1e-4);
  for (double p : {0.4, 0.1, 1e-3, 1e-7, 1e-9}) {
    CHECK(q_function(q_inverse(p)) == doctest::Approx(p).epsilon(1e-12));
  }
  CHECK(q_inverse(0.5) == 0.0);
  CHECK(q_inverse(0.9) == doctest::Approx(-q_inverse(0.1)));
  CHECK_THROWS_AS(q_inverse(0.0), std::invalid_argument);
  CHECK_THROWS_AS(q_inverse(1.0), std::invalid_argument);
  CHECK_THROWS_AS(q_inverse(-0.2), std::invalid_argument);
}

TEST_CASE("dispersion limits") {
  CHECK(dispersion(0.0) == 0.0);
  CHECK(dispersion(1.0) == doctest::Approx(0.75));
  CHECK(dispersion(1e9) == doctest::Approx(1.0));
}

TEST_CASE("decode error at the fbl rate returns the target") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> lg(-1.0, 3.0), ln(2.0, 4.0), le(-7.0, -3.0);
  for (int i = 0; i < 100; ++i) {
    const double g = std::pow(10.0, lg(rng));
    const double n = std::round(std::pow(10.0, ln(rng)));
    const double e = std::pow(10.0, le(rng));
    const double r = fbl_rate({g, n, e});
    CHECK(std::abs(decode_error(g, r, n) - e) <= 1e-10 * e);
  }
}

TEST_CASE("decode error saturates at zero sinr") {
  CHECK(decode_error(0.0, 0.5, 100) == 1.0);
  CHECK(decode_error(0.0, 0.0, 100) == 0.0);
  CHECK(decode_error(10.0, 0.0, 100) < 1e-12);
}

TEST_CASE("rate penalty and zero-rate sinr") {
  const double theta = rate_penalty(1e-5, 333);
  CHECK(theta == doctest::Approx(q_inverse(1e-5) / (std::sqrt(333.0) * std::log(2.0))));
  const double g0 = zero_rate_sinr(1e-5, 333);
  CHECK(std::abs(fbl_rate({g0, 333, 1e-5})) < 1e-12);
  CHECK(fbl_rate({0.9 * g0, 333, 1e-5}) < 0.0);
  CHECK(fbl_rate({1.1 * g0, 333, 1e-5}) > 0.0);
}

TEST_CASE("effective throughput parts") {
  const auto et = effective_throughput(2.0, 1.0, 0.1, 0.2, 1e-5);
  CHECK(et.common_part == doctest::Approx(1.8));
  CHECK(et.private_part == doctest::Approx(0.7));
  CHECK(et.total() == doctest::Approx(2.5));
  CHECK(et.lower_bound_common == doctest::Approx(2.0 * (1 - 1e-5)));
  CHECK(et.lower_bound_private == doctest::Approx(1.0 - 2e-5));
  const auto clamped = effective_throughput(1.0, 1.0, 0.6, 0.6, 1e-5);
  CHECK(clamped.private_clamped);
  CHECK(clamped.private_part == 0.0);
}

TEST_CASE("throughput bound validation on the reference grid") {
  Lemma1Grid grid;
  grid.gammas = {0.1, 1, 10, 100, 1000};
  grid.error_targets = {1e-4, 1e-5, 1e-6};
  grid.blocklengths = {100, 1000, 10000};
  const auto rep = validate_lemma1(grid);
  CHECK(rep.passed());
  CHECK(rep.points_checked + rep.points_vacuous == 45);
  CHECK(rep.points_checked > 30);
  CHECK(rep.max_relative_gap <= 1.0);
}

TEST_CASE("throughput bound validation rejects out-of-range inputs") {
  Lemma1Grid grid;
  grid.gammas = {1.0};
  grid.blocklengths = {100};
  grid.error_targets = {1e-3};
  CHECK_THROWS_AS(validate_lemma1(grid), std::invalid_argument);
  grid.error_targets = {1e-5};
  grid.blocklengths = {2e4};
  CHECK_THROWS_AS(validate_lemma1(grid), std::invalid_argument);
  grid.blocklengths = {100};
  grid.gammas = {2e6};
  CHECK_THROWS_AS(validate_lemma1(grid), std::invalid_argument);
}

#include "doctest.h"
#include "rsma/allocation.hpp"
#include "rsma/channel.hpp"
#include "rsma/fbl.hpp"

#include <cmath>
#include <complex>
#include <stdexcept>

using namespace rsma;

namespace {

struct Instance {
  ScenarioConfig config;
  ChannelRealization channel;
  std::vector<std::vector<int>> groups;
};

// Users dealt round-robin onto the subcarriers.
Instance make_instance(int k, int j, int mt, std::uint64_t trial, double err_var = 0.05) {
  Instance in;
  in.config.num_users = k;
  in.config.num_subcarriers = j;
  in.config.num_antennas = mt;
  in.config.estimation_error_var = err_var;
  auto rp = derive_rng_stream(in.config, trial, kStreamPositions);
  auto rc = derive_rng_stream(in.config, trial, kStreamChannel);
  in.channel = sample_channels(in.config, sample_positions(in.config, rp), rc);
  in.groups.resize(j);
  for (int u = 0; u < k; ++u) in.groups[u % j].push_back(u);
  return in;
}

AllocationProblem problem_of(const Instance& in, TransmissionMode mode = TransmissionMode::rsma,
                             BudgetMode budget = BudgetMode::joint) {
  return make_problem(in.channel, in.groups, in.config, mode, budget);
}

bool trace_monotone(const std::vector<double>& t) {
  for (std::size_t i = 1; i < t.size(); ++i) {
    if (t[i] < t[i - 1] - 1e-9) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("sinr from raw channel vectors") {
  const auto in = make_instance(3, 1, 4, 5);
  const auto& r = in.channel;
  const auto& cfg = in.config;
  const std::vector<int>& g = in.groups[0];
  const auto pre = group_precoders(r, g, cfg);
  const auto links = link_coefficients(r, g, pre, cfg);
  Eigen::VectorXd p(3);
  p << 0.2, 0.05, 0.4;
  const double pc = 0.3;
  const Eigen::VectorXd gc = sinr_common(links, p, pc);
  const Eigen::VectorXd gp = sinr_private(links, p, pc);
  for (int k = 0; k < 3; ++k) {
    // Error power per unit-norm beam is s2 * alpha, from every stream.
    const double alpha = r.large_scale(g[k]);
    const double leak = cfg.estimation_error_var * alpha;
    auto gain = [&](const Eigen::VectorXcd& w) {
      std::complex<double> s = 0;
      for (int i = 0; i < 4; ++i) s += std::conj(r.est_small_scale(g[k], i)) * w(i);
      return alpha * std::norm(s);
    };
    double priv = 0.0;
    for (int l = 0; l < 3; ++l) priv += p(l) * (gain(pre.private_vectors.col(l)) + leak);
    const double noise = cfg.noise_power_w();
    const double common = pc * gain(pre.common_vector) / (priv + pc * leak + noise);
    const double others = priv - p(k) * (gain(pre.private_vectors.col(k)) + leak);
    const double own = p(k) * gain(pre.private_vectors.col(k)) / (others + leak * (p(k) + pc) + noise);
    CHECK(gc(k) == doctest::Approx(common).epsilon(1e-12));
    CHECK(gp(k) == doctest::Approx(own).epsilon(1e-12));
  }
}

TEST_CASE("sinr edge cases") {
  const auto in = make_instance(2, 1, 4, 1);
  const auto links = problem_of(in).links[0];
  Eigen::VectorXd p(2);
  p << 0.3, 0.0;
  CHECK(sinr_common(links, p, 0.0).isZero(0.0));
  CHECK(sinr_private(links, p, 0.2)(1) == 0.0);
  double prev = INFINITY;
  for (double pc : {0.0, 0.1, 0.3, 0.6}) {
    const double g = sinr_private(links, p, pc)(0);
    CHECK(g < prev);
    prev = g;
  }
  const auto perfect = make_instance(2, 1, 4, 1, 0.0);
  const auto lp = problem_of(perfect).links[0];
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(2);
  CHECK(sinr_common(lp, zero, 0.5)(1) == doctest::Approx(0.5 * lp.rho_common(1) / lp.c));
}

TEST_CASE("tangent restrictions of the concave parts") {
  for (double g0 : {1e-3, 0.1, 1.0, 7.0, 100.0, 1e4}) {
    CHECK(sqrt_dispersion_tangent(g0, g0) == doctest::Approx(std::sqrt(fbl::dispersion(g0))).epsilon(1e-15));
    const double h = 1e-6 * g0;
    const double fd = (std::sqrt(fbl::dispersion(g0 + h)) - std::sqrt(fbl::dispersion(g0 - h))) / (2 * h);
    CHECK(sqrt_dispersion_slope(g0) == doctest::Approx(fd).epsilon(1e-6));
    for (int i = 0; i <= 400; ++i) {
      const double g = 1e-4 * std::pow(10.0, i / 50.0) - 1e-4;
      CHECK(sqrt_dispersion_tangent(g, g0) >= std::sqrt(fbl::dispersion(g)) - 1e-14);
    }
  }
  CHECK_THROWS_AS(sqrt_dispersion_slope(0.0), std::invalid_argument);
  for (double x0 : {0.0, 0.5, 1.0, 3.0}) {
    for (double y0 : {0.0, 1.0, 2.5}) {
      CHECK(square_difference_tangent(x0, y0, x0, y0) == doctest::Approx((x0 - y0) * (x0 - y0)));
      for (double x = 0.0; x <= 4.0; x += 0.25) {
        for (double y = 0.0; y <= 4.0; y += 0.25) {
          CHECK(square_difference_tangent(x, y, x0, y0) <= (x - y) * (x - y) + 1e-12);
        }
      }
    }
  }
}

TEST_CASE("problem validation") {
  const auto in = make_instance(3, 2, 8, 1);
  auto prob = problem_of(in);
  CHECK_NOTHROW(prob.validate());
  auto dup = prob;
  dup.groups[1].push_back(0);
  CHECK_THROWS_AS(dup.validate(), std::invalid_argument);
  auto missing = prob;
  missing.groups[0].clear();
  CHECK_THROWS_AS(missing.validate(), std::invalid_argument);
  auto short_links = prob;
  short_links.links.pop_back();
  CHECK_THROWS_AS(short_links.validate(), std::invalid_argument);
  CHECK_THROWS_AS(make_problem(in.channel, {{0, 1, 2}}, in.config, TransmissionMode::rsma, BudgetMode::joint),
                  std::invalid_argument);
}

TEST_CASE("single user closed form") {
  auto in = make_instance(1, 1, 4, 2, 0.0);
  const auto prob = problem_of(in, TransmissionMode::sdma);
  const auto& l = prob.links[0];
  const double pmax = in.config.max_total_power_w();
  const double n = in.config.blocklength_per_subcarrier();
  const double best = (1.0 - 2e-5) * fbl::fbl_rate({pmax * l.rho_private(0, 0) / l.c, n, 1e-5});

  const auto cccp = cccp_allocate(prob);
  REQUIRE(cccp.feasible());
  CHECK(cccp.sum_et_lower_bound == doctest::Approx(best).epsilon(1e-4));
  CHECK(cccp.private_power[0](0) == doctest::Approx(pmax).epsilon(1e-4));
  const auto bf = brute_force_allocate(prob, 10);
  CHECK(bf.sum_et_lower_bound == doctest::Approx(best).epsilon(1e-12));
  const auto lba = lba_solve(prob);
  REQUIRE(lba.feasible());
  CHECK(lba.sum_et_lower_bound <= best + 1e-9);
  CHECK(lba.sum_et_lower_bound >= 0.95 * best);

  // With imperfect CSI the residual b p limits the private SINR.
  in = make_instance(1, 1, 4, 2, 0.05);
  const auto p2 = problem_of(in, TransmissionMode::sdma);
  const auto& l2 = p2.links[0];
  const double g2 = pmax * l2.rho_private(0, 0) / (l2.b(0) * pmax + l2.c);
  CHECK(cccp_allocate(p2).sum_et_lower_bound == doctest::Approx((1 - 2e-5) * fbl::fbl_rate({g2, n, 1e-5})).epsilon(1e-4));
}

TEST_CASE("brute force grids nest") {
  const auto in = make_instance(2, 1, 4, 3);
  for (auto mode : {TransmissionMode::rsma, TransmissionMode::sdma}) {
    const auto prob = problem_of(in, mode);
    const double coarse = brute_force_allocate(prob, 10).sum_et_lower_bound;
    const double fine = brute_force_allocate(prob, 30).sum_et_lower_bound;
    CHECK(fine >= coarse);
    const auto s = brute_force_allocate(prob, 30);
    REQUIRE(s.feasible());
    CHECK(check_constraints(s, prob).ok());
  }
  const auto big = make_instance(4, 1, 4, 3);
  CHECK_THROWS_AS(brute_force_allocate(problem_of(big), 5), std::invalid_argument);
}

TEST_CASE("solvers against the grid oracle on two users") {
  for (std::uint64_t t = 0; t < 3; ++t) {
    const auto in = make_instance(2, 1, 4, 100 + t);
    const auto prob = problem_of(in);
    const auto oracle = brute_force_allocate(prob, 40);
    const auto cccp = cccp_allocate(prob);
    const auto lba = lba_solve(prob);
    INFO("trial " << t << " oracle " << oracle.sum_et_lower_bound << " cccp " << cccp.sum_et_lower_bound
                  << " lba " << lba.sum_et_lower_bound);
    REQUIRE(oracle.feasible());
    REQUIRE(cccp.feasible());
    REQUIRE(lba.feasible());
    CHECK(cccp.sum_et_lower_bound >= 0.95 * oracle.sum_et_lower_bound);
    CHECK(lba.sum_et_lower_bound >= 0.92 * oracle.sum_et_lower_bound);
    CHECK(trace_monotone(cccp.solver_trace));
  }
}

TEST_CASE("returned allocations pass the exact re-check") {
  int checked = 0;
  for (std::uint64_t t = 0; t < 4; ++t) {
    const auto in = make_instance(5, 2, 8, 200 + t);
    for (auto mode : {TransmissionMode::rsma, TransmissionMode::sdma}) {
      const auto prob = problem_of(in, mode);
      for (const auto& s : {cccp_allocate(prob), lba_solve(prob)}) {
        if (!s.feasible()) continue;
        const auto rep = check_constraints(s, prob);
        const std::string first = rep.details.empty() ? std::string() : rep.details.front();
        INFO(first);
        CHECK(rep.ok());
        CHECK(s.sum_et_exact >= s.sum_et_lower_bound);
        ++checked;
      }
    }
  }
  CHECK(checked >= 12);
}

TEST_CASE("cccp trace on the default configuration") {
  const auto in = make_instance(8, 3, 32, 0);
  for (auto mode : {TransmissionMode::rsma, TransmissionMode::sdma}) {
    const auto prob = problem_of(in, mode);
    const auto s = cccp_allocate(prob);
    REQUIRE(s.feasible());
    CHECK(s.message.empty());
    CHECK(trace_monotone(s.solver_trace));
    REQUIRE(s.solver_trace.size() >= 2);
    CHECK(std::abs(s.solver_trace.back() - s.solver_trace[s.solver_trace.size() - 2]) <= 1e-4);
    CHECK(s.iterations <= 50);
    CHECK(s.subcarrier_budgets.sum() <= in.config.max_total_power_w() * (1 + 1e-9));
    CHECK(check_constraints(s, prob).ok());
  }
}

TEST_CASE("rsma started from the sdma optimum keeps its value") {
  const auto in = make_instance(4, 1, 4, 7);
  const auto sdma = cccp_allocate(problem_of(in, TransmissionMode::sdma));
  REQUIRE(sdma.feasible());
  const auto rsma = cccp_solve(problem_of(in, TransmissionMode::rsma), sdma);
  REQUIRE(rsma.feasible());
  CHECK(rsma.sum_et_lower_bound >= sdma.sum_et_lower_bound - 1e-6);
}

TEST_CASE("equal split budgets") {
  const auto in = make_instance(4, 2, 8, 11);
  const auto eq = cccp_allocate(problem_of(in, TransmissionMode::rsma, BudgetMode::equal_split));
  const auto joint = cccp_allocate(problem_of(in, TransmissionMode::rsma, BudgetMode::joint));
  REQUIRE(eq.feasible());
  REQUIRE(joint.feasible());
  for (int j = 0; j < 2; ++j) {
    CHECK(eq.private_power[j].sum() + eq.common_power(j) <= 0.5 * (1 + 1e-9));
  }
  CHECK(joint.sum_et_lower_bound >= eq.sum_et_lower_bound - 1e-3);
}

TEST_CASE("lba is close to cccp with perfect csi and many antennas") {
  const auto in = make_instance(3, 1, 32, 4, 0.0);
  const auto prob = problem_of(in, TransmissionMode::rsma, BudgetMode::equal_split);
  const auto lba = lba_solve(prob);
  const auto cccp = cccp_allocate(prob);
  REQUIRE(lba.feasible());
  REQUIRE(cccp.feasible());
  CHECK(lba.sum_et_lower_bound >= 0.95 * cccp.sum_et_lower_bound);
}

TEST_CASE("feasibility check") {
  auto in = make_instance(3, 1, 8, 6);
  const auto fc = feasibility_check(problem_of(in));
  CHECK(fc.feasible);
  CHECK(fc.r_star >= in.config.min_rate_bps_hz);
  CHECK(check_constraints(fc.point, problem_of(in)).ok());

  in.config.max_total_power_dbm = -60.0;
  const auto low = feasibility_check(problem_of(in));
  CHECK_FALSE(low.feasible);
  CHECK(low.r_star < in.config.min_rate_bps_hz);
  const auto s = cccp_allocate(problem_of(in));
  CHECK(s.status == AllocationStatus::infeasible);
  CHECK(s.sum_et_lower_bound == 0.0);
  CHECK(exact_et(s, problem_of(in)) == 0.0);

  // Single user with perfect CSI: r* grows with the power.
  auto one = make_instance(1, 1, 4, 6, 0.0);
  double prev = -INFINITY;
  for (double dbm : {0.0, 10.0, 20.0}) {
    one.config.max_total_power_dbm = dbm;
    const double r = feasibility_check(problem_of(one)).r_star;
    CHECK(r > prev);
    prev = r;
  }
}

TEST_CASE("feasibility on the default configuration") {
  int feasible = 0;
  const int trials = 20;
  for (int t = 0; t < trials; ++t) feasible += feasibility_check(problem_of(make_instance(8, 3, 32, t))).feasible;
  CHECK(feasible >= 19);
}

TEST_CASE("exact throughput against the bound") {
  const auto in = make_instance(3, 1, 8, 9);
  const auto prob = problem_of(in);
  const auto s = cccp_allocate(prob);
  REQUIRE(s.feasible());
  CHECK(exact_et(s, prob) == doctest::Approx(s.sum_et_exact));
  CHECK(s.sum_et_exact >= s.sum_et_lower_bound);
  double rates = 0.0;
  for (int j = 0; j < prob.num_groups(); ++j) rates += s.common_rate_shares[j].sum() + s.private_rates[j].sum();
  CHECK(s.sum_et_exact - s.sum_et_lower_bound <= 2.0 * rates * in.config.error_threshold + 1e-12);
  CHECK(lower_bound_objective(s, in.config.error_threshold) == doctest::Approx(s.sum_et_lower_bound));
  CHECK(exact_et(empty_solution(prob, AllocationStatus::feasible), prob) == 0.0);
}

TEST_CASE("solvers refuse a loose error target") {
  auto in = make_instance(2, 1, 4, 1);
  in.config.error_threshold = 1e-3;
  CHECK_THROWS_AS(cccp_allocate(problem_of(in)), std::invalid_argument);
  CHECK_THROWS_AS(lba_solve(problem_of(in)), std::invalid_argument);
}

TEST_CASE("allocation json round trip") {
  const auto in = make_instance(4, 2, 8, 3);
  const auto s = cccp_allocate(problem_of(in));
  const auto back = solution_from_json(nlohmann::json::parse(to_json(s).dump()));
  CHECK(back.status == s.status);
  CHECK(back.common_power == s.common_power);
  CHECK(back.subcarrier_budgets == s.subcarrier_budgets);
  CHECK(back.common_stream_rate == s.common_stream_rate);
  for (int j = 0; j < 2; ++j) {
    CHECK(back.private_power[j] == s.private_power[j]);
    CHECK(back.private_rates[j] == s.private_rates[j]);
    CHECK(back.common_rate_shares[j] == s.common_rate_shares[j]);
  }
  CHECK(back.sum_et_lower_bound == s.sum_et_lower_bound);
  CHECK(back.sum_et_exact == s.sum_et_exact);
  CHECK(back.solver_trace == s.solver_trace);
  CHECK(back.iterations == s.iterations);
  CHECK(back.message == s.message);
}

#include "doctest.h"
#include "rsma/harness.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

using namespace rsma;

namespace {

ScenarioConfig small_config() {
  ScenarioConfig c;
  c.num_users = 4;
  c.num_subcarriers = 2;
  c.num_antennas = 8;
  return c;
}

SweepSpec small_sweep(int trials) {
  SweepSpec s;
  s.parameter = SweptParameter::P_max;
  s.values = {20.0, 30.0};
  s.methods = {parse_method("heuristic-lba-rsma"), parse_method("random-lba-sdma")};
  s.trials = trials;
  s.master_seed = 17;
  return s;
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::filesystem::path temp_dir(const std::string& name) {
  auto d = std::filesystem::temp_directory_path() / ("rsma_test_" + name);
  std::filesystem::remove_all(d);
  return d;
}

}  // namespace

TEST_CASE("method ids") {
  for (const char* id : {"greedy-cccp-rsma", "greedy_cccp-lba-sdma", "heuristic-lba-rsma", "random-cccp-sdma",
                         "exhaustive-lba-rsma", "exhaustive_cccp-cccp-rsma"}) {
    CHECK(parse_method(id).id() == id);
  }
  CHECK(parse_method("greedy_lba-cccp-rsma").id() == "greedy-cccp-rsma");
  const auto m = parse_method("greedy_cccp-lba-sdma");
  CHECK(m.grouping == GroupingMethod::greedy);
  CHECK(m.evaluator == Evaluator::cccp);
  CHECK(m.solver == SolverKind::lba);
  CHECK(m.mode == TransmissionMode::sdma);
  CHECK_THROWS_AS(parse_method("greedy-cccp"), std::invalid_argument);
  CHECK_THROWS_AS(parse_method("best-cccp-rsma"), std::invalid_argument);
  CHECK_THROWS_AS(parse_method("greedy-ipm-rsma"), std::invalid_argument);
  CHECK_THROWS_AS(parse_method("greedy-cccp-noma"), std::invalid_argument);
}

TEST_CASE("swept parameters") {
  const ScenarioConfig c;
  CHECK(apply_parameter(c, SweptParameter::P_max, 24.0).max_total_power_dbm == 24.0);
  CHECK(apply_parameter(c, SweptParameter::K, 12).num_users == 12);
  CHECK(apply_parameter(c, SweptParameter::M_t, 16).num_antennas == 16);
  CHECK(apply_parameter(c, SweptParameter::sigma_e2, 0.2).estimation_error_var == 0.2);
  CHECK(apply_parameter(c, SweptParameter::N_th, 600).total_blocklength == 600);
  CHECK(apply_parameter(c, SweptParameter::J, 4).num_subcarriers == 4);
  CHECK_THROWS_AS(apply_parameter(c, SweptParameter::K, 2.5), std::invalid_argument);
  CHECK_THROWS_AS(apply_parameter(c, SweptParameter::sigma_e2, 2.0), std::invalid_argument);
  for (auto p : {SweptParameter::P_max, SweptParameter::K, SweptParameter::M_t, SweptParameter::sigma_e2,
                 SweptParameter::N_th, SweptParameter::J}) {
    CHECK(parse_parameter(to_string(p)) == p);
  }
  CHECK_THROWS_AS(parse_parameter("power"), std::invalid_argument);
}

TEST_CASE("sweep spec validation and json") {
  auto s = small_sweep(5);
  CHECK_NOTHROW(s.validate());
  const auto back = sweep_from_json(nlohmann::json::parse(to_json(s).dump()));
  CHECK(back.parameter == s.parameter);
  CHECK(back.values == s.values);
  CHECK(back.methods == s.methods);
  CHECK(back.trials == 5);
  CHECK(back.master_seed == 17);

  auto bad = s;
  bad.values = {};
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad.values = {20.0, 30.0, 25.0};
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad.values = {20.0, 20.0};
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad.values = {0.2, 0.1, 0.02};
  CHECK_NOTHROW(bad.validate());
  bad.trials = 0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

  auto j = to_json(s);
  j["extra"] = 1;
  CHECK_THROWS_AS(sweep_from_json(j), std::invalid_argument);
  CHECK_THROWS_AS(sweep_from_json(nlohmann::json{{"parameter", "K"}}), std::invalid_argument);
  const auto minimal = sweep_from_json(nlohmann::json{{"parameter", "J"}, {"values", {1, 2}}, {"methods", {}}});
  CHECK(minimal.trials == 100);
  CHECK(minimal.methods.empty());
}

TEST_CASE("trials are deterministic") {
  const auto c = small_config();
  for (const char* id : {"heuristic-lba-rsma", "random-cccp-sdma", "greedy-lba-rsma"}) {
    const auto m = parse_method(id);
    const auto a = run_trial(c, m, 3);
    const auto b = run_trial(c, m, 3);
    CHECK(a.grouping == b.grouping);
    CHECK(a.status == b.status);
    CHECK(a.sum_et == b.sum_et);
    CHECK(a.sum_et_bound == b.sum_et_bound);
    CHECK(a.iterations == b.iterations);
    CHECK(a.grouping.is_partition(4));
  }
  // Distinct trials see distinct channels.
  CHECK(trial_realization(c, 0).est_small_scale != trial_realization(c, 1).est_small_scale);
  auto fixed = c;
  fixed.resample_positions = false;
  CHECK(trial_realization(fixed, 0).distances_m == trial_realization(fixed, 5).distances_m);
}

TEST_CASE("rsma is not below sdma on the same realization") {
  const auto c = small_config();
  for (std::uint64_t t = 0; t < 3; ++t) {
    const auto r = run_trial(c, parse_method("heuristic-cccp-rsma"), t);
    const auto s = run_trial(c, parse_method("heuristic-cccp-sdma"), t);
    CHECK(r.grouping == s.grouping);
    CHECK(r.sum_et_bound >= s.sum_et_bound - 1e-6);
  }
}

TEST_CASE("no power means no throughput") {
  auto c = small_config();
  c.max_total_power_dbm = -150.0;
  for (const char* id : {"heuristic-cccp-rsma", "random-lba-sdma"}) {
    const auto r = run_trial(c, parse_method(id), 0);
    CHECK(r.sum_et == 0.0);
    CHECK(r.status == AllocationStatus::infeasible);
    CHECK_FALSE(r.failed());
  }
}

TEST_CASE("aggregation") {
  std::vector<TrialRecord> recs(4);
  const double et[] = {1.0, 2.0, 0.0, 5.0};
  for (int i = 0; i < 4; ++i) {
    recs[i].sum_et = et[i];
    recs[i].status = AllocationStatus::feasible;
    recs[i].iterations = i;
  }
  recs[2].status = AllocationStatus::infeasible;
  const auto p = aggregate(3.0, "m", recs);
  CHECK(p.mean == doctest::Approx(2.0));
  // Sample variance of {1,2,0,5} is 14/3.
  CHECK(p.stderr_mean == doctest::Approx(std::sqrt(14.0 / 3.0 / 4.0)));
  CHECK(p.n_infeasible == 1);
  CHECK(p.n_fail == 0);
  CHECK(p.mean_iterations == doctest::Approx(1.5));
  recs[3].status = AllocationStatus::solver_failure;
  CHECK(aggregate(3.0, "m", recs).n_fail == 1);
  CHECK(aggregate(1.0, "m", {}).mean == 0.0);
}

TEST_CASE("csv format") {
  CHECK(to_csv({}) == "value,method,mean,stderr,n_infeasible,n_fail\n");
  PointStats p;
  p.value = 0.1;
  p.method = "heuristic-lba-rsma";
  p.mean = 1.0 / 3.0;
  p.stderr_mean = 2e-17;
  p.n_infeasible = 2;
  p.n_fail = 1;
  const auto text = to_csv({p, p});
  const auto back = parse_csv(text);
  REQUIRE(back.size() == 2);
  CHECK(back[0].value == p.value);
  CHECK(back[0].mean == p.mean);
  CHECK(back[0].stderr_mean == p.stderr_mean);
  CHECK(back[0].method == p.method);
  CHECK(back[0].n_infeasible == 2);
  CHECK(back[0].n_fail == 1);
  CHECK(text.find("0.1,heuristic-lba-rsma,") != std::string::npos);
  CHECK_THROWS_AS(parse_csv("a,b\n"), std::invalid_argument);
  CHECK_THROWS_AS(parse_csv(to_csv({}) + "1,m,x,0,0,0\n"), std::invalid_argument);
}

TEST_CASE("sign test") {
  const std::vector<double> a{1, 1, 1, 1, 1, 1, 1, 1, 1, 0, 5};
  const std::vector<double> b{0, 0, 0, 0, 0, 0, 0, 0, 0, 1, 5};
  // 9 wins of 10 untied pairs: (C(10,9) + C(10,10)) / 2^10.
  CHECK(sign_test_p_value(a, b) == doctest::Approx(11.0 / 1024.0).epsilon(1e-12));
  CHECK(sign_test_p_value(b, a) == doctest::Approx(1.0 - 1.0 / 1024.0).epsilon(1e-12));
  CHECK(sign_test_p_value({1, 2}, {1, 2}) == 1.0);
  CHECK_THROWS_AS(sign_test_p_value({1}, {1, 2}), std::invalid_argument);
}

TEST_CASE("sweep outputs are reproducible and thread independent") {
  const auto c = small_config();
  const auto spec = small_sweep(4);
  const auto r1 = run_sweep(c, spec, 1);
  const auto r2 = run_sweep(c, spec, 3);
  REQUIRE(r1.points.size() == 4);
  CHECK(to_csv(r1.points) == to_csv(r2.points));
  CHECK(r1.total_failures() == 0);

  // Aggregates do not depend on trial order.
  auto reversed = r1.records[1][0];
  std::reverse(reversed.begin(), reversed.end());
  const auto pr = aggregate(30.0, "x", reversed), pf = aggregate(30.0, "x", r1.records[1][0]);
  CHECK(pr.mean == doctest::Approx(pf.mean).epsilon(1e-15));
  CHECK(pr.stderr_mean == doctest::Approx(pf.stderr_mean).epsilon(1e-12));

  // The sweep seed replaces the config seed, and every method sees the same channel.
  CHECK(r1.records[0][0][2].trial == 2);
  auto seeded = apply_parameter(c, SweptParameter::P_max, 20.0);
  seeded.master_seed = 17;
  CHECK(run_trial(seeded, spec.methods[0], 2).sum_et == r1.records[0][0][2].sum_et);

  const auto d1 = temp_dir("a"), d2 = temp_dir("b");
  emit_outputs(r1, d1);
  emit_outputs(run_sweep(c, spec, 1), d2);
  for (const char* f : {"P_max.csv", "P_max.svg", "P_max_trials.csv"}) {
    CHECK(read_file(d1 / f) == read_file(d2 / f));
    CHECK_FALSE(read_file(d1 / f).empty());
  }
  CHECK(std::filesystem::exists(d1 / "P_max_timing.csv"));
  const auto back = parse_csv(read_file(d1 / "P_max.csv"));
  REQUIRE(back.size() == r1.points.size());
  for (std::size_t i = 0; i < back.size(); ++i) CHECK(back[i].mean == r1.points[i].mean);
  const auto svg = read_file(d1 / "P_max.svg");
  CHECK(svg.rfind("<svg", 0) == 0);
  CHECK(svg.find("heuristic-lba-rsma") != std::string::npos);

  // Power helps both methods.
  CHECK(r1.points[2].mean > r1.points[0].mean);
  CHECK(r1.points[3].mean > r1.points[1].mean);
  std::filesystem::remove_all(d1);
  std::filesystem::remove_all(d2);
}

TEST_CASE("empty methods give a header-only csv") {
  auto spec = small_sweep(1);
  spec.methods.clear();
  const auto r = run_sweep(small_config(), spec);
  CHECK(to_csv(r.points) == "value,method,mean,stderr,n_infeasible,n_fail\n");
  const auto d = temp_dir("empty");
  emit_outputs(r, d);
  CHECK(read_file(d / "P_max.csv") == "value,method,mean,stderr,n_infeasible,n_fail\n");
  std::filesystem::remove_all(d);
}

TEST_CASE("unwritable output directory") {
  const auto d = temp_dir("file");
  { std::ofstream(d.string()) << "x"; }
  const auto r = run_sweep(small_config(), small_sweep(1));
  CHECK_THROWS_AS(emit_outputs(r, d / "sub"), std::runtime_error);
  std::filesystem::remove_all(d);
}

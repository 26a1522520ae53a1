// Command-line front end: parameter sweeps, the throughput-bound check and
// grid-oracle comparisons.

#include "rsma/allocation.hpp"
#include "rsma/fbl.hpp"
#include "rsma/harness.hpp"

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

using namespace rsma;

namespace {

int cmd_run(const std::string& config_path, const std::string& sweep_path, const std::string& out_dir,
            int trials, std::int64_t seed, const std::vector<std::string>& methods, int threads) {
  const ScenarioConfig config = load_config(config_path);
  for (const auto& w : config.validate()) std::cerr << "warning: " << w << "\n";
  SweepSpec spec = load_sweep(sweep_path);
  if (trials > 0) spec.trials = trials;
  if (seed >= 0) spec.master_seed = static_cast<std::uint64_t>(seed);
  if (!methods.empty()) {
    spec.methods.clear();
    for (const auto& m : methods) spec.methods.push_back(parse_method(m));
  }
  spec.validate();
  const auto result =
      run_sweep(config, spec, threads, [](const std::string& msg) { std::cerr << msg << "\n"; });
  emit_outputs(result, out_dir);
  std::cout << to_csv(result.points);
  const int failures = result.total_failures();
  if (failures > 0) {
    std::cerr << failures << " trial(s) failed; see " << to_string(spec.parameter) << "_trials.csv\n";
    return 1;
  }
  return 0;
}

int cmd_validate_lemma1(const std::string& config_path) {
  const ScenarioConfig config = load_config(config_path);
  fbl::Lemma1Grid grid;
  grid.gammas = {0.1, 1.0, 10.0, 100.0, 1000.0};
  grid.error_targets = {config.error_threshold};
  grid.blocklengths = {static_cast<double>(config.blocklength_per_subcarrier())};
  const auto report = fbl::validate_lemma1(grid);
  std::printf("points checked %d, vacuous %d, max tightness gap %.3e (%.3f of R*eps)\n", report.points_checked,
              report.points_vacuous, report.max_tightness_gap, report.max_relative_gap);
  for (const auto& v : report.violations) {
    std::printf("violation: gamma=%g eps=%g N=%g: %s\n", v.gamma, v.error_target, v.blocklength, v.what.c_str());
  }
  std::printf("%s\n", report.passed() ? "PASS" : "FAIL");
  return report.passed() ? 0 : 1;
}

int cmd_oracle(int grid, const std::string& config_path, int instances, int users, int antennas) {
  ScenarioConfig config = config_path.empty() ? ScenarioConfig{} : load_config(config_path);
  config.num_users = users;
  config.num_subcarriers = 1;
  config.num_antennas = antennas;
  config.validate();
  std::vector<std::vector<int>> groups(1);
  for (int k = 0; k < users; ++k) groups[0].push_back(k);
  int failures = 0;
  std::printf("%-6s %-12s %12s %12s %12s %9s %9s\n", "trial", "status", "oracle", "cccp", "lba", "cccp/or", "lba/or");
  for (int t = 0; t < instances; ++t) {
    const auto r = trial_realization(config, static_cast<std::uint64_t>(t));
    const auto joint = make_problem(r, groups, config, TransmissionMode::rsma, BudgetMode::joint);
    const auto bf = brute_force_allocate(joint, grid);
    const auto cc = cccp_allocate(joint);
    const auto lb = lba_solve(make_problem(r, groups, config, TransmissionMode::rsma, BudgetMode::equal_split));
    for (const auto* s : {&cc, &lb}) failures += s->status == AllocationStatus::solver_failure;
    const double o = bf.sum_et_lower_bound;
    std::printf("%-6d %-12s %12.6f %12.6f %12.6f %9.4f %9.4f\n", t, to_string(cc.status).c_str(), o,
                cc.sum_et_lower_bound, lb.sum_et_lower_bound, o > 0 ? cc.sum_et_lower_bound / o : 0.0,
                o > 0 ? lb.sum_et_lower_bound / o : 0.0);
  }
  return failures > 0 ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-carrier RSMA URLLC simulator"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "Monte-Carlo sweep over one scenario parameter");
  std::string config_path, sweep_path, out_dir;
  int trials = 0, threads = 1;
  std::int64_t seed = -1;
  std::vector<std::string> methods;
  run->add_option("--config", config_path, "scenario JSON")->required()->check(CLI::ExistingFile);
  run->add_option("--sweep", sweep_path, "sweep JSON")->required()->check(CLI::ExistingFile);
  run->add_option("--out", out_dir, "output directory")->required();
  run->add_option("--trials", trials, "override the trial count")->check(CLI::PositiveNumber);
  run->add_option("--seed", seed, "override the master seed")->check(CLI::NonNegativeNumber);
  run->add_option("--methods", methods, "method ids such as greedy-cccp-rsma");
  run->add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);

  auto* lemma = app.add_subcommand("validate-lemma1", "check the throughput lower bound numerically");
  std::string lemma_config;
  lemma->add_option("--config", lemma_config, "scenario JSON")->required()->check(CLI::ExistingFile);

  auto* oracle = app.add_subcommand("oracle", "compare CCCP and LBA with the power-grid oracle");
  int grid = 60, instances = 10, users = 2, antennas = 4;
  std::string oracle_config;
  oracle->add_option("--grid", grid, "grid points per power dimension")->required()->check(CLI::PositiveNumber);
  oracle->add_option("--config", oracle_config, "scenario JSON (user, subcarrier and antenna counts overridden)")
      ->check(CLI::ExistingFile);
  oracle->add_option("--instances", instances, "number of seeded instances")->check(CLI::PositiveNumber);
  oracle->add_option("--users", users, "users in the single group (1 to 3)")->check(CLI::Range(1, 3));
  oracle->add_option("--antennas", antennas, "transmit antennas")->check(CLI::PositiveNumber);

  CLI11_PARSE(app, argc, argv);
  try {
    if (*run) return cmd_run(config_path, sweep_path, out_dir, trials, seed, methods, threads);
    if (*lemma) return cmd_validate_lemma1(lemma_config);
    if (*oracle) return cmd_oracle(grid, oracle_config, instances, users, antennas);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

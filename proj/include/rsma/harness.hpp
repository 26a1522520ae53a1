#pragma once

// Monte-Carlo driver: per-trial realization, grouping and allocation, sweeps
// over one scenario parameter, and CSV/SVG output.

#include "rsma/allocation.hpp"
#include "rsma/grouping.hpp"
#include "rsma/scenario.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "json.hpp"

namespace rsma {

enum class GroupingMethod { greedy, heuristic, random, exhaustive };
enum class SolverKind { cccp, lba };

/// One (grouping, solver, mode) combination. Ids look like
/// "greedy-cccp-rsma"; greedy and exhaustive take an evaluator suffix on the
/// grouping token ("greedy_cccp"), LBA being the default.
struct Method {
  GroupingMethod grouping = GroupingMethod::greedy;
  Evaluator evaluator = Evaluator::lba;
  SolverKind solver = SolverKind::cccp;
  TransmissionMode mode = TransmissionMode::rsma;

  std::string id() const;
  bool operator==(const Method&) const = default;
};

/// Throws std::invalid_argument on an unknown id.
Method parse_method(const std::string& id);

enum class SweptParameter { P_max, K, M_t, sigma_e2, N_th, J };
std::string to_string(SweptParameter p);
SweptParameter parse_parameter(const std::string& name);

/// Copy of the config with one parameter replaced. Integer parameters must
/// receive integral values.
ScenarioConfig apply_parameter(const ScenarioConfig& config, SweptParameter p, double value);

struct SweepSpec {
  SweptParameter parameter = SweptParameter::P_max;
  std::vector<double> values;
  std::vector<Method> methods;
  int trials = 100;
  std::uint64_t master_seed = 1;

  /// Throws unless values are nonempty and strictly monotone and trials >= 1.
  void validate() const;
};

nlohmann::json to_json(const SweepSpec& spec);
/// Strict parse; "trials" and "master_seed" are optional.
SweepSpec sweep_from_json(const nlohmann::json& j);
SweepSpec load_sweep(const std::string& path);

/// Positions, channels and random grouping draw from separate streams of
/// (master_seed, trial), so every method sees the same realization.
ChannelRealization trial_realization(const ScenarioConfig& config, std::uint64_t trial_index);

GroupAssignment make_grouping(const ChannelRealization& realization, const ScenarioConfig& config,
                              const Method& method, std::uint64_t trial_index);

struct TrialRecord {
  std::uint64_t trial = 0;
  GroupAssignment grouping;
  AllocationStatus status = AllocationStatus::infeasible;
  double sum_et = 0.0;        // exact; 0 unless feasible
  double sum_et_bound = 0.0;  // fixed-threshold bound
  int iterations = 0;
  double wall_seconds = 0.0;
  std::string message;

  bool failed() const { return status == AllocationStatus::solver_failure; }
};

/// Realization, grouping and allocation for one trial. Deterministic in
/// (config, method, trial_index) apart from the wall time.
TrialRecord run_trial(const ScenarioConfig& config, const Method& method, std::uint64_t trial_index);

struct PointStats {
  double value = 0.0;
  std::string method;
  double mean = 0.0;
  double stderr_mean = 0.0;
  int n_infeasible = 0;
  int n_fail = 0;
  int n = 0;
  double mean_iterations = 0.0;
  double mean_wall_seconds = 0.0;
};

/// Mean and standard error with infeasible and failed trials counted as 0.
PointStats aggregate(double value, const std::string& method, const std::vector<TrialRecord>& records);

struct SweepResult {
  SweepSpec spec;
  std::vector<PointStats> points;  // value-major, methods in spec order
  // records[v][m][t] for value v, method m, trial t.
  std::vector<std::vector<std::vector<TrialRecord>>> records;

  int total_failures() const;
};

using ProgressFn = std::function<void(const std::string&)>;

/// Full factorial over values x methods x trials. Trials run on `threads`
/// workers; results are identical for any thread count.
SweepResult run_sweep(const ScenarioConfig& base, const SweepSpec& spec, int threads = 1,
                      const ProgressFn& progress = {});

/// Columns: value,method,mean,stderr,n_infeasible,n_fail. Doubles use the
/// shortest representation that round-trips.
std::string to_csv(const std::vector<PointStats>& points);
std::vector<PointStats> parse_csv(const std::string& text);

/// Line chart of mean against the swept value, one line per method.
std::string render_svg(const SweepResult& result);

/// Writes <param>.csv, <param>.svg, <param>_trials.csv and <param>_timing.csv
/// into out_dir (created if needed). Only the timing file depends on the
/// clock. Throws std::runtime_error when a file cannot be written.
void emit_outputs(const SweepResult& result, const std::filesystem::path& out_dir);

/// Exact-binomial one-sided sign test on paired differences a - b; ties are
/// dropped. Returns the p-value of "a > b".
double sign_test_p_value(const std::vector<double>& a, const std::vector<double>& b,
                         double tie_tol = 1e-9);

}  // namespace rsma

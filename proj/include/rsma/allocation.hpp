#pragma once

// Joint power allocation and rate control for a fixed grouping: exact SINR
// and throughput evaluation, the max-min feasibility check, the iterative
// CCCP solver, the single-shot LBA solver and a grid-search oracle.

#include "rsma/conic.hpp"
#include "rsma/precoding.hpp"
#include "rsma/scenario.hpp"

#include <Eigen/Dense>

#include <string>
#include <vector>

#include "json.hpp"

namespace rsma {

enum class TransmissionMode { rsma, sdma };
enum class BudgetMode { joint, equal_split };

std::string to_string(TransmissionMode mode);
std::string to_string(BudgetMode mode);

struct AllocationProblem {
  std::vector<std::vector<int>> groups;     // J groups of global user indices
  std::vector<LinkCoefficients> links;      // one per group, same order
  ScenarioConfig config;
  TransmissionMode mode = TransmissionMode::rsma;
  BudgetMode budget = BudgetMode::joint;

  int num_groups() const { return static_cast<int>(groups.size()); }
  /// Throws std::invalid_argument unless groups form a partition of the users
  /// and links match the groups.
  void validate() const;
};

/// Builds precoders and coefficients for every group.
AllocationProblem make_problem(const ChannelRealization& realization,
                               const std::vector<std::vector<int>>& groups,
                               const ScenarioConfig& config, TransmissionMode mode,
                               BudgetMode budget);

enum class AllocationStatus { feasible, infeasible, solver_failure };
std::string to_string(AllocationStatus status);

/// Powers in watts, rates in bits/s/Hz. Per-group vectors follow group order.
struct AllocationSolution {
  AllocationStatus status = AllocationStatus::infeasible;
  Eigen::VectorXd common_power;         // p_{j,c}
  std::vector<Eigen::VectorXd> private_power;  // p_{j,k}
  Eigen::VectorXd subcarrier_budgets;   // p_{j,max}
  Eigen::VectorXd common_stream_rate;   // R_{j,c}
  std::vector<Eigen::VectorXd> common_rate_shares;  // R_{j,k,c}
  std::vector<Eigen::VectorXd> private_rates;       // R_{j,k,p}
  double sum_et_lower_bound = 0.0;      // fixed-threshold bound of the total
  double sum_et_exact = 0.0;            // exact error probabilities
  std::vector<double> solver_trace;     // bound per iteration
  int iterations = 0;
  std::string message;

  bool feasible() const { return status == AllocationStatus::feasible; }
};

/// Allocation with every entry zero and the given status.
AllocationSolution empty_solution(const AllocationProblem& problem, AllocationStatus status);

// ---- exact link quantities -------------------------------------------------

/// gamma_c per user of the group.
Eigen::VectorXd sinr_common(const LinkCoefficients& links, const Eigen::VectorXd& private_power,
                            double common_power);
/// gamma_p per user; includes the residual b (p_k + p_c) of imperfect SIC.
Eigen::VectorXd sinr_private(const LinkCoefficients& links, const Eigen::VectorXd& private_power,
                             double common_power);

/// Fixed-threshold bound (1 - eps) sum R_kc + (1 - 2 eps) sum R_kp over all
/// groups. In SDMA mode the private weight is also (1 - 2 eps).
double lower_bound_objective(const AllocationSolution& solution, double error_threshold);

/// Total effective throughput with exact decoding errors recomputed from the
/// powers. Infeasible solutions score 0.
double exact_et(const AllocationSolution& solution, const AllocationProblem& problem);

struct ConstraintReport {
  int violations = 0;
  std::vector<std::string> details;
  bool ok() const { return violations == 0; }
};

/// Re-checks rate splitting, rate floors, budgets, signs and the decoding
/// error targets with exact error probabilities (relative slack eps_rel on the
/// error target).
ConstraintReport check_constraints(const AllocationSolution& solution,
                                   const AllocationProblem& problem, double eps_rel = 1e-6);

// ---- convex restrictions used by CCCP ----------------------------------------

/// Tangent of sqrt(V) at gamma0 > 0, evaluated at gamma. Never below sqrt(V(gamma)).
double sqrt_dispersion_tangent(double gamma, double gamma0);
/// Slope of sqrt(V) at gamma > 0: (1 + gamma)^-3 / sqrt(V(gamma)).
double sqrt_dispersion_slope(double gamma);
/// -(x0 - y0)^2 + 2 (x0 - y0)(x - y), the tangent of (x - y)^2. Never above it.
double square_difference_tangent(double x, double y, double x0, double y0);

// ---- solvers ---------------------------------------------------------------

struct FeasibilityResult {
  double r_star = 0.0;           // max-min total user rate; -inf if the program failed
  bool feasible = false;         // r_star >= R_min
  AllocationSolution point;      // maximizer, valid start point when feasible
  conic::SolveStatus solver_status = conic::SolveStatus::numerical_failure;
};

/// Max-min rate program over the LBA constraint set with equal budgets.
FeasibilityResult feasibility_check(const AllocationProblem& problem);

struct CccpSettings {
  double tol = 1e-4;
  int max_iters = 50;
  conic::SolverSettings solver;
  // RSMA only: also solve the SDMA problem, continue from its optimum and
  // keep the better of the two runs.
  bool sdma_fallback = true;
};

/// Concave-convex procedure from a feasible starting allocation.
AllocationSolution cccp_solve(const AllocationProblem& problem, const AllocationSolution& init,
                              const CccpSettings& settings = {});

/// Feasibility check followed by CCCP when feasible. Iterations count every
/// CCCP run made.
AllocationSolution cccp_allocate(const AllocationProblem& problem, const CccpSettings& settings = {});

/// Single conic solve of the lower-bound approximation (equal budgets).
AllocationSolution lba_solve(const AllocationProblem& problem,
                             const conic::SolverSettings& settings = {});

/// Exhaustive power grid for one group of at most three users; levels are
/// P_max * i / grid for i = 0..grid so refinements by integer factors nest.
AllocationSolution brute_force_allocate(const AllocationProblem& problem, int grid_points_per_dim);

nlohmann::json to_json(const AllocationSolution& solution);
AllocationSolution solution_from_json(const nlohmann::json& j);

}  // namespace rsma

#pragma once

// Pieces shared by the allocation solvers.

#include "rsma/allocation.hpp"

namespace rsma::detail {

// Rate floors are built with this much headroom so that the exact re-check
// survives solver round-off.
inline constexpr double kRateMargin = 1e-7;

// Powers are normalized by P_max and gains by noise / P_max, leaving every
// SINR unchanged:  p^ = p / P,  rho^ = rho P / sigma^2,  noise^ = 1.
struct Normalized {
  double power_scale = 1.0;  // P_max in watts
  Eigen::VectorXd rho_common;
  Eigen::MatrixXd rho_private;
  Eigen::MatrixXd a;
  Eigen::VectorXd b;
};

Normalized normalize(const LinkCoefficients& links, const ScenarioConfig& config);

/// Throws unless the error target satisfies the fixed-threshold bound precondition.
void require_bound_precondition(const ScenarioConfig& config);

/// Clips and rescales powers onto the budgets, recomputes exact SINRs, clamps
/// every rate to its exact achievable value, switches off idle streams, moves
/// spare common rate to users below the floor and fills in both objective
/// values. Sets status to feasible, or solver_failure if a floor is missed.
void finalize(AllocationSolution& solution, const AllocationProblem& problem);

/// Smallest R_kc + R_kp - R_min over all users (+inf with no users).
double min_rate_slack(const AllocationSolution& solution, const AllocationProblem& problem);

}  // namespace rsma::detail

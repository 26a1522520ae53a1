#include "allocation_detail.hpp"

#include "rsma/fbl.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace rsma {

namespace {

using conic::AffineExpr;
using conic::ConicProgram;

constexpr double kLn2 = std::numbers::ln2;

AffineExpr var(int i, double c = 1.0) { return AffineExpr::variable(i, c); }

struct GroupVars {
  std::vector<int> p, rkc, rkp, rhat;
  int pc = -1, rc = -1;
};

// Lower-bound approximation constraint set with equal budgets P_max / J.
// Private streams use the log-of-affine bound with linearized cross-talk; the
// common rate is bounded by the concave log of the common numerator minus a
// tangent over-estimate of the log of its denominator, taken at the equal
// power split. Groups with common_on[j] false get no common stream.
std::vector<GroupVars> build_lba(ConicProgram& prog, const AllocationProblem& problem,
                                 const std::vector<bool>& common_on) {
  const auto& cfg = problem.config;
  const double theta = derive_theta(cfg);
  const int jn = problem.num_groups();
  const double budget = 1.0 / jn;

  std::vector<GroupVars> vars(jn);
  for (int j = 0; j < jn; ++j) {
    const auto& l = problem.links[j];
    const int n = l.size();
    if (n == 0) continue;
    const auto nz = detail::normalize(l, cfg);
    const bool rsma = common_on[j];
    auto& v = vars[j];
    AffineExpr used;
    for (int k = 0; k < n; ++k) {
      v.p.push_back(prog.add_variable("p" + std::to_string(j) + "_" + std::to_string(k)));
      v.rkp.push_back(prog.add_variable());
      v.rhat.push_back(prog.add_variable());
      prog.add_nonnegative(var(v.p[k]));
      prog.add_nonnegative(var(v.rkp[k]));
      prog.add_nonnegative(var(v.rhat[k]));
      prog.add_less_equal(var(v.rkp[k]), var(v.rhat[k]));
      used += var(v.p[k]);
    }
    if (rsma) {
      v.pc = prog.add_variable("pc" + std::to_string(j));
      v.rc = prog.add_variable("rc" + std::to_string(j));
      prog.add_nonnegative(var(v.pc));
      prog.add_nonnegative(var(v.rc));
      used += var(v.pc);
      AffineExpr shares;
      for (int k = 0; k < n; ++k) {
        v.rkc.push_back(prog.add_variable());
        prog.add_nonnegative(var(v.rkc[k]));
        shares += var(v.rkc[k]);
      }
      prog.add_less_equal(shares, var(v.rc));
    }
    prog.add_less_equal(used, AffineExpr(budget));

    const double pref = budget / (n + (rsma ? 1 : 0));
    for (int k = 0; k < n; ++k) {
      const double z = nz.b(k) * budget + 1.0;
      // sum_k' rho_kk' p_k' + z
      AffineExpr x(z), cross;
      double x0 = z;
      for (int m = 0; m < n; ++m) {
        x += var(v.p[m], nz.rho_private(k, m));
        x0 += nz.rho_private(k, m) * pref;
        if (m != k) cross += var(v.p[m], nz.rho_private(k, m));
      }
      // ln2 (Rhat + theta) + cross / z + ln z <= ln(x)
      AffineExpr t = var(v.rhat[k], kLn2) + (1.0 / z) * cross + AffineExpr(std::log(z) + kLn2 * theta);
      conic::add_log_lower_bound(prog, t, x);
      if (rsma) {
        // ln2 (R_c + theta) + ln x0 + (x - x0) / x0 <= ln(x + rho_c p_c)
        AffineExpr tc = var(v.rc, kLn2) + AffineExpr(kLn2 * theta + std::log(x0) - 1.0) + (1.0 / x0) * x;
        conic::add_log_lower_bound(prog, tc, x + var(v.pc, nz.rho_common(k)));
      }
    }
  }
  return vars;
}

AffineExpr user_rate(const GroupVars& v, int k) {
  AffineExpr r = var(v.rkp[k]);
  if (!v.rkc.empty()) r += var(v.rkc[k]);
  return r;
}

AllocationSolution extract(const conic::ConicSolution& sol, const std::vector<GroupVars>& vars,
                           const AllocationProblem& problem) {
  AllocationSolution s = empty_solution(problem, AllocationStatus::feasible);
  const double pmax = problem.config.max_total_power_w();
  const int jn = problem.num_groups();
  for (int j = 0; j < jn; ++j) {
    s.subcarrier_budgets(j) = pmax / jn;
    const auto& v = vars[j];
    for (std::size_t k = 0; k < v.p.size(); ++k) {
      s.private_power[j](k) = pmax * sol.primal(v.p[k]);
      s.private_rates[j](k) = sol.primal(v.rkp[k]);
      if (!v.rkc.empty()) s.common_rate_shares[j](k) = sol.primal(v.rkc[k]);
    }
    if (v.pc >= 0) {
      s.common_power(j) = pmax * sol.primal(v.pc);
      s.common_stream_rate(j) = sol.primal(v.rc);
    }
  }
  return s;
}

// The common-rate constraint holds R_c + theta, so with R_c >= 0 it keeps
// every modelled common stream above its zero-rate SINR. Candidate masks let
// the solvers switch such streams off.
std::vector<bool> all_common(const AllocationProblem& problem, bool on) {
  return std::vector<bool>(problem.num_groups(), on && problem.mode == TransmissionMode::rsma);
}

bool usable(const conic::ConicSolution& sol) {
  return sol.status == conic::SolveStatus::optimal ||
         (sol.status == conic::SolveStatus::numerical_failure && sol.primal.allFinite() &&
          sol.residuals.primal <= 1e-6);
}

}  // namespace

namespace {

FeasibilityResult feasibility_with(const AllocationProblem& problem, const std::vector<bool>& common_on) {
  FeasibilityResult out;
  out.r_star = -std::numeric_limits<double>::infinity();
  out.point = empty_solution(problem, AllocationStatus::infeasible);

  ConicProgram prog;
  auto vars = build_lba(prog, problem, common_on);
  const int r = prog.add_variable("r");
  for (const auto& v : vars) {
    for (std::size_t k = 0; k < v.p.size(); ++k) prog.add_less_equal(var(r), user_rate(v, static_cast<int>(k)));
  }
  prog.maximize(var(r));
  const auto sol = conic::solve(prog);
  out.solver_status = sol.status;
  if (sol.status == conic::SolveStatus::infeasible) {
    out.point.message = "lower-bound constraint set infeasible";
    return out;
  }
  if (!usable(sol)) {
    out.point.status = AllocationStatus::solver_failure;
    out.point.message = "feasibility program: " + conic::to_string(sol.status) + " " + sol.message;
    return out;
  }
  out.r_star = sol.primal(r);
  AllocationSolution s = extract(sol, vars, problem);
  detail::finalize(s, problem);
  out.feasible = out.r_star >= problem.config.min_rate_bps_hz && s.feasible();
  if (out.feasible) {
    out.point = std::move(s);
  } else {
    out.point.message = "max-min rate " + std::to_string(out.r_star) + " below the rate floor";
  }
  return out;
}

AllocationSolution lba_with(const AllocationProblem& problem, const std::vector<bool>& common_on,
                            const conic::SolverSettings& settings) {
  const double eps = problem.config.error_threshold;
  const double rmin = problem.config.min_rate_bps_hz;

  conic::ConicSolution sol;
  std::vector<GroupVars> vars;
  for (double margin : {detail::kRateMargin, 0.0}) {
    ConicProgram prog;
    vars = build_lba(prog, problem, common_on);
    AffineExpr obj;
    for (const auto& v : vars) {
      for (std::size_t k = 0; k < v.p.size(); ++k) {
        const int ki = static_cast<int>(k);
        prog.add_less_equal(AffineExpr(rmin + margin), user_rate(v, ki));
        obj += var(v.rkp[k], 1.0 - 2.0 * eps);
        if (!v.rkc.empty()) obj += var(v.rkc[k], 1.0 - eps);
      }
    }
    prog.maximize(obj);
    sol = conic::solve(prog, settings);
    if (sol.status != conic::SolveStatus::infeasible) break;
  }
  if (sol.status == conic::SolveStatus::infeasible) {
    AllocationSolution s = empty_solution(problem, AllocationStatus::infeasible);
    s.message = "lower-bound program infeasible";
    return s;
  }
  if (!usable(sol)) {
    AllocationSolution s = empty_solution(problem, AllocationStatus::solver_failure);
    s.message = "lower-bound program: " + conic::to_string(sol.status) + " " + sol.message;
    return s;
  }
  AllocationSolution s = extract(sol, vars, problem);
  detail::finalize(s, problem);
  return s;
}

}  // namespace

FeasibilityResult feasibility_check(const AllocationProblem& problem) {
  problem.validate();
  detail::require_bound_precondition(problem.config);
  auto out = feasibility_with(problem, all_common(problem, true));
  if (out.feasible || problem.mode == TransmissionMode::sdma) return out;
  auto off = feasibility_with(problem, all_common(problem, false));
  return off.feasible || off.r_star > out.r_star ? off : out;
}

AllocationSolution lba_solve(const AllocationProblem& problem, const conic::SolverSettings& settings) {
  problem.validate();
  detail::require_bound_precondition(problem.config);
  const int jn = problem.num_groups();
  std::vector<std::vector<bool>> masks{all_common(problem, true)};
  AllocationSolution best = lba_with(problem, masks[0], settings);
  int solves = 1;
  if (problem.mode == TransmissionMode::rsma) {
    // Re-solve without the common streams that carry no rate, then without any.
    std::vector<bool> active(jn, false);
    for (int j = 0; j < jn && best.feasible(); ++j) active[j] = best.common_stream_rate(j) > 1e-6;
    if (best.feasible() && active != masks[0]) masks.push_back(active);
    if (masks.back() != all_common(problem, false)) masks.push_back(all_common(problem, false));
    for (std::size_t i = 1; i < masks.size(); ++i) {
      auto s = lba_with(problem, masks[i], settings);
      ++solves;
      if (s.feasible() && (!best.feasible() || s.sum_et_lower_bound > best.sum_et_lower_bound)) best = std::move(s);
    }
  }
  best.iterations = solves;
  best.solver_trace = {best.sum_et_lower_bound};
  return best;
}

}  // namespace rsma

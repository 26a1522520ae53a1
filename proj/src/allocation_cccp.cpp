#include "allocation_detail.hpp"

#include "rsma/fbl.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace rsma {

namespace {

using conic::AffineExpr;
using conic::ConicProgram;

constexpr double kLn2 = std::numbers::ln2;

AffineExpr var(int i, double c = 1.0) { return AffineExpr::variable(i, c); }

// Streams whose SINR is this small at the linearization point are switched off
// for the subproblem: sqrt(V) has unbounded slope at zero.
constexpr double kOffSinr = 1e-9;

struct GroupVars {
  std::vector<int> p, rkc, rkp;
  std::vector<bool> private_on;
  int pc = -1, rc = -1, budget = -1;
};

struct Subproblem {
  ConicProgram prog;
  std::vector<GroupVars> vars;
};

// Adds  ln2 (R + theta * tangent of sqrt(V) at s0) <= ln(1 + s0 * s^),  the
// rate constraint in the scaled SINR slack s^ = s / s0.
void add_rate_constraint(ConicProgram& prog, const AffineExpr& rate, int slack, double s0, double theta) {
  const double slope = sqrt_dispersion_slope(s0);
  const AffineExpr tangent = AffineExpr(sqrt_dispersion_tangent(0.0, s0)) + var(slack, slope * s0);
  conic::add_log_lower_bound(prog, kLn2 * rate + (kLn2 * theta) * tangent,
                             AffineExpr(1.0) + var(slack, s0));
}

// Adds  s * D <= num  as a convex restriction tight at the linearization
// point. With x = s^ and y = D / D0 (both 1 at the point):
//   x y = ((x + y)^2 - (x - y)^2) / 4 <= ((x + y)^2 - xi~(x, y)) / 4
// where xi~ is the tangent of (x - y)^2, which never exceeds it. Both sides
// are 1 at the point, so the cone is built unscaled.
void add_sinr_constraint(ConicProgram& prog, int slack, double x0, const AffineExpr& den, double d0,
                         const AffineExpr& num, double s0) {
  const AffineExpr x = var(slack);
  const AffineExpr y = (1.0 / d0) * den;
  const double u0 = x0 - 1.0;  // y0 == 1 by construction
  const AffineExpr xi = AffineExpr(square_difference_tangent(0.0, 0.0, x0, 1.0)) + (2.0 * u0) * (x - y);
  conic::add_quadratic_upper_bound(prog, {{0.25, x + y}}, (1.0 / (s0 * d0)) * num + 0.25 * xi, 1.0);
}

Subproblem build(const AllocationProblem& problem, const AllocationSolution& at, double margin) {
  const auto& cfg = problem.config;
  const double theta = derive_theta(cfg);
  const double eps = cfg.error_threshold;
  const double pmax = cfg.max_total_power_w();
  const int jn = problem.num_groups();
  const bool rsma = problem.mode == TransmissionMode::rsma;
  const bool joint = problem.budget == BudgetMode::joint;

  Subproblem sp;
  auto& prog = sp.prog;
  sp.vars.resize(jn);
  AffineExpr objective, budgets;
  for (int j = 0; j < jn; ++j) {
    const auto& l = problem.links[j];
    const int n = l.size();
    if (n == 0) continue;
    auto& v = sp.vars[j];
    const auto nz = detail::normalize(l, cfg);
    const Eigen::VectorXd p0 = at.private_power[j] / pmax;
    const double pc0 = at.common_power(j) / pmax;
    const Eigen::VectorXd gc = sinr_common(l, at.private_power[j], at.common_power(j));
    const Eigen::VectorXd gp = sinr_private(l, at.private_power[j], at.common_power(j));

    bool common_on = rsma && pc0 > 0.0 && at.common_stream_rate(j) > 0.0;
    for (int k = 0; k < n && common_on; ++k) common_on = gc(k) > kOffSinr;

    // Power expressions; switched-off streams are the constant 0.
    std::vector<AffineExpr> p(n);
    AffineExpr pc;
    AffineExpr used;
    v.p.assign(n, -1);
    v.private_on.assign(n, false);
    for (int k = 0; k < n; ++k) {
      v.private_on[k] = p0(k) > 0.0 && gp(k) > kOffSinr;
      if (!v.private_on[k]) continue;
      v.p[k] = prog.add_variable("p" + std::to_string(j) + "_" + std::to_string(k));
      prog.add_nonnegative(var(v.p[k]));
      p[k] = var(v.p[k]);
      used += p[k];
    }
    if (common_on) {
      v.pc = prog.add_variable("pc" + std::to_string(j));
      prog.add_nonnegative(var(v.pc));
      pc = var(v.pc);
      used += pc;
    }
    if (joint) {
      v.budget = prog.add_variable("pmax" + std::to_string(j));
      prog.add_nonnegative(var(v.budget));
      prog.add_less_equal(used, var(v.budget));
      budgets += var(v.budget);
    } else {
      prog.add_less_equal(used, AffineExpr(1.0 / jn));
    }

    // Rates.
    v.rkp.assign(n, -1);
    for (int k = 0; k < n; ++k) {
      if (!v.private_on[k]) continue;
      v.rkp[k] = prog.add_variable();
      prog.add_nonnegative(var(v.rkp[k]));
      objective += var(v.rkp[k], 1.0 - 2.0 * eps);
    }
    if (common_on) {
      v.rc = prog.add_variable("rc" + std::to_string(j));
      prog.add_nonnegative(var(v.rc));
      AffineExpr shares;
      for (int k = 0; k < n; ++k) {
        v.rkc.push_back(prog.add_variable());
        prog.add_nonnegative(var(v.rkc[k]));
        shares += var(v.rkc[k]);
        objective += var(v.rkc[k], 1.0 - eps);
      }
      prog.add_less_equal(shares, var(v.rc));
    }
    for (int k = 0; k < n; ++k) {
      AffineExpr total;
      if (v.rkp[k] >= 0) total += var(v.rkp[k]);
      if (common_on) total += var(v.rkc[k]);
      prog.add_less_equal(AffineExpr(cfg.min_rate_bps_hz + margin), total);
    }

    // SINR slacks, scaled to 1 at the linearization point.
    for (int k = 0; k < n; ++k) {
      AffineExpr interference(1.0);
      double interference0 = 1.0;
      for (int m = 0; m < n; ++m) {
        interference += nz.a(k, m) * p[m];
        interference0 += nz.a(k, m) * p0(m);
      }
      if (common_on) {
        const int lam = prog.add_variable("lambda" + std::to_string(j) + "_" + std::to_string(k));
        prog.add_nonnegative(var(lam));
        const AffineExpr den = interference + nz.b(k) * pc;
        const double d0 = interference0 + nz.b(k) * pc0;
        add_sinr_constraint(prog, lam, 1.0, den, d0, nz.rho_common(k) * pc, gc(k));
        add_rate_constraint(prog, var(v.rc), lam, gc(k), theta);
      }
      if (v.private_on[k]) {
        const int mu = prog.add_variable("mu" + std::to_string(j) + "_" + std::to_string(k));
        prog.add_nonnegative(var(mu));
        const AffineExpr den = interference - nz.a(k, k) * p[k] + nz.b(k) * (p[k] + pc);
        const double d0 = interference0 - nz.a(k, k) * p0(k) + nz.b(k) * (p0(k) + pc0);
        add_sinr_constraint(prog, mu, 1.0, den, d0, nz.rho_private(k, k) * p[k], gp(k));
        add_rate_constraint(prog, var(v.rkp[k]), mu, gp(k), theta);
      }
    }
  }
  if (joint) prog.add_less_equal(budgets, AffineExpr(1.0));
  prog.maximize(objective);
  return sp;
}

AllocationSolution extract(const conic::ConicSolution& sol, const Subproblem& sp,
                           const AllocationProblem& problem) {
  AllocationSolution s = empty_solution(problem, AllocationStatus::feasible);
  const double pmax = problem.config.max_total_power_w();
  const int jn = problem.num_groups();
  for (int j = 0; j < jn; ++j) {
    const auto& v = sp.vars[j];
    s.subcarrier_budgets(j) = v.budget >= 0 ? pmax * sol.primal(v.budget) : pmax / jn;
    for (std::size_t k = 0; k < v.p.size(); ++k) {
      if (v.p[k] >= 0) s.private_power[j](k) = pmax * sol.primal(v.p[k]);
      if (v.rkp[k] >= 0) s.private_rates[j](k) = sol.primal(v.rkp[k]);
      if (!v.rkc.empty()) s.common_rate_shares[j](k) = sol.primal(v.rkc[k]);
    }
    if (v.pc >= 0) {
      s.common_power(j) = pmax * sol.primal(v.pc);
      s.common_stream_rate(j) = sol.primal(v.rc);
    }
  }
  return s;
}

// The rate constraints keep an active stream above its zero-rate SINR, so the
// subproblems cannot switch a common stream off by themselves. Tries removing
// each common stream (private rates then rise to their exact values) and keeps
// the change when the bound improves.
void drop_weak_common_streams(AllocationSolution& s, const AllocationProblem& problem) {
  for (int j = 0; j < problem.num_groups(); ++j) {
    if (!(s.common_power(j) > 0.0)) continue;
    AllocationSolution candidate = s;
    candidate.common_power(j) = 0.0;
    candidate.common_stream_rate(j) = 0.0;
    candidate.common_rate_shares[j].setZero();
    candidate.private_rates[j].setConstant(std::numeric_limits<double>::infinity());
    detail::finalize(candidate, problem);
    if (candidate.feasible() && candidate.sum_et_lower_bound > s.sum_et_lower_bound) s = std::move(candidate);
  }
}

}  // namespace

double sqrt_dispersion_slope(double gamma) {
  if (!(gamma > 0.0)) throw std::invalid_argument("sqrt_dispersion_slope: gamma must be positive");
  return std::pow(1.0 + gamma, -3.0) / std::sqrt(fbl::dispersion(gamma));
}

double sqrt_dispersion_tangent(double gamma, double gamma0) {
  return std::sqrt(fbl::dispersion(gamma0)) + sqrt_dispersion_slope(gamma0) * (gamma - gamma0);
}

double square_difference_tangent(double x, double y, double x0, double y0) {
  const double u0 = x0 - y0;
  return -u0 * u0 + 2.0 * u0 * (x - y);
}

AllocationSolution cccp_solve(const AllocationProblem& problem, const AllocationSolution& init,
                              const CccpSettings& settings) {
  problem.validate();
  detail::require_bound_precondition(problem.config);
  if (!init.feasible()) {
    AllocationSolution s = empty_solution(problem, init.status);
    s.message = "cccp: start point not feasible";
    return s;
  }
  AllocationSolution current = init;
  // Joint budgets: the start point may carry equal budgets; any split that
  // covers the powers is feasible.
  detail::finalize(current, problem);
  if (!current.feasible()) return current;
  const double margin = detail::min_rate_slack(current, problem) >= detail::kRateMargin ? detail::kRateMargin : 0.0;

  current.solver_trace = {current.sum_et_lower_bound};
  current.iterations = 0;
  current.message.clear();
  for (int it = 1; it <= settings.max_iters; ++it) {
    Subproblem sp = build(problem, current, margin);
    const auto sol = conic::solve(sp.prog, settings.solver);
    const bool ok = sol.status == conic::SolveStatus::optimal ||
                    (sol.status == conic::SolveStatus::numerical_failure && sol.primal.allFinite() &&
                     sol.residuals.primal <= 1e-6);
    if (!ok) {
      current.message = "subproblem " + conic::to_string(sol.status) + " at iteration " + std::to_string(it) +
                        "; returning last iterate";
      break;
    }
    AllocationSolution next = extract(sol, sp, problem);
    detail::finalize(next, problem);
    if (next.feasible()) drop_weak_common_streams(next, problem);
    if (!next.feasible() || next.sum_et_lower_bound < current.sum_et_lower_bound - 1e-9) {
      current.message = "iteration " + std::to_string(it) + " did not improve; returning last iterate";
      break;
    }
    const double prev = current.sum_et_lower_bound;
    next.solver_trace = std::move(current.solver_trace);
    next.solver_trace.push_back(next.sum_et_lower_bound);
    next.iterations = it;
    current = std::move(next);
    if (std::abs(current.sum_et_lower_bound - prev) <= settings.tol) break;
    if (it == settings.max_iters) current.message = "iteration limit reached";
  }
  return current;
}

AllocationSolution cccp_allocate(const AllocationProblem& problem, const CccpSettings& settings) {
  const auto fc = feasibility_check(problem);
  if (!fc.feasible) {
    AllocationSolution s = fc.point;
    if (s.status == AllocationStatus::feasible) s.status = AllocationStatus::infeasible;
    return s;
  }
  AllocationSolution best = cccp_solve(problem, fc.point, settings);
  if (problem.mode != TransmissionMode::rsma || !settings.sdma_fallback) return best;

  // Every SDMA allocation is an RSMA allocation with idle common streams, but
  // the local iteration above can stop below the SDMA optimum.
  AllocationProblem sdma = problem;
  sdma.mode = TransmissionMode::sdma;
  const auto fs = feasibility_check(sdma);
  if (!fs.feasible) return best;
  const auto s = cccp_solve(sdma, fs.point, settings);
  if (!s.feasible()) return best;
  auto lifted = cccp_solve(problem, s, settings);
  if (lifted.feasible() && (!best.feasible() || lifted.sum_et_lower_bound > best.sum_et_lower_bound)) {
    lifted.iterations += best.iterations + s.iterations;
    return lifted;
  }
  best.iterations += s.iterations + lifted.iterations;
  return best;
}

}  // namespace rsma

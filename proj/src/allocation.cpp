#include "allocation_detail.hpp"

#include "rsma/fbl.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace rsma {

using nlohmann::json;

std::string to_string(TransmissionMode mode) { return mode == TransmissionMode::rsma ? "rsma" : "sdma"; }
std::string to_string(BudgetMode mode) { return mode == BudgetMode::joint ? "joint" : "equal_split"; }

std::string to_string(AllocationStatus status) {
  switch (status) {
    case AllocationStatus::feasible: return "feasible";
    case AllocationStatus::infeasible: return "infeasible";
    case AllocationStatus::solver_failure: return "solver_failure";
  }
  return "unknown";
}

void AllocationProblem::validate() const {
  config.validate();
  if (num_groups() != config.num_subcarriers) {
    throw std::invalid_argument("allocation: group count differs from num_subcarriers");
  }
  if (links.size() != groups.size()) throw std::invalid_argument("allocation: links/groups mismatch");
  std::vector<int> seen(config.num_users, 0);
  for (std::size_t j = 0; j < groups.size(); ++j) {
    if (links[j].users != groups[j]) throw std::invalid_argument("allocation: links built for another group");
    for (int u : groups[j]) {
      if (u < 0 || u >= config.num_users) throw std::invalid_argument("allocation: user index out of range");
      if (seen[u]++) throw std::invalid_argument("allocation: user assigned twice");
    }
  }
  for (int s : seen) {
    if (!s) throw std::invalid_argument("allocation: groups do not cover every user");
  }
}

AllocationProblem make_problem(const ChannelRealization& realization,
                               const std::vector<std::vector<int>>& groups,
                               const ScenarioConfig& config, TransmissionMode mode,
                               BudgetMode budget) {
  AllocationProblem p;
  p.groups = groups;
  p.links = all_link_coefficients(realization, groups, config);
  p.config = config;
  p.mode = mode;
  p.budget = budget;
  p.validate();
  return p;
}

AllocationSolution empty_solution(const AllocationProblem& problem, AllocationStatus status) {
  const int j = problem.num_groups();
  AllocationSolution s;
  s.status = status;
  s.common_power = Eigen::VectorXd::Zero(j);
  s.subcarrier_budgets = Eigen::VectorXd::Zero(j);
  s.common_stream_rate = Eigen::VectorXd::Zero(j);
  for (int g = 0; g < j; ++g) {
    const int n = static_cast<int>(problem.groups[g].size());
    s.private_power.push_back(Eigen::VectorXd::Zero(n));
    s.common_rate_shares.push_back(Eigen::VectorXd::Zero(n));
    s.private_rates.push_back(Eigen::VectorXd::Zero(n));
  }
  return s;
}

Eigen::VectorXd sinr_common(const LinkCoefficients& l, const Eigen::VectorXd& p, double pc) {
  const int n = l.size();
  Eigen::VectorXd g(n);
  for (int k = 0; k < n; ++k) {
    const double den = l.a.row(k).dot(p) + l.b(k) * pc + l.c;
    g(k) = pc * l.rho_common(k) / den;
  }
  return g;
}

Eigen::VectorXd sinr_private(const LinkCoefficients& l, const Eigen::VectorXd& p, double pc) {
  const int n = l.size();
  Eigen::VectorXd g(n);
  for (int k = 0; k < n; ++k) {
    const double den = l.a.row(k).dot(p) - l.a(k, k) * p(k) + l.b(k) * (p(k) + pc) + l.c;
    g(k) = p(k) * l.rho_private(k, k) / den;
  }
  return g;
}

double lower_bound_objective(const AllocationSolution& s, double eps) {
  if (!s.feasible()) return 0.0;
  double t = 0.0;
  for (std::size_t j = 0; j < s.private_rates.size(); ++j) {
    t += (1.0 - eps) * s.common_rate_shares[j].sum() + (1.0 - 2.0 * eps) * s.private_rates[j].sum();
  }
  return t;
}

double exact_et(const AllocationSolution& s, const AllocationProblem& problem) {
  if (!s.feasible()) return 0.0;
  const double n = problem.config.blocklength_per_subcarrier();
  double total = 0.0;
  for (int j = 0; j < problem.num_groups(); ++j) {
    const auto& l = problem.links[j];
    if (l.size() == 0) continue;
    const Eigen::VectorXd gc = sinr_common(l, s.private_power[j], s.common_power(j));
    const Eigen::VectorXd gp = sinr_private(l, s.private_power[j], s.common_power(j));
    const double rc = s.common_stream_rate(j);
    for (int k = 0; k < l.size(); ++k) {
      const double ec = (problem.mode == TransmissionMode::rsma && rc > 0.0) ? fbl::decode_error(gc(k), rc, n) : 0.0;
      const double ep = fbl::decode_error(gp(k), s.private_rates[j](k), n);
      const auto et = fbl::effective_throughput(s.common_rate_shares[j](k), s.private_rates[j](k), ec, ep,
                                                problem.config.error_threshold);
      total += et.total();
    }
  }
  return total;
}

ConstraintReport check_constraints(const AllocationSolution& s, const AllocationProblem& problem,
                                   double eps_rel) {
  ConstraintReport rep;
  auto fail = [&](const std::string& what) {
    ++rep.violations;
    rep.details.push_back(what);
  };
  if (!s.feasible()) {
    fail("solution not marked feasible");
    return rep;
  }
  const auto& cfg = problem.config;
  const double pmax = cfg.max_total_power_w();
  const double eps = cfg.error_threshold;
  const double n = cfg.blocklength_per_subcarrier();
  const double ptol = 1e-9 * std::max(pmax, 1e-30);
  if (s.subcarrier_budgets.sum() > pmax + ptol) fail("sum of subcarrier budgets exceeds P_max");
  for (int j = 0; j < problem.num_groups(); ++j) {
    const auto& l = problem.links[j];
    const std::string tag = "group " + std::to_string(j) + ": ";
    const Eigen::VectorXd& p = s.private_power[j];
    const double pc = s.common_power(j);
    const double rc = s.common_stream_rate(j);
    if (s.subcarrier_budgets(j) < -1e-12) fail(tag + "negative budget");
    if (p.size() && p.minCoeff() < -1e-12) fail(tag + "negative private power");
    if (pc < -1e-12) fail(tag + "negative common power");
    if (p.sum() + pc > s.subcarrier_budgets(j) + ptol) fail(tag + "powers exceed subcarrier budget");
    if (rc < -1e-12) fail(tag + "negative common rate");
    if (problem.mode == TransmissionMode::sdma && (pc != 0.0 || rc != 0.0)) fail(tag + "common stream in SDMA mode");
    if (l.size() == 0) continue;
    if (s.common_rate_shares[j].minCoeff() < -1e-12) fail(tag + "negative common share");
    if (s.private_rates[j].minCoeff() < -1e-12) fail(tag + "negative private rate");
    if (s.common_rate_shares[j].sum() > rc + 1e-9) fail(tag + "common shares exceed common rate");
    const Eigen::VectorXd gc = sinr_common(l, p, pc);
    const Eigen::VectorXd gp = sinr_private(l, p, pc);
    for (int k = 0; k < l.size(); ++k) {
      const std::string u = tag + "user " + std::to_string(l.users[k]) + ": ";
      if (s.common_rate_shares[j](k) + s.private_rates[j](k) < cfg.min_rate_bps_hz - 1e-9) fail(u + "rate floor");
      if (rc > 0.0 && fbl::decode_error(gc(k), rc, n) > eps * (1.0 + eps_rel)) fail(u + "common decoding error");
      if (s.private_rates[j](k) > 0.0 &&
          fbl::decode_error(gp(k), s.private_rates[j](k), n) > eps * (1.0 + eps_rel)) {
        fail(u + "private decoding error");
      }
    }
  }
  return rep;
}

namespace detail {

Normalized normalize(const LinkCoefficients& l, const ScenarioConfig& config) {
  Normalized nz;
  nz.power_scale = config.max_total_power_w();
  const double f = nz.power_scale / l.c;
  nz.rho_common = l.rho_common * f;
  nz.rho_private = l.rho_private * f;
  nz.a = l.a * f;
  nz.b = l.b * f;
  return nz;
}

void require_bound_precondition(const ScenarioConfig& config) {
  if (config.error_threshold > 1e-4) {
    throw std::invalid_argument("allocation: error_threshold must be <= 1e-4 for the fixed-threshold bound");
  }
}

double min_rate_slack(const AllocationSolution& s, const AllocationProblem& problem) {
  double m = std::numeric_limits<double>::infinity();
  for (int j = 0; j < problem.num_groups(); ++j) {
    for (int k = 0; k < s.private_rates[j].size(); ++k) {
      m = std::min(m, s.common_rate_shares[j](k) + s.private_rates[j](k) - problem.config.min_rate_bps_hz);
    }
  }
  return m;
}

void finalize(AllocationSolution& s, const AllocationProblem& problem) {
  const auto& cfg = problem.config;
  const double pmax = cfg.max_total_power_w();
  const double n = cfg.blocklength_per_subcarrier();
  const double eps = cfg.error_threshold;
  const int jn = problem.num_groups();
  const bool rsma = problem.mode == TransmissionMode::rsma;

  // Budgets and powers.
  s.subcarrier_budgets = s.subcarrier_budgets.cwiseMax(0.0);
  const double bsum = s.subcarrier_budgets.sum();
  if (bsum > pmax) s.subcarrier_budgets *= pmax / bsum;
  for (int j = 0; j < jn; ++j) {
    auto& p = s.private_power[j];
    p = p.cwiseMax(0.0);
    s.common_power(j) = rsma ? std::max(0.0, s.common_power(j)) : 0.0;
    const double used = p.sum() + s.common_power(j);
    if (used > s.subcarrier_budgets(j)) {
      const double f = used > 0.0 ? s.subcarrier_budgets(j) / used : 0.0;
      p *= f;
      s.common_power(j) *= f;
      // Guard against the product rounding up.
      while (p.sum() + s.common_power(j) > s.subcarrier_budgets(j)) {
        p *= 1.0 - 1e-15;
        s.common_power(j) *= 1.0 - 1e-15;
      }
    }
  }

  for (int j = 0; j < jn; ++j) {
    const auto& l = problem.links[j];
    auto& p = s.private_power[j];
    auto& shares = s.common_rate_shares[j];
    auto& rp = s.private_rates[j];
    if (l.size() == 0) {
      s.common_power(j) = 0.0;
      s.common_stream_rate(j) = 0.0;
      continue;
    }
    const Eigen::VectorXd gc = sinr_common(l, p, s.common_power(j));
    const Eigen::VectorXd gp = sinr_private(l, p, s.common_power(j));
    for (int k = 0; k < l.size(); ++k) {
      const double cap = std::max(0.0, fbl::fbl_rate({gp(k), n, eps}));
      rp(k) = std::clamp(rp(k), 0.0, cap);
    }
    double rc = 0.0;
    if (rsma && s.common_power(j) > 0.0) {
      double cap = std::numeric_limits<double>::infinity();
      for (int k = 0; k < l.size(); ++k) cap = std::min(cap, fbl::fbl_rate({gc(k), n, eps}));
      rc = std::clamp(s.common_stream_rate(j), 0.0, std::max(0.0, cap));
    }
    if (rsma) {
      shares = shares.cwiseMax(0.0);
    } else {
      shares.setZero();
    }
    if (shares.sum() > rc) shares *= shares.sum() > 0.0 ? rc / shares.sum() : 0.0;
    while (shares.sum() > rc) shares *= 1.0 - 1e-15;
    // Spare common rate goes to users below the floor.
    double spare = rc - shares.sum();
    for (int k = 0; k < l.size() && spare > 0.0; ++k) {
      const double need = cfg.min_rate_bps_hz - shares(k) - rp(k);
      if (need > 0.0) {
        const double give = std::min(need, spare);
        shares(k) += give;
        spare -= give;
      }
    }
    s.common_stream_rate(j) = rc;
    // Idle streams only add interference.
    if (rc <= 0.0) {
      s.common_power(j) = 0.0;
      shares.setZero();
    }
    for (int k = 0; k < l.size(); ++k) {
      if (rp(k) <= 0.0) {
        rp(k) = 0.0;
        p(k) = 0.0;
      }
    }
  }

  s.status = AllocationStatus::feasible;
  if (min_rate_slack(s, problem) < -1e-9) {
    s.status = AllocationStatus::solver_failure;
    s.message += (s.message.empty() ? "" : "; ") + std::string("rate floor missed after exact re-evaluation");
  }
  s.sum_et_lower_bound = lower_bound_objective(s, eps);
  s.sum_et_exact = exact_et(s, problem);
}

}  // namespace detail

// ---------------------------------------------------------------------------

AllocationSolution brute_force_allocate(const AllocationProblem& problem, int grid) {
  problem.validate();
  if (problem.num_groups() != 1 || problem.links[0].size() > 3 || problem.links[0].size() < 1) {
    throw std::invalid_argument("brute_force_allocate: needs J = 1 and 1..3 users");
  }
  if (grid < 1) throw std::invalid_argument("brute_force_allocate: grid must be >= 1");
  const auto& cfg = problem.config;
  const auto& l = problem.links[0];
  const int n_users = l.size();
  const bool rsma = problem.mode == TransmissionMode::rsma;
  const int dims = n_users + (rsma ? 1 : 0);
  const double pmax = cfg.max_total_power_w();
  const double eps = cfg.error_threshold;
  const double theta = fbl::rate_penalty(eps, cfg.blocklength_per_subcarrier());
  const double rmin = cfg.min_rate_bps_hz;
  auto rate = [&](double g) { return std::log2(1.0 + g) - theta * std::sqrt(fbl::dispersion(g)); };

  double best = -1.0;
  std::vector<int> best_levels;
  std::vector<int> lv(dims, 0);
  Eigen::VectorXd p(n_users);
  // Odometer over integer levels with sum <= grid.
  while (true) {
    for (int k = 0; k < n_users; ++k) p(k) = pmax * lv[k] / grid;
    const double pc = rsma ? pmax * lv[n_users] / grid : 0.0;
    const Eigen::VectorXd gp = sinr_private(l, p, pc);
    double rc = 0.0;
    if (rsma && pc > 0.0) {
      const Eigen::VectorXd gc = sinr_common(l, p, pc);
      rc = std::numeric_limits<double>::infinity();
      for (int k = 0; k < n_users; ++k) rc = std::min(rc, rate(gc(k)));
      rc = std::max(0.0, rc);
    }
    double deficit = 0.0, sum_rp = 0.0;
    for (int k = 0; k < n_users; ++k) {
      const double rp = std::max(0.0, rate(gp(k)));
      sum_rp += rp;
      deficit += std::max(0.0, rmin - rp);
    }
    if (deficit <= rc) {
      const double obj = (1.0 - eps) * rc + (1.0 - 2.0 * eps) * sum_rp;
      if (obj > best) {
        best = obj;
        best_levels = lv;
      }
    }
    int d = 0;
    for (; d < dims; ++d) {
      ++lv[d];
      int total = 0;
      for (int v : lv) total += v;
      if (total <= grid) break;
      lv[d] = 0;
    }
    if (d == dims) break;
  }

  if (best < 0.0) return empty_solution(problem, AllocationStatus::infeasible);
  AllocationSolution s = empty_solution(problem, AllocationStatus::feasible);
  for (int k = 0; k < n_users; ++k) s.private_power[0](k) = pmax * best_levels[k] / grid;
  s.common_power(0) = rsma ? pmax * best_levels[n_users] / grid : 0.0;
  s.subcarrier_budgets(0) = pmax;
  const Eigen::VectorXd gp = sinr_private(l, s.private_power[0], s.common_power(0));
  for (int k = 0; k < n_users; ++k) s.private_rates[0](k) = std::max(0.0, rate(gp(k)));
  if (rsma && s.common_power(0) > 0.0) {
    const Eigen::VectorXd gc = sinr_common(l, s.private_power[0], s.common_power(0));
    double rc = std::numeric_limits<double>::infinity();
    for (int k = 0; k < n_users; ++k) rc = std::min(rc, rate(gc(k)));
    rc = std::max(0.0, rc);
    s.common_stream_rate(0) = rc;
    double left = rc;
    for (int k = 0; k < n_users; ++k) {
      const double need = std::max(0.0, rmin - s.private_rates[0](k));
      s.common_rate_shares[0](k) = need;
      left -= need;
    }
    s.common_rate_shares[0](0) += std::max(0.0, left);
  }
  s.sum_et_lower_bound = lower_bound_objective(s, eps);
  s.sum_et_exact = exact_et(s, problem);
  s.message = "grid " + std::to_string(grid);
  return s;
}

// ---------------------------------------------------------------------------

namespace {

std::vector<double> vec(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }
Eigen::VectorXd vec(const json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<int>(v.size()));
}

AllocationStatus status_from(const std::string& s) {
  if (s == "feasible") return AllocationStatus::feasible;
  if (s == "infeasible") return AllocationStatus::infeasible;
  if (s == "solver_failure") return AllocationStatus::solver_failure;
  throw std::invalid_argument("allocation json: unknown status '" + s + "'");
}

}  // namespace

json to_json(const AllocationSolution& s) {
  json groups = json::array();
  for (std::size_t j = 0; j < s.private_power.size(); ++j) {
    groups.push_back({{"common_power", s.common_power(j)},
                      {"budget", s.subcarrier_budgets(j)},
                      {"common_stream_rate", s.common_stream_rate(j)},
                      {"private_power", vec(s.private_power[j])},
                      {"common_rate_shares", vec(s.common_rate_shares[j])},
                      {"private_rates", vec(s.private_rates[j])}});
  }
  return json{{"status", to_string(s.status)},
              {"groups", groups},
              {"sum_et_lower_bound", s.sum_et_lower_bound},
              {"sum_et_exact", s.sum_et_exact},
              {"solver_trace", s.solver_trace},
              {"iterations", s.iterations},
              {"message", s.message}};
}

AllocationSolution solution_from_json(const json& j) {
  AllocationSolution s;
  s.status = status_from(j.at("status").get<std::string>());
  const auto& groups = j.at("groups");
  const int n = static_cast<int>(groups.size());
  s.common_power.resize(n);
  s.subcarrier_budgets.resize(n);
  s.common_stream_rate.resize(n);
  for (int g = 0; g < n; ++g) {
    const auto& e = groups[g];
    s.common_power(g) = e.at("common_power").get<double>();
    s.subcarrier_budgets(g) = e.at("budget").get<double>();
    s.common_stream_rate(g) = e.at("common_stream_rate").get<double>();
    s.private_power.push_back(vec(e.at("private_power")));
    s.common_rate_shares.push_back(vec(e.at("common_rate_shares")));
    s.private_rates.push_back(vec(e.at("private_rates")));
  }
  s.sum_et_lower_bound = j.at("sum_et_lower_bound").get<double>();
  s.sum_et_exact = j.at("sum_et_exact").get<double>();
  s.solver_trace = j.at("solver_trace").get<std::vector<double>>();
  s.iterations = j.at("iterations").get<int>();
  s.message = j.at("message").get<std::string>();
  return s;
}

}  // namespace rsma

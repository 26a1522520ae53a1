#include "rsma/grouping.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace rsma {

namespace {

// Rows of the realization for the listed users, in that order.
ChannelRealization select_users(const ChannelRealization& r, const std::vector<int>& users) {
  const int n = static_cast<int>(users.size());
  ChannelRealization s;
  s.distances_m.resize(n);
  s.large_scale.resize(n);
  s.true_small_scale.resize(n, r.num_antennas());
  s.est_small_scale.resize(n, r.num_antennas());
  s.err_small_scale.resize(n, r.num_antennas());
  for (int i = 0; i < n; ++i) {
    const int u = users[i];
    s.distances_m(i) = r.distances_m(u);
    s.large_scale(i) = r.large_scale(u);
    s.true_small_scale.row(i) = r.true_small_scale.row(u);
    s.est_small_scale.row(i) = r.est_small_scale.row(u);
    s.err_small_scale.row(i) = r.err_small_scale.row(u);
  }
  return s;
}

void check_shape(int num_users, int num_groups) {
  if (num_users < 0) throw std::invalid_argument("grouping: negative user count");
  if (num_groups < 1) throw std::invalid_argument("grouping: need at least one group");
}

}  // namespace

std::vector<int> GroupAssignment::sizes() const {
  std::vector<int> s;
  for (const auto& g : groups) s.push_back(static_cast<int>(g.size()));
  return s;
}

bool GroupAssignment::is_partition(int num_users) const {
  std::vector<int> seen(num_users, 0);
  for (const auto& g : groups) {
    for (int u : g) {
      if (u < 0 || u >= num_users || seen[u]++) return false;
    }
  }
  return std::all_of(seen.begin(), seen.end(), [](int c) { return c == 1; });
}

std::string to_string(Evaluator e) { return e == Evaluator::lba ? "lba" : "cccp"; }

double evaluate_grouping(const ChannelRealization& realization, const ScenarioConfig& config,
                         const std::vector<std::vector<int>>& groups, Evaluator evaluator,
                         TransmissionMode mode) {
  std::vector<int> placed;
  for (const auto& g : groups) placed.insert(placed.end(), g.begin(), g.end());
  if (placed.empty()) return 0.0;
  std::vector<int> local(realization.num_users(), -1);
  for (int i = 0; i < static_cast<int>(placed.size()); ++i) local[placed[i]] = i;
  std::vector<std::vector<int>> remapped(groups.size());
  for (std::size_t j = 0; j < groups.size(); ++j) {
    for (int u : groups[j]) remapped[j].push_back(local[u]);
  }
  ScenarioConfig sub = config;
  sub.num_users = static_cast<int>(placed.size());
  try {
    const auto r = select_users(realization, placed);
    const auto budget = evaluator == Evaluator::lba ? BudgetMode::equal_split : BudgetMode::joint;
    const auto problem = make_problem(r, remapped, sub, mode, budget);
    const auto s = evaluator == Evaluator::lba ? lba_solve(problem) : cccp_allocate(problem);
    return s.feasible() ? s.sum_et_lower_bound : 0.0;
  } catch (const std::exception&) {
    return 0.0;
  }
}

GroupAssignment greedy_group(int num_users, int num_groups, const GroupObjective& objective) {
  check_shape(num_users, num_groups);
  GroupAssignment a;
  a.groups.resize(num_groups);
  for (int k = 0; k < num_users; ++k) {
    int best_j = 0;
    double best = -1.0;
    for (int j = 0; j < num_groups; ++j) {
      auto candidate = a.groups;
      candidate[j].push_back(k);
      const double v = objective(candidate);
      if (v > best) {
        best = v;
        best_j = j;
      }
    }
    a.groups[best_j].push_back(k);
  }
  return a;
}

GroupAssignment greedy_group(const ChannelRealization& realization, const ScenarioConfig& config,
                             Evaluator evaluator, TransmissionMode mode) {
  return greedy_group(realization.num_users(), config.num_subcarriers,
                      [&](const std::vector<std::vector<int>>& g) {
                        return evaluate_grouping(realization, config, g, evaluator, mode);
                      });
}

std::vector<int> balanced_sizes(int num_users, int num_groups, bool literal_rule) {
  check_shape(num_users, num_groups);
  const int base = num_users / num_groups;
  const int r = num_users % num_groups;
  std::vector<int> sizes(num_groups);
  if (!literal_rule) {
    for (int j = 0; j < num_groups; ++j) sizes[j] = base + (j < r ? 1 : 0);
    return sizes;
  }
  int left = num_users;
  for (int j = 0; j + 1 < num_groups; ++j) {
    sizes[j] = std::min(left, base + (j + 1 >= r ? 1 : 0));
    left -= sizes[j];
  }
  sizes.back() = left;
  return sizes;
}

Eigen::MatrixXd correlation_matrix(const ChannelRealization& realization) {
  const int k = realization.num_users();
  Eigen::MatrixXd u = Eigen::MatrixXd::Zero(k, k);
  for (int i = 0; i < k; ++i) {
    for (int l = i + 1; l < k; ++l) {
      const Eigen::VectorXcd a = realization.est_small_scale.row(i).transpose();
      const Eigen::VectorXcd b = realization.est_small_scale.row(l).transpose();
      if (a.norm() == 0.0 || b.norm() == 0.0) continue;
      u(i, l) = u(l, i) = correlation(a, b);
    }
  }
  return u;
}

namespace {

// Builds groups 0..J-2 under the threshold; returns false when a group falls
// short of its target.
bool build_groups(const Eigen::MatrixXd& ups, const std::vector<int>& by_strength,
                  const std::vector<int>& targets, double threshold, GroupAssignment& out) {
  const int k = static_cast<int>(ups.rows());
  const int j_count = static_cast<int>(targets.size());
  std::vector<bool> used(k, false);
  out.groups.assign(j_count, {});
  for (int j = 0; j + 1 < j_count; ++j) {
    if (targets[j] == 0) continue;
    auto& g = out.groups[j];
    for (int u : by_strength) {
      if (!used[u]) {
        g.push_back(u);
        used[u] = true;
        break;
      }
    }
    if (g.empty()) return false;
    while (static_cast<int>(g.size()) < targets[j]) {
      int pick = -1;
      double pick_max = 0.0;
      for (int u = 0; u < k; ++u) {
        if (used[u]) continue;
        double m = 0.0;
        for (int v : g) m = std::max(m, ups(u, v));
        if (m <= threshold && (pick < 0 || m < pick_max)) {
          pick = u;
          pick_max = m;
        }
      }
      if (pick < 0) return false;
      g.push_back(pick);
      used[pick] = true;
    }
  }
  for (int u = 0; u < k; ++u) {
    if (!used[u]) out.groups.back().push_back(u);
  }
  return true;
}

}  // namespace

GroupAssignment heuristic_group(const ChannelRealization& realization, const ScenarioConfig& config) {
  const int k = realization.num_users();
  const int j_count = config.num_subcarriers;
  const auto targets = balanced_sizes(k, j_count, config.literal_balanced_rule);
  const Eigen::MatrixXd ups = correlation_matrix(realization);

  // Seeds are taken strongest first (estimated channel including path loss).
  std::vector<double> strength(k);
  for (int u = 0; u < k; ++u) {
    strength[u] = realization.large_scale(u) * realization.est_small_scale.row(u).squaredNorm();
  }
  std::vector<int> by_strength(k);
  std::iota(by_strength.begin(), by_strength.end(), 0);
  std::stable_sort(by_strength.begin(), by_strength.end(),
                   [&](int a, int b) { return strength[a] > strength[b]; });

  std::vector<double> levels{0.0};
  for (int i = 0; i < k; ++i) {
    for (int l = i + 1; l < k; ++l) levels.push_back(ups(i, l));
  }
  std::sort(levels.begin(), levels.end());
  levels.erase(std::unique(levels.begin(), levels.end()), levels.end());

  GroupAssignment best;
  // The largest level admits every candidate, so it always succeeds.
  std::size_t lo = 0, hi = levels.size() - 1;
  if (build_groups(ups, by_strength, targets, levels[0], best)) return best;
  build_groups(ups, by_strength, targets, levels[hi], best);
  while (hi - lo > 1) {
    const std::size_t mid = (lo + hi) / 2;
    GroupAssignment trial;
    if (build_groups(ups, by_strength, targets, levels[mid], trial)) {
      hi = mid;
      best = std::move(trial);
    } else {
      lo = mid;
    }
  }
  return best;
}

GroupAssignment random_group(int num_users, int num_groups, RngStream& rng) {
  check_shape(num_users, num_groups);
  std::uniform_int_distribution<int> pick(0, num_groups - 1);
  GroupAssignment a;
  a.groups.resize(num_groups);
  for (int k = 0; k < num_users; ++k) a.groups[pick(rng)].push_back(k);
  return a;
}

GroupAssignment exhaustive_group(int num_users, int num_groups, const GroupObjective& objective) {
  check_shape(num_users, num_groups);
  long long total = 1;
  for (int k = 0; k < num_users; ++k) {
    total *= num_groups;
    if (total > kExhaustiveLimit) throw std::invalid_argument("exhaustive_group: instance too large");
  }
  GroupAssignment best;
  double best_value = -1.0;
  std::vector<int> digit(num_users, 0);
  for (long long n = 0; n < total; ++n) {
    long long x = n;
    for (int k = 0; k < num_users; ++k) {
      digit[k] = static_cast<int>(x % num_groups);
      x /= num_groups;
    }
    std::vector<std::vector<int>> g(num_groups);
    for (int k = 0; k < num_users; ++k) g[digit[k]].push_back(k);
    const double v = objective(g);
    if (v > best_value) {
      best_value = v;
      best.groups = std::move(g);
    }
  }
  return best;
}

GroupAssignment exhaustive_group(const ChannelRealization& realization, const ScenarioConfig& config,
                                 Evaluator evaluator, TransmissionMode mode) {
  return exhaustive_group(realization.num_users(), config.num_subcarriers,
                          [&](const std::vector<std::vector<int>>& g) {
                            return evaluate_grouping(realization, config, g, evaluator, mode);
                          });
}

nlohmann::json to_json(const GroupAssignment& g) { return g.groups; }

GroupAssignment assignment_from_json(const nlohmann::json& j) {
  if (!j.is_array()) throw std::invalid_argument("group assignment: expected an array of arrays");
  GroupAssignment g;
  for (const auto& row : j) {
    if (!row.is_array()) throw std::invalid_argument("group assignment: expected an array of arrays");
    std::vector<int> members;
    for (const auto& u : row) {
      if (!u.is_number_integer()) throw std::invalid_argument("group assignment: user ids must be integers");
      members.push_back(u.get<int>());
    }
    g.groups.push_back(std::move(members));
  }
  return g;
}

}  // namespace rsma

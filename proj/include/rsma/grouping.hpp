#pragma once

// User-to-subcarrier assignment: greedy search driven by an allocation
// solver, the correlation-threshold heuristic, a random baseline and an
// exhaustive oracle for tiny instances.

#include "rsma/allocation.hpp"
#include "rsma/channel.hpp"
#include "rsma/scenario.hpp"

#include <functional>
#include <string>
#include <vector>

#include "json.hpp"

namespace rsma {

struct GroupAssignment {
  std::vector<std::vector<int>> groups;  // J groups of user indices; may be empty

  int num_groups() const { return static_cast<int>(groups.size()); }
  std::vector<int> sizes() const;
  /// True when the groups are a disjoint cover of 0..num_users-1.
  bool is_partition(int num_users) const;
  bool operator==(const GroupAssignment&) const = default;
};

enum class Evaluator { lba, cccp };
std::string to_string(Evaluator e);

/// Objective of a (possibly partial) assignment: the bound reached by the
/// chosen solver on the users placed so far. Infeasible or failed solves
/// score 0. LBA runs with equal budgets, CCCP with joint budgets.
double evaluate_grouping(const ChannelRealization& realization, const ScenarioConfig& config,
                         const std::vector<std::vector<int>>& groups, Evaluator evaluator,
                         TransmissionMode mode = TransmissionMode::rsma);

using GroupObjective = std::function<double(const std::vector<std::vector<int>>&)>;

/// Places users 0..K-1 in order, each on the group that maximizes the
/// objective after placement; ties go to the lowest group index. Calls the
/// objective exactly J K times.
GroupAssignment greedy_group(int num_users, int num_groups, const GroupObjective& objective);
GroupAssignment greedy_group(const ChannelRealization& realization, const ScenarioConfig& config,
                             Evaluator evaluator = Evaluator::lba,
                             TransmissionMode mode = TransmissionMode::rsma);

/// Target sizes for the heuristic. Default: the first K mod J groups get
/// floor(K/J) + 1 users. With config.literal_balanced_rule the extra user
/// goes to every group j >= K mod J (1-based), clamped to the users left,
/// and the last group takes the remainder.
std::vector<int> balanced_sizes(int num_users, int num_groups, bool literal_rule);

/// Pairwise correlation of the estimated channels, zero diagonal. Users with
/// an all-zero estimate correlate 0 with everyone.
Eigen::MatrixXd correlation_matrix(const ChannelRealization& realization);

/// Groups 1..J-1 collect users whose pairwise correlation stays below a
/// threshold; the rest go to the last group. The threshold is the smallest
/// observed correlation value at which every group reaches its target size.
GroupAssignment heuristic_group(const ChannelRealization& realization, const ScenarioConfig& config);

/// Each user independently uniform over the groups.
GroupAssignment random_group(int num_users, int num_groups, RngStream& rng);

/// Largest J^K accepted by exhaustive_group.
inline constexpr long long kExhaustiveLimit = 1LL << 16;

/// Enumerates all J^K assignments and returns the argmax (first found on
/// ties). Throws std::invalid_argument above kExhaustiveLimit.
GroupAssignment exhaustive_group(int num_users, int num_groups, const GroupObjective& objective);
GroupAssignment exhaustive_group(const ChannelRealization& realization, const ScenarioConfig& config,
                                 Evaluator evaluator = Evaluator::lba,
                                 TransmissionMode mode = TransmissionMode::rsma);

nlohmann::json to_json(const GroupAssignment& g);
GroupAssignment assignment_from_json(const nlohmann::json& j);

}  // namespace rsma

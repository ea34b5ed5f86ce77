#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "adviser/common.hpp"
#include "json.hpp"

namespace adviser {

struct UnitCosts {
  double phone_call = 1.5;
  double travel_voucher = 1.1;
  double vaccine_drive = 20.0;  // per drive assignment
};

struct Capacities {
  int vehicles = 4;
  int calls = 200;
  int nurse_days = 10;
  int drives_per_nurse_day = 12;
};

inline constexpr int kUnlimited = std::numeric_limits<int>::max() / 4;

struct ProblemBeneficiary {
  std::string id;
  double p_none = 0.0;
  std::array<double, kNumKinds> p{};        // success probability per kind
  std::array<bool, kNumKinds> allowed{};    // pickups additionally need a selected route
  bool eligible = true;                     // has a dose due in the window
  int drive_block = -1;                     // required for drives

  double need(InterventionKind k) const { return p[index_of(k)] - p_none; }
};

struct ProblemRoute {
  int id = 0;
  std::string vehicle;
  double cost = 0.0;
  std::vector<int> members;  // beneficiary indices
};

struct AllocationProblem {
  std::vector<ProblemBeneficiary> beneficiaries;
  std::vector<ProblemRoute> routes;       // route i has id i
  double budget = 0.0;                    // may be +infinity
  UnitCosts costs;
  Capacities caps;
  std::vector<int> block_preload;         // drives already committed per block

  double unit_cost(InterventionKind k) const;  // 0 for pickups (paid per route)
  double baseline_objective() const;           // everyone unassigned
};

// Throws ValidationError on malformed problems (negative budget or
// capacities, probabilities outside [0, 1], bad route members, ...).
void validate_problem(const AllocationProblem& p);

struct Assignment {
  std::string beneficiary_id;
  InterventionKind kind = InterventionKind::kPhoneCall;
  std::optional<int> route_id;     // iff pickup
  std::optional<int> drive_block;  // iff drive

  friend bool operator==(const Assignment&, const Assignment&) = default;
};

struct DriveBatch {
  int block = 0;
  int drives = 0;      // including preloaded ones
  int nurse_days = 0;

  friend bool operator==(const DriveBatch&, const DriveBatch&) = default;
};

struct SolverStats {
  long nodes = 0;
  long pruned = 0;
  long incumbent_updates = 0;
  int max_depth = 0;
  bool hit_node_cap = false;
  bool hit_time_cap = false;
};

struct Plan {
  std::vector<Assignment> assignments;  // beneficiary order
  std::vector<int> routes;              // selected route ids, ascending
  std::vector<DriveBatch> drive_batches;
  double total_cost = 0.0;
  double objective = 0.0;
  bool optimal = false;
  double best_bound = 0.0;
  double gap = 0.0;
  SolverStats stats;
};

// Per-beneficiary decision codes: 0 none, 1 + kind index otherwise.
using Codes = std::vector<std::int8_t>;

double plan_objective(const AllocationProblem& p, const Codes& codes);
// Builds a plan from codes and a route selection. Pickups ride the
// smallest selected route that contains them.
Plan make_plan(const AllocationProblem& p, const Codes& codes, std::vector<int> routes);

// Fixings: -1 excluded, 0 free, 1 included.
struct NodeFixing {
  std::vector<std::int8_t> route;
  std::vector<std::array<std::int8_t, kNumKinds>> pair;

  static NodeFixing root(const AllocationProblem& p);
};

// Lagrangian upper bound on the best objective of any completion of `node`
// (budget and call/drive capacities relaxed; multipliers by bisection).
// Returns -infinity when the node has no feasible completion by inspection.
double upper_bound(const AllocationProblem& p, const NodeFixing& node);

struct BnBLimits {
  long node_cap = 0;          // 0 disables
  double time_cap_seconds = 0.0;  // 0 disables; makes results timing dependent
  // Called for every expanded node with its (monotone) bound.
  std::function<void(const NodeFixing&, double)> on_node;
};

Plan branch_and_bound(const AllocationProblem& p, const BnBLimits& limits = {});

inline constexpr std::size_t kBruteForceMaxBeneficiaries = 12;
inline constexpr std::size_t kBruteForceMaxRoutes = 8;

// Exhaustive enumeration; ties go to the lexicographically smallest code
// vector, then the smallest route selection. Honours an optional fixing.
Plan brute_force(const AllocationProblem& p, const NodeFixing* fixing = nullptr);

struct PruneResult {
  Plan partial;                       // pre-assigned drives on the original problem
  AllocationProblem reduced;
  std::vector<std::size_t> kept;      // reduced index -> original index
  double threshold = 0.0;
};

// Median need/cost ratio over allowed call, voucher and drive pairs.
double median_ratio(const AllocationProblem& p);

// Drives whose need/cost ratio exceeds the threshold (default 2x the median
// ratio) are pre-assigned in descending ratio order within
// budget_fraction * budget and the nurse-day capacity.
PruneResult greedy_prune(const AllocationProblem& p, std::optional<double> ratio_threshold,
                         double budget_fraction);

// Combines a prune result with a plan for the reduced problem.
Plan merge_plans(const AllocationProblem& original, const PruneResult& pruned,
                 const Plan& reduced_plan);

enum class PlanViolation : std::uint8_t {
  kOneMatch,
  kBudget,
  kVehicleCount,
  kRouteMembership,
  kEligibility,
  kCallCapacity,
  kDriveCapacity,
  kDriveBatch,
  kAccounting,  // reported totals disagree with recomputation
};

std::string_view to_string(PlanViolation v);

struct PlanVerdict {
  bool valid = true;
  std::vector<PlanViolation> violations;
  std::vector<std::string> details;

  bool has(PlanViolation v) const;
};

PlanVerdict validate_plan(const Plan& plan, const AllocationProblem& p);

nlohmann::ordered_json to_json(const Plan& plan);
Plan plan_from_json(const nlohmann::json& j);
nlohmann::ordered_json to_json(const AllocationProblem& p);
AllocationProblem problem_from_json(const nlohmann::json& j);

}  // namespace adviser

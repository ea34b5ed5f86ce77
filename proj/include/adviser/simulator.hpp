#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "adviser/domain.hpp"
#include "adviser/ingest.hpp"
#include "adviser/solver.hpp"
#include "adviser/success_model.hpp"
#include "adviser/travel_grid.hpp"
#include "json.hpp"

namespace adviser {

// Latent two-factor world. Awareness a and access c in (0, 1):
//   none    a * c
//   call    (a + call_lift (1 - a)) * c        (reachable phones only)
//   voucher a * (c + voucher_lift (1 - c))
//   pickup  (a + pickup_lift (1 - a)) * pickup_show
//   drive   1
struct PopulationParams {
  std::size_t n = 2000;
  double low_income_share = 0.46;
  double low_income_threshold = 25.0;  // USD per month
  double aware_share = 0.5;
  double unreachable_share = 0.1;
  double unresolved_share = 0.02;      // records without an address
  double windowed_share = 0.3;         // records with a restricted pickup window
  double call_lift = 0.5;
  double voucher_lift = 0.6;
  double pickup_lift = 0.3;
  double pickup_show = 0.97;
  TimeWindow period{parse_date("2024-03-04"), parse_date("2024-03-10")};
  BoundingBox box = kIbadanBox;
  double cell_km = 1.0;
  double speed_kmh = 20.0;
  int centers = 8;
};

// Throws ValidationError for shares outside [0, 1], n == 0 and the like.
void validate_params(const PopulationParams& params);

struct GroundTruth {
  std::vector<std::string> ids;
  std::vector<double> none;
  std::vector<std::array<double, kNumKinds>> by_kind;

  std::size_t size() const { return ids.size(); }
};

struct World {
  PopulationParams params;
  std::vector<RawRecord> registry;
  std::vector<HealthCenter> centers;
  std::vector<LatLon> center_locations;
  GroundTruth truth;
  std::vector<double> awareness;
  std::vector<double> access;
};

World synth_population(const PopulationParams& params, std::uint64_t seed);

// Historical outcomes for model training: a fresh population from the same
// params, arms drawn uniformly over none and the four kinds.
ArmExamples synth_training_data(const PopulationParams& params, std::size_t samples,
                                std::uint64_t seed);

// Phone calls to every eligible reachable beneficiary in problem order
// while call capacity and budget last.
Plan baseline_policy(const AllocationProblem& p);

struct Policy {
  std::string name;
  Plan plan;
  double budget = 0.0;
};

struct PolicyResult {
  std::string name;
  double rate = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  double expected_rate = 0.0;  // from the truth, no sampling
  std::map<std::string, std::size_t> kinds;  // assignment counts, "none" included
  double spend = 0.0;
  double budget = 0.0;
};

struct EvalReport {
  int reps = 0;
  std::uint64_t seed = 0;
  std::size_t population = 0;
  std::vector<PolicyResult> policies;
};

// Replication r draws one uniform per beneficiary from a stream seeded by
// (seed, r); every policy sees the same draws. Rates are the success share
// over the truth population, averaged over replications with
// normal-approximation 95% intervals.
EvalReport evaluate(const std::vector<Policy>& policies, const GroundTruth& truth, int reps,
                    std::uint64_t seed, int threads = 1);

nlohmann::ordered_json to_json(const EvalReport& r);
// Plain-text table: method, success rate, interval, spend.
std::string summary_table(const EvalReport& r, const std::string& period_label);

struct SimulationFiles {
  std::filesystem::path registry;
  std::filesystem::path centers;
  std::filesystem::path model;
  std::filesystem::path config;
};

// Writes a world's registry and centers, trains a model set on synthetic
// history, and writes a pipeline config for `budget`.
SimulationFiles write_simulation_inputs(const World& world, const std::filesystem::path& dir,
                                        double budget, std::size_t training_samples,
                                        std::uint64_t seed);

}  // namespace adviser

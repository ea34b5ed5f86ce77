#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "adviser/domain.hpp"
#include "adviser/ingest.hpp"
#include "adviser/routing.hpp"
#include "adviser/solver.hpp"
#include "adviser/travel_grid.hpp"
#include "json.hpp"

namespace adviser {

// A stage that failed. Artifacts of earlier stages stay on disk so the run
// can be resumed.
class StageError : public Error {
 public:
  StageError(std::string stage, const std::string& message)
      : Error("stage " + stage + ": " + message), stage_(std::move(stage)) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

struct PruneParams {
  bool enabled = true;
  std::optional<double> ratio_threshold;  // default: 2x the median ratio
  double budget_fraction = 0.5;
};

struct RoutingParams {
  int vehicles = 4;
  int capacity = 15;
  double speed_kmh = 20.0;
  std::string period = "morning";
  // Highest pickup-need beneficiaries offered to the route generator.
  std::size_t max_candidates = 60;
  RoutingConfig config;
  GlsParams gls;
};

struct SolveParams {
  long node_cap = 5000;
  double time_cap_seconds = 0.0;  // 0 keeps runs deterministic
};

struct PipelineConfig {
  TimeWindow period;
  double budget = 0.0;
  std::filesystem::path registry;
  std::filesystem::path model;
  std::filesystem::path centers;  // CSV: id,lat,lon[,deadline HH:MM]
  std::filesystem::path matrix;   // persisted travel matrix base path
  std::filesystem::path geocode_cache;  // empty: in-memory only
  std::filesystem::path run_root = "runs";
  std::uint64_t seed = 1;
  UnitCosts costs;
  Capacities caps;
  BoundingBox box = kIbadanBox;
  double cell_km = 1.0;
  std::optional<LatLon> depot;    // default: box center
  int half_width = kDefaultHalfWidth;
  int drive_block_cells = 2;      // drive blocks are square groups of cells
  PruneParams prune;
  RoutingParams routing;
  SolveParams solve;
  int threads = 1;
};

// Relative paths are resolved against the config file's directory. Throws
// ValidationError on unknown keys, bad values or missing input files.
PipelineConfig load_pipeline_config(const std::filesystem::path& path);
PipelineConfig pipeline_config_from_json(const nlohmann::json& j,
                                         const std::filesystem::path& base_dir = {});
nlohmann::ordered_json to_json(const PipelineConfig& cfg);
void check_inputs(const PipelineConfig& cfg);

// Stable hash of the config and the contents of its input files.
std::string config_fingerprint(const PipelineConfig& cfg);
std::filesystem::path run_directory(const PipelineConfig& cfg);

inline const std::vector<std::string>& stage_names() {
  static const std::vector<std::string> names = {"ingest", "eligibility", "estimate", "prune",
                                                 "routes", "solve",       "emit"};
  return names;
}

// Stage artifact file names inside the run directory.
std::string stage_artifact(const std::string& stage);

struct StageCounts {
  std::size_t registry_rows = 0;
  std::size_t row_errors = 0;
  std::size_t unresolved = 0;
  std::size_t eligible = 0;
  std::size_t pruned = 0;
  std::size_t route_candidates = 0;
  std::size_t routes_generated = 0;
  long nodes_explored = 0;
  std::size_t assignments = 0;
};

struct RunReport {
  std::string run_id;
  StageCounts counts;
  std::string plan_file;
  double objective = 0.0;
  double baseline_objective = 0.0;
  double total_cost = 0.0;
  double gap = 0.0;
  bool optimal = false;
};

nlohmann::ordered_json to_json(const RunReport& r);

// Wall-clock seconds per stage plus provider queries issued. Kept out of
// the report so reports stay bit-identical across runs.
struct RunTimings {
  std::map<std::string, double> seconds;
  std::uint64_t geocode_queries = 0;
  std::uint64_t travel_queries = 0;
};

struct RunOptions {
  bool resume = false;  // skip stages whose artifacts already exist
};

struct RunResult {
  Plan plan;
  RunReport report;
  RunTimings timings;
  std::filesystem::path run_dir;
};

// ingest -> eligibility -> estimate -> prune -> routes -> solve -> emit.
// Each stage reads its inputs from the previous stages' artifacts.
RunResult run_pipeline(const PipelineConfig& cfg, const RunOptions& opts = {});

// Runs one stage from persisted inputs. A missing predecessor artifact
// raises StageError naming that predecessor.
RunTimings run_stage(const std::string& name, const PipelineConfig& cfg);

struct GridBuild {
  TravelTimeMatrix matrix;
  std::uint64_t geocode_queries = 0;
  std::uint64_t travel_queries = 0;
};

// Builds or extends the persisted travel matrix over every cell occupied by
// the registry, the centers and the depot. Runs ingest first if its
// artifact is missing.
GridBuild build_run_matrix(const PipelineConfig& cfg);

// Drive block of a cell: square groups of `block_cells` cells.
int drive_block_of(CellId c, const Grid& grid, int block_cells);

// Loads the full allocation problem (no routes) written by the prune stage.
AllocationProblem load_full_problem(const std::filesystem::path& run_dir);
RoutePool load_run_pool(const std::filesystem::path& run_dir);

std::vector<HealthCenter> load_centers(const std::filesystem::path& path, const Grid& grid);

enum class PlanFormat { kJson, kFieldsheet };

// JSON: the plan plus the selected routes' stops. Fieldsheet: one row per
// assignment, ordered by route (stop order within a route), then kind, then
// beneficiary id. Throws Error when the destination cannot be written.
void emit_plan(const Plan& plan, const RoutePool& pool, PlanFormat format,
               const std::filesystem::path& path);
void write_fieldsheet(std::ostream& out, const Plan& plan, const RoutePool& pool);
nlohmann::ordered_json plan_document(const Plan& plan, const RoutePool& pool);

}  // namespace adviser

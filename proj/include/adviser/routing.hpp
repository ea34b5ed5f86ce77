#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "adviser/common.hpp"
#include "adviser/domain.hpp"
#include "adviser/travel_grid.hpp"
#include "json.hpp"

namespace adviser {

struct VehicleSpec {
  std::string id;
  int capacity = 15;
  int shift_start_minute = 8 * 60;
  CellId depot;
};

struct RoutingConfig {
  int dwell_minutes = 5;            // per pickup or dropoff stop
  int center_service_minutes = 60;  // time at the center before dropoffs start
  double dispatch_cost = 15.0;
  double cost_per_minute = 0.1;     // driving minutes over the whole route
};

// A beneficiary the vehicle may pick up. `need` is the pickup need score.
struct RouteCandidate {
  std::string id;
  CellId cell;
  std::vector<DailyWindow> availability;  // empty means any time
  double need = 0.0;
};

enum class StopKind : std::uint8_t { kPickup, kCenter, kDropoff };

struct Stop {
  StopKind kind = StopKind::kPickup;
  CellId cell;
  std::string ref;  // beneficiary id, or center id for the center stop
  int arrival_minute = 0;  // service start; pickups may wait for availability

  friend bool operator==(const Stop&, const Stop&) = default;
};

struct Route {
  int id = 0;
  std::string vehicle_id;
  std::vector<Stop> stops;  // pickups, one center, dropoffs in pickup order
  std::vector<std::string> served;  // pickup order
  double value = 0.0;
  double cost = 0.0;
  int driving_minutes = 0;

  bool empty() const { return stops.empty(); }
  friend bool operator==(const Route&, const Route&) = default;
};

enum class RouteViolation : std::uint8_t {
  kCapacity,
  kDeadline,
  kAvailability,
  kTimeConsistency,
  kStructure,
};

std::string_view to_string(RouteViolation v);

struct RouteVerdict {
  bool feasible = true;
  std::vector<RouteViolation> violations;  // each kind at most once
  std::vector<std::string> details;

  bool has(RouteViolation v) const;
};

// Everything the timing rules need. The matrix must contain every depot,
// candidate and center cell.
struct RoutingContext {
  const TravelTimeMatrix& matrix;
  std::span<const VehicleSpec> vehicles;
  std::span<const HealthCenter> centers;
  std::span<const RouteCandidate> candidates;
  RoutingConfig config;
};

RouteVerdict route_feasible(const Route& r, const RoutingContext& ctx);

// Times a pickup sequence: waits for availability, goes to the center
// nearest the last pickup, then drops off in pickup order. Returns nullopt
// when capacity, availability or the center deadline fails. Indices refer
// to ctx.candidates.
std::optional<Route> build_route(const VehicleSpec& v, std::span<const std::size_t> sequence,
                                 const RoutingContext& ctx);

// Greedy insertion in descending need order at the cheapest feasible position.
Route construct_initial(const VehicleSpec& v, const RoutingContext& ctx);

struct GlsParams {
  int iterations = 2000;
  std::optional<double> lambda;       // default: lambda_factor * mean arc time
  double lambda_factor = 0.2;
  std::size_t pool_cap = 200;         // per vehicle
  std::uint64_t seed = 1;
  double value_weight = 100.0;        // minutes of driving worth one unit of need
};

enum class MoveKind : std::uint8_t { kInsert, kRemove, kExchange, kSwap, kRelocate };
std::string_view to_string(MoveKind m);

struct MoveRecord {
  int iteration = 0;
  MoveKind kind = MoveKind::kInsert;
  double g_before = 0.0;  // augmented cost under the penalties at acceptance
  double g_after = 0.0;
  double value = 0.0;     // route value after the move
};

struct GlsRun {
  Route initial;
  std::vector<Route> routes;  // distinct feasible non-empty routes, best first
  std::vector<MoveRecord> log;
  std::map<std::pair<CellId, CellId>, int> penalties;  // directed arc -> count
  double lambda = 0.0;
};

// One seeded guided local search for a single vehicle.
GlsRun gls_run(const VehicleSpec& v, const RoutingContext& ctx, const GlsParams& params);

struct RoutePool {
  std::vector<Route> routes;  // ids are positions

  const Route& at(int id) const;
  double best_value() const;
};

// Runs every vehicle (concurrently when `threads` > 1) and concatenates the
// per-vehicle pools in vehicle order. Every route is checked with
// route_feasible before it is emitted.
RoutePool gls_generate(const RoutingContext& ctx, const GlsParams& params, int threads = 1);

nlohmann::ordered_json to_json(const Route& r);
Route route_from_json(const nlohmann::json& j);
// One JSON object per line.
void write_pool_jsonl(std::ostream& out, const RoutePool& pool);
RoutePool read_pool_jsonl(std::istream& in);
void save_pool(const RoutePool& pool, const std::filesystem::path& path);
RoutePool load_pool(const std::filesystem::path& path);

}  // namespace adviser

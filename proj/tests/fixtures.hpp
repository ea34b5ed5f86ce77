#pragma once

// Seeded instance generators shared by unit and acceptance tests.

#include <algorithm>
#include <cmath>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "adviser/routing.hpp"
#include "adviser/travel_grid.hpp"

namespace fixtures {

using namespace adviser;

inline const BoundingBox kSmallBox{7.30, 3.80, 7.40, 3.90};

struct RoutingInstance {
  Grid grid{kSmallBox, 1.0};
  TravelTimeMatrix matrix;
  std::vector<VehicleSpec> vehicles;
  std::vector<HealthCenter> centers;
  std::vector<RouteCandidate> candidates;
  RoutingConfig config;

  RoutingContext ctx() const { return {matrix, vehicles, centers, candidates, config}; }
};

struct RoutingShape {
  int candidates = 8;
  int capacity = 4;
  int vehicles = 1;
  int centers = 2;
  double speed_kmh = 20.0;
  double windowed_share = 0.4;  // candidates with a restricted availability window
};

inline std::unique_ptr<RoutingInstance> make_routing_instance(std::uint64_t seed,
                                                              const RoutingShape& shape) {
  auto inst = std::make_unique<RoutingInstance>();
  std::mt19937_64 rng(seed);
  const auto& g = inst->grid;
  std::uniform_int_distribution<int> row(0, g.rows() - 1);
  std::uniform_int_distribution<int> col(0, g.cols() - 1);
  std::uniform_real_distribution<double> need(0.02, 0.6);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> open(8 * 60, 10 * 60);
  std::uniform_int_distribution<int> width(20, 120);

  std::vector<CellId> cells;
  for (int c = 0; c < shape.centers; ++c) {
    HealthCenter h;
    h.id = "HC" + std::to_string(c);
    h.cell = {row(rng), col(rng)};
    inst->centers.push_back(h);
    cells.push_back(h.cell);
  }
  const CellId depot{g.rows() / 2, g.cols() / 2};
  cells.push_back(depot);
  for (int v = 0; v < shape.vehicles; ++v) {
    inst->vehicles.push_back({"V" + std::to_string(v), shape.capacity, 8 * 60, depot});
  }
  for (int i = 0; i < shape.candidates; ++i) {
    RouteCandidate c;
    c.id = "B" + std::to_string(i);
    c.cell = {row(rng), col(rng)};
    c.need = need(rng);
    if (u(rng) < shape.windowed_share) {
      const int s = open(rng);
      c.availability.push_back({s, s + width(rng)});
    }
    inst->candidates.push_back(c);
    cells.push_back(c.cell);
  }
  SyntheticTravelProvider provider(g, shape.speed_kmh);
  QueryCostLedger ledger;
  inst->matrix = build_matrix(g, cells, provider, "morning", ledger, {.full_grid = true});
  return inst;
}

}  // namespace fixtures

#include "adviser/solver.hpp"

namespace fixtures {

struct AllocationShape {
  int max_beneficiaries = 10;
  int max_routes = 6;
  double max_budget = 80.0;
  bool drive_guaranteed = false;   // drive success pinned at 1
  bool drive_dominant = false;     // other kinds barely help per unit cost
  bool tight_capacities = true;    // small call and nurse-day limits
};

inline double round_to(double v, double step) { return std::round(v / step) * step; }

// Small random allocation problems for oracle comparisons.
inline AllocationProblem make_allocation_problem(std::uint64_t seed, const AllocationShape& shape) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * u(rng); };
  const auto coin = [&](double p) { return u(rng) < p; };
  AllocationProblem p;
  const int n = 1 + static_cast<int>(u(rng) * shape.max_beneficiaries);
  for (int i = 0; i < n; ++i) {
    ProblemBeneficiary b;
    b.id = "B" + std::to_string(i);
    b.p_none = uniform(0.2, 0.6);
    const auto clip = [](double v) { return std::clamp(v, 0.0, 1.0); };
    if (shape.drive_dominant) {
      b.p[0] = clip(b.p_none + uniform(-0.02, 0.01));
      b.p[1] = clip(b.p_none + uniform(-0.02, 0.01));
    } else {
      b.p[0] = clip(b.p_none + uniform(-0.05, 0.2));
      b.p[1] = clip(b.p_none + uniform(0.0, 0.35));
    }
    b.p[2] = clip(b.p_none + (shape.drive_dominant ? uniform(0.0, 0.1) : uniform(0.05, 0.45)));
    b.p[3] = shape.drive_guaranteed ? 1.0 : uniform(0.85, 1.0);
    b.allowed = {coin(0.9), coin(0.9), true, coin(0.85)};
    b.eligible = coin(0.92);
    b.drive_block = static_cast<int>(u(rng) * 3);
    p.beneficiaries.push_back(b);
  }
  const int routes = static_cast<int>(u(rng) * (shape.max_routes + 1));
  for (int r = 0; r < routes; ++r) {
    ProblemRoute route;
    route.id = r;
    route.vehicle = "V" + std::to_string(static_cast<int>(u(rng) * 4));
    route.cost = round_to(uniform(10.0, 40.0), 0.1);
    const int size = 1 + static_cast<int>(u(rng) * std::min(4, n));
    std::vector<int> all(n);
    for (int i = 0; i < n; ++i) all[i] = i;
    std::shuffle(all.begin(), all.end(), rng);
    route.members.assign(all.begin(), all.begin() + size);
    std::sort(route.members.begin(), route.members.end());
    p.routes.push_back(route);
  }
  p.budget = round_to(uniform(0.0, shape.max_budget), 0.1);
  if (shape.tight_capacities) {
    p.caps.vehicles = coin(0.3) ? 1 + static_cast<int>(u(rng) * 3) : 4;
    p.caps.calls = coin(0.5) ? static_cast<int>(u(rng) * 5) : 200;
    p.caps.nurse_days = static_cast<int>(u(rng) * 3);
    p.caps.drives_per_nurse_day = coin(0.5) ? 2 : 12;
  }
  return p;
}

}  // namespace fixtures

#include <fstream>
#include <sstream>

#include "adviser/pipeline.hpp"
#include "adviser/simulator.hpp"

namespace fixtures {

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// A synthetic world written out as pipeline inputs under `dir`.
inline PipelineConfig pipeline_world(const std::filesystem::path& dir, std::size_t n, double budget,
                                     std::uint64_t seed = 11) {
  PopulationParams params;
  params.n = n;
  const auto world = synth_population(params, seed);
  const auto files = write_simulation_inputs(world, dir, budget, 3000, seed);
  auto cfg = load_pipeline_config(files.config);
  cfg.routing.gls.iterations = 400;
  return cfg;
}

// Pool routes attached to a problem by beneficiary id.
inline AllocationProblem with_routes(AllocationProblem p, const RoutePool& pool) {
  for (const auto& r : pool.routes) {
    ProblemRoute pr{r.id, r.vehicle_id, r.cost, {}};
    for (std::size_t b = 0; b < p.beneficiaries.size(); ++b) {
      if (std::find(r.served.begin(), r.served.end(), p.beneficiaries[b].id) != r.served.end()) {
        pr.members.push_back(static_cast<int>(b));
      }
    }
    p.routes.push_back(pr);
  }
  return p;
}

}  // namespace fixtures

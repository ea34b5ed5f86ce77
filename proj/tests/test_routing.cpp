#include <algorithm>
#include <sstream>

#include "adviser/routing.hpp"
#include "doctest.h"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace adviser;

namespace {

std::vector<std::size_t> indices_of(const RoutingContext& ctx, const std::vector<std::string>& ids) {
  std::vector<std::size_t> out;
  for (const auto& id : ids) {
    for (std::size_t i = 0; i < ctx.candidates.size(); ++i) {
      if (ctx.candidates[i].id == id) out.push_back(i);
    }
  }
  return out;
}

}  // namespace

TEST_CASE("route feasibility verdicts") {
  auto inst = fixtures::make_routing_instance(1, {.candidates = 16, .capacity = 15});
  // Everyone lives at the depot so only the seat count matters.
  const CellId depot = inst->vehicles[0].depot;
  for (auto& c : inst->candidates) {
    c.cell = depot;
    c.availability.clear();
  }
  inst->centers = {{"HC0", depot, 11 * 60}};
  inst->vehicles.push_back({"V16", 16, 8 * 60, depot});
  const auto ctx = inst->ctx();

  SUBCASE("empty route") {
    Route empty;
    empty.vehicle_id = "V0";
    CHECK(route_feasible(empty, ctx).feasible);
  }
  SUBCASE("sixteen pickups on fifteen seats") {
    std::vector<std::size_t> all(16);
    for (std::size_t i = 0; i < 16; ++i) all[i] = i;
    CHECK_FALSE(build_route(inst->vehicles[0], all, ctx).has_value());
    auto r = build_route(inst->vehicles[1], all, ctx);
    REQUIRE(r.has_value());
    CHECK(route_feasible(*r, ctx).feasible);
    r->vehicle_id = "V0";
    const auto v = route_feasible(*r, ctx);
    CHECK_FALSE(v.feasible);
    CHECK(v.violations == std::vector<RouteViolation>{RouteViolation::kCapacity});
  }
  SUBCASE("tampered structure and times") {
    std::vector<std::size_t> two = {0, 1};
    auto r = *build_route(inst->vehicles[0], two, ctx);
    auto late = r;
    late.stops[0].arrival_minute += 7;
    CHECK(route_feasible(late, ctx).has(RouteViolation::kTimeConsistency));
    auto swapped = r;
    std::swap(swapped.stops[3], swapped.stops[4]);
    CHECK(route_feasible(swapped, ctx).has(RouteViolation::kStructure));
    auto twice = r;
    twice.stops[1].ref = twice.stops[0].ref;
    CHECK(route_feasible(twice, ctx).has(RouteViolation::kStructure));
  }
}

TEST_CASE("center arrival at 11:20 breaks the deadline") {
  auto inst = fixtures::make_routing_instance(2, {.candidates = 1, .capacity = 4, .centers = 1});
  inst->candidates[0].availability.clear();
  inst->centers[0].cell = {1, 1};
  inst->candidates[0].cell = {6, 9};
  const auto& m = inst->matrix;
  auto& v = inst->vehicles[0];
  const int t1 = m.minutes(v.depot, inst->candidates[0].cell);
  const int t2 = m.minutes(inst->candidates[0].cell, inst->centers[0].cell);
  v.shift_start_minute = 11 * 60 + 20 - (t1 + inst->config.dwell_minutes + t2);

  // Build under a relaxed deadline, then check against 11:00.
  auto relaxed = inst->centers;
  relaxed[0].service_deadline_minute = 12 * 60;
  const RoutingContext lax{m, inst->vehicles, relaxed, inst->candidates, inst->config};
  const std::vector<std::size_t> one = {0};
  const auto r = build_route(v, one, lax);
  REQUIRE(r.has_value());
  CHECK(r->stops[1].arrival_minute == 11 * 60 + 20);
  const auto verdict = route_feasible(*r, inst->ctx());
  CHECK(verdict.violations == std::vector<RouteViolation>{RouteViolation::kDeadline});
  CHECK_FALSE(build_route(v, one, inst->ctx()).has_value());
}

TEST_CASE("route timing and cost arithmetic") {
  auto inst = fixtures::make_routing_instance(3, {.candidates = 3, .capacity = 4, .centers = 1});
  for (auto& c : inst->candidates) c.availability.clear();
  inst->candidates[1].availability = {{9 * 60 + 30, 10 * 60}};
  const auto ctx = inst->ctx();
  const auto& m = inst->matrix;
  const auto& v = inst->vehicles[0];
  const std::vector<std::size_t> seq = {0, 1, 2};
  const auto r = build_route(v, seq, ctx);
  REQUIRE(r.has_value());
  const auto& c = inst->candidates;
  const auto& hc = inst->centers[0];
  int t = v.shift_start_minute + m.minutes(v.depot, c[0].cell);
  int drive = m.minutes(v.depot, c[0].cell);
  CHECK(r->stops[0].arrival_minute == t);
  t = std::max(t + 5 + m.minutes(c[0].cell, c[1].cell), 9 * 60 + 30);
  drive += m.minutes(c[0].cell, c[1].cell);
  CHECK(r->stops[1].arrival_minute == t);
  t += 5 + m.minutes(c[1].cell, c[2].cell);
  drive += m.minutes(c[1].cell, c[2].cell);
  CHECK(r->stops[2].arrival_minute == t);
  t += 5 + m.minutes(c[2].cell, hc.cell);
  drive += m.minutes(c[2].cell, hc.cell);
  CHECK(r->stops[3].arrival_minute == t);
  t += 60;
  CellId prev = hc.cell;
  for (int i = 0; i < 3; ++i) {
    t += m.minutes(prev, c[i].cell);
    drive += m.minutes(prev, c[i].cell);
    CHECK(r->stops[4 + i].arrival_minute == t);
    t += 5;
    prev = c[i].cell;
  }
  CHECK(r->driving_minutes == drive);
  CHECK(r->cost == doctest::Approx(15.0 + 0.1 * drive));
  CHECK(r->value == doctest::Approx(c[0].need + c[1].need + c[2].need));
  CHECK(route_feasible(*r, ctx).feasible);
}

TEST_CASE("construct_initial") {
  SUBCASE("single candidate beside the center, shift at 09:00") {
    auto inst = fixtures::make_routing_instance(4, {.candidates = 1, .capacity = 15, .centers = 1});
    inst->candidates[0].cell = {inst->centers[0].cell.row, inst->centers[0].cell.col};
    inst->candidates[0].availability.clear();
    inst->vehicles[0].shift_start_minute = 9 * 60;
    const auto r = construct_initial(inst->vehicles[0], inst->ctx());
    CHECK(r.served == std::vector<std::string>{"B0"});
    CHECK(route_feasible(r, inst->ctx()).feasible);
  }
  SUBCASE("nobody available") {
    auto inst = fixtures::make_routing_instance(5, {.candidates = 6, .capacity = 15});
    for (auto& c : inst->candidates) c.availability = {{6 * 60, 6 * 60 + 30}};
    CHECK(construct_initial(inst->vehicles[0], inst->ctx()).empty());
  }
  SUBCASE("ten candidates, three seats: greedy replay") {
    for (std::uint64_t seed = 10; seed < 20; ++seed) {
      auto inst = fixtures::make_routing_instance(seed, {.candidates = 10, .capacity = 3});
      const auto ctx = inst->ctx();
      const auto& v = inst->vehicles[0];
      const auto r = construct_initial(v, ctx);
      CHECK(r.served.size() <= 3);
      CHECK(route_feasible(r, ctx).feasible);

      std::vector<std::size_t> order(10);
      for (std::size_t i = 0; i < 10; ++i) order[i] = i;
      std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) {
        return ctx.candidates[a].need > ctx.candidates[b].need;
      });
      std::vector<std::size_t> seq;
      for (auto idx : order) {
        if (seq.size() == 3) break;
        int best_minutes = 1 << 30;
        int best_pos = -1;
        for (std::size_t pos = 0; pos <= seq.size(); ++pos) {
          auto trial = seq;
          trial.insert(trial.begin() + pos, idx);
          const auto t = build_route(v, trial, ctx);
          if (!t) continue;
          // Pickup-phase minutes: everything up to the center stop.
          int minutes = ctx.matrix.minutes(v.depot, t->stops[0].cell);
          for (std::size_t k = 1; k <= trial.size(); ++k) {
            minutes += ctx.matrix.minutes(t->stops[k - 1].cell, t->stops[k].cell);
          }
          if (minutes < best_minutes) {
            best_minutes = minutes;
            best_pos = static_cast<int>(pos);
          }
        }
        if (best_pos >= 0) seq.insert(seq.begin() + best_pos, idx);
      }
      std::vector<std::string> expected;
      for (auto i : seq) expected.push_back(ctx.candidates[i].id);
      CHECK(r.served == expected);
    }
  }
}

TEST_CASE("GLS with zero iterations returns the initial construction") {
  auto inst = fixtures::make_routing_instance(6, {.candidates = 12, .capacity = 5});
  const auto ctx = inst->ctx();
  const auto run = gls_run(inst->vehicles[0], ctx, {.iterations = 0});
  REQUIRE(run.routes.size() == 1);
  CHECK(run.routes[0].served == run.initial.served);
  CHECK(run.log.empty());
  CHECK_THROWS_AS(gls_run(inst->vehicles[0], ctx, {.iterations = -1}), ValidationError);
}

TEST_CASE("GLS keeps searching after penalties empty the route") {
  // Heavy arc penalties on six candidates eventually make the empty route
  // the cheapest; the run restarts instead of stopping there.
  auto inst = fixtures::make_routing_instance(930015, {.candidates = 6, .capacity = 15, .centers = 1});
  const auto ctx = inst->ctx();
  const auto run = gls_run(inst->vehicles[0], ctx, {.iterations = 2000, .seed = 930015});
  REQUIRE_FALSE(run.log.empty());
  CHECK(run.log.back().iteration > 1500);
  const auto oracle = oracles::best_route_by_enumeration(inst->vehicles[0], ctx);
  CHECK(run.routes.front().value == doctest::Approx(oracle.value).epsilon(1e-12));
}

TEST_CASE("GLS move log on a 30-candidate instance") {
  auto inst = fixtures::make_routing_instance(7, {.candidates = 30, .capacity = 15});
  const auto ctx = inst->ctx();
  const auto run = gls_run(inst->vehicles[0], ctx, {.iterations = 5000, .seed = 42});
  REQUIRE_FALSE(run.routes.empty());
  CHECK(run.routes.front().value >= run.initial.value);
  CHECK_FALSE(run.log.empty());
  double best = run.initial.value;
  for (const auto& m : run.log) {
    CHECK(m.g_after <= m.g_before);
    best = std::max(best, m.value);
  }
  CHECK(run.routes.front().value == doctest::Approx(best));
  CHECK(run.routes.size() <= 200);
  for (const auto& [arc, count] : run.penalties) CHECK(count > 0);
  for (const auto& r : run.routes) {
    CHECK(route_feasible(r, ctx).feasible);
    CHECK(r.served.size() <= 15);
  }
  for (std::size_t i = 1; i < run.routes.size(); ++i) {
    CHECK(run.routes[i - 1].value >= run.routes[i].value);
    CHECK(run.routes[i - 1].served != run.routes[i].served);
  }
}

TEST_CASE("GLS matches exhaustive enumeration on small instances") {
  int matched = 0;
  for (std::uint64_t seed = 100; seed < 120; ++seed) {
    auto inst = fixtures::make_routing_instance(seed, {.candidates = 8, .capacity = 4});
    const auto ctx = inst->ctx();
    const auto oracle = oracles::best_route_by_enumeration(inst->vehicles[0], ctx);
    const auto pool = gls_generate(ctx, {.iterations = 300, .seed = seed});
    if (std::abs(pool.best_value() - oracle.value) <= 1e-9) ++matched;
    CHECK(pool.best_value() <= oracle.value + 1e-9);
  }
  CHECK(matched >= 19);
}

TEST_CASE("pools are deterministic per seed and round-trip through JSON lines") {
  auto inst = fixtures::make_routing_instance(8, {.candidates = 20, .capacity = 8, .vehicles = 3});
  const auto ctx = inst->ctx();
  const GlsParams params{.iterations = 400, .seed = 9};
  const auto a = gls_generate(ctx, params);
  const auto b = gls_generate(ctx, params, 3);
  REQUIRE(a.routes.size() == b.routes.size());
  for (std::size_t i = 0; i < a.routes.size(); ++i) CHECK(a.routes[i] == b.routes[i]);
  for (std::size_t i = 0; i < a.routes.size(); ++i) CHECK(a.routes[i].id == static_cast<int>(i));

  std::stringstream text;
  write_pool_jsonl(text, a);
  const auto back = read_pool_jsonl(text);
  REQUIRE(back.routes.size() == a.routes.size());
  for (std::size_t i = 0; i < a.routes.size(); ++i) CHECK(back.routes[i] == a.routes[i]);
  CHECK_THROWS_AS(a.at(static_cast<int>(a.routes.size())), NotFoundError);

  std::stringstream broken("{\"id\": 0, \"vehicle\": \"V0\"}\n");
  CHECK_THROWS_AS(read_pool_jsonl(broken), ValidationError);
}

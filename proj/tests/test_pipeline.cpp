#include <fstream>
#include <set>

#include "adviser/pipeline.hpp"
#include "doctest.h"
#include "fixtures.hpp"
#include "test_util.hpp"

using namespace adviser;
namespace fs = std::filesystem;

namespace {

const std::vector<std::string> kArtifacts = {"ingest.json", "eligibility.json", "estimate.json",
                                             "prune.json",  "routes.jsonl",     "solve.json",
                                             "plan.json",   "fieldsheet.csv",   "report.json"};

void check_identical_runs(const fs::path& a, const fs::path& b) {
  for (const auto& name : kArtifacts) {
    INFO(name);
    CHECK(fixtures::slurp(a / name) == fixtures::slurp(b / name));
  }
}

}  // namespace

TEST_CASE("config parsing") {
  TempDir dir;
  auto cfg = fixtures::pipeline_world(dir.path(), 5, 10.0);
  const auto base = nlohmann::json::parse(fixtures::slurp(dir.path() / "config.json"));

  auto j = base;
  j["routing"]["typo"] = 1;
  CHECK_THROWS_AS(pipeline_config_from_json(j, dir.path()), ValidationError);
  j = base;
  j["budget"] = -1;
  CHECK_THROWS_AS(pipeline_config_from_json(j, dir.path()), ValidationError);
  j = base;
  j.erase("period");
  CHECK_THROWS_AS(pipeline_config_from_json(j, dir.path()), ValidationError);
  j = base;
  j["period"]["to"] = "2024-03-01";
  CHECK_THROWS_AS(pipeline_config_from_json(j, dir.path()), ValidationError);
  j = base;
  j["registry"] = "nowhere.csv";
  std::ofstream(dir.path() / "bad.json") << j.dump();
  CHECK_THROWS_AS(load_pipeline_config(dir.path() / "bad.json"), ValidationError);
  CHECK_THROWS_AS(load_pipeline_config(dir.path() / "absent.json"), ValidationError);

  const auto again = pipeline_config_from_json(to_json(cfg));
  CHECK(to_json(again) == to_json(cfg));
  CHECK(cfg.registry.is_absolute());

  // Output locations do not change the run id; the budget does.
  auto moved = cfg;
  moved.run_root = dir.path() / "elsewhere";
  CHECK(config_fingerprint(moved) == config_fingerprint(cfg));
  moved.budget += 1.0;
  CHECK(config_fingerprint(moved) != config_fingerprint(cfg));
}

TEST_CASE("empty registry gives an empty plan") {
  TempDir dir;
  auto cfg = fixtures::pipeline_world(dir.path(), 3, 100.0);
  const auto text = fixtures::slurp(cfg.registry);
  std::ofstream(cfg.registry, std::ios::trunc) << text.substr(0, text.find('\n') + 1);
  const auto res = run_pipeline(cfg);
  CHECK(res.plan.assignments.empty());
  const auto& c = res.report.counts;
  CHECK(c.registry_rows == 0);
  CHECK(c.eligible == 0);
  CHECK(c.pruned == 0);
  CHECK(c.routes_generated == 0);
  CHECK(c.assignments == 0);
  CHECK(res.report.objective == 0.0);
  CHECK(fixtures::slurp(res.run_dir / "fieldsheet.csv") ==
        "route,vehicle,stop,beneficiary,kind,pickup_time,center,drive_block\n");
}

TEST_CASE("200-beneficiary run") {
  TempDir dir;
  auto cfg = fixtures::pipeline_world(dir.path(), 200, 500.0);
  const auto first = run_pipeline(cfg);
  const auto full = load_full_problem(first.run_dir);
  const auto pool = load_run_pool(first.run_dir);
  const auto problem = fixtures::with_routes(full, pool);
  CHECK(validate_plan(first.plan, problem).valid);
  CHECK(first.plan.total_cost <= 500.0 + 1e-9);
  CHECK(first.plan.objective > full.baseline_objective());
  CHECK(first.report.counts.eligible == 200);
  CHECK(first.report.counts.assignments == first.plan.assignments.size());
  CHECK(first.report.counts.routes_generated == pool.routes.size());
  for (const auto& r : pool.routes) {
    const auto served = std::set<std::string>(r.served.begin(), r.served.end());
    CHECK(served.size() == r.served.size());
  }

  SUBCASE("repeat runs are bit-identical") {
    auto other = cfg;
    other.run_root = dir.path() / "second";
    const auto second = run_pipeline(other);
    CHECK(second.run_dir.filename() == first.run_dir.filename());
    check_identical_runs(first.run_dir, second.run_dir);
    CHECK(second.timings.geocode_queries == 0);
    CHECK(second.timings.travel_queries == 0);
  }
  SUBCASE("chained stages equal the full run") {
    auto other = cfg;
    other.run_root = dir.path() / "chained";
    for (const auto& s : stage_names()) run_stage(s, other);
    check_identical_runs(first.run_dir, run_directory(other));
  }
  SUBCASE("solve re-run on unchanged inputs") {
    const auto before = fixtures::slurp(first.run_dir / "solve.json");
    run_stage("solve", cfg);
    CHECK(fixtures::slurp(first.run_dir / "solve.json") == before);
  }
  SUBCASE("resume after a lost artifact") {
    fs::remove(first.run_dir / "routes.jsonl");
    fs::remove(first.run_dir / "solve.json");
    fs::remove(first.run_dir / "report.json");
    const auto resumed = run_pipeline(cfg, {.resume = true});
    CHECK(resumed.timings.seconds.count("ingest") == 0);
    CHECK(resumed.timings.seconds.count("routes") == 1);
    CHECK(to_json(resumed.plan) == to_json(first.plan));
  }
  SUBCASE("zero budget keeps the baseline objective") {
    auto zero = cfg;
    zero.budget = 0.0;
    const auto res = run_pipeline(zero);
    CHECK(res.plan.assignments.empty());
    CHECK(res.plan.objective == load_full_problem(res.run_dir).baseline_objective());
  }
}

TEST_CASE("stages need their predecessors") {
  TempDir dir;
  auto cfg = fixtures::pipeline_world(dir.path(), 20, 30.0);
  try {
    run_stage("estimate", cfg);
    FAIL("estimate ran without eligibility");
  } catch (const StageError& e) {
    CHECK(e.stage() == "eligibility");
    CHECK(std::string(e.what()).find("eligibility") != std::string::npos);
  }
  run_stage("ingest", cfg);
  CHECK_THROWS_AS(run_stage("estimate", cfg), StageError);
  run_stage("eligibility", cfg);
  CHECK_NOTHROW(run_stage("estimate", cfg));
  CHECK_THROWS_AS(run_stage("teleport", cfg), ValidationError);
}

TEST_CASE("plan emission") {
  TempDir dir;
  auto cfg = fixtures::pipeline_world(dir.path(), 120, 400.0, 5);
  cfg.prune.enabled = false;
  const auto res = run_pipeline(cfg);
  const auto pool = load_run_pool(res.run_dir);

  SUBCASE("json round trip is byte-identical") {
    const auto text = fixtures::slurp(res.run_dir / "plan.json");
    const auto doc = nlohmann::json::parse(text);
    for (const auto& r : doc.at("routes")) CHECK(pool.at(r.at("id").get<int>()) == route_from_json(r));
    const auto plan = plan_from_json(doc.at("plan"));
    emit_plan(plan, pool, PlanFormat::kJson, dir.path() / "again.json");
    CHECK(fixtures::slurp(dir.path() / "again.json") == text);
  }

  SUBCASE("fieldsheet groups route members in stop order") {
    // Two routes from different vehicles; only the layout matters here.
    Plan plan;
    std::vector<int> chosen;
    std::set<std::string> vehicles;
    for (const auto& r : pool.routes) {
      if (chosen.size() == 2 || vehicles.count(r.vehicle_id) || r.served.size() < 2) continue;
      chosen.push_back(r.id);
      vehicles.insert(r.vehicle_id);
    }
    REQUIRE(chosen.size() == 2);
    std::sort(chosen.begin(), chosen.end());
    for (int id : chosen) {
      for (const auto& b : pool.at(id).served) {
        plan.assignments.push_back({b, InterventionKind::kPickupService, id, std::nullopt});
      }
    }
    plan.assignments.push_back({"ZZ", InterventionKind::kPhoneCall, std::nullopt, std::nullopt});
    plan.assignments.push_back({"AA", InterventionKind::kVaccineDrive, std::nullopt, 3});
    std::reverse(plan.assignments.begin(), plan.assignments.end());
    plan.routes = chosen;

    std::ostringstream out;
    write_fieldsheet(out, plan, pool);
    auto lines = split(out.str(), '\n');
    while (!lines.empty() && lines.back().empty()) lines.pop_back();
    REQUIRE(lines.size() == 1 + plan.assignments.size());
    std::size_t row = 1;
    for (int id : chosen) {
      const auto& r = pool.at(id);
      int last_stop = 0;
      for (const auto& b : r.served) {
        const auto f = split(lines[row++], ',');
        CHECK(std::stoi(f[0]) == id);
        CHECK(f[3] == b);
        CHECK(std::stoi(f[2]) > last_stop);
        last_stop = std::stoi(f[2]);
        CHECK(f[6].rfind("HC", 0) == 0);
      }
    }
    CHECK(split(lines[row++], ',')[3] == "ZZ");
    const auto drive = split(lines[row++], ',');
    CHECK(drive[3] == "AA");
    CHECK(drive[7] == "3");
  }

  SUBCASE("unwritable destination") {
    std::ofstream(dir.path() / "file") << "x";
    CHECK_THROWS_AS(emit_plan(res.plan, pool, PlanFormat::kJson, dir.path() / "file" / "plan.json"),
                    std::exception);
  }
}

TEST_CASE("drive blocks and centers") {
  const Grid grid(fixtures::kSmallBox, 1.0);
  CHECK(drive_block_of({0, 0}, grid, 2) == 0);
  CHECK(drive_block_of({1, 1}, grid, 2) == 0);
  CHECK(drive_block_of({0, 2}, grid, 2) == 1);
  const int block_cols = (grid.cols() + 1) / 2;
  CHECK(drive_block_of({2, 0}, grid, 2) == block_cols);
  CHECK_THROWS_AS(drive_block_of({-1, 0}, grid, 2), ValidationError);

  TempDir dir;
  std::ofstream(dir.path() / "c.csv") << "id,lat,lon,deadline\nA,7.35,3.85,10:30\n";
  const auto centers = load_centers(dir.path() / "c.csv", grid);
  REQUIRE(centers.size() == 1);
  CHECK(centers[0].service_deadline_minute == 630);
  std::ofstream(dir.path() / "d.csv") << "id,lat,lon\nA,7.35,3.85\nA,7.36,3.85\n";
  CHECK_THROWS_AS(load_centers(dir.path() / "d.csv", grid), ValidationError);
  std::ofstream(dir.path() / "e.csv") << "id,lat,lon\nA,9.0,3.85\n";
  CHECK_THROWS_AS(load_centers(dir.path() / "e.csv", grid), ValidationError);
}

TEST_CASE("grid build ahead of a run") {
  TempDir dir;
  auto cfg = fixtures::pipeline_world(dir.path(), 60, 100.0, 8);
  const auto built = build_run_matrix(cfg);
  const auto c = built.matrix.cells().size();
  CHECK(built.travel_queries == c * c);
  CHECK(built.matrix.complete());
  CHECK(built.geocode_queries > 0);
  CHECK(build_run_matrix(cfg).travel_queries == 0);
  const auto res = run_pipeline(cfg);
  CHECK(res.timings.travel_queries == 0);
}

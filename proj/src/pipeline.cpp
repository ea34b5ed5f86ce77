#include "adviser/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <tuple>
#include <unordered_map>

#include "adviser/success_model.hpp"

namespace adviser {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

namespace {

constexpr const char* kTimestamp = "1970-01-01T00:00:00Z";

void write_text_atomic(const fs::path& path, const std::string& text) {
  if (!path.parent_path().empty()) fs::create_directories(path.parent_path());
  const auto tmp = fs::path(path.string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + path.string());
    out << text;
    if (!out) throw Error("cannot write " + path.string());
  }
  fs::rename(tmp, path);
}

void write_json(const fs::path& path, const ojson& j) { write_text_atomic(path, j.dump(2) + "\n"); }

nlohmann::json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw NotFoundError("cannot open " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

std::string file_digest(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot read input file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return hex64(fnv1a64(ss.str()));
}

// Tracks which keys of an object were consumed so leftovers can be reported.
class Reader {
 public:
  Reader(const nlohmann::json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) throw ValidationError(where_ + " must be an object");
  }

  bool has(const std::string& key) {
    seen_.insert(key);
    return j_.contains(key) && !j_.at(key).is_null();
  }
  const nlohmann::json& at(const std::string& key) {
    seen_.insert(key);
    if (!j_.contains(key)) throw ValidationError(where_ + ": missing '" + key + "'");
    return j_.at(key);
  }
  template <typename T>
  void opt(const std::string& key, T& out) {
    if (!has(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
      throw ValidationError(where_ + ": bad value for '" + key + "'");
    }
  }
  void finish() const {
    for (const auto& [k, v] : j_.items()) {
      if (!seen_.count(k)) throw ValidationError(where_ + ": unknown key '" + k + "'");
    }
  }

 private:
  const nlohmann::json& j_;
  std::string where_;
  std::set<std::string> seen_;
};

fs::path resolve(const fs::path& base, const std::string& p) {
  if (p.empty()) return {};
  const fs::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

ojson cell_json(const std::optional<CellId>& c) {
  if (!c) return nullptr;
  return ojson::array({c->row, c->col});
}

std::optional<CellId> cell_from(const nlohmann::json& j) {
  if (j.is_null()) return std::nullopt;
  return CellId{j.at(0).get<int>(), j.at(1).get<int>()};
}

std::string window_text(const DailyWindow& w) {
  return format_clock(w.start_minute) + "-" + format_clock(w.end_minute);
}

DailyWindow window_from(const std::string& s) {
  const auto parts = split(s, '-');
  if (parts.size() != 2) throw ValidationError("bad availability window " + s);
  return {parse_clock(parts[0]), parse_clock(parts[1])};
}

ojson beneficiary_json(const Beneficiary& b) {
  ojson j;
  j["id"] = b.id;
  j["cell"] = cell_json(b.home_cell);
  j["child_birth_date"] = format_date(b.child_birth_date);
  j["received_doses"] = std::vector<std::string>(b.received_doses.begin(), b.received_doses.end());
  auto av = ojson::array();
  for (const auto& w : b.availability) av.push_back(window_text(w));
  j["availability"] = std::move(av);
  j["phone_reachable"] = b.phone_reachable;
  j["features"] = b.features;
  return j;
}

Beneficiary beneficiary_from(const nlohmann::json& j) {
  Beneficiary b;
  b.id = j.at("id").get<std::string>();
  b.home_cell = cell_from(j.at("cell"));
  b.child_birth_date = parse_date(j.at("child_birth_date").get<std::string>());
  for (const auto& d : j.at("received_doses")) b.received_doses.insert(d.get<std::string>());
  for (const auto& w : j.at("availability")) b.availability.push_back(window_from(w.get<std::string>()));
  b.phone_reachable = j.at("phone_reachable").get<bool>();
  b.features = j.at("features").get<FeatureVector>();
  return b;
}

Grid make_grid(const PipelineConfig& cfg) { return Grid(cfg.box, cfg.cell_km); }

CellId depot_cell(const PipelineConfig& cfg, const Grid& grid) {
  const LatLon d = cfg.depot ? *cfg.depot
                             : LatLon{(cfg.box.lat_min + cfg.box.lat_max) / 2.0,
                                      (cfg.box.lon_min + cfg.box.lon_max) / 2.0};
  return snap_to_cell(d.lat, d.lon, grid);
}

struct StageContext {
  const PipelineConfig& cfg;
  fs::path dir;
  RunTimings timings;

  fs::path artifact(const std::string& stage) const { return dir / stage_artifact(stage); }

  nlohmann::json need(const std::string& stage) const {
    const auto p = artifact(stage);
    if (!fs::exists(p)) {
      throw StageError(stage, "missing artifact " + p.filename().string() + "; run stage '" + stage + "' first");
    }
    return read_json(p);
  }
};

std::vector<Beneficiary> load_ingested(const StageContext& ctx) {
  const auto j = ctx.need("ingest");
  std::vector<Beneficiary> out;
  for (const auto& b : j.at("beneficiaries")) out.push_back(beneficiary_from(b));
  return out;
}

// ---------------------------------------------------------------- stages

void stage_ingest(StageContext& ctx) {
  const auto& cfg = ctx.cfg;
  const auto models = load_model_set(cfg.model);
  const auto header = HeaderSpec::numeric(models.baseline.schema);
  const auto parsed = parse_registry(cfg.registry, header);
  const auto grid = make_grid(cfg);
  const auto provider = make_geocode_provider_from_env(cfg.box);
  GeocodeCache cache = cfg.geocode_cache.empty() ? GeocodeCache() : GeocodeCache(cfg.geocode_cache);
  QueryCostLedger ledger;

  auto errors = ojson::array();
  for (const auto& e : parsed.errors) errors.push_back({{"line", e.line}, {"message", e.message}});
  auto bens = ojson::array();
  std::size_t unresolved = 0;
  const auto& schedule = VaccineSchedule::default_schedule();
  for (std::size_t i = 0; i < parsed.records.size(); ++i) {
    const auto& r = parsed.records[i];
    std::optional<CellId> cell;
    try {
      const auto loc = geocode(r, *provider, cache, ledger, kTimestamp);
      cell = snap_to_cell(loc.lat, loc.lon, grid);
    } catch (const ValidationError&) {
      ++unresolved;
    }
    auto b = to_beneficiary(r, cell);
    try {
      validate_beneficiary(b, schedule);
    } catch (const ValidationError& e) {
      errors.push_back({{"id", r.id}, {"message", e.what()}});
      continue;
    }
    bens.push_back(beneficiary_json(b));
  }
  ojson j;
  j["rows"] = parsed.records.size() + parsed.errors.size();
  j["unresolved"] = unresolved;
  j["errors"] = std::move(errors);
  j["beneficiaries"] = std::move(bens);
  write_json(ctx.artifact("ingest"), j);
  ctx.timings.geocode_queries += ledger.queries();
}

void stage_eligibility(StageContext& ctx) {
  const auto registry = load_ingested(ctx);
  const auto entries = eligible_beneficiaries(registry, VaccineSchedule::default_schedule(),
                                              ctx.cfg.period, ctx.cfg.half_width);
  auto list = ojson::array();
  for (const auto& e : entries) {
    auto doses = ojson::array();
    for (const auto& d : e.doses) {
      doses.push_back({{"dose", d.dose.key()},
                       {"from", format_date(d.window.start)},
                       {"to", format_date(d.window.end)}});
    }
    list.push_back({{"index", e.registry_index}, {"id", registry[e.registry_index].id}, {"doses", doses}});
  }
  ojson j;
  j["period"] = {{"from", format_date(ctx.cfg.period.start)}, {"to", format_date(ctx.cfg.period.end)}};
  j["eligible"] = std::move(list);
  write_json(ctx.artifact("eligibility"), j);
}

void stage_estimate(StageContext& ctx) {
  const auto eligible = ctx.need("eligibility").at("eligible");
  const auto registry = load_ingested(ctx);
  const auto models = load_model_set(ctx.cfg.model);
  auto rows = ojson::array();
  for (const auto& e : eligible) {
    const auto& b = registry.at(e.at("index").get<std::size_t>());
    ojson r;
    r["id"] = b.id;
    r["p_none"] = predict(models.baseline, b.features);
    auto p = ojson::array();
    for (auto k : kAllKinds) p.push_back(predict(models.at(k), b.features));
    r["p"] = std::move(p);
    rows.push_back(std::move(r));
  }
  ojson j;
  j["kinds"] = {"phone_call", "travel_voucher", "pickup_service", "vaccine_drive"};
  j["estimates"] = std::move(rows);
  write_json(ctx.artifact("estimate"), j);
}

AllocationProblem build_full_problem(const StageContext& ctx) {
  const auto& cfg = ctx.cfg;
  const auto registry = load_ingested(ctx);
  const auto eligible = ctx.need("eligibility").at("eligible");
  const auto estimates = ctx.need("estimate").at("estimates");
  if (eligible.size() != estimates.size()) {
    throw StageError("estimate", "estimates do not match the eligibility list; rerun 'estimate'");
  }
  const auto grid = make_grid(cfg);
  AllocationProblem p;
  p.budget = cfg.budget;
  p.costs = cfg.costs;
  p.caps = cfg.caps;
  for (std::size_t i = 0; i < eligible.size(); ++i) {
    const auto& b = registry.at(eligible[i].at("index").get<std::size_t>());
    const auto& est = estimates[i];
    if (est.at("id").get<std::string>() != b.id) {
      throw StageError("estimate", "estimates do not match the eligibility list; rerun 'estimate'");
    }
    ProblemBeneficiary x;
    x.id = b.id;
    x.p_none = est.at("p_none").get<double>();
    for (std::size_t k = 0; k < kNumKinds; ++k) x.p[k] = est.at("p").at(k).get<double>();
    const bool located = b.home_cell.has_value();
    x.allowed = {b.phone_reachable, located, located, located};
    x.eligible = true;
    x.drive_block = located ? drive_block_of(*b.home_cell, grid, cfg.drive_block_cells) : -1;
    p.beneficiaries.push_back(std::move(x));
  }
  return p;
}

void stage_prune(StageContext& ctx) {
  const auto& cfg = ctx.cfg;
  const auto full = build_full_problem(ctx);
  const auto pruned = cfg.prune.enabled
                          ? greedy_prune(full, cfg.prune.ratio_threshold, cfg.prune.budget_fraction)
                          : greedy_prune(full, cfg.prune.ratio_threshold, 0.0);
  ojson j;
  j["threshold"] = pruned.threshold;
  j["kept"] = pruned.kept;
  j["partial"] = to_json(pruned.partial);
  j["problem"] = to_json(full);
  j["reduced"] = to_json(pruned.reduced);
  write_json(ctx.artifact("prune"), j);
}

// Every occupied cell, so later beneficiaries in the same cells cost no
// provider queries.
std::vector<CellId> occupied_cells(const PipelineConfig& cfg, const Grid& grid,
                                   const std::vector<HealthCenter>& centers,
                                   const std::vector<Beneficiary>& registry) {
  std::set<CellId> occupied{depot_cell(cfg, grid)};
  for (const auto& c : centers) occupied.insert(c.cell);
  for (const auto& b : registry) {
    if (b.home_cell) occupied.insert(*b.home_cell);
  }
  return {occupied.begin(), occupied.end()};
}

TravelTimeMatrix run_matrix(const PipelineConfig& cfg, const Grid& grid,
                            const std::vector<CellId>& cells, QueryCostLedger& ledger) {
  const SyntheticTravelProvider provider(grid, cfg.routing.speed_kmh);
  MatrixBuildOptions mopts;
  mopts.store = cfg.matrix;
  mopts.timestamp = kTimestamp;
  return build_matrix(grid, cells, provider, cfg.routing.period, ledger, mopts);
}

void stage_routes(StageContext& ctx) {
  const auto& cfg = ctx.cfg;
  const auto prune = ctx.need("prune");
  const auto reduced = problem_from_json(prune.at("reduced"));
  const auto registry = load_ingested(ctx);
  const auto grid = make_grid(cfg);
  const auto centers = load_centers(cfg.centers, grid);
  const auto depot = depot_cell(cfg, grid);
  QueryCostLedger ledger;
  const auto matrix = run_matrix(cfg, grid, occupied_cells(cfg, grid, centers, registry), ledger);
  ctx.timings.travel_queries += ledger.queries();

  std::unordered_map<std::string, const Beneficiary*> by_id;
  for (const auto& b : registry) by_id.emplace(b.id, &b);
  std::vector<RouteCandidate> candidates;
  for (const auto& x : reduced.beneficiaries) {
    const double need = x.need(InterventionKind::kPickupService);
    if (!x.eligible || !x.allowed[index_of(InterventionKind::kPickupService)] || need <= 0.0) continue;
    const auto* b = by_id.at(x.id);
    candidates.push_back({x.id, *b->home_cell, b->availability, need});
  }
  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const auto& a, const auto& b) { return a.need > b.need; });
  if (candidates.size() > cfg.routing.max_candidates) candidates.resize(cfg.routing.max_candidates);

  RoutePool pool;
  if (!candidates.empty() && !centers.empty()) {
    std::vector<VehicleSpec> vehicles;
    for (int v = 0; v < cfg.routing.vehicles; ++v) {
      vehicles.push_back({"V" + std::to_string(v + 1), cfg.routing.capacity, 8 * 60, depot});
    }
    const RoutingContext rctx{matrix, vehicles, centers, candidates, cfg.routing.config};
    auto gls = cfg.routing.gls;
    gls.seed = cfg.seed;
    pool = gls_generate(rctx, gls, cfg.threads);
  }
  save_pool(pool, ctx.artifact("routes"));
}

// Adds pool routes to a problem, keeping members that appear in it.
void attach_routes(AllocationProblem& p, const RoutePool& pool) {
  std::unordered_map<std::string, int> index;
  for (std::size_t b = 0; b < p.beneficiaries.size(); ++b) index.emplace(p.beneficiaries[b].id, static_cast<int>(b));
  p.routes.clear();
  for (const auto& r : pool.routes) {
    ProblemRoute pr{r.id, r.vehicle_id, r.cost, {}};
    for (const auto& id : r.served) {
      const auto it = index.find(id);
      if (it != index.end()) pr.members.push_back(it->second);
    }
    std::sort(pr.members.begin(), pr.members.end());
    p.routes.push_back(std::move(pr));
  }
}

void stage_solve(StageContext& ctx) {
  const auto prune = ctx.need("prune");
  if (!fs::exists(ctx.artifact("routes"))) {
    throw StageError("routes", "missing artifact " + stage_artifact("routes") + "; run stage 'routes' first");
  }
  const auto pool = load_pool(ctx.artifact("routes"));
  auto full = problem_from_json(prune.at("problem"));
  PruneResult pr;
  pr.partial = plan_from_json(prune.at("partial"));
  pr.reduced = problem_from_json(prune.at("reduced"));
  pr.kept = prune.at("kept").get<std::vector<std::size_t>>();
  pr.threshold = prune.at("threshold").get<double>();
  attach_routes(full, pool);
  attach_routes(pr.reduced, pool);

  BnBLimits limits;
  limits.node_cap = ctx.cfg.solve.node_cap;
  limits.time_cap_seconds = ctx.cfg.solve.time_cap_seconds;
  const auto reduced_plan = branch_and_bound(pr.reduced, limits);
  const auto plan = merge_plans(full, pr, reduced_plan);
  const auto verdict = validate_plan(plan, full);
  if (!verdict.valid) {
    std::string msg = "solver produced an invalid plan:";
    for (const auto& d : verdict.details) msg += " " + d + ";";
    throw StageError("solve", msg);
  }
  write_json(ctx.artifact("solve"), to_json(plan));
}

void stage_emit(StageContext& ctx) {
  const auto ingest = ctx.need("ingest");
  const auto eligibility = ctx.need("eligibility");
  const auto prune = ctx.need("prune");
  const auto plan = plan_from_json(ctx.need("solve"));
  const auto pool = load_pool(ctx.artifact("routes"));
  const auto full = problem_from_json(prune.at("problem"));

  emit_plan(plan, pool, PlanFormat::kJson, ctx.dir / "plan.json");
  emit_plan(plan, pool, PlanFormat::kFieldsheet, ctx.dir / "fieldsheet.csv");

  RunReport r;
  r.run_id = ctx.dir.filename().string();
  r.counts.registry_rows = ingest.at("rows").get<std::size_t>();
  r.counts.row_errors = ingest.at("errors").size();
  r.counts.unresolved = ingest.at("unresolved").get<std::size_t>();
  r.counts.eligible = eligibility.at("eligible").size();
  r.counts.pruned = prune.at("partial").at("assignments").size();
  std::size_t candidates = 0;
  {
    std::set<std::string> served;
    for (const auto& route : pool.routes) served.insert(route.served.begin(), route.served.end());
    candidates = served.size();
  }
  r.counts.route_candidates = candidates;
  r.counts.routes_generated = pool.routes.size();
  r.counts.nodes_explored = plan.stats.nodes;
  r.counts.assignments = plan.assignments.size();
  r.plan_file = "plan.json";
  r.objective = plan.objective;
  r.baseline_objective = full.baseline_objective();
  r.total_cost = plan.total_cost;
  r.gap = plan.gap;
  r.optimal = plan.optimal;
  write_json(ctx.artifact("emit"), to_json(r));
}

using StageFn = void (*)(StageContext&);

StageFn stage_fn(const std::string& name) {
  static const std::map<std::string, StageFn> table = {
      {"ingest", stage_ingest}, {"eligibility", stage_eligibility}, {"estimate", stage_estimate},
      {"prune", stage_prune},   {"routes", stage_routes},           {"solve", stage_solve},
      {"emit", stage_emit}};
  const auto it = table.find(name);
  if (it == table.end()) throw ValidationError("unknown stage '" + name + "'");
  return it->second;
}

RunTimings execute(const std::string& name, const PipelineConfig& cfg, const fs::path& dir) {
  const auto fn = stage_fn(name);
  StageContext ctx{cfg, dir, {}};
  fs::create_directories(dir);
  const auto t0 = std::chrono::steady_clock::now();
  try {
    fn(ctx);
  } catch (const StageError&) {
    throw;
  } catch (const ValidationError& e) {
    throw ValidationError("stage " + name + ": " + e.what());
  } catch (const std::exception& e) {
    throw StageError(name, e.what());
  }
  ctx.timings.seconds[name] =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return ctx.timings;
}

void merge_timings(RunTimings& into, const RunTimings& t) {
  for (const auto& [k, v] : t.seconds) into.seconds[k] = v;
  into.geocode_queries += t.geocode_queries;
  into.travel_queries += t.travel_queries;
}

void write_timings(const fs::path& dir, const RunTimings& t) {
  ojson j;
  j["seconds"] = t.seconds;
  j["geocode_queries"] = t.geocode_queries;
  j["travel_queries"] = t.travel_queries;
  write_json(dir / "timings.json", j);
}

}  // namespace

// ---------------------------------------------------------------- config

PipelineConfig pipeline_config_from_json(const nlohmann::json& j, const fs::path& base_dir) {
  PipelineConfig cfg;
  Reader top(j, "config");
  {
    Reader period(top.at("period"), "period");
    cfg.period = TimeWindow(parse_date(period.at("from").get<std::string>()),
                            parse_date(period.at("to").get<std::string>()));
    period.finish();
  }
  try {
    cfg.budget = top.at("budget").get<double>();
  } catch (const nlohmann::json::exception&) {
    throw ValidationError("config: budget must be a number");
  }
  if (!(cfg.budget >= 0.0) || !std::isfinite(cfg.budget)) throw ValidationError("config: budget must be >= 0");
  std::string path;
  const auto path_of = [&](const std::string& key, bool required) -> fs::path {
    path.clear();
    if (required) {
      path = top.at(key).get<std::string>();
    } else {
      top.opt(key, path);
    }
    return resolve(base_dir, path);
  };
  cfg.registry = path_of("registry", true);
  cfg.model = path_of("model", true);
  cfg.centers = path_of("centers", true);
  cfg.matrix = path_of("matrix", false);
  cfg.geocode_cache = path_of("geocode_cache", false);
  if (top.has("run_root")) cfg.run_root = path_of("run_root", false);
  top.opt("seed", cfg.seed);
  top.opt("threads", cfg.threads);
  if (cfg.threads < 1) throw ValidationError("config: threads must be >= 1");
  if (top.has("costs")) {
    Reader c(top.at("costs"), "costs");
    c.opt("phone_call", cfg.costs.phone_call);
    c.opt("travel_voucher", cfg.costs.travel_voucher);
    c.opt("vaccine_drive", cfg.costs.vaccine_drive);
    c.finish();
  }
  if (top.has("capacities")) {
    Reader c(top.at("capacities"), "capacities");
    c.opt("vehicles", cfg.caps.vehicles);
    c.opt("calls", cfg.caps.calls);
    c.opt("nurse_days", cfg.caps.nurse_days);
    c.opt("drives_per_nurse_day", cfg.caps.drives_per_nurse_day);
    c.finish();
  }
  if (top.has("grid")) {
    Reader g(top.at("grid"), "grid");
    if (g.has("box")) {
      const auto b = g.at("box").get<std::vector<double>>();
      if (b.size() != 4) throw ValidationError("grid.box needs [lat_min, lon_min, lat_max, lon_max]");
      cfg.box = {b[0], b[1], b[2], b[3]};
    }
    g.opt("cell_km", cfg.cell_km);
    g.opt("drive_block_cells", cfg.drive_block_cells);
    g.finish();
  }
  if (top.has("depot")) {
    Reader d(top.at("depot"), "depot");
    cfg.depot = LatLon{d.at("lat").get<double>(), d.at("lon").get<double>()};
    d.finish();
  }
  if (top.has("eligibility")) {
    Reader e(top.at("eligibility"), "eligibility");
    e.opt("half_width", cfg.half_width);
    e.finish();
  }
  if (top.has("prune")) {
    Reader p(top.at("prune"), "prune");
    p.opt("enabled", cfg.prune.enabled);
    if (p.has("ratio_threshold")) cfg.prune.ratio_threshold = p.at("ratio_threshold").get<double>();
    p.opt("budget_fraction", cfg.prune.budget_fraction);
    p.finish();
  }
  if (top.has("routing")) {
    Reader r(top.at("routing"), "routing");
    auto& rt = cfg.routing;
    r.opt("vehicles", rt.vehicles);
    r.opt("capacity", rt.capacity);
    r.opt("speed_kmh", rt.speed_kmh);
    r.opt("period", rt.period);
    r.opt("max_candidates", rt.max_candidates);
    r.opt("dwell_minutes", rt.config.dwell_minutes);
    r.opt("center_service_minutes", rt.config.center_service_minutes);
    r.opt("dispatch_cost", rt.config.dispatch_cost);
    r.opt("cost_per_minute", rt.config.cost_per_minute);
    r.opt("iterations", rt.gls.iterations);
    r.opt("lambda_factor", rt.gls.lambda_factor);
    r.opt("pool_cap", rt.gls.pool_cap);
    r.opt("value_weight", rt.gls.value_weight);
    r.finish();
  }
  if (top.has("solve")) {
    Reader s(top.at("solve"), "solve");
    s.opt("node_cap", cfg.solve.node_cap);
    s.opt("time_cap_seconds", cfg.solve.time_cap_seconds);
    s.finish();
  }
  top.finish();

  if (cfg.cell_km <= 0.0) throw ValidationError("config: grid.cell_km must be positive");
  if (cfg.drive_block_cells < 1) throw ValidationError("config: grid.drive_block_cells must be >= 1");
  if (cfg.half_width < kMinHalfWidth || cfg.half_width > kMaxHalfWidth) {
    throw ValidationError("config: eligibility.half_width outside [3, 5]");
  }
  if (cfg.prune.budget_fraction < 0.0 || cfg.prune.budget_fraction > 1.0) {
    throw ValidationError("config: prune.budget_fraction outside [0, 1]");
  }
  if (cfg.routing.vehicles < 0 || cfg.routing.capacity < 1 || cfg.routing.speed_kmh <= 0.0) {
    throw ValidationError("config: bad routing block");
  }
  if (cfg.solve.node_cap < 0 || cfg.solve.time_cap_seconds < 0.0) {
    throw ValidationError("config: bad solve block");
  }
  return cfg;
}

PipelineConfig load_pipeline_config(const fs::path& path) {
  if (!fs::is_regular_file(path)) throw ValidationError("config file not found: " + path.string());
  const auto j = read_json(path);
  auto cfg = pipeline_config_from_json(j, fs::absolute(path).parent_path());
  check_inputs(cfg);
  return cfg;
}

void check_inputs(const PipelineConfig& cfg) {
  for (const auto& [name, p] : {std::pair{"registry", cfg.registry}, std::pair{"model", cfg.model},
                                std::pair{"centers", cfg.centers}}) {
    if (!fs::is_regular_file(p)) {
      throw ValidationError(std::string("config: ") + name + " file not found: " + p.string());
    }
  }
}

ojson to_json(const PipelineConfig& cfg) {
  ojson j;
  j["period"] = {{"from", format_date(cfg.period.start)}, {"to", format_date(cfg.period.end)}};
  j["budget"] = cfg.budget;
  j["registry"] = cfg.registry.string();
  j["model"] = cfg.model.string();
  j["centers"] = cfg.centers.string();
  j["matrix"] = cfg.matrix.string();
  j["geocode_cache"] = cfg.geocode_cache.string();
  j["run_root"] = cfg.run_root.string();
  j["seed"] = cfg.seed;
  j["threads"] = cfg.threads;
  j["costs"] = {{"phone_call", cfg.costs.phone_call},
                {"travel_voucher", cfg.costs.travel_voucher},
                {"vaccine_drive", cfg.costs.vaccine_drive}};
  j["capacities"] = {{"vehicles", cfg.caps.vehicles},
                     {"calls", cfg.caps.calls},
                     {"nurse_days", cfg.caps.nurse_days},
                     {"drives_per_nurse_day", cfg.caps.drives_per_nurse_day}};
  j["grid"] = {{"box", {cfg.box.lat_min, cfg.box.lon_min, cfg.box.lat_max, cfg.box.lon_max}},
               {"cell_km", cfg.cell_km},
               {"drive_block_cells", cfg.drive_block_cells}};
  if (cfg.depot) j["depot"] = {{"lat", cfg.depot->lat}, {"lon", cfg.depot->lon}};
  j["eligibility"] = {{"half_width", cfg.half_width}};
  j["prune"] = {{"enabled", cfg.prune.enabled},
                {"ratio_threshold", cfg.prune.ratio_threshold ? ojson(*cfg.prune.ratio_threshold) : ojson()},
                {"budget_fraction", cfg.prune.budget_fraction}};
  const auto& rt = cfg.routing;
  j["routing"] = {{"vehicles", rt.vehicles},
                  {"capacity", rt.capacity},
                  {"speed_kmh", rt.speed_kmh},
                  {"period", rt.period},
                  {"max_candidates", rt.max_candidates},
                  {"dwell_minutes", rt.config.dwell_minutes},
                  {"center_service_minutes", rt.config.center_service_minutes},
                  {"dispatch_cost", rt.config.dispatch_cost},
                  {"cost_per_minute", rt.config.cost_per_minute},
                  {"iterations", rt.gls.iterations},
                  {"lambda_factor", rt.gls.lambda_factor},
                  {"pool_cap", rt.gls.pool_cap},
                  {"value_weight", rt.gls.value_weight}};
  j["solve"] = {{"node_cap", cfg.solve.node_cap}, {"time_cap_seconds", cfg.solve.time_cap_seconds}};
  return j;
}

std::string config_fingerprint(const PipelineConfig& cfg) {
  auto j = to_json(cfg);
  // Output and cache locations do not change results; inputs count by content.
  for (const char* key : {"registry", "model", "centers", "matrix", "geocode_cache", "run_root", "threads"}) {
    j.erase(key);
  }
  j["inputs"] = {{"registry", file_digest(cfg.registry)},
                 {"model", file_digest(cfg.model)},
                 {"centers", file_digest(cfg.centers)}};
  return hex64(fnv1a64(j.dump()));
}

fs::path run_directory(const PipelineConfig& cfg) { return cfg.run_root / config_fingerprint(cfg); }

std::string stage_artifact(const std::string& stage) {
  static const std::map<std::string, std::string> names = {
      {"ingest", "ingest.json"}, {"eligibility", "eligibility.json"}, {"estimate", "estimate.json"},
      {"prune", "prune.json"},   {"routes", "routes.jsonl"},          {"solve", "solve.json"},
      {"emit", "report.json"}};
  const auto it = names.find(stage);
  if (it == names.end()) throw ValidationError("unknown stage '" + stage + "'");
  return it->second;
}

ojson to_json(const RunReport& r) {
  ojson j;
  j["run_id"] = r.run_id;
  j["counts"] = {{"registry_rows", r.counts.registry_rows},
                 {"row_errors", r.counts.row_errors},
                 {"unresolved", r.counts.unresolved},
                 {"eligible", r.counts.eligible},
                 {"pruned", r.counts.pruned},
                 {"route_candidates", r.counts.route_candidates},
                 {"routes_generated", r.counts.routes_generated},
                 {"nodes_explored", r.counts.nodes_explored},
                 {"assignments", r.counts.assignments}};
  j["plan_file"] = r.plan_file;
  j["objective"] = r.objective;
  j["baseline_objective"] = r.baseline_objective;
  j["total_cost"] = r.total_cost;
  j["gap"] = r.gap;
  j["optimal"] = r.optimal;
  return j;
}

namespace {

RunReport report_from_json(const nlohmann::json& j) {
  RunReport r;
  r.run_id = j.at("run_id").get<std::string>();
  const auto& c = j.at("counts");
  r.counts.registry_rows = c.at("registry_rows").get<std::size_t>();
  r.counts.row_errors = c.at("row_errors").get<std::size_t>();
  r.counts.unresolved = c.at("unresolved").get<std::size_t>();
  r.counts.eligible = c.at("eligible").get<std::size_t>();
  r.counts.pruned = c.at("pruned").get<std::size_t>();
  r.counts.route_candidates = c.at("route_candidates").get<std::size_t>();
  r.counts.routes_generated = c.at("routes_generated").get<std::size_t>();
  r.counts.nodes_explored = c.at("nodes_explored").get<long>();
  r.counts.assignments = c.at("assignments").get<std::size_t>();
  r.plan_file = j.at("plan_file").get<std::string>();
  r.objective = j.at("objective").get<double>();
  r.baseline_objective = j.at("baseline_objective").get<double>();
  r.total_cost = j.at("total_cost").get<double>();
  r.gap = j.at("gap").get<double>();
  r.optimal = j.at("optimal").get<bool>();
  return r;
}

}  // namespace

RunTimings run_stage(const std::string& name, const PipelineConfig& cfg) {
  check_inputs(cfg);
  return execute(name, cfg, run_directory(cfg));
}

RunResult run_pipeline(const PipelineConfig& cfg, const RunOptions& opts) {
  check_inputs(cfg);
  RunResult out;
  out.run_dir = run_directory(cfg);
  for (const auto& name : stage_names()) {
    if (opts.resume && fs::exists(out.run_dir / stage_artifact(name))) continue;
    merge_timings(out.timings, execute(name, cfg, out.run_dir));
    write_timings(out.run_dir, out.timings);
  }
  out.plan = plan_from_json(read_json(out.run_dir / stage_artifact("solve")));
  out.report = report_from_json(read_json(out.run_dir / stage_artifact("emit")));
  return out;
}

GridBuild build_run_matrix(const PipelineConfig& cfg) {
  check_inputs(cfg);
  const auto dir = run_directory(cfg);
  GridBuild out;
  if (!fs::exists(dir / stage_artifact("ingest"))) {
    out.geocode_queries = execute("ingest", cfg, dir).geocode_queries;
  }
  const StageContext ctx{cfg, dir, {}};
  const auto grid = make_grid(cfg);
  const auto cells = occupied_cells(cfg, grid, load_centers(cfg.centers, grid), load_ingested(ctx));
  QueryCostLedger ledger;
  out.matrix = run_matrix(cfg, grid, cells, ledger);
  out.travel_queries = ledger.queries();
  return out;
}

int drive_block_of(CellId c, const Grid& grid, int block_cells) {
  if (!grid.contains(c)) throw ValidationError("cell outside the grid");
  if (block_cells < 1) throw ValidationError("drive block size must be >= 1");
  const int block_cols = (grid.cols() + block_cells - 1) / block_cells;
  return (c.row / block_cells) * block_cols + c.col / block_cells;
}

AllocationProblem load_full_problem(const fs::path& run_dir) {
  return problem_from_json(read_json(run_dir / stage_artifact("prune")).at("problem"));
}

RoutePool load_run_pool(const fs::path& run_dir) { return load_pool(run_dir / stage_artifact("routes")); }

std::vector<HealthCenter> load_centers(const fs::path& path, const Grid& grid) {
  std::ifstream in(path);
  if (!in) throw NotFoundError("cannot open centers file " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw ValidationError("centers file is empty");
  auto header = split(trim(line), ',');
  for (auto& h : header) h = trim(h);
  const bool with_deadline = header.size() == 4 && header[3] == "deadline";
  if (!(header.size() >= 3 && header[0] == "id" && header[1] == "lat" && header[2] == "lon") ||
      (header.size() == 4 && !with_deadline) || header.size() > 4) {
    throw ValidationError("centers header must be id,lat,lon[,deadline]");
  }
  std::vector<HealthCenter> out;
  std::set<std::string> ids;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto f = split(trim(line), ',');
    if (f.size() != header.size()) {
      throw ValidationError("centers line " + std::to_string(line_no) + ": wrong field count");
    }
    HealthCenter h;
    h.id = trim(f[0]);
    if (h.id.empty() || !ids.insert(h.id).second) {
      throw ValidationError("centers line " + std::to_string(line_no) + ": missing or duplicate id");
    }
    h.cell = snap_to_cell(parse_double(trim(f[1])), parse_double(trim(f[2])), grid);
    if (with_deadline) h.service_deadline_minute = parse_clock(trim(f[3]));
    out.push_back(h);
  }
  return out;
}

// ---------------------------------------------------------------- emission

ojson plan_document(const Plan& plan, const RoutePool& pool) {
  ojson j;
  j["plan"] = to_json(plan);
  auto routes = ojson::array();
  for (int id : plan.routes) routes.push_back(to_json(pool.at(id)));
  j["routes"] = std::move(routes);
  return j;
}

void write_fieldsheet(std::ostream& out, const Plan& plan, const RoutePool& pool) {
  out << "route,vehicle,stop,beneficiary,kind,pickup_time,center,drive_block\n";
  struct Row {
    int route;  // INT_MAX when not on a route
    int kind;
    int stop;
    std::string id;
    std::string text;
  };
  std::vector<Row> rows;
  for (const auto& a : plan.assignments) {
    std::ostringstream line;
    int stop = 0;
    if (a.route_id) {
      const auto& r = pool.at(*a.route_id);
      std::string time, center;
      for (const auto& s : r.stops) {
        if (s.kind == StopKind::kCenter) center = s.ref;
      }
      for (std::size_t i = 0; i < r.stops.size(); ++i) {
        const auto& s = r.stops[i];
        if (s.kind == StopKind::kPickup && s.ref == a.beneficiary_id) {
          stop = static_cast<int>(i) + 1;
          time = format_clock(s.arrival_minute);
        }
      }
      line << *a.route_id << ',' << r.vehicle_id << ',' << stop << ',' << a.beneficiary_id << ','
           << to_string(a.kind) << ',' << time << ',' << center << ',';
    } else {
      line << ",,," << a.beneficiary_id << ',' << to_string(a.kind) << ",,,";
      if (a.drive_block) line << *a.drive_block;
    }
    rows.push_back({a.route_id ? *a.route_id : std::numeric_limits<int>::max(),
                    static_cast<int>(index_of(a.kind)), stop, a.beneficiary_id, line.str()});
  }
  std::sort(rows.begin(), rows.end(), [](const Row& x, const Row& y) {
    return std::tie(x.route, x.kind, x.stop, x.id) < std::tie(y.route, y.kind, y.stop, y.id);
  });
  for (const auto& r : rows) out << r.text << '\n';
}

void emit_plan(const Plan& plan, const RoutePool& pool, PlanFormat format, const fs::path& path) {
  if (format == PlanFormat::kJson) {
    write_json(path, plan_document(plan, pool));
  } else {
    std::ostringstream ss;
    write_fieldsheet(ss, plan, pool);
    write_text_atomic(path, ss.str());
  }
}

}  // namespace adviser

// adviser: planning, grid, training and simulation commands.
// Exit codes: 0 success, 2 validation failure, 3 stage or other failure.

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "adviser/pipeline.hpp"
#include "adviser/simulator.hpp"

using namespace adviser;
namespace fs = std::filesystem;

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitFailure = 3;

std::string utc_now() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
  if (!out) throw Error("cannot write " + path.string());
}

BoundingBox parse_bbox(const std::vector<double>& v) {
  if (v.size() != 4) throw ValidationError("--bbox takes lat_min lon_min lat_max lon_max");
  return {v[0], v[1], v[2], v[3]};
}

struct Overrides {
  std::string from, to, config = "adviser.json";
  std::optional<double> budget;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;

  void attach(CLI::App* app, bool period_required) {
    auto* f = app->add_option("--from", from, "First day of the planning window (YYYY-MM-DD)");
    auto* t = app->add_option("--to", to, "Last day of the planning window (YYYY-MM-DD)");
    auto* b = app->add_option("--budget", budget, "Budget for the window");
    if (period_required) {
      f->required();
      t->required();
      b->required();
    }
    app->add_option("--config", config, "Pipeline config file")->capture_default_str();
    app->add_option("--seed", seed, "Override the config seed");
    app->add_option("--threads", threads, "Worker threads");
  }

  PipelineConfig load() const {
    auto cfg = load_pipeline_config(config);
    if (!from.empty() || !to.empty()) {
      if (from.empty() || to.empty()) throw ValidationError("--from and --to go together");
      cfg.period = TimeWindow(parse_date(from), parse_date(to));
    }
    if (budget) {
      if (*budget < 0.0) throw ValidationError("budget must be >= 0");
      cfg.budget = *budget;
    }
    if (seed) cfg.seed = *seed;
    if (threads) cfg.threads = *threads;
    return cfg;
  }
};

void print_run(const RunResult& res) {
  std::cout << to_json(res.report).dump(2) << "\n";
  std::cerr << "run directory: " << res.run_dir.string() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Vaccination intervention planner"};
  app.require_subcommand(1);

  // plan
  auto* plan = app.add_subcommand("plan", "Run every stage for a window and budget");
  Overrides plan_args;
  bool resume = false;
  plan_args.attach(plan, true);
  plan->add_flag("--resume", resume, "Skip stages whose artifacts exist");

  // stage
  auto* stage = app.add_subcommand("stage", "Run one stage from persisted inputs");
  Overrides stage_args;
  std::string stage_name;
  stage->add_option("name", stage_name, "Stage name")->required();
  stage_args.attach(stage, false);

  // grid build
  auto* grid = app.add_subcommand("grid", "Travel-time grid");
  grid->require_subcommand(1);
  auto* grid_build = grid->add_subcommand("build", "Build or extend a travel-time matrix");
  std::string grid_config;
  std::vector<double> bbox;
  double cell_km = 1.0;
  std::string period = "morning";
  double speed = 20.0;
  std::string grid_out;
  grid_build->add_option("--config", grid_config,
                         "Pipeline config; builds over the registry's occupied cells");
  grid_build->add_option("--bbox", bbox, "lat_min lon_min lat_max lon_max")->expected(4);
  grid_build->add_option("--cell-km", cell_km, "Cell size in km")->capture_default_str();
  grid_build->add_option("--period", period, "Time-of-day period")->capture_default_str();
  grid_build->add_option("--speed", speed, "Synthetic provider speed (km/h)")->capture_default_str();
  grid_build->add_option("--out", grid_out, "Matrix base path for a full-grid build");

  // train
  auto* train = app.add_subcommand("train", "Fit success models");
  std::string train_data, train_out, train_reference, timestamp;
  double lambda = 1e-3;
  bool cold_start = false;
  train->add_option("--data", train_data, "Training CSV: features, arm, outcome");
  train->add_flag("--cold-start", cold_start, "Build models from survey priors");
  train->add_option("--reference", train_reference, "Registry CSV used to calibrate priors");
  train->add_option("--out", train_out, "Model file")->required();
  train->add_option("--lambda", lambda, "L2 penalty")->capture_default_str();
  train->add_option("--timestamp", timestamp, "Model timestamp (default: now)");

  // synth
  auto* synth = app.add_subcommand("synth", "Write a synthetic world as pipeline inputs");
  std::size_t synth_n = 2000, samples = 5000;
  std::uint64_t synth_seed = 1;
  std::optional<double> synth_budget;
  std::string synth_out;
  synth->add_option("--n", synth_n, "Beneficiaries")->capture_default_str();
  synth->add_option("--seed", synth_seed, "Seed")->capture_default_str();
  synth->add_option("--budget", synth_budget, "Budget (default: calls for a quarter of n)");
  synth->add_option("--training-samples", samples, "Synthetic history rows")->capture_default_str();
  synth->add_option("--out", synth_out, "Output directory")->required();

  // simulate
  auto* sim = app.add_subcommand("simulate", "Compare the planner against phone-call outreach");
  std::size_t sim_n = 2000;
  int reps = 500;
  std::uint64_t sim_seed = 7;
  double share = 0.25;
  int sim_threads = 1;
  std::string sim_out;
  sim->add_option("--n", sim_n, "Beneficiaries")->capture_default_str();
  sim->add_option("--reps", reps, "Replications")->capture_default_str();
  sim->add_option("--seed", sim_seed, "Seed")->capture_default_str();
  sim->add_option("--budget-share", share, "Share of n whose call cost the budget covers")
      ->capture_default_str();
  sim->add_option("--training-samples", samples, "Synthetic history rows")->capture_default_str();
  sim->add_option("--threads", sim_threads, "Worker threads")->capture_default_str();
  sim->add_option("--out", sim_out, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitValidation;
  }

  try {
    if (*plan) {
      print_run(run_pipeline(plan_args.load(), {.resume = resume}));
    } else if (*stage) {
      const auto cfg = stage_args.load();
      const auto t = run_stage(stage_name, cfg);
      std::cout << "stage " << stage_name << " done in " << t.seconds.at(stage_name) << " s\n";
      std::cerr << "run directory: " << run_directory(cfg).string() << "\n";
    } else if (*grid_build) {
      if (!grid_config.empty()) {
        auto cfg = load_pipeline_config(grid_config);
        if (!bbox.empty()) cfg.box = parse_bbox(bbox);
        if (grid_build->count("--cell-km")) cfg.cell_km = cell_km;
        if (grid_build->count("--period")) cfg.routing.period = period;
        if (grid_build->count("--speed")) cfg.routing.speed_kmh = speed;
        const auto g = build_run_matrix(cfg);
        std::cout << "cells " << g.matrix.cells().size() << " queries " << g.travel_queries
                  << " store " << cfg.matrix.string() << "\n";
      } else {
        if (grid_out.empty()) throw ValidationError("grid build needs --config or --out");
        const Grid g(bbox.empty() ? kIbadanBox : parse_bbox(bbox), cell_km);
        const SyntheticTravelProvider provider(g, speed);
        QueryCostLedger ledger;
        MatrixBuildOptions opts;
        opts.full_grid = true;
        opts.store = grid_out;
        opts.timestamp = utc_now();
        const auto m = build_matrix(g, {}, provider, period, ledger, opts);
        std::cout << "cells " << m.cells().size() << " queries " << ledger.queries() << " store "
                  << grid_out << "\n";
      }
    } else if (*train) {
      const auto schema = FeatureSchema::default_schema();
      const auto ts = timestamp.empty() ? utc_now() : timestamp;
      ModelSet models;
      if (cold_start) {
        if (train_reference.empty()) throw ValidationError("--cold-start needs --reference");
        const auto parsed = parse_registry(fs::path(train_reference), HeaderSpec::numeric(schema.names));
        std::vector<FeatureVector> rows;
        for (const auto& r : parsed.records) rows.push_back(r.features);
        models = cold_start_from_survey(SurveyPrior::deployment_default(), schema, rows);
      } else {
        if (train_data.empty()) throw ValidationError("train needs --data or --cold-start");
        models = train_model_set(load_training_csv(train_data, schema), lambda, schema, ts);
      }
      save_model_set(models, train_out);
      std::cout << "wrote " << train_out << "\n";
    } else if (*synth) {
      PopulationParams params;
      params.n = synth_n;
      const auto world = synth_population(params, synth_seed);
      const double budget = synth_budget ? *synth_budget : 0.25 * static_cast<double>(synth_n) * UnitCosts{}.phone_call;
      const auto files = write_simulation_inputs(world, synth_out, budget, samples, synth_seed);
      std::cout << "config " << files.config.string() << "\n";
    } else if (*sim) {
      if (share < 0.0) throw ValidationError("--budget-share must be >= 0");
      PopulationParams params;
      params.n = sim_n;
      const auto world = synth_population(params, sim_seed);
      const double budget = share * static_cast<double>(sim_n) * UnitCosts{}.phone_call;
      const auto files = write_simulation_inputs(world, sim_out, budget, samples, sim_seed);
      auto cfg = load_pipeline_config(files.config);
      cfg.threads = sim_threads;
      const auto res = run_pipeline(cfg);
      const auto base = baseline_policy(load_full_problem(res.run_dir));
      const auto report = evaluate({{"Baseline", base, budget}, {"ADVISER", res.plan, budget}},
                                   world.truth, reps, sim_seed, sim_threads);
      const auto label = format_date(params.period.start) + " to " + format_date(params.period.end);
      const auto table = summary_table(report, label);
      write_file(fs::path(sim_out) / "evaluation.json", to_json(report).dump(2) + "\n");
      write_file(fs::path(sim_out) / "summary.txt", table);
      std::cout << table;
    }
  } catch (const ValidationError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return 0;
}

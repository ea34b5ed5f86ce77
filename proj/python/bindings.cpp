#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "adviser/pipeline.hpp"
#include "adviser/simulator.hpp"

namespace py = pybind11;
using namespace adviser;

namespace {

// Structured values cross the boundary as JSON text; the Python package
// decodes them.
AllocationProblem problem_of(const std::string& text) {
  return problem_from_json(nlohmann::json::parse(text));
}

std::string run_json(const RunResult& r) {
  nlohmann::ordered_json j;
  j["run_dir"] = r.run_dir.string();
  j["report"] = to_json(r.report);
  j["plan"] = to_json(r.plan);
  j["timings"] = {{"seconds", r.timings.seconds},
                  {"geocode_queries", r.timings.geocode_queries},
                  {"travel_queries", r.timings.travel_queries}};
  return j.dump();
}

PipelineConfig load_with(const std::filesystem::path& path, const std::optional<std::string>& from,
                         const std::optional<std::string>& to, std::optional<double> budget,
                         std::optional<std::uint64_t> seed) {
  auto cfg = load_pipeline_config(path);
  if (from || to) {
    if (!from || !to) throw ValidationError("period_from and period_to go together");
    cfg.period = TimeWindow(parse_date(*from), parse_date(*to));
  }
  if (budget) {
    if (*budget < 0.0) throw ValidationError("budget must be >= 0");
    cfg.budget = *budget;
  }
  if (seed) cfg.seed = *seed;
  return cfg;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Vaccination intervention planning core";

  // Later registrations are tried first, so subclasses follow the base.
  const auto base = py::register_exception<Error>(m, "AdviserError", PyExc_RuntimeError);
  py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
  py::register_exception<StageError>(m, "StageError", base.ptr());
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const nlohmann::json::exception& e) {
      py::set_error(PyExc_ValueError, e.what());
    }
  });

  m.def("branch_and_bound",
        [](const std::string& problem, long node_cap) {
          BnBLimits limits;
          limits.node_cap = node_cap;
          return to_json(branch_and_bound(problem_of(problem), limits)).dump();
        },
        py::arg("problem"), py::arg("node_cap") = 0, py::call_guard<py::gil_scoped_release>());

  m.def("brute_force", [](const std::string& problem) { return to_json(brute_force(problem_of(problem))).dump(); },
        py::arg("problem"), py::call_guard<py::gil_scoped_release>());

  m.def("validate_plan",
        [](const std::string& plan, const std::string& problem) {
          const auto v = validate_plan(plan_from_json(nlohmann::json::parse(plan)), problem_of(problem));
          std::vector<std::string> kinds;
          for (auto x : v.violations) kinds.emplace_back(to_string(x));
          return py::make_tuple(v.valid, kinds, v.details);
        },
        py::arg("plan"), py::arg("problem"));

  m.def("greedy_prune",
        [](const std::string& problem, std::optional<double> threshold, double fraction) {
          const auto r = greedy_prune(problem_of(problem), threshold, fraction);
          nlohmann::ordered_json j;
          j["threshold"] = r.threshold;
          j["kept"] = r.kept;
          j["partial"] = to_json(r.partial);
          j["reduced"] = to_json(r.reduced);
          return j.dump();
        },
        py::arg("problem"), py::arg("ratio_threshold") = py::none(), py::arg("budget_fraction") = 0.5);

  m.def("run_pipeline",
        [](const std::filesystem::path& config, bool resume, std::optional<std::string> from,
           std::optional<std::string> to, std::optional<double> budget, std::optional<std::uint64_t> seed) {
          return run_json(run_pipeline(load_with(config, from, to, budget, seed), {.resume = resume}));
        },
        py::arg("config"), py::arg("resume") = false, py::arg("period_from") = py::none(),
        py::arg("period_to") = py::none(), py::arg("budget") = py::none(), py::arg("seed") = py::none(),
        py::call_guard<py::gil_scoped_release>());

  m.def("run_stage",
        [](const std::string& name, const std::filesystem::path& config) {
          const auto t = run_stage(name, load_pipeline_config(config));
          return t.seconds.at(name);
        },
        py::arg("name"), py::arg("config"), py::call_guard<py::gil_scoped_release>());

  m.def("write_world",
        [](const std::filesystem::path& dir, std::size_t n, std::uint64_t seed, double budget,
           std::size_t training_samples) {
          PopulationParams params;
          params.n = n;
          const auto world = synth_population(params, seed);
          return write_simulation_inputs(world, dir, budget, training_samples, seed).config;
        },
        py::arg("dir"), py::arg("n"), py::arg("seed"), py::arg("budget"),
        py::arg("training_samples") = 5000, py::call_guard<py::gil_scoped_release>());

  m.def("simulate",
        [](const std::filesystem::path& dir, std::size_t n, int reps, std::uint64_t seed, double budget_share,
           std::size_t training_samples, int threads) {
          PopulationParams params;
          params.n = n;
          const auto world = synth_population(params, seed);
          const double budget = budget_share * static_cast<double>(n) * UnitCosts{}.phone_call;
          auto cfg = load_pipeline_config(write_simulation_inputs(world, dir, budget, training_samples, seed).config);
          cfg.threads = threads;
          const auto res = run_pipeline(cfg);
          const auto base = baseline_policy(load_full_problem(res.run_dir));
          return to_json(evaluate({{"Baseline", base, budget}, {"ADVISER", res.plan, budget}}, world.truth, reps,
                                  seed, threads))
              .dump();
        },
        py::arg("dir"), py::arg("n") = 2000, py::arg("reps") = 500, py::arg("seed") = 7,
        py::arg("budget_share") = 0.25, py::arg("training_samples") = 5000, py::arg("threads") = 1,
        py::call_guard<py::gil_scoped_release>());

  m.def("need_scores",
        [](const std::filesystem::path& model, const FeatureVector& x) {
          const auto models = load_model_set(model);
          std::map<std::string, double> out;
          for (auto k : kAllKinds) out[std::string(to_string(k))] = need_score(models, x, k);
          return out;
        },
        py::arg("model"), py::arg("features"));

  m.def("fit_logistic",
        [](const std::vector<FeatureVector>& x, const std::vector<bool>& y, double lambda) {
          if (x.size() != y.size()) throw ValidationError("features and outcomes differ in length");
          std::vector<LabeledExample> data;
          for (std::size_t i = 0; i < x.size(); ++i) data.push_back({x[i], y[i]});
          const auto model = train(data, lambda);
          py::dict d;
          d["weights"] = model.raw_weights();
          d["intercept"] = model.raw_intercept();
          d["iterations"] = model.meta.iterations;
          d["converged"] = model.meta.converged;
          return d;
        },
        py::arg("features"), py::arg("outcomes"), py::arg("l2") = 0.0);
}

#include "adviser/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <random>
#include <sstream>
#include <thread>
#include <unordered_map>

namespace adviser {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

namespace {

const char* const kStreets[] = {"Oke Ado", "Ring Road", "Mokola", "Bodija", "Agodi",
                                "Iwo Road", "Challenge", "Sango", "Dugbe", "Apata"};

double logistic(double z) { return 1.0 / (1.0 + std::exp(-z)); }

struct Person {
  RawRecord record;
  double awareness = 0.0;
  double access = 0.0;
  double p_none = 0.0;
  std::array<double, kNumKinds> p{};
};

class PersonFactory {
 public:
  PersonFactory(const PopulationParams& params, std::vector<CellId> center_cells)
      : params_(params),
        grid_(params.box, params.cell_km),
        geocoder_(params.box),
        travel_(grid_, params.speed_kmh),
        centers_(std::move(center_cells)),
        doses_(VaccineSchedule::default_schedule().expanded()) {}

  Person make(std::mt19937_64& rng, std::size_t index, const std::string& id_prefix) const {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::normal_distribution<double> g(0.0, 1.0);
    const auto& P = params_;
    Person out;
    auto& r = out.record;
    r.id = id_prefix + [&] {
      std::ostringstream s;
      s << std::setw(6) << std::setfill('0') << index + 1;
      return s.str();
    }();

    const double income = u(rng) < P.low_income_share
                              ? 5.0 + (P.low_income_threshold - 5.0) * u(rng) * 0.999
                              : P.low_income_threshold + std::exp(std::log(35.0) + 0.6 * g(rng));
    const double mother_age = 17.0 + 25.0 * u(rng);
    std::poisson_distribution<int> kids(1.5);
    const double children = 1.0 + kids(rng);
    const bool aware = u(rng) < P.aware_share;
    const double a = aware ? 0.6 + 0.35 * u(rng) : 0.1 + 0.35 * u(rng);
    const double prior = std::clamp(a + 0.15 * g(rng), 0.0, 1.0);

    if (u(rng) >= P.unresolved_share) {
      r.address = std::to_string(1 + static_cast<int>(u(rng) * 400)) + " " +
                  kStreets[static_cast<int>(u(rng) * 10)] + " Street, Block " +
                  std::to_string(index % 97) + ", Ibadan";
    }
    double distance = 45.0;  // unresolved homes: a typical far trip
    if (!r.address.empty() && !centers_.empty()) {
      const auto loc = geocoder_.locate(normalize_address(r.address));
      const auto cell = snap_to_cell(loc.lat, loc.lon, grid_);
      int best = kMaxTravelMinutes;
      for (const auto& c : centers_) {
        best = std::min(best, travel_.minutes(grid_.cell_center(cell), grid_.cell_center(c), "morning"));
      }
      distance = best;
    }
    const double c = logistic(0.9 + 0.9 * std::log(income / P.low_income_threshold) -
                              0.04 * (distance - 20.0) + 0.3 * g(rng));

    r.phone = "080" + std::to_string(10000000 + static_cast<int>(u(rng) * 89999999));
    r.phone_reachable = u(rng) >= P.unreachable_share;
    if (u(rng) < P.windowed_share) {
      const int start = 8 * 60 + 30 * static_cast<int>(u(rng) * 5);
      r.availability.push_back({start, start + 60 + 30 * static_cast<int>(u(rng) * 4)});
    }

    // A dose whose window meets the planning period; earlier doses received.
    const auto& target = doses_[static_cast<std::size_t>(u(rng) * static_cast<double>(doses_.size()))];
    const int offset = static_cast<int>(u(rng) * P.period.width_days());
    r.child_birth_date = P.period.start + std::chrono::days(offset - target.due_age_days);
    for (const auto& d : doses_) {
      if (d.due_age_days < target.due_age_days) r.received_doses.push_back(d.key());
    }
    r.features = {std::round(income * 100.0) / 100.0, std::round(mother_age * 10.0) / 10.0, children,
                  std::round(prior * 1000.0) / 1000.0, distance};

    out.awareness = a;
    out.access = c;
    out.p_none = a * c;
    const double call = r.phone_reachable ? (a + P.call_lift * (1.0 - a)) * c : out.p_none;
    out.p = {call, a * (c + P.voucher_lift * (1.0 - c)), (a + P.pickup_lift * (1.0 - a)) * P.pickup_show, 1.0};
    return out;
  }

 private:
  PopulationParams params_;
  Grid grid_;
  SyntheticGeocodeProvider geocoder_;
  SyntheticTravelProvider travel_;
  std::vector<CellId> centers_;
  std::vector<VaccineDose> doses_;
};

std::vector<LatLon> center_locations(const PopulationParams& params, std::uint64_t seed) {
  std::mt19937_64 rng(splitmix64(seed ^ 0xce47e55ULL));
  std::uniform_real_distribution<double> u(0.1, 0.9);
  std::vector<LatLon> out;
  for (int i = 0; i < params.centers; ++i) {
    out.push_back({params.box.lat_min + u(rng) * (params.box.lat_max - params.box.lat_min),
                   params.box.lon_min + u(rng) * (params.box.lon_max - params.box.lon_min)});
  }
  return out;
}

std::vector<CellId> center_cells(const PopulationParams& params, const std::vector<LatLon>& locs) {
  const Grid grid(params.box, params.cell_km);
  std::vector<CellId> out;
  for (const auto& l : locs) out.push_back(snap_to_cell(l.lat, l.lon, grid));
  return out;
}

}  // namespace

void validate_params(const PopulationParams& p) {
  if (p.n == 0) throw ValidationError("population size must be at least 1");
  for (double share : {p.low_income_share, p.aware_share, p.unreachable_share, p.unresolved_share,
                       p.windowed_share, p.call_lift, p.voucher_lift, p.pickup_lift, p.pickup_show}) {
    if (!(share >= 0.0 && share <= 1.0)) throw ValidationError("mixture weights and lifts must lie in [0, 1]");
  }
  if (!(p.low_income_threshold > 5.0)) throw ValidationError("low-income threshold must exceed 5");
  if (p.centers < 0 || p.cell_km <= 0.0 || p.speed_kmh <= 0.0) throw ValidationError("bad world geometry");
}

World synth_population(const PopulationParams& params, std::uint64_t seed) {
  validate_params(params);
  World w;
  w.params = params;
  w.center_locations = center_locations(params, seed);
  const auto cells = center_cells(params, w.center_locations);
  for (std::size_t i = 0; i < cells.size(); ++i) {
    w.centers.push_back({"HC" + std::to_string(i + 1), cells[i], 11 * 60});
  }
  const PersonFactory factory(params, cells);
  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < params.n; ++i) {
    auto person = factory.make(rng, i, "M");
    w.truth.ids.push_back(person.record.id);
    w.truth.none.push_back(person.p_none);
    w.truth.by_kind.push_back(person.p);
    w.awareness.push_back(person.awareness);
    w.access.push_back(person.access);
    w.registry.push_back(std::move(person.record));
  }
  return w;
}

ArmExamples synth_training_data(const PopulationParams& params, std::size_t samples,
                                std::uint64_t seed) {
  validate_params(params);
  // Same centers as the world drawn from `seed`; different households.
  const auto cells = center_cells(params, center_locations(params, seed));
  const PersonFactory factory(params, cells);
  std::mt19937_64 rng(splitmix64(seed ^ 0x7a1a1a1aULL));
  std::uniform_real_distribution<double> u(0.0, 1.0);
  ArmExamples out;
  static const std::array<std::string, 5> arms = {"none", "phone_call", "travel_voucher",
                                                  "pickup_service", "vaccine_drive"};
  for (std::size_t i = 0; i < samples; ++i) {
    const auto person = factory.make(rng, i, "H");
    const auto arm = static_cast<std::size_t>(u(rng) * 5.0);
    const double p = arm == 0 ? person.p_none : person.p[arm - 1];
    out[arms[arm]].push_back({person.record.features, u(rng) < p});
  }
  return out;
}

Plan baseline_policy(const AllocationProblem& p) {
  validate_problem(p);
  Codes codes(p.beneficiaries.size(), 0);
  double spent = 0.0;
  int calls = 0;
  const auto call = index_of(InterventionKind::kPhoneCall);
  for (std::size_t b = 0; b < p.beneficiaries.size(); ++b) {
    const auto& x = p.beneficiaries[b];
    if (!x.eligible || !x.allowed[call]) continue;
    if (calls >= p.caps.calls || spent + p.costs.phone_call > p.budget + 1e-9) break;
    codes[b] = static_cast<std::int8_t>(call + 1);
    spent += p.costs.phone_call;
    ++calls;
  }
  auto plan = make_plan(p, codes, {});
  plan.optimal = false;
  return plan;
}

EvalReport evaluate(const std::vector<Policy>& policies, const GroundTruth& truth, int reps,
                    std::uint64_t seed, int threads) {
  if (reps < 1) throw ValidationError("evaluation needs at least one replication");
  const std::size_t n = truth.size();
  if (truth.none.size() != n || truth.by_kind.size() != n) throw ValidationError("truth arrays differ in length");
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < n; ++i) index.emplace(truth.ids[i], i);

  // Success probability of each beneficiary under each policy.
  std::vector<std::vector<double>> prob(policies.size(), truth.none);
  EvalReport report;
  report.reps = reps;
  report.seed = seed;
  report.population = n;
  for (std::size_t k = 0; k < policies.size(); ++k) {
    const auto& pol = policies[k];
    PolicyResult res;
    res.name = pol.name;
    res.budget = pol.budget;
    res.spend = pol.plan.total_cost;
    for (const auto& a : pol.plan.assignments) {
      const auto it = index.find(a.beneficiary_id);
      if (it == index.end()) throw ValidationError("plan assigns unknown beneficiary " + a.beneficiary_id);
      prob[k][it->second] = truth.by_kind[it->second][index_of(a.kind)];
      ++res.kinds[std::string(to_string(a.kind))];
    }
    res.kinds["none"] = n - pol.plan.assignments.size();
    double expected = 0.0;
    for (double v : prob[k]) expected += v;
    res.expected_rate = n ? expected / static_cast<double>(n) : 0.0;
    report.policies.push_back(std::move(res));
  }

  std::vector<std::vector<double>> rates(policies.size(), std::vector<double>(static_cast<std::size_t>(reps), 0.0));
  const auto run = [&](int r) {
    std::mt19937_64 rng(splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(r))));
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<std::size_t> hits(policies.size(), 0);
    for (std::size_t i = 0; i < n; ++i) {
      const double draw = u(rng);
      for (std::size_t k = 0; k < policies.size(); ++k) hits[k] += draw < prob[k][i] ? 1 : 0;
    }
    for (std::size_t k = 0; k < policies.size(); ++k) {
      rates[k][static_cast<std::size_t>(r)] = n ? static_cast<double>(hits[k]) / static_cast<double>(n) : 0.0;
    }
  };
  const int workers = std::max(1, std::min(threads, reps));
  if (workers == 1) {
    for (int r = 0; r < reps; ++r) run(r);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (int r = w; r < reps; r += workers) run(r);
      });
    }
    for (auto& t : pool) t.join();
  }

  for (std::size_t k = 0; k < policies.size(); ++k) {
    double mean = 0.0;
    for (double v : rates[k]) mean += v;
    mean /= reps;
    double var = 0.0;
    for (double v : rates[k]) var += (v - mean) * (v - mean);
    var = reps > 1 ? var / (reps - 1) : 0.0;
    const double half = 1.96 * std::sqrt(var / reps);
    auto& res = report.policies[k];
    res.rate = mean;
    res.ci_low = mean - half;
    res.ci_high = mean + half;
  }
  return report;
}

ojson to_json(const EvalReport& r) {
  ojson j;
  j["reps"] = r.reps;
  j["seed"] = r.seed;
  j["population"] = r.population;
  auto pols = ojson::array();
  for (const auto& p : r.policies) {
    ojson x;
    x["name"] = p.name;
    x["rate"] = p.rate;
    x["ci95"] = {p.ci_low, p.ci_high};
    x["expected_rate"] = p.expected_rate;
    x["assignments"] = p.kinds;
    x["spend"] = p.spend;
    x["budget"] = p.budget;
    pols.push_back(std::move(x));
  }
  j["policies"] = std::move(pols);
  return j;
}

std::string summary_table(const EvalReport& r, const std::string& period_label) {
  std::ostringstream out;
  out << std::left << std::setw(12) << "Method" << std::setw(14) << "Success rate" << std::setw(20)
      << "95% CI" << std::setw(12) << "Spend" << "Period\n";
  out << std::fixed;
  for (const auto& p : r.policies) {
    std::ostringstream rate, ci, spend;
    rate << std::fixed << std::setprecision(1) << 100.0 * p.rate << "%";
    ci << std::fixed << std::setprecision(2) << 100.0 * p.ci_low << "-" << 100.0 * p.ci_high << "%";
    spend << std::fixed << std::setprecision(1) << p.spend;
    out << std::setw(12) << p.name << std::setw(14) << rate.str() << std::setw(20) << ci.str()
        << std::setw(12) << spend.str() << period_label << "\n";
  }
  return out.str();
}

SimulationFiles write_simulation_inputs(const World& world, const fs::path& dir, double budget,
                                        std::size_t training_samples, std::uint64_t seed) {
  fs::create_directories(dir);
  SimulationFiles files{dir / "registry.csv", dir / "centers.csv", dir / "model.json", dir / "config.json"};
  const auto schema = FeatureSchema::default_schema();
  {
    std::ofstream out(files.registry);
    if (!out) throw Error("cannot write " + files.registry.string());
    emit_registry(out, world.registry, HeaderSpec::numeric(schema.names));
  }
  {
    std::ofstream out(files.centers);
    if (!out) throw Error("cannot write " + files.centers.string());
    out << "id,lat,lon,deadline\n" << std::setprecision(17);
    for (std::size_t i = 0; i < world.centers.size(); ++i) {
      out << world.centers[i].id << ',' << format_double(world.center_locations[i].lat) << ','
          << format_double(world.center_locations[i].lon) << ','
          << format_clock(world.centers[i].service_deadline_minute) << '\n';
    }
  }
  const auto history = synth_training_data(world.params, training_samples, seed);
  save_model_set(train_model_set(history, 1e-3, schema, "1970-01-01T00:00:00Z"), files.model);

  const auto& P = world.params;
  ojson cfg;
  cfg["period"] = {{"from", format_date(P.period.start)}, {"to", format_date(P.period.end)}};
  cfg["budget"] = budget;
  cfg["registry"] = files.registry.filename().string();
  cfg["model"] = files.model.filename().string();
  cfg["centers"] = files.centers.filename().string();
  cfg["matrix"] = "matrix";
  cfg["geocode_cache"] = "geocode-cache.tsv";
  cfg["run_root"] = "runs";
  cfg["seed"] = seed;
  // Business-as-usual phone operations reach everyone.
  cfg["capacities"] = {{"calls", static_cast<int>(P.n)}};
  cfg["grid"] = {{"box", {P.box.lat_min, P.box.lon_min, P.box.lat_max, P.box.lon_max}},
                 {"cell_km", P.cell_km}};
  cfg["routing"] = {{"speed_kmh", P.speed_kmh}};
  std::ofstream(files.config) << cfg.dump(2) << "\n";
  return files;
}

}  // namespace adviser

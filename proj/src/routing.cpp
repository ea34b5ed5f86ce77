#include "adviser/routing.hpp"

#include <algorithm>
#include <fstream>
#include <future>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>
#include <set>
#include <unordered_map>

namespace adviser {

namespace {

// Earliest service start at or after `t`; nullopt when every window has closed.
std::optional<int> earliest_start(const std::vector<DailyWindow>& windows, int t) {
  if (windows.empty()) return t;
  std::optional<int> best;
  for (const auto& w : windows) {
    if (w.end_minute < t) continue;
    const int s = std::max(t, w.start_minute);
    if (!best || s < *best) best = s;
  }
  return best;
}

bool available_at(const std::vector<DailyWindow>& windows, int t) {
  if (windows.empty()) return true;
  return std::any_of(windows.begin(), windows.end(),
                     [t](const DailyWindow& w) { return w.start_minute <= t && t <= w.end_minute; });
}

// Node numbering shared by the public timing path and the GLS fast path:
// candidates 0..n-1, depot n, centers n+1...
struct PickupTiming {
  std::vector<int> arrivals;
  int center = -1;
  int center_arrival = 0;
  int minutes = 0;  // driving from the depot to the center
};

template <class Travel>
std::optional<PickupTiming> time_pickups(const VehicleSpec& v,
                                         std::span<const std::size_t> seq,
                                         const RoutingContext& ctx, Travel&& travel,
                                         bool keep_arrivals) {
  const std::size_t n = ctx.candidates.size();
  if (static_cast<int>(seq.size()) > v.capacity) return std::nullopt;
  PickupTiming out;
  int t = v.shift_start_minute;
  std::size_t prev = n;
  for (const auto idx : seq) {
    const int d = travel(prev, idx);
    out.minutes += d;
    const auto start = earliest_start(ctx.candidates[idx].availability, t + d);
    if (!start) return std::nullopt;
    if (keep_arrivals) out.arrivals.push_back(*start);
    t = *start + ctx.config.dwell_minutes;
    prev = idx;
  }
  int best = std::numeric_limits<int>::max();
  for (std::size_t c = 0; c < ctx.centers.size(); ++c) {
    const int d = travel(prev, n + 1 + c);
    if (t + d <= ctx.centers[c].service_deadline_minute && d < best) {
      best = d;
      out.center = static_cast<int>(c);
    }
  }
  if (out.center < 0) return std::nullopt;
  out.center_arrival = t + best;
  out.minutes += best;
  return out;
}

CellId node_cell(std::size_t node, const VehicleSpec& v, const RoutingContext& ctx) {
  const std::size_t n = ctx.candidates.size();
  if (node < n) return ctx.candidates[node].cell;
  if (node == n) return v.depot;
  return ctx.centers[node - n - 1].cell;
}

bool route_less(const Route& a, const Route& b) {
  if (a.value != b.value) return a.value > b.value;
  if (a.cost != b.cost) return a.cost < b.cost;
  return a.served < b.served;
}

void add_violation(RouteVerdict& v, RouteViolation kind, std::string detail) {
  v.feasible = false;
  if (!v.has(kind)) v.violations.push_back(kind);
  v.details.push_back(std::move(detail));
}

const VehicleSpec* find_vehicle(const RoutingContext& ctx, const std::string& id) {
  for (const auto& v : ctx.vehicles) {
    if (v.id == id) return &v;
  }
  return nullptr;
}

}  // namespace

std::string_view to_string(RouteViolation v) {
  switch (v) {
    case RouteViolation::kCapacity: return "capacity";
    case RouteViolation::kDeadline: return "deadline";
    case RouteViolation::kAvailability: return "availability";
    case RouteViolation::kTimeConsistency: return "time_consistency";
    case RouteViolation::kStructure: return "structure";
  }
  return "unknown";
}

std::string_view to_string(MoveKind m) {
  switch (m) {
    case MoveKind::kInsert: return "insert";
    case MoveKind::kRemove: return "remove";
    case MoveKind::kExchange: return "exchange";
    case MoveKind::kSwap: return "swap";
    case MoveKind::kRelocate: return "relocate";
  }
  return "unknown";
}

bool RouteVerdict::has(RouteViolation v) const {
  return std::find(violations.begin(), violations.end(), v) != violations.end();
}

RouteVerdict route_feasible(const Route& r, const RoutingContext& ctx) {
  RouteVerdict verdict;
  if (r.stops.empty()) {
    if (!r.served.empty()) add_violation(verdict, RouteViolation::kStructure, "served list without stops");
    return verdict;
  }
  const VehicleSpec* v = find_vehicle(ctx, r.vehicle_id);
  if (!v) {
    add_violation(verdict, RouteViolation::kStructure, "unknown vehicle " + r.vehicle_id);
    return verdict;
  }

  std::size_t k = 0;
  while (k < r.stops.size() && r.stops[k].kind == StopKind::kPickup) ++k;
  if (static_cast<int>(k) > v->capacity || static_cast<int>(r.served.size()) > v->capacity) {
    add_violation(verdict, RouteViolation::kCapacity,
                  std::to_string(std::max(k, r.served.size())) + " pickups exceed capacity " +
                      std::to_string(v->capacity));
  }

  // Shape: k pickups, one center, k dropoffs mirroring the pickups.
  std::unordered_map<std::string, const RouteCandidate*> by_id;
  for (const auto& c : ctx.candidates) by_id.emplace(c.id, &c);
  const HealthCenter* center = nullptr;
  bool shape_ok = k >= 1 && r.stops.size() == 2 * k + 1 &&
                  r.stops[k].kind == StopKind::kCenter && r.served.size() == k;
  if (shape_ok) {
    std::set<std::string> seen;
    for (std::size_t i = 0; i < k && shape_ok; ++i) {
      const auto& p = r.stops[i];
      const auto& d = r.stops[k + 1 + i];
      const auto it = by_id.find(p.ref);
      shape_ok = d.kind == StopKind::kDropoff && d.ref == p.ref && r.served[i] == p.ref &&
                 it != by_id.end() && it->second->cell == p.cell && d.cell == p.cell &&
                 seen.insert(p.ref).second;
    }
    for (const auto& c : ctx.centers) {
      if (c.id == r.stops[k].ref && c.cell == r.stops[k].cell) center = &c;
    }
    shape_ok = shape_ok && center != nullptr;
  }
  if (!shape_ok) {
    add_violation(verdict, RouteViolation::kStructure,
                  "stops are not pickups, one known center, then matching dropoffs");
    return verdict;
  }

  const auto& m = ctx.matrix;
  const int dwell = ctx.config.dwell_minutes;
  int depart = v->shift_start_minute;
  CellId prev = v->depot;
  for (std::size_t i = 0; i < r.stops.size(); ++i) {
    const auto& s = r.stops[i];
    const int earliest = depart + m.minutes(prev, s.cell);
    if (s.kind == StopKind::kPickup) {
      const auto& windows = by_id.at(s.ref)->availability;
      bool timed = s.arrival_minute == earliest;
      if (s.arrival_minute > earliest) {
        timed = std::any_of(windows.begin(), windows.end(), [&](const DailyWindow& w) {
          return w.start_minute == s.arrival_minute;
        });
      }
      if (!timed) {
        add_violation(verdict, RouteViolation::kTimeConsistency,
                      "pickup " + s.ref + " at " + format_clock(s.arrival_minute) +
                          ", travel gives " + format_clock(earliest));
      }
      if (!available_at(windows, s.arrival_minute)) {
        add_violation(verdict, RouteViolation::kAvailability,
                      s.ref + " unavailable at " + format_clock(s.arrival_minute));
      }
      depart = s.arrival_minute + dwell;
    } else if (s.kind == StopKind::kCenter) {
      if (s.arrival_minute != earliest) {
        add_violation(verdict, RouteViolation::kTimeConsistency,
                      "center arrival " + format_clock(s.arrival_minute) + ", travel gives " +
                          format_clock(earliest));
      }
      if (s.arrival_minute > center->service_deadline_minute) {
        add_violation(verdict, RouteViolation::kDeadline,
                      "center arrival " + format_clock(s.arrival_minute) + " after " +
                          format_clock(center->service_deadline_minute));
      }
      depart = s.arrival_minute + ctx.config.center_service_minutes;
    } else {
      if (s.arrival_minute != earliest) {
        add_violation(verdict, RouteViolation::kTimeConsistency,
                      "dropoff " + s.ref + " at " + format_clock(s.arrival_minute) +
                          ", travel gives " + format_clock(earliest));
      }
      depart = s.arrival_minute + dwell;
    }
    prev = s.cell;
  }
  return verdict;
}

std::optional<Route> build_route(const VehicleSpec& v, std::span<const std::size_t> sequence,
                                 const RoutingContext& ctx) {
  const auto travel = [&](std::size_t a, std::size_t b) {
    return ctx.matrix.minutes(node_cell(a, v, ctx), node_cell(b, v, ctx));
  };
  Route r;
  r.vehicle_id = v.id;
  if (sequence.empty()) return r;
  const auto timing = time_pickups(v, sequence, ctx, travel, true);
  if (!timing) return std::nullopt;
  for (std::size_t i = 0; i < sequence.size(); ++i) {
    const auto& c = ctx.candidates[sequence[i]];
    r.stops.push_back({StopKind::kPickup, c.cell, c.id, timing->arrivals[i]});
    r.served.push_back(c.id);
    r.value += c.need;
  }
  const auto& center = ctx.centers[static_cast<std::size_t>(timing->center)];
  r.stops.push_back({StopKind::kCenter, center.cell, center.id, timing->center_arrival});
  int minutes = timing->minutes;
  int t = timing->center_arrival + ctx.config.center_service_minutes;
  CellId prev = center.cell;
  for (const auto idx : sequence) {
    const auto& c = ctx.candidates[idx];
    const int d = ctx.matrix.minutes(prev, c.cell);
    minutes += d;
    t += d;
    r.stops.push_back({StopKind::kDropoff, c.cell, c.id, t});
    t += ctx.config.dwell_minutes;
    prev = c.cell;
  }
  r.driving_minutes = minutes;
  r.cost = ctx.config.dispatch_cost + ctx.config.cost_per_minute * minutes;
  return r;
}

namespace {

// Dense travel table over the nodes one vehicle can visit.
class NodeTable {
 public:
  NodeTable(const VehicleSpec& v, const RoutingContext& ctx)
      : size_(ctx.candidates.size() + 1 + ctx.centers.size()) {
    std::vector<int> slots(size_);
    for (std::size_t i = 0; i < size_; ++i) slots[i] = ctx.matrix.slot(node_cell(i, v, ctx));
    table_.resize(size_ * size_);
    for (std::size_t i = 0; i < size_; ++i) {
      for (std::size_t j = 0; j < size_; ++j) {
        table_[i * size_ + j] = ctx.matrix.at(static_cast<std::size_t>(slots[i]),
                                              static_cast<std::size_t>(slots[j]));
      }
    }
  }
  int operator()(std::size_t a, std::size_t b) const { return table_[a * size_ + b]; }
  std::size_t size() const { return size_; }

 private:
  std::size_t size_;
  std::vector<int> table_;
};

// Inserts candidates in `order` at their cheapest feasible position.
template <class Travel>
std::vector<std::size_t> cheapest_insertion(const VehicleSpec& v, const RoutingContext& ctx,
                                            const Travel& travel, const std::vector<std::size_t>& order) {
  std::vector<std::size_t> seq;
  for (const auto idx : order) {
    if (static_cast<int>(seq.size()) >= v.capacity) break;
    std::optional<std::pair<int, std::size_t>> best;  // (minutes, position)
    for (std::size_t pos = 0; pos <= seq.size(); ++pos) {
      auto trial = seq;
      trial.insert(trial.begin() + static_cast<std::ptrdiff_t>(pos), idx);
      const auto t = time_pickups(v, trial, ctx, travel, false);
      if (t && (!best || t->minutes < best->first)) best = {t->minutes, pos};
    }
    if (best) seq.insert(seq.begin() + static_cast<std::ptrdiff_t>(best->second), idx);
  }
  return seq;
}

}  // namespace

Route construct_initial(const VehicleSpec& v, const RoutingContext& ctx) {
  const NodeTable table(v, ctx);
  const auto travel = [&](std::size_t a, std::size_t b) { return table(a, b); };
  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < ctx.candidates.size(); ++i) {
    if (ctx.candidates[i].need > 0.0) order.push_back(i);
  }
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return ctx.candidates[a].need > ctx.candidates[b].need;
  });
  return *build_route(v, cheapest_insertion(v, ctx, travel, order), ctx);
}

GlsRun gls_run(const VehicleSpec& v, const RoutingContext& ctx, const GlsParams& params) {
  if (params.iterations < 0) throw ValidationError("GLS iteration budget must be non-negative");
  if (params.pool_cap == 0) throw ValidationError("route pool cap must be positive");
  if (v.capacity < 1) throw ValidationError("vehicle " + v.id + " has no seats");

  const NodeTable table(v, ctx);
  const auto travel = [&](std::size_t a, std::size_t b) { return table(a, b); };
  const std::size_t n = ctx.candidates.size();
  const std::size_t nodes = table.size();

  std::vector<std::size_t> pool_nodes{n};
  std::vector<std::size_t> active;
  for (std::size_t i = 0; i < n; ++i) {
    if (ctx.candidates[i].need > 0.0) {
      active.push_back(i);
      pool_nodes.push_back(i);
    }
  }
  for (std::size_t c = 0; c < ctx.centers.size(); ++c) pool_nodes.push_back(n + 1 + c);
  double arc_sum = 0.0;
  std::size_t arc_count = 0;
  for (const auto a : pool_nodes) {
    for (const auto b : pool_nodes) {
      if (a == b) continue;
      arc_sum += table(a, b);
      ++arc_count;
    }
  }
  const double mean_arc = arc_count ? arc_sum / static_cast<double>(arc_count) : 0.0;

  GlsRun run;
  run.lambda = params.lambda ? *params.lambda : params.lambda_factor * std::max(mean_arc, 1.0);
  run.initial = construct_initial(v, ctx);

  std::vector<int> penalty(nodes * nodes, 0);
  const auto augmented = [&](const std::vector<std::size_t>& seq,
                             const PickupTiming& t) {
    double value = 0.0;
    for (const auto i : seq) value += ctx.candidates[i].need;
    double g = t.minutes - params.value_weight * value;
    if (seq.empty()) return g;
    int pen = penalty[n * nodes + seq.front()];
    for (std::size_t i = 1; i < seq.size(); ++i) pen += penalty[seq[i - 1] * nodes + seq[i]];
    pen += penalty[seq.back() * nodes + (n + 1 + static_cast<std::size_t>(t.center))];
    return g + run.lambda * pen;
  };
  const auto evaluate = [&](const std::vector<std::size_t>& seq) -> std::optional<double> {
    if (seq.empty()) return 0.0;
    const auto t = time_pickups(v, seq, ctx, travel, false);
    if (!t) return std::nullopt;
    return augmented(seq, *t);
  };

  std::vector<std::size_t> seq;
  for (const auto& id : run.initial.served) {
    for (std::size_t i = 0; i < n; ++i) {
      if (ctx.candidates[i].id == id) {
        seq.push_back(i);
        break;
      }
    }
  }

  std::set<std::vector<std::size_t>> visited;
  const auto remember = [&](const std::vector<std::size_t>& s) {
    if (!s.empty()) visited.insert(s);
  };
  remember(seq);

  std::mt19937_64 rng(params.seed);
  std::vector<bool> in_route(n, false);
  for (const auto i : seq) in_route[i] = true;

  struct Candidate {
    MoveKind kind;
    std::vector<std::size_t> seq;
  };
  double g_cur = *evaluate(seq);
  for (int it = 1; it <= params.iterations; ++it) {
    double best_g = std::numeric_limits<double>::infinity();
    std::vector<Candidate> ties;
    const auto consider = [&](MoveKind kind, std::vector<std::size_t>&& s) {
      const auto g = evaluate(s);
      if (!g) return;
      if (*g < best_g - 1e-9) {
        best_g = *g;
        ties.clear();
        ties.push_back({kind, std::move(s)});
      } else if (*g <= best_g + 1e-9) {
        ties.push_back({kind, std::move(s)});
      }
    };
    const std::size_t len = seq.size();
    if (static_cast<int>(len) < v.capacity) {
      for (const auto u : active) {
        if (in_route[u]) continue;
        for (std::size_t pos = 0; pos <= len; ++pos) {
          auto s = seq;
          s.insert(s.begin() + static_cast<std::ptrdiff_t>(pos), u);
          consider(MoveKind::kInsert, std::move(s));
        }
      }
    }
    for (std::size_t i = 0; i < len; ++i) {
      auto s = seq;
      s.erase(s.begin() + static_cast<std::ptrdiff_t>(i));
      consider(MoveKind::kRemove, std::move(s));
    }
    for (std::size_t i = 0; i < len; ++i) {
      for (const auto u : active) {
        if (in_route[u]) continue;
        auto s = seq;
        s[i] = u;
        consider(MoveKind::kExchange, std::move(s));
      }
    }
    for (std::size_t i = 0; i < len; ++i) {
      for (std::size_t j = i + 1; j < len; ++j) {
        auto s = seq;
        std::swap(s[i], s[j]);
        consider(MoveKind::kSwap, std::move(s));
      }
    }
    for (std::size_t i = 0; i < len; ++i) {
      for (std::size_t j = 0; j < len; ++j) {
        if (j == i || j == i + 1) continue;  // j == i + 1 duplicates a swap
        auto s = seq;
        const auto x = s[i];
        s.erase(s.begin() + static_cast<std::ptrdiff_t>(i));
        s.insert(s.begin() + static_cast<std::ptrdiff_t>(j > i ? j - 1 : j), x);
        consider(MoveKind::kRelocate, std::move(s));
      }
    }

    if (!ties.empty() && best_g < g_cur - 1e-9) {
      auto& pick = ties[ties.size() == 1 ? 0 : rng() % ties.size()];
      for (const auto i : seq) in_route[i] = false;
      seq = std::move(pick.seq);
      for (const auto i : seq) in_route[i] = true;
      double value = 0.0;
      for (const auto i : seq) value += ctx.candidates[i].need;
      run.log.push_back({it, pick.kind, g_cur, best_g, value});
      g_cur = best_g;
      remember(seq);
      continue;
    }

    // Penalties have priced out every route: clear them and restart from a
    // shuffled cheapest insertion.
    if (seq.empty()) {
      std::fill(penalty.begin(), penalty.end(), 0);
      auto order = active;
      for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng() % i]);
      seq = cheapest_insertion(v, ctx, travel, order);
      if (seq.empty()) break;
      for (const auto i : seq) in_route[i] = true;
      g_cur = *evaluate(seq);
      remember(seq);
      continue;
    }

    // Local optimum: penalize the arc of highest utility.
    const auto t = *time_pickups(v, seq, ctx, travel, false);
    std::vector<std::pair<std::size_t, std::size_t>> arcs;
    arcs.push_back({n, seq.front()});
    for (std::size_t i = 1; i < seq.size(); ++i) arcs.push_back({seq[i - 1], seq[i]});
    arcs.push_back({seq.back(), n + 1 + static_cast<std::size_t>(t.center)});
    double best_u = -1.0;
    std::pair<std::size_t, std::size_t> chosen = arcs.front();
    for (const auto& [a, b] : arcs) {
      const double u = table(a, b) / (1.0 + penalty[a * nodes + b]);
      if (u > best_u) {
        best_u = u;
        chosen = {a, b};
      }
    }
    ++penalty[chosen.first * nodes + chosen.second];
    g_cur = *evaluate(seq);
  }

  for (std::size_t a = 0; a < nodes; ++a) {
    for (std::size_t b = 0; b < nodes; ++b) {
      if (const int p = penalty[a * nodes + b]; p > 0) {
        run.penalties[{node_cell(a, v, ctx), node_cell(b, v, ctx)}] += p;
      }
    }
  }

  for (const auto& s : visited) {
    auto r = build_route(v, s, ctx);
    if (r) run.routes.push_back(std::move(*r));
  }
  std::sort(run.routes.begin(), run.routes.end(), route_less);
  if (run.routes.size() > params.pool_cap) run.routes.resize(params.pool_cap);
  for (std::size_t i = 0; i < run.routes.size(); ++i) run.routes[i].id = static_cast<int>(i);
  return run;
}

const Route& RoutePool::at(int id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= routes.size()) {
    throw NotFoundError("route " + std::to_string(id) + " not in pool");
  }
  return routes[static_cast<std::size_t>(id)];
}

double RoutePool::best_value() const {
  double best = 0.0;
  for (const auto& r : routes) best = std::max(best, r.value);
  return best;
}

RoutePool gls_generate(const RoutingContext& ctx, const GlsParams& params, int threads) {
  if (params.iterations < 0) throw ValidationError("GLS iteration budget must be non-negative");
  std::vector<GlsRun> runs(ctx.vehicles.size());
  const auto work = [&](std::size_t i) {
    GlsParams p = params;
    p.seed = splitmix64(params.seed ^ fnv1a64(ctx.vehicles[i].id));
    runs[i] = gls_run(ctx.vehicles[i], ctx, p);
  };
  if (threads <= 1 || ctx.vehicles.size() <= 1) {
    for (std::size_t i = 0; i < runs.size(); ++i) work(i);
  } else {
    std::vector<std::future<void>> jobs;
    for (std::size_t i = 0; i < runs.size(); ++i) {
      jobs.push_back(std::async(std::launch::async, work, i));
    }
    for (auto& j : jobs) j.get();
  }
  RoutePool pool;
  for (auto& run : runs) {
    for (auto& r : run.routes) {
      const auto verdict = route_feasible(r, ctx);
      if (!verdict.feasible) {
        throw Error("generated route for " + r.vehicle_id + " is infeasible: " +
                    verdict.details.front());
      }
      r.id = static_cast<int>(pool.routes.size());
      pool.routes.push_back(std::move(r));
    }
  }
  return pool;
}

nlohmann::ordered_json to_json(const Route& r) {
  nlohmann::ordered_json j;
  j["id"] = r.id;
  j["vehicle"] = r.vehicle_id;
  j["value"] = r.value;
  j["cost"] = r.cost;
  j["driving_minutes"] = r.driving_minutes;
  j["served"] = r.served;
  auto stops = nlohmann::ordered_json::array();
  for (const auto& s : r.stops) {
    const char* kind = s.kind == StopKind::kPickup ? "pickup"
                       : s.kind == StopKind::kCenter ? "center"
                                                     : "dropoff";
    stops.push_back({{"kind", kind},
                     {"ref", s.ref},
                     {"row", s.cell.row},
                     {"col", s.cell.col},
                     {"time", format_clock(s.arrival_minute)}});
  }
  j["stops"] = stops;
  return j;
}

Route route_from_json(const nlohmann::json& j) {
  Route r;
  r.id = j.at("id").get<int>();
  r.vehicle_id = j.at("vehicle").get<std::string>();
  r.value = j.at("value").get<double>();
  r.cost = j.at("cost").get<double>();
  r.driving_minutes = j.at("driving_minutes").get<int>();
  r.served = j.at("served").get<std::vector<std::string>>();
  for (const auto& s : j.at("stops")) {
    Stop stop;
    const auto kind = s.at("kind").get<std::string>();
    if (kind == "pickup") {
      stop.kind = StopKind::kPickup;
    } else if (kind == "center") {
      stop.kind = StopKind::kCenter;
    } else if (kind == "dropoff") {
      stop.kind = StopKind::kDropoff;
    } else {
      throw ValidationError("unknown stop kind " + kind);
    }
    stop.ref = s.at("ref").get<std::string>();
    stop.cell = {s.at("row").get<int>(), s.at("col").get<int>()};
    stop.arrival_minute = parse_clock(s.at("time").get<std::string>());
    r.stops.push_back(std::move(stop));
  }
  return r;
}

void write_pool_jsonl(std::ostream& out, const RoutePool& pool) {
  for (const auto& r : pool.routes) out << to_json(r).dump() << "\n";
}

RoutePool read_pool_jsonl(std::istream& in) {
  RoutePool pool;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    try {
      pool.routes.push_back(route_from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError("route pool line " + std::to_string(line_no) + ": " + e.what());
    }
    if (pool.routes.back().id != static_cast<int>(pool.routes.size()) - 1) {
      throw ValidationError("route pool line " + std::to_string(line_no) + ": ids out of order");
    }
  }
  return pool;
}

void save_pool(const RoutePool& pool, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot write route pool " + path.string());
  write_pool_jsonl(out, pool);
}

RoutePool load_pool(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw NotFoundError("cannot open route pool " + path.string());
  return read_pool_jsonl(in);
}

}  // namespace adviser

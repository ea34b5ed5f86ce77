#include "adviser/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <unordered_map>

namespace adviser {

namespace {

constexpr double kTieTol = 1e-12;
constexpr double kMoneyTol = 1e-9;
constexpr std::size_t kCall = index_of(InterventionKind::kPhoneCall);
constexpr std::size_t kVoucher = index_of(InterventionKind::kTravelVoucher);
constexpr std::size_t kPickup = index_of(InterventionKind::kPickupService);
constexpr std::size_t kDrive = index_of(InterventionKind::kVaccineDrive);
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

InterventionKind kind_at(std::size_t k) { return kAllKinds[k]; }

std::size_t block_count(const AllocationProblem& p) {
  std::size_t n = p.block_preload.size();
  for (const auto& b : p.beneficiaries) {
    if (b.drive_block >= 0) n = std::max(n, static_cast<std::size_t>(b.drive_block) + 1);
  }
  return n;
}

int preload(const AllocationProblem& p, std::size_t block) {
  return block < p.block_preload.size() ? p.block_preload[block] : 0;
}

int ceil_div(int a, int b) { return (a + b - 1) / b; }

// Nurse-days needed given drive counts per block on top of the preload.
long nurse_days_needed(const AllocationProblem& p, const std::vector<int>& counts) {
  long days = 0;
  const std::size_t blocks = std::max(counts.size(), p.block_preload.size());
  for (std::size_t b = 0; b < blocks; ++b) {
    const int total = preload(p, b) + (b < counts.size() ? counts[b] : 0);
    if (total > 0) days += ceil_div(total, p.caps.drives_per_nurse_day);
  }
  return days;
}

// Kind k is worth considering for beneficiary b: allowed, eligible and an
// improvement on no intervention. Pickups also need some route.
struct Prepared {
  const AllocationProblem& p;
  std::vector<std::vector<int>> routes_of;  // beneficiary -> route ids containing it
  std::vector<int> vehicle_of;              // route -> vehicle index
  int vehicle_count = 0;
  std::vector<std::array<bool, kNumKinds>> ok;
  std::size_t blocks = 0;
  double drive_cap = 0.0;  // relaxed total drives allowed

  explicit Prepared(const AllocationProblem& prob) : p(prob) {
    const auto n = p.beneficiaries.size();
    routes_of.resize(n);
    std::map<std::string, int> vehicles;
    for (const auto& r : p.routes) {
      const auto [it, inserted] = vehicles.emplace(r.vehicle, static_cast<int>(vehicles.size()));
      vehicle_of.push_back(it->second);
      for (int m : r.members) {
        auto& list = routes_of[static_cast<std::size_t>(m)];
        if (list.empty() || list.back() != r.id) list.push_back(r.id);
      }
    }
    vehicle_count = static_cast<int>(vehicles.size());
    ok.resize(n);
    for (std::size_t b = 0; b < n; ++b) {
      const auto& x = p.beneficiaries[b];
      for (std::size_t k = 0; k < kNumKinds; ++k) {
        bool good = x.eligible && x.allowed[k] && x.need(kind_at(k)) > 0.0;
        if (k == kDrive) good = good && x.drive_block >= 0;
        if (k == kPickup) good = good && !routes_of[b].empty();
        ok[b][k] = good;
      }
    }
    blocks = block_count(p);
    if (p.caps.nurse_days >= kUnlimited) {
      drive_cap = std::numeric_limits<double>::infinity();
    } else {
      long pre = 0;
      for (int v : p.block_preload) pre += v;
      drive_cap = static_cast<double>(p.caps.nurse_days) * p.caps.drives_per_nurse_day -
                  static_cast<double>(pre);
    }
  }

  double cost(std::size_t k) const { return p.unit_cost(kind_at(k)); }
};

// Per-node facts independent of the multipliers.
struct NodeInfo {
  bool infeasible = false;
  double fixed_value = 0.0;  // baseline plus needs of fixed-in pairs
  double fixed_cost = 0.0;
  int fixed_calls = 0;
  int fixed_drives = 0;
  std::vector<char> covered;          // by an included route
  std::vector<char> vehicle_used;
  int routes_in = 0;
  std::vector<int> open_routes;       // free and compatible
  std::vector<int> free_bens;         // no included pair
  std::vector<std::array<bool, kNumKinds>> avail;  // free pairs usable
  std::vector<char> pickup_via_open;  // pickup reachable through an open route
};

NodeInfo inspect(const Prepared& pr, const NodeFixing& node) {
  const auto& p = pr.p;
  const auto n = p.beneficiaries.size();
  NodeInfo info;
  info.fixed_value = p.baseline_objective();
  info.covered.assign(n, 0);
  info.vehicle_used.assign(static_cast<std::size_t>(pr.vehicle_count), 0);
  info.avail.assign(n, {});
  info.pickup_via_open.assign(n, 0);

  for (std::size_t r = 0; r < p.routes.size(); ++r) {
    if (node.route[r] != 1) continue;
    auto& used = info.vehicle_used[static_cast<std::size_t>(pr.vehicle_of[r])];
    if (used) info.infeasible = true;
    used = 1;
    ++info.routes_in;
    info.fixed_cost += p.routes[r].cost;
    for (int m : p.routes[r].members) info.covered[static_cast<std::size_t>(m)] = 1;
  }
  if (info.routes_in > p.caps.vehicles) info.infeasible = true;
  const bool room = info.routes_in < p.caps.vehicles;
  std::vector<char> open(p.routes.size(), 0);
  for (std::size_t r = 0; r < p.routes.size(); ++r) {
    if (node.route[r] == 0 && room && !info.vehicle_used[static_cast<std::size_t>(pr.vehicle_of[r])]) {
      open[r] = 1;
      info.open_routes.push_back(static_cast<int>(r));
    }
  }

  std::vector<int> block_fixed(pr.blocks, 0);
  for (std::size_t b = 0; b < n; ++b) {
    const auto& x = p.beneficiaries[b];
    int in_kind = -1;
    for (std::size_t k = 0; k < kNumKinds; ++k) {
      if (node.pair[b][k] == 1) {
        if (in_kind >= 0) info.infeasible = true;
        in_kind = static_cast<int>(k);
      }
    }
    if (in_kind >= 0) {
      const auto k = static_cast<std::size_t>(in_kind);
      if (!x.eligible || !x.allowed[k] || (k == kDrive && x.drive_block < 0)) {
        info.infeasible = true;
        continue;
      }
      info.fixed_value += x.need(kind_at(k));
      info.fixed_cost += pr.cost(k);
      if (k == kCall) ++info.fixed_calls;
      if (k == kDrive) {
        ++info.fixed_drives;
        ++block_fixed[static_cast<std::size_t>(x.drive_block)];
      }
      if (k == kPickup && !info.covered[b]) {
        bool reachable = false;
        for (int r : pr.routes_of[b]) reachable = reachable || open[static_cast<std::size_t>(r)];
        if (!reachable) info.infeasible = true;
      }
      continue;
    }
    info.free_bens.push_back(static_cast<int>(b));
    for (std::size_t k = 0; k < kNumKinds; ++k) {
      info.avail[b][k] = node.pair[b][k] == 0 && pr.ok[b][k];
    }
    if (info.avail[b][kPickup] && !info.covered[b]) {
      bool reachable = false;
      for (int r : pr.routes_of[b]) reachable = reachable || open[static_cast<std::size_t>(r)];
      info.pickup_via_open[b] = reachable;
      if (!reachable) info.avail[b][kPickup] = false;
    }
  }
  if (info.fixed_cost > p.budget + kMoneyTol) info.infeasible = true;
  if (info.fixed_calls > p.caps.calls) info.infeasible = true;
  if (p.caps.nurse_days < kUnlimited &&
      nurse_days_needed(p, block_fixed) > p.caps.nurse_days) {
    info.infeasible = true;
  }
  return info;
}

struct Multipliers {
  double mu = 0.0;
  double nu_call = 0.0;
  double nu_drive = 0.0;
};

struct Evaluation {
  double value = 0.0;
  double spend = 0.0;  // relaxed solution spend beyond the fixed part
  int calls = 0;
  int drives = 0;
  std::vector<double> route_gain;  // per route id (open routes only)
};

double reduced_profit(const Prepared& pr, std::size_t b, std::size_t k, const Multipliers& m) {
  const double need = pr.p.beneficiaries[b].need(kind_at(k));
  if (k == kPickup) return need;
  double rp = need - m.mu * pr.cost(k);
  if (k == kCall) rp -= m.nu_call;
  if (k == kDrive) rp -= m.nu_drive;
  return rp;
}

Evaluation evaluate(const Prepared& pr, const NodeInfo& info, const Multipliers& m,
                    bool want_gains) {
  const auto& p = pr.p;
  Evaluation ev;
  double value = info.fixed_value;
  std::vector<double> extra(p.beneficiaries.size(), 0.0);
  double sum_extra = 0.0;
  for (int bi : info.free_bens) {
    const auto b = static_cast<std::size_t>(bi);
    double best = 0.0;
    int best_k = -1;
    for (std::size_t k : {kCall, kVoucher, kDrive}) {
      if (!info.avail[b][k]) continue;
      const double rp = reduced_profit(pr, b, k, m);
      if (rp > best) {
        best = rp;
        best_k = static_cast<int>(k);
      }
    }
    if (info.avail[b][kPickup]) {
      const double pick = reduced_profit(pr, b, kPickup, m);
      if (info.covered[b]) {
        if (pick > best) {
          best = pick;
          best_k = static_cast<int>(kPickup);
        }
      } else if (pick > best) {
        extra[b] = pick - best;
        sum_extra += extra[b];
      }
    }
    value += best;
    if (best_k >= 0 && static_cast<std::size_t>(best_k) != kPickup) {
      ev.spend += pr.cost(static_cast<std::size_t>(best_k));
      if (static_cast<std::size_t>(best_k) == kCall) ++ev.calls;
      if (static_cast<std::size_t>(best_k) == kDrive) ++ev.drives;
    }
  }

  // Route part: min of a per-vehicle relaxation and the union of extras.
  std::vector<double> vehicle_best(static_cast<std::size_t>(pr.vehicle_count), 0.0);
  std::vector<int> vehicle_route(static_cast<std::size_t>(pr.vehicle_count), -1);
  if (want_gains) ev.route_gain.assign(p.routes.size(), kNegInf);
  for (int r : info.open_routes) {
    const auto& route = p.routes[static_cast<std::size_t>(r)];
    double gain = -m.mu * route.cost;
    int last = -1;
    for (int mb : route.members) {
      if (mb != last) gain += extra[static_cast<std::size_t>(mb)];
      last = mb;
    }
    if (want_gains) ev.route_gain[static_cast<std::size_t>(r)] = gain;
    const auto v = static_cast<std::size_t>(pr.vehicle_of[static_cast<std::size_t>(r)]);
    if (gain > vehicle_best[v]) {
      vehicle_best[v] = gain;
      vehicle_route[v] = r;
    }
  }
  std::vector<std::pair<double, int>> ranked;
  for (std::size_t v = 0; v < vehicle_best.size(); ++v) {
    if (vehicle_best[v] > 0.0) ranked.push_back({vehicle_best[v], vehicle_route[v]});
  }
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    return a.first != b.first ? a.first > b.first : a.second < b.second;
  });
  const std::size_t slots = static_cast<std::size_t>(std::max(0, pr.p.caps.vehicles - info.routes_in));
  double s_a = 0.0;
  for (std::size_t i = 0; i < ranked.size() && i < slots; ++i) {
    s_a += ranked[i].first;
    ev.spend += p.routes[static_cast<std::size_t>(ranked[i].second)].cost;
  }
  value += std::min(s_a, sum_extra);

  if (std::isfinite(p.budget)) value += m.mu * (p.budget - info.fixed_cost);
  if (p.caps.calls < kUnlimited) value += m.nu_call * (p.caps.calls - info.fixed_calls);
  if (std::isfinite(pr.drive_cap)) value += m.nu_drive * (pr.drive_cap - info.fixed_drives);
  ev.value = value;
  return ev;
}

struct BoundResult {
  double bound = kNegInf;
  Multipliers best;
};

BoundResult lagrangian_bound(const Prepared& pr, const NodeInfo& info) {
  BoundResult out;
  if (info.infeasible) return out;
  const auto& p = pr.p;
  Multipliers m;
  out.bound = evaluate(pr, info, m, false).value;
  out.best = m;
  const auto consider = [&](const Multipliers& x) {
    const auto ev = evaluate(pr, info, x, false);
    if (ev.value < out.bound) {
      out.bound = ev.value;
      out.best = x;
    }
    return ev;
  };

  if (std::isfinite(p.budget)) {
    double mu_max = 0.0;
    for (int bi : info.free_bens) {
      const auto b = static_cast<std::size_t>(bi);
      for (std::size_t k : {kCall, kVoucher, kDrive}) {
        if (info.avail[b][k]) mu_max = std::max(mu_max, p.beneficiaries[b].need(kind_at(k)) / pr.cost(k));
      }
    }
    for (int r : info.open_routes) {
      double gain = 0.0;
      for (int mb : p.routes[static_cast<std::size_t>(r)].members) {
        const auto b = static_cast<std::size_t>(mb);
        if (info.avail[b][kPickup]) gain += std::max(0.0, p.beneficiaries[b].need(InterventionKind::kPickupService));
      }
      mu_max = std::max(mu_max, gain / p.routes[static_cast<std::size_t>(r)].cost);
    }
    if (mu_max > 0.0) {
      const double remaining = p.budget - info.fixed_cost;
      consider({mu_max, 0.0, 0.0});
      double lo = 0.0;
      double hi = mu_max;
      for (int it = 0; it < 32; ++it) {
        const double mid = 0.5 * (lo + hi);
        const auto ev = consider({mid, 0.0, 0.0});
        if (ev.spend > remaining) {
          lo = mid;
        } else {
          hi = mid;
        }
      }
    }
  }

  // Capacity multipliers only when the best relaxed solution overuses them.
  const auto at_best = evaluate(pr, info, out.best, false);
  if (p.caps.calls < kUnlimited && at_best.calls > p.caps.calls - info.fixed_calls) {
    double lo = 0.0;
    double hi = 1.0;
    const int cap = p.caps.calls - info.fixed_calls;
    for (int it = 0; it < 32; ++it) {
      Multipliers x = out.best;
      x.nu_call = 0.5 * (lo + hi);
      const auto ev = consider(x);
      if (ev.calls > cap) {
        lo = x.nu_call;
      } else {
        hi = x.nu_call;
      }
    }
  }
  const auto after_calls = evaluate(pr, info, out.best, false);
  if (std::isfinite(pr.drive_cap) && after_calls.drives > pr.drive_cap - info.fixed_drives) {
    double lo = 0.0;
    double hi = 1.0;
    const double cap = pr.drive_cap - info.fixed_drives;
    for (int it = 0; it < 32; ++it) {
      Multipliers x = out.best;
      x.nu_drive = 0.5 * (lo + hi);
      const auto ev = consider(x);
      if (ev.drives > cap) {
        lo = x.nu_drive;
      } else {
        hi = x.nu_drive;
      }
    }
  }
  return out;
}

// Exact feasibility of a complete decision.
struct Usage {
  double cost = 0.0;
  int calls = 0;
  std::vector<int> block_counts;
};

Usage usage_of(const AllocationProblem& p, const Codes& codes, const std::vector<int>& routes) {
  Usage u;
  u.block_counts.assign(block_count(p), 0);
  for (std::size_t b = 0; b < codes.size(); ++b) {
    if (codes[b] == 0) continue;
    const auto k = static_cast<std::size_t>(codes[b] - 1);
    u.cost += p.unit_cost(kind_at(k));
    if (k == kCall) ++u.calls;
    if (k == kDrive && p.beneficiaries[b].drive_block >= 0) {
      ++u.block_counts[static_cast<std::size_t>(p.beneficiaries[b].drive_block)];
    }
  }
  for (int r : routes) u.cost += p.routes[static_cast<std::size_t>(r)].cost;
  return u;
}

bool within_limits(const AllocationProblem& p, const Usage& u) {
  if (u.cost > p.budget + kMoneyTol) return false;
  if (u.calls > p.caps.calls) return false;
  if (p.caps.nurse_days < kUnlimited && nurse_days_needed(p, u.block_counts) > p.caps.nurse_days) {
    return false;
  }
  return true;
}

// Greedy completion: fixed decisions, included routes, then the remaining
// options by need per unit cost.
struct Incumbent {
  Codes codes;
  std::vector<int> routes;
  double objective = kNegInf;
};

void greedy_fill(const Prepared& pr, const NodeFixing& node, const std::vector<int>& extra_routes,
                 Incumbent& out) {
  const auto& p = pr.p;
  const auto n = p.beneficiaries.size();
  Codes codes(n, 0);
  std::vector<int> routes;
  std::vector<char> covered(n, 0);
  for (std::size_t r = 0; r < p.routes.size(); ++r) {
    if (node.route[r] == 1) routes.push_back(static_cast<int>(r));
  }
  for (int r : extra_routes) routes.push_back(r);
  std::sort(routes.begin(), routes.end());
  for (int r : routes) {
    for (int m : p.routes[static_cast<std::size_t>(r)].members) covered[static_cast<std::size_t>(m)] = 1;
  }
  for (std::size_t b = 0; b < n; ++b) {
    for (std::size_t k = 0; k < kNumKinds; ++k) {
      if (node.pair[b][k] == 1) codes[b] = static_cast<std::int8_t>(k + 1);
    }
    if (codes[b] == kPickup + 1 && !covered[b]) return;
  }
  Usage u = usage_of(p, codes, routes);
  if (!within_limits(p, u)) return;

  struct Option {
    double ratio;
    std::size_t b;
    std::size_t k;
  };
  std::vector<Option> options;
  for (std::size_t b = 0; b < n; ++b) {
    if (codes[b] != 0) continue;
    bool decided = false;
    for (std::size_t k = 0; k < kNumKinds; ++k) decided = decided || node.pair[b][k] == 1;
    if (decided) continue;
    for (std::size_t k = 0; k < kNumKinds; ++k) {
      if (node.pair[b][k] != 0 || !pr.ok[b][k]) continue;
      if (k == kPickup && !covered[b]) continue;
      const double need = p.beneficiaries[b].need(kind_at(k));
      const double c = pr.cost(k);
      options.push_back({c > 0 ? need / c : std::numeric_limits<double>::infinity(), b, k});
    }
  }
  std::sort(options.begin(), options.end(), [](const Option& a, const Option& b) {
    if (a.ratio != b.ratio) return a.ratio > b.ratio;
    if (a.b != b.b) return a.b < b.b;
    return a.k < b.k;
  });
  for (const auto& o : options) {
    if (codes[o.b] != 0) continue;
    const double c = pr.cost(o.k);
    if (u.cost + c > p.budget + kMoneyTol) continue;
    if (o.k == kCall && u.calls + 1 > p.caps.calls) continue;
    if (o.k == kDrive) {
      const auto blk = static_cast<std::size_t>(p.beneficiaries[o.b].drive_block);
      ++u.block_counts[blk];
      if (p.caps.nurse_days < kUnlimited && nurse_days_needed(p, u.block_counts) > p.caps.nurse_days) {
        --u.block_counts[blk];
        continue;
      }
    }
    codes[o.b] = static_cast<std::int8_t>(o.k + 1);
    u.cost += c;
    if (o.k == kCall) ++u.calls;
  }
  const double obj = plan_objective(p, codes);
  if (obj > out.objective + kTieTol) {
    out.objective = obj;
    out.codes = std::move(codes);
    out.routes = std::move(routes);
  }
}

// Root heuristic: add routes one at a time while the greedy completion improves.
void greedy_with_routes(const Prepared& pr, const NodeFixing& root, Incumbent& inc) {
  const auto& p = pr.p;
  std::vector<std::pair<double, int>> order;
  for (std::size_t r = 0; r < p.routes.size(); ++r) {
    if (root.route[r] != 0) continue;
    double value = 0.0;
    for (int m : p.routes[r].members) {
      const auto b = static_cast<std::size_t>(m);
      if (pr.ok[b][kPickup]) value += p.beneficiaries[b].need(InterventionKind::kPickupService);
    }
    order.push_back({value / p.routes[r].cost, static_cast<int>(r)});
  }
  std::sort(order.begin(), order.end(), [](const auto& a, const auto& b) {
    return a.first != b.first ? a.first > b.first : a.second < b.second;
  });
  std::vector<int> chosen;
  std::set<int> vehicles;
  greedy_fill(pr, root, chosen, inc);
  for (const auto& [ratio, r] : order) {
    if (static_cast<int>(chosen.size()) >= p.caps.vehicles) break;
    const int v = pr.vehicle_of[static_cast<std::size_t>(r)];
    if (vehicles.count(v)) continue;
    const double before = inc.objective;
    auto trial = chosen;
    trial.push_back(r);
    greedy_fill(pr, root, trial, inc);
    if (inc.objective > before + kTieTol) {
      chosen = std::move(trial);
      vehicles.insert(v);
    }
  }
}

void set_route(const Prepared& pr, NodeFixing& node, std::size_t r, std::int8_t status) {
  const auto& p = pr.p;
  node.route[r] = status;
  if (status == 1) {
    int in = 0;
    for (std::size_t q = 0; q < p.routes.size(); ++q) {
      if (node.route[q] == 1) ++in;
    }
    for (std::size_t q = 0; q < p.routes.size(); ++q) {
      if (node.route[q] != 0) continue;
      if (pr.vehicle_of[q] == pr.vehicle_of[r] || in >= p.caps.vehicles) node.route[q] = -1;
    }
  }
  // Pickups that no longer have any possible route.
  for (const auto& route : p.routes) {
    for (int m : route.members) {
      const auto b = static_cast<std::size_t>(m);
      if (node.pair[b][kPickup] != 0) continue;
      bool possible = false;
      for (int q : pr.routes_of[b]) possible = possible || node.route[static_cast<std::size_t>(q)] >= 0;
      if (!possible) node.pair[b][kPickup] = -1;
    }
  }
}

void include_pair(NodeFixing& node, std::size_t b, std::size_t k) {
  for (std::size_t j = 0; j < kNumKinds; ++j) node.pair[b][j] = j == k ? 1 : -1;
}

// Excludes routes that no free beneficiary could ride.
void drop_useless_routes(const Prepared& pr, NodeFixing& node) {
  const auto& p = pr.p;
  for (std::size_t r = 0; r < p.routes.size(); ++r) {
    if (node.route[r] != 0) continue;
    bool useful = false;
    for (int m : p.routes[r].members) {
      const auto b = static_cast<std::size_t>(m);
      useful = useful || node.pair[b][kPickup] == 0 || node.pair[b][kPickup] == 1;
    }
    if (!useful) node.route[r] = -1;
  }
}

}  // namespace

double AllocationProblem::unit_cost(InterventionKind k) const {
  switch (k) {
    case InterventionKind::kPhoneCall: return costs.phone_call;
    case InterventionKind::kTravelVoucher: return costs.travel_voucher;
    case InterventionKind::kPickupService: return 0.0;
    case InterventionKind::kVaccineDrive: return costs.vaccine_drive;
  }
  return 0.0;
}

double AllocationProblem::baseline_objective() const {
  double s = 0.0;
  for (const auto& b : beneficiaries) s += b.p_none;
  return s;
}

void validate_problem(const AllocationProblem& p) {
  if (!(p.budget >= 0.0)) throw ValidationError("budget must be non-negative");
  if (!(p.costs.phone_call > 0 && p.costs.travel_voucher > 0 && p.costs.vaccine_drive > 0)) {
    throw ValidationError("unit costs must be positive");
  }
  if (p.caps.vehicles < 0 || p.caps.calls < 0 || p.caps.nurse_days < 0 ||
      p.caps.drives_per_nurse_day < 1) {
    throw ValidationError("capacities must be non-negative");
  }
  const auto in01 = [](double v) { return v >= 0.0 && v <= 1.0; };
  std::set<std::string> ids;
  for (const auto& b : p.beneficiaries) {
    if (!ids.insert(b.id).second) throw ValidationError("duplicate beneficiary " + b.id);
    if (!in01(b.p_none)) throw ValidationError("probability outside [0, 1] for " + b.id);
    for (double v : b.p) {
      if (!in01(v)) throw ValidationError("probability outside [0, 1] for " + b.id);
    }
  }
  for (std::size_t r = 0; r < p.routes.size(); ++r) {
    const auto& route = p.routes[r];
    if (route.id != static_cast<int>(r)) throw ValidationError("route ids must equal positions");
    if (!(route.cost > 0.0)) throw ValidationError("route cost must be positive");
    for (int m : route.members) {
      if (m < 0 || static_cast<std::size_t>(m) >= p.beneficiaries.size()) {
        throw ValidationError("route " + std::to_string(r) + " names an unknown beneficiary");
      }
    }
  }
  for (int v : p.block_preload) {
    if (v < 0) throw ValidationError("negative drive preload");
  }
  if (p.caps.nurse_days < kUnlimited && nurse_days_needed(p, {}) > p.caps.nurse_days) {
    throw ValidationError("preloaded drives exceed nurse-day capacity");
  }
}

double plan_objective(const AllocationProblem& p, const Codes& codes) {
  double s = 0.0;
  for (std::size_t b = 0; b < p.beneficiaries.size(); ++b) {
    const auto& x = p.beneficiaries[b];
    s += codes[b] == 0 ? x.p_none : x.p[static_cast<std::size_t>(codes[b] - 1)];
  }
  return s;
}

Plan make_plan(const AllocationProblem& p, const Codes& codes, std::vector<int> routes) {
  std::sort(routes.begin(), routes.end());
  Plan plan;
  plan.routes = routes;
  std::vector<int> counts(block_count(p), 0);
  for (std::size_t b = 0; b < codes.size(); ++b) {
    if (codes[b] == 0) continue;
    const auto k = static_cast<std::size_t>(codes[b] - 1);
    Assignment a;
    a.beneficiary_id = p.beneficiaries[b].id;
    a.kind = kind_at(k);
    if (k == kPickup) {
      for (int r : routes) {
        const auto& m = p.routes[static_cast<std::size_t>(r)].members;
        if (std::find(m.begin(), m.end(), static_cast<int>(b)) != m.end()) {
          a.route_id = r;
          break;
        }
      }
    }
    if (k == kDrive) {
      a.drive_block = p.beneficiaries[b].drive_block;
      if (a.drive_block && *a.drive_block >= 0) ++counts[static_cast<std::size_t>(*a.drive_block)];
    }
    plan.assignments.push_back(std::move(a));
  }
  for (std::size_t blk = 0; blk < counts.size(); ++blk) {
    const int total = preload(p, blk) + counts[blk];
    if (total > 0) {
      plan.drive_batches.push_back(
          {static_cast<int>(blk), total, ceil_div(total, p.caps.drives_per_nurse_day)});
    }
  }
  plan.total_cost = usage_of(p, codes, routes).cost;
  plan.objective = plan_objective(p, codes);
  plan.best_bound = plan.objective;
  return plan;
}

NodeFixing NodeFixing::root(const AllocationProblem& p) {
  NodeFixing n;
  n.route.assign(p.routes.size(), 0);
  n.pair.assign(p.beneficiaries.size(), {0, 0, 0, 0});
  return n;
}

double upper_bound(const AllocationProblem& p, const NodeFixing& node) {
  const Prepared pr(p);
  return lagrangian_bound(pr, inspect(pr, node)).bound;
}

Plan branch_and_bound(const AllocationProblem& p, const BnBLimits& limits) {
  validate_problem(p);
  const Prepared pr(p);
  const auto start = std::chrono::steady_clock::now();

  NodeFixing root = NodeFixing::root(p);
  for (std::size_t b = 0; b < p.beneficiaries.size(); ++b) {
    for (std::size_t k = 0; k < kNumKinds; ++k) {
      if (!pr.ok[b][k]) root.pair[b][k] = -1;
    }
  }
  drop_useless_routes(pr, root);

  Incumbent inc;
  inc.codes.assign(p.beneficiaries.size(), 0);
  inc.objective = plan_objective(p, inc.codes);
  greedy_with_routes(pr, root, inc);

  SolverStats stats;
  struct Entry {
    NodeFixing node;
    double parent_bound;
    int depth;
  };
  std::vector<Entry> stack;
  stack.push_back({std::move(root), std::numeric_limits<double>::infinity(), 0});
  double open_bound = kNegInf;

  while (!stack.empty()) {
    if (limits.node_cap > 0 && stats.nodes >= limits.node_cap) {
      stats.hit_node_cap = true;
      break;
    }
    if (limits.time_cap_seconds > 0.0) {
      const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
      if (elapsed.count() > limits.time_cap_seconds) {
        stats.hit_time_cap = true;
        break;
      }
    }
    Entry e = std::move(stack.back());
    stack.pop_back();
    ++stats.nodes;
    stats.max_depth = std::max(stats.max_depth, e.depth);

    const NodeInfo info = inspect(pr, e.node);
    const BoundResult br = lagrangian_bound(pr, info);
    const double bound = std::min(br.bound, e.parent_bound);
    if (limits.on_node) limits.on_node(e.node, bound);
    if (bound <= inc.objective + kTieTol) {
      ++stats.pruned;
      continue;
    }

    const double before = inc.objective;
    greedy_fill(pr, e.node, {}, inc);
    if (inc.objective > before) ++stats.incumbent_updates;
    if (bound <= inc.objective + kTieTol) {
      ++stats.pruned;
      continue;
    }

    // Branch on the open route of largest gain, then on pairs.
    int branch_route = -1;
    if (!info.open_routes.empty()) {
      const auto ev = evaluate(pr, info, br.best, true);
      double best_gain = kNegInf;
      for (int r : info.open_routes) {
        if (ev.route_gain[static_cast<std::size_t>(r)] > best_gain) {
          best_gain = ev.route_gain[static_cast<std::size_t>(r)];
          branch_route = r;
        }
      }
    }
    if (branch_route >= 0) {
      NodeFixing out = e.node;
      set_route(pr, out, static_cast<std::size_t>(branch_route), -1);
      NodeFixing in = std::move(e.node);
      set_route(pr, in, static_cast<std::size_t>(branch_route), 1);
      stack.push_back({std::move(out), bound, e.depth + 1});
      stack.push_back({std::move(in), bound, e.depth + 1});
      continue;
    }

    int bb = -1;
    int bk = -1;
    double best_rp = kNegInf;
    for (int bi : info.free_bens) {
      const auto b = static_cast<std::size_t>(bi);
      for (std::size_t k = 0; k < kNumKinds; ++k) {
        if (!info.avail[b][k]) continue;
        if (k == kPickup && !info.covered[b]) continue;
        const double rp = reduced_profit(pr, b, k, br.best);
        if (rp > best_rp) {
          best_rp = rp;
          bb = bi;
          bk = static_cast<int>(k);
        }
      }
    }
    if (bb < 0) {
      // Leaf: every decision is fixed.
      Incumbent leaf;
      greedy_fill(pr, e.node, {}, leaf);
      if (leaf.objective > inc.objective + kTieTol) {
        inc = std::move(leaf);
        ++stats.incumbent_updates;
      }
      continue;
    }
    NodeFixing out = e.node;
    out.pair[static_cast<std::size_t>(bb)][static_cast<std::size_t>(bk)] = -1;
    drop_useless_routes(pr, out);
    NodeFixing in = std::move(e.node);
    include_pair(in, static_cast<std::size_t>(bb), static_cast<std::size_t>(bk));
    drop_useless_routes(pr, in);
    stack.push_back({std::move(out), bound, e.depth + 1});
    stack.push_back({std::move(in), bound, e.depth + 1});
  }
  for (const auto& e : stack) open_bound = std::max(open_bound, e.parent_bound);

  Plan plan = make_plan(p, inc.codes, inc.routes);
  plan.stats = stats;
  plan.optimal = stack.empty();
  plan.best_bound = std::max(plan.objective, open_bound);
  plan.gap = plan.objective > 0.0 ? (plan.best_bound - plan.objective) / plan.objective : 0.0;
  return plan;
}

Plan brute_force(const AllocationProblem& p, const NodeFixing* fixing) {
  if (p.beneficiaries.size() > kBruteForceMaxBeneficiaries ||
      p.routes.size() > kBruteForceMaxRoutes) {
    throw ValidationError("brute_force is limited to " +
                          std::to_string(kBruteForceMaxBeneficiaries) + " beneficiaries and " +
                          std::to_string(kBruteForceMaxRoutes) + " routes");
  }
  validate_problem(p);
  const Prepared pr(p);
  const auto n = p.beneficiaries.size();
  const auto nr = p.routes.size();

  // Route selections in lexicographic order of their sorted id lists.
  std::vector<std::vector<int>> selections;
  for (std::uint32_t mask = 0; mask < (1u << nr); ++mask) {
    std::vector<int> sel;
    std::set<int> vehicles;
    bool ok = true;
    for (std::size_t r = 0; r < nr && ok; ++r) {
      const bool in = mask & (1u << r);
      if (fixing && fixing->route[r] == 1 && !in) ok = false;
      if (fixing && fixing->route[r] == -1 && in) ok = false;
      if (in) {
        ok = ok && vehicles.insert(pr.vehicle_of[r]).second;
        sel.push_back(static_cast<int>(r));
      }
    }
    if (ok && static_cast<int>(sel.size()) <= p.caps.vehicles) selections.push_back(sel);
  }
  std::sort(selections.begin(), selections.end());

  // Candidate codes per beneficiary, ascending; dominated options dropped.
  std::vector<std::vector<std::int8_t>> options(n);
  std::vector<double> best_gain(n, 0.0);
  for (std::size_t b = 0; b < n; ++b) {
    int forced = -1;
    if (fixing) {
      for (std::size_t k = 0; k < kNumKinds; ++k) {
        if (fixing->pair[b][k] == 1) forced = static_cast<int>(k);
      }
    }
    if (forced < 0) options[b].push_back(0);
    for (std::size_t k = 0; k < kNumKinds; ++k) {
      if (fixing && fixing->pair[b][k] == -1) continue;
      if (forced >= 0 && static_cast<int>(k) != forced) continue;
      const auto& x = p.beneficiaries[b];
      bool usable = x.eligible && x.allowed[k] && (k != kDrive || x.drive_block >= 0);
      if (forced < 0) usable = usable && pr.ok[b][k];
      if (!usable) continue;
      options[b].push_back(static_cast<std::int8_t>(k + 1));
      best_gain[b] = std::max(best_gain[b], x.need(kind_at(k)));
    }
  }
  std::vector<double> suffix(n + 1, 0.0);
  for (std::size_t b = n; b-- > 0;) suffix[b] = suffix[b + 1] + best_gain[b];

  Codes best_codes(n, 0);
  std::vector<int> best_routes;
  double best_obj = kNegInf;
  Codes codes(n, 0);
  std::vector<int> counts(pr.blocks, 0);
  const double base = p.baseline_objective();

  for (const auto& sel : selections) {
    double route_cost = 0.0;
    std::vector<char> covered(n, 0);
    for (int r : sel) {
      route_cost += p.routes[static_cast<std::size_t>(r)].cost;
      for (int m : p.routes[static_cast<std::size_t>(r)].members) covered[static_cast<std::size_t>(m)] = 1;
    }
    if (route_cost > p.budget + kMoneyTol) continue;

    std::function<void(std::size_t, double, int, double)> dfs =
        [&](std::size_t b, double cost, int calls, double gain) {
          if (base + gain + suffix[b] < best_obj - kTieTol) return;
          if (b == n) {
            // Every selected route must carry someone unless it was forced in.
            for (int r : sel) {
              if (fixing && fixing->route[static_cast<std::size_t>(r)] == 1) continue;
              bool used = false;
              for (std::size_t x = 0; x < n && !used; ++x) {
                if (codes[x] != kPickup + 1) continue;
                for (int q : sel) {
                  const auto& m = p.routes[static_cast<std::size_t>(q)].members;
                  if (std::find(m.begin(), m.end(), static_cast<int>(x)) != m.end()) {
                    used = q == r;
                    break;
                  }
                }
              }
              if (!used) return;
            }
            const double obj = plan_objective(p, codes);
            if (obj > best_obj + kTieTol ||
                (std::abs(obj - best_obj) <= kTieTol && codes < best_codes)) {
              best_obj = obj;
              best_codes = codes;
              best_routes = sel;
            }
            return;
          }
          const auto& x = p.beneficiaries[b];
          for (const auto code : options[b]) {
            if (code == kPickup + 1 && !covered[b]) continue;
            double c = cost;
            int cl = calls;
            if (code > 0) {
              const auto k = static_cast<std::size_t>(code - 1);
              c += pr.cost(k);
              if (k == kCall) ++cl;
              if (k == kDrive) {
                ++counts[static_cast<std::size_t>(x.drive_block)];
                const bool fits = p.caps.nurse_days >= kUnlimited ||
                                  nurse_days_needed(p, counts) <= p.caps.nurse_days;
                if (!fits) {
                  --counts[static_cast<std::size_t>(x.drive_block)];
                  continue;
                }
              }
            }
            if (c <= p.budget + kMoneyTol && cl <= p.caps.calls) {
              codes[b] = code;
              const double g = code == 0 ? 0.0 : x.need(kind_at(static_cast<std::size_t>(code - 1)));
              dfs(b + 1, c, cl, gain + g);
              codes[b] = 0;
            }
            if (code == kDrive + 1) --counts[static_cast<std::size_t>(x.drive_block)];
          }
        };
    dfs(0, route_cost, 0, 0.0);
  }

  if (best_obj == kNegInf) throw ValidationError("fixing admits no feasible plan");
  Plan plan = make_plan(p, best_codes, best_routes);
  plan.optimal = true;
  return plan;
}

double median_ratio(const AllocationProblem& p) {
  std::vector<double> ratios;
  for (const auto& b : p.beneficiaries) {
    if (!b.eligible) continue;
    for (std::size_t k : {kCall, kVoucher, kDrive}) {
      if (!b.allowed[k] || (k == kDrive && b.drive_block < 0)) continue;
      ratios.push_back(b.need(kind_at(k)) / p.unit_cost(kind_at(k)));
    }
  }
  if (ratios.empty()) return 0.0;
  std::sort(ratios.begin(), ratios.end());
  const auto m = ratios.size() / 2;
  return ratios.size() % 2 ? ratios[m] : 0.5 * (ratios[m - 1] + ratios[m]);
}

PruneResult greedy_prune(const AllocationProblem& p, std::optional<double> ratio_threshold,
                         double budget_fraction) {
  if (!(budget_fraction >= 0.0 && budget_fraction <= 1.0)) {
    throw ValidationError("budget fraction must lie in [0, 1]");
  }
  validate_problem(p);
  PruneResult out;
  out.threshold = ratio_threshold ? *ratio_threshold : 2.0 * median_ratio(p);
  const auto n = p.beneficiaries.size();
  Codes codes(n, 0);
  if (budget_fraction > 0.0) {
    const double limit = budget_fraction * p.budget;
    const double c = p.costs.vaccine_drive;
    std::vector<std::pair<double, std::size_t>> ranked;
    for (std::size_t b = 0; b < n; ++b) {
      const auto& x = p.beneficiaries[b];
      if (!x.eligible || !x.allowed[kDrive] || x.drive_block < 0) continue;
      const double ratio = x.need(InterventionKind::kVaccineDrive) / c;
      if (ratio > out.threshold && ratio > 0.0) ranked.push_back({ratio, b});
    }
    std::stable_sort(ranked.begin(), ranked.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    std::vector<int> counts(block_count(p), 0);
    double spent = 0.0;
    for (const auto& [ratio, b] : ranked) {
      if (spent + c > limit + kMoneyTol) break;
      const auto blk = static_cast<std::size_t>(p.beneficiaries[b].drive_block);
      ++counts[blk];
      if (p.caps.nurse_days < kUnlimited && nurse_days_needed(p, counts) > p.caps.nurse_days) {
        --counts[blk];
        continue;
      }
      codes[b] = static_cast<std::int8_t>(kDrive + 1);
      spent += c;
    }
  }
  out.partial = make_plan(p, codes, {});

  out.reduced = p;
  out.reduced.beneficiaries.clear();
  std::vector<int> remap(n, -1);
  for (std::size_t b = 0; b < n; ++b) {
    if (codes[b] != 0) continue;
    remap[b] = static_cast<int>(out.kept.size());
    out.kept.push_back(b);
    out.reduced.beneficiaries.push_back(p.beneficiaries[b]);
  }
  for (auto& r : out.reduced.routes) {
    std::vector<int> members;
    for (int m : r.members) {
      if (remap[static_cast<std::size_t>(m)] >= 0) members.push_back(remap[static_cast<std::size_t>(m)]);
    }
    r.members = std::move(members);
  }
  out.reduced.budget = p.budget - out.partial.total_cost;
  if (out.reduced.budget < 0.0) out.reduced.budget = 0.0;
  out.reduced.block_preload.assign(block_count(p), 0);
  for (std::size_t blk = 0; blk < out.reduced.block_preload.size(); ++blk) {
    out.reduced.block_preload[blk] = preload(p, blk);
  }
  for (std::size_t b = 0; b < n; ++b) {
    if (codes[b] != 0) ++out.reduced.block_preload[static_cast<std::size_t>(p.beneficiaries[b].drive_block)];
  }
  if (budget_fraction == 0.0) out.reduced.block_preload = p.block_preload;
  return out;
}

Plan merge_plans(const AllocationProblem& original, const PruneResult& pruned,
                 const Plan& reduced_plan) {
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t b = 0; b < original.beneficiaries.size(); ++b) index.emplace(original.beneficiaries[b].id, b);
  Codes codes(original.beneficiaries.size(), 0);
  for (const auto* plan : {&pruned.partial, &reduced_plan}) {
    for (const auto& a : plan->assignments) {
      codes[index.at(a.beneficiary_id)] = static_cast<std::int8_t>(index_of(a.kind) + 1);
    }
  }
  Plan merged = make_plan(original, codes, reduced_plan.routes);
  merged.stats = reduced_plan.stats;
  merged.optimal = reduced_plan.optimal;
  const double pre_gain = pruned.partial.objective - original.baseline_objective();
  merged.best_bound = std::max(merged.objective, reduced_plan.best_bound + pre_gain);
  merged.gap = merged.objective > 0.0 ? (merged.best_bound - merged.objective) / merged.objective : 0.0;
  return merged;
}

std::string_view to_string(PlanViolation v) {
  switch (v) {
    case PlanViolation::kOneMatch: return "one_match";
    case PlanViolation::kBudget: return "budget";
    case PlanViolation::kVehicleCount: return "vehicle_count";
    case PlanViolation::kRouteMembership: return "route_membership";
    case PlanViolation::kEligibility: return "eligibility";
    case PlanViolation::kCallCapacity: return "call_capacity";
    case PlanViolation::kDriveCapacity: return "drive_capacity";
    case PlanViolation::kDriveBatch: return "drive_batch";
    case PlanViolation::kAccounting: return "accounting";
  }
  return "unknown";
}

bool PlanVerdict::has(PlanViolation v) const {
  return std::find(violations.begin(), violations.end(), v) != violations.end();
}

PlanVerdict validate_plan(const Plan& plan, const AllocationProblem& p) {
  PlanVerdict verdict;
  const auto flag = [&](PlanViolation v, std::string detail) {
    verdict.valid = false;
    if (!verdict.has(v)) verdict.violations.push_back(v);
    verdict.details.push_back(std::move(detail));
  };
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t b = 0; b < p.beneficiaries.size(); ++b) index.emplace(p.beneficiaries[b].id, b);

  std::set<int> selected;
  std::map<std::string, int> per_vehicle;
  for (int r : plan.routes) {
    if (r < 0 || static_cast<std::size_t>(r) >= p.routes.size()) {
      flag(PlanViolation::kRouteMembership, "unknown route " + std::to_string(r));
      continue;
    }
    if (!selected.insert(r).second) {
      flag(PlanViolation::kRouteMembership, "route " + std::to_string(r) + " listed twice");
      continue;
    }
    if (++per_vehicle[p.routes[static_cast<std::size_t>(r)].vehicle] > 1) {
      flag(PlanViolation::kVehicleCount,
           "vehicle " + p.routes[static_cast<std::size_t>(r)].vehicle + " has two routes");
    }
  }
  if (static_cast<int>(selected.size()) > p.caps.vehicles) {
    flag(PlanViolation::kVehicleCount, std::to_string(selected.size()) + " routes for " +
                                           std::to_string(p.caps.vehicles) + " vehicles");
  }

  double cost = 0.0;
  for (int r : selected) cost += p.routes[static_cast<std::size_t>(r)].cost;
  int calls = 0;
  std::vector<int> counts(block_count(p), 0);
  std::set<std::size_t> seen;
  Codes codes(p.beneficiaries.size(), 0);
  for (const auto& a : plan.assignments) {
    const auto it = index.find(a.beneficiary_id);
    if (it == index.end()) {
      flag(PlanViolation::kOneMatch, "unknown beneficiary " + a.beneficiary_id);
      continue;
    }
    const auto b = it->second;
    if (!seen.insert(b).second) {
      flag(PlanViolation::kOneMatch, a.beneficiary_id + " matched more than once");
      continue;
    }
    const auto& x = p.beneficiaries[b];
    const auto k = index_of(a.kind);
    codes[b] = static_cast<std::int8_t>(k + 1);
    cost += p.unit_cost(a.kind);
    if (!x.eligible || !x.allowed[k]) {
      flag(PlanViolation::kEligibility,
           a.beneficiary_id + " is not eligible for " + std::string(to_string(a.kind)));
    }
    if (k == kCall) ++calls;
    if (k == kPickup) {
      if (!a.route_id || !selected.count(*a.route_id)) {
        flag(PlanViolation::kRouteMembership, a.beneficiary_id + " rides no selected route");
      } else {
        const auto& m = p.routes[static_cast<std::size_t>(*a.route_id)].members;
        if (std::find(m.begin(), m.end(), static_cast<int>(b)) == m.end()) {
          flag(PlanViolation::kRouteMembership,
               a.beneficiary_id + " is not on route " + std::to_string(*a.route_id));
        }
      }
    } else if (a.route_id) {
      flag(PlanViolation::kRouteMembership, a.beneficiary_id + " has a route but no pickup");
    }
    if (k == kDrive) {
      if (x.drive_block < 0 || !a.drive_block || *a.drive_block != x.drive_block) {
        flag(PlanViolation::kDriveBatch, a.beneficiary_id + " drive batch mismatch");
      } else {
        ++counts[static_cast<std::size_t>(x.drive_block)];
      }
    } else if (a.drive_block) {
      flag(PlanViolation::kDriveBatch, a.beneficiary_id + " has a drive batch but no drive");
    }
  }
  if (cost > p.budget + kMoneyTol) {
    flag(PlanViolation::kBudget, "cost " + format_double(cost) + " exceeds budget " +
                                     format_double(p.budget));
  }
  if (calls > p.caps.calls) {
    flag(PlanViolation::kCallCapacity, std::to_string(calls) + " calls exceed capacity");
  }
  if (p.caps.nurse_days < kUnlimited && nurse_days_needed(p, counts) > p.caps.nurse_days) {
    flag(PlanViolation::kDriveCapacity, "drives need more nurse-days than available");
  }
  std::vector<DriveBatch> batches;
  for (std::size_t blk = 0; blk < counts.size(); ++blk) {
    const int total = preload(p, blk) + counts[blk];
    if (total > 0) {
      batches.push_back({static_cast<int>(blk), total, ceil_div(total, p.caps.drives_per_nurse_day)});
    }
  }
  if (batches != plan.drive_batches) flag(PlanViolation::kDriveBatch, "drive batches disagree");
  if (std::abs(cost - plan.total_cost) > 1e-6) {
    flag(PlanViolation::kAccounting, "reported cost " + format_double(plan.total_cost) +
                                         ", recomputed " + format_double(cost));
  }
  if (std::abs(plan_objective(p, codes) - plan.objective) > 1e-9) {
    flag(PlanViolation::kAccounting, "reported objective disagrees with recomputation");
  }
  return verdict;
}

nlohmann::ordered_json to_json(const Plan& plan) {
  nlohmann::ordered_json j;
  auto assignments = nlohmann::ordered_json::array();
  for (const auto& a : plan.assignments) {
    nlohmann::ordered_json x;
    x["beneficiary"] = a.beneficiary_id;
    x["kind"] = to_string(a.kind);
    if (a.route_id) x["route"] = *a.route_id;
    if (a.drive_block) x["drive_block"] = *a.drive_block;
    assignments.push_back(std::move(x));
  }
  j["assignments"] = std::move(assignments);
  j["routes"] = plan.routes;
  auto batches = nlohmann::ordered_json::array();
  for (const auto& b : plan.drive_batches) {
    batches.push_back({{"block", b.block}, {"drives", b.drives}, {"nurse_days", b.nurse_days}});
  }
  j["drive_batches"] = std::move(batches);
  j["total_cost"] = plan.total_cost;
  j["objective"] = plan.objective;
  j["optimal"] = plan.optimal;
  j["best_bound"] = plan.best_bound;
  j["gap"] = plan.gap;
  j["stats"] = {{"nodes", plan.stats.nodes},
                {"pruned", plan.stats.pruned},
                {"incumbent_updates", plan.stats.incumbent_updates},
                {"max_depth", plan.stats.max_depth},
                {"hit_node_cap", plan.stats.hit_node_cap},
                {"hit_time_cap", plan.stats.hit_time_cap}};
  return j;
}

Plan plan_from_json(const nlohmann::json& j) {
  try {
    Plan plan;
    for (const auto& x : j.at("assignments")) {
      Assignment a;
      a.beneficiary_id = x.at("beneficiary").get<std::string>();
      a.kind = kind_from_string(x.at("kind").get<std::string>());
      if (x.contains("route")) a.route_id = x.at("route").get<int>();
      if (x.contains("drive_block")) a.drive_block = x.at("drive_block").get<int>();
      plan.assignments.push_back(std::move(a));
    }
    plan.routes = j.at("routes").get<std::vector<int>>();
    for (const auto& b : j.at("drive_batches")) {
      plan.drive_batches.push_back(
          {b.at("block").get<int>(), b.at("drives").get<int>(), b.at("nurse_days").get<int>()});
    }
    plan.total_cost = j.at("total_cost").get<double>();
    plan.objective = j.at("objective").get<double>();
    plan.optimal = j.at("optimal").get<bool>();
    plan.best_bound = j.at("best_bound").get<double>();
    plan.gap = j.at("gap").get<double>();
    const auto& s = j.at("stats");
    plan.stats.nodes = s.at("nodes").get<long>();
    plan.stats.pruned = s.at("pruned").get<long>();
    plan.stats.incumbent_updates = s.at("incumbent_updates").get<long>();
    plan.stats.max_depth = s.at("max_depth").get<int>();
    plan.stats.hit_node_cap = s.at("hit_node_cap").get<bool>();
    plan.stats.hit_time_cap = s.at("hit_time_cap").get<bool>();
    return plan;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed plan: ") + e.what());
  }
}

nlohmann::ordered_json to_json(const AllocationProblem& p) {
  nlohmann::ordered_json j;
  j["budget"] = std::isfinite(p.budget) ? nlohmann::ordered_json(p.budget) : nlohmann::ordered_json();
  j["costs"] = {{"phone_call", p.costs.phone_call},
                {"travel_voucher", p.costs.travel_voucher},
                {"vaccine_drive", p.costs.vaccine_drive}};
  j["capacities"] = {{"vehicles", p.caps.vehicles},
                     {"calls", p.caps.calls},
                     {"nurse_days", p.caps.nurse_days},
                     {"drives_per_nurse_day", p.caps.drives_per_nurse_day}};
  j["block_preload"] = p.block_preload;
  auto bens = nlohmann::ordered_json::array();
  for (const auto& b : p.beneficiaries) {
    nlohmann::ordered_json x;
    x["id"] = b.id;
    x["p_none"] = b.p_none;
    x["p"] = b.p;
    x["allowed"] = b.allowed;
    x["eligible"] = b.eligible;
    x["drive_block"] = b.drive_block;
    bens.push_back(std::move(x));
  }
  j["beneficiaries"] = std::move(bens);
  auto routes = nlohmann::ordered_json::array();
  for (const auto& r : p.routes) {
    routes.push_back({{"id", r.id}, {"vehicle", r.vehicle}, {"cost", r.cost}, {"members", r.members}});
  }
  j["routes"] = std::move(routes);
  return j;
}

AllocationProblem problem_from_json(const nlohmann::json& j) {
  AllocationProblem p;
  try {
    p.budget = j.at("budget").is_null() ? std::numeric_limits<double>::infinity()
                                        : j.at("budget").get<double>();
    const auto& c = j.at("costs");
    p.costs = {c.at("phone_call").get<double>(), c.at("travel_voucher").get<double>(),
               c.at("vaccine_drive").get<double>()};
    const auto& k = j.at("capacities");
    p.caps = {k.at("vehicles").get<int>(), k.at("calls").get<int>(), k.at("nurse_days").get<int>(),
              k.at("drives_per_nurse_day").get<int>()};
    p.block_preload = j.at("block_preload").get<std::vector<int>>();
    for (const auto& x : j.at("beneficiaries")) {
      ProblemBeneficiary b;
      b.id = x.at("id").get<std::string>();
      b.p_none = x.at("p_none").get<double>();
      b.p = x.at("p").get<std::array<double, kNumKinds>>();
      b.allowed = x.at("allowed").get<std::array<bool, kNumKinds>>();
      b.eligible = x.at("eligible").get<bool>();
      b.drive_block = x.at("drive_block").get<int>();
      p.beneficiaries.push_back(std::move(b));
    }
    for (const auto& x : j.at("routes")) {
      p.routes.push_back({x.at("id").get<int>(), x.at("vehicle").get<std::string>(),
                          x.at("cost").get<double>(), x.at("members").get<std::vector<int>>()});
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed problem snapshot: ") + e.what());
  }
  validate_problem(p);
  return p;
}

}  // namespace adviser

#include "adviser/travel_grid.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>

#include "json.hpp"

namespace adviser {

namespace {

constexpr double kEarthRadiusKm = 6371.0088;
constexpr char kMagic[8] = {'A', 'D', 'V', 'M', 'T', 'X', '0', '1'};
constexpr std::uint32_t kFormatVersion = 1;

template <typename T>
void put(std::ofstream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <typename T>
T get(std::ifstream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof v);
  if (!in) throw ValidationError("truncated travel matrix file");
  return v;
}

void put_string(std::ofstream& out, const std::string& s) {
  put(out, static_cast<std::uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string get_string(std::ifstream& in) {
  const auto n = get<std::uint32_t>(in);
  if (n > (1u << 20)) throw ValidationError("corrupt travel matrix file");
  std::string s(n, '\0');
  in.read(s.data(), n);
  if (!in) throw ValidationError("truncated travel matrix file");
  return s;
}

std::filesystem::path with_suffix(const std::filesystem::path& base,
                                  const char* suffix) {
  return std::filesystem::path(base.string() + suffix);
}

}  // namespace

Grid::Grid(const BoundingBox& box, double cell_km) : box_(box), cell_km_(cell_km) {
  if (!(cell_km > 0.0)) throw ValidationError("cell size must be positive");
  if (!(box.lat_max > box.lat_min) || !(box.lon_max > box.lon_min)) {
    throw ValidationError("degenerate bounding box");
  }
  const double lat_c = 0.5 * (box.lat_min + box.lat_max);
  km_per_deg_lat_ = kEarthRadiusKm * std::numbers::pi / 180.0;
  km_per_deg_lon_ = km_per_deg_lat_ * std::cos(lat_c * std::numbers::pi / 180.0);
  const double height = (box.lat_max - box.lat_min) * km_per_deg_lat_;
  const double width = (box.lon_max - box.lon_min) * km_per_deg_lon_;
  rows_ = std::max(1, static_cast<int>(std::ceil(height / cell_km - 1e-9)));
  cols_ = std::max(1, static_cast<int>(std::ceil(width / cell_km - 1e-9)));
}

std::pair<double, double> Grid::to_local_km(const LatLon& p) const {
  return {(p.lon - box_.lon_min) * km_per_deg_lon_,
          (p.lat - box_.lat_min) * km_per_deg_lat_};
}

LatLon Grid::from_local_km(double east_km, double north_km) const {
  return {box_.lat_min + north_km / km_per_deg_lat_,
          box_.lon_min + east_km / km_per_deg_lon_};
}

LatLon Grid::cell_center(CellId c) const {
  return from_local_km((c.col + 0.5) * cell_km_, (c.row + 0.5) * cell_km_);
}

SyntheticTravelProvider::SyntheticTravelProvider(
    const Grid& grid, double speed_kmh, std::map<std::string, double> congestion,
    double cost_per_query)
    : grid_(grid),
      speed_kmh_(speed_kmh),
      congestion_(std::move(congestion)),
      cost_per_query_(cost_per_query) {
  if (!(speed_kmh > 0.0)) throw ValidationError("speed must be positive");
  for (const auto& [period, f] : congestion_) {
    if (!(f > 0.0)) throw ValidationError("congestion factor for " + period + " must be positive");
  }
}

double SyntheticTravelProvider::factor(const std::string& period) const {
  const auto it = congestion_.find(period);
  return it == congestion_.end() ? 1.0 : it->second;
}

int SyntheticTravelProvider::minutes(const LatLon& from, const LatLon& to,
                                     const std::string& period) const {
  const auto [ax, ay] = grid_.to_local_km(from);
  const auto [bx, by] = grid_.to_local_km(to);
  const double km = std::abs(ax - bx) + std::abs(ay - by);
  const double mins = km * 60.0 * factor(period) / speed_kmh_;
  return static_cast<int>(std::ceil(mins - 1e-6));
}

std::unique_ptr<SyntheticTravelProvider> synthetic_travel_provider(
    const Grid& grid, double speed_kmh,
    std::map<std::string, double> congestion_by_period) {
  return std::make_unique<SyntheticTravelProvider>(grid, speed_kmh,
                                                   std::move(congestion_by_period));
}

TravelTimeMatrix::TravelTimeMatrix(Grid grid, std::string period,
                                   std::string provider, std::vector<CellId> cells)
    : grid_(std::move(grid)),
      period_(std::move(period)),
      provider_(std::move(provider)),
      cells_(std::move(cells)) {
  std::sort(cells_.begin(), cells_.end());
  cells_.erase(std::unique(cells_.begin(), cells_.end()), cells_.end());
  index_.assign(grid_.cell_count(), -1);
  for (std::size_t i = 0; i < cells_.size(); ++i) {
    if (!grid_.contains(cells_[i])) {
      throw ValidationError("cell outside the grid in travel matrix");
    }
    index_[grid_.flat_index(cells_[i])] = static_cast<int>(i);
  }
  minutes_.assign(cells_.size() * cells_.size(), 0);
  filled_.assign(cells_.size() * cells_.size(), 0);
}

bool TravelTimeMatrix::complete() const {
  return std::all_of(filled_.begin(), filled_.end(), [](auto f) { return f != 0; });
}

bool TravelTimeMatrix::has_cell(CellId c) const {
  return grid_.contains(c) && index_[grid_.flat_index(c)] >= 0;
}

int TravelTimeMatrix::slot(CellId c) const {
  if (!grid_.contains(c)) {
    throw NotFoundError("cell (" + std::to_string(c.row) + "," +
                        std::to_string(c.col) + ") outside the grid");
  }
  const int s = index_[grid_.flat_index(c)];
  if (s < 0) {
    throw NotFoundError("cell (" + std::to_string(c.row) + "," +
                        std::to_string(c.col) + ") not in the travel matrix");
  }
  return s;
}

void TravelTimeMatrix::set(std::size_t i, std::size_t j, int minutes) {
  if (minutes < 0 || minutes > kMaxTravelMinutes) {
    throw ProviderError("travel time " + std::to_string(minutes) +
                        " min outside [0, " + std::to_string(kMaxTravelMinutes) + "]");
  }
  if (i == j && minutes != 0) throw ProviderError("non-zero travel time on the diagonal");
  minutes_[i * cells_.size() + j] = static_cast<std::uint16_t>(minutes);
  filled_[i * cells_.size() + j] = 1;
}

int TravelTimeMatrix::minutes(CellId a, CellId b) const {
  const auto i = static_cast<std::size_t>(slot(a));
  const auto j = static_cast<std::size_t>(slot(b));
  return minutes_[i * cells_.size() + j];
}

int travel_time(const TravelTimeMatrix& m, CellId a, CellId b) {
  return m.minutes(a, b);
}

void TravelTimeMatrix::save(const std::filesystem::path& base) const {
  if (base.has_parent_path()) std::filesystem::create_directories(base.parent_path());
  const auto bin = with_suffix(base, ".bin");
  const auto tmp = with_suffix(base, ".bin.tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write travel matrix " + tmp.string());
    out.write(kMagic, sizeof kMagic);
    put(out, kFormatVersion);
    put(out, grid_.box().lat_min);
    put(out, grid_.box().lon_min);
    put(out, grid_.box().lat_max);
    put(out, grid_.box().lon_max);
    put(out, grid_.cell_km());
    put_string(out, period_);
    put_string(out, provider_);
    put_string(out, built_at_);
    put(out, static_cast<std::uint64_t>(cells_.size()));
    for (const auto& c : cells_) {
      put(out, static_cast<std::int32_t>(c.row));
      put(out, static_cast<std::int32_t>(c.col));
    }
    out.write(reinterpret_cast<const char*>(minutes_.data()),
              static_cast<std::streamsize>(minutes_.size() * sizeof(std::uint16_t)));
    out.write(reinterpret_cast<const char*>(filled_.data()),
              static_cast<std::streamsize>(filled_.size()));
    put(out, query_count_);
    if (!out) throw Error("failed writing travel matrix " + tmp.string());
  }
  std::filesystem::rename(tmp, bin);

  nlohmann::ordered_json side;
  side["format"] = "adviser-travel-matrix";
  side["version"] = kFormatVersion;
  side["grid"] = {{"lat_min", grid_.box().lat_min}, {"lon_min", grid_.box().lon_min},
                  {"lat_max", grid_.box().lat_max}, {"lon_max", grid_.box().lon_max},
                  {"cell_km", grid_.cell_km()},     {"rows", grid_.rows()},
                  {"cols", grid_.cols()}};
  side["period"] = period_;
  side["provider"] = provider_;
  side["built_at"] = built_at_;
  side["cells"] = cells_.size();
  side["complete"] = complete();
  side["query_count"] = query_count_;
  std::ofstream js(with_suffix(base, ".json"), std::ios::trunc);
  js << side.dump(2) << "\n";
}

bool TravelTimeMatrix::load(const std::filesystem::path& base, TravelTimeMatrix& out) {
  const auto bin = with_suffix(base, ".bin");
  if (!std::filesystem::exists(bin)) return false;
  std::ifstream in(bin, std::ios::binary);
  if (!in) throw Error("cannot read travel matrix " + bin.string());
  char magic[8];
  in.read(magic, sizeof magic);
  if (!in || std::memcmp(magic, kMagic, sizeof magic) != 0) {
    throw ValidationError(bin.string() + " is not a travel matrix file");
  }
  const auto version = get<std::uint32_t>(in);
  if (version != kFormatVersion) {
    throw ValidationError("unsupported travel matrix version " + std::to_string(version));
  }
  BoundingBox box;
  box.lat_min = get<double>(in);
  box.lon_min = get<double>(in);
  box.lat_max = get<double>(in);
  box.lon_max = get<double>(in);
  const double cell_km = get<double>(in);
  auto period = get_string(in);
  auto provider = get_string(in);
  auto built_at = get_string(in);
  const auto n = get<std::uint64_t>(in);
  std::vector<CellId> cells(n);
  for (auto& c : cells) {
    c.row = get<std::int32_t>(in);
    c.col = get<std::int32_t>(in);
  }
  TravelTimeMatrix m(Grid(box, cell_km), std::move(period), std::move(provider),
                     std::move(cells));
  if (m.cells_.size() != n) throw ValidationError("duplicate cells in travel matrix file");
  in.read(reinterpret_cast<char*>(m.minutes_.data()),
          static_cast<std::streamsize>(m.minutes_.size() * sizeof(std::uint16_t)));
  in.read(reinterpret_cast<char*>(m.filled_.data()),
          static_cast<std::streamsize>(m.filled_.size()));
  m.query_count_ = get<std::uint64_t>(in);
  m.built_at_ = std::move(built_at);
  out = std::move(m);
  return true;
}

TravelTimeMatrix build_matrix(const Grid& grid, std::span<const CellId> cells,
                              const TravelProvider& provider,
                              const std::string& period, QueryCostLedger& ledger,
                              const MatrixBuildOptions& opts) {
  if (grid.cell_count() == 0) throw ValidationError("degenerate grid");
  std::vector<CellId> target;
  if (opts.full_grid) {
    for (int r = 0; r < grid.rows(); ++r) {
      for (int c = 0; c < grid.cols(); ++c) target.push_back({r, c});
    }
  } else {
    target.assign(cells.begin(), cells.end());
  }
  for (const auto& c : target) {
    if (!grid.contains(c)) throw ValidationError("cell outside the grid");
  }

  TravelTimeMatrix previous;
  bool have_previous = false;
  if (!opts.store.empty()) {
    have_previous = TravelTimeMatrix::load(opts.store, previous);
    if (have_previous) {
      if (!(previous.grid() == grid) || previous.period() != period ||
          previous.provider() != provider.name()) {
        throw ValidationError("matrix store " + opts.store.string() +
                              " holds a different grid, period or provider");
      }
      target.insert(target.end(), previous.cells().begin(), previous.cells().end());
    }
  }

  TravelTimeMatrix m(grid, period, provider.name(), std::move(target));
  m.set_built_at(opts.timestamp);
  if (have_previous) {
    const auto& pc = previous.cells();
    std::vector<std::size_t> map(pc.size());
    for (std::size_t i = 0; i < pc.size(); ++i) {
      map[i] = static_cast<std::size_t>(m.slot(pc[i]));
    }
    for (std::size_t i = 0; i < pc.size(); ++i) {
      for (std::size_t j = 0; j < pc.size(); ++j) {
        if (previous.filled(i, j)) m.set(map[i], map[j], previous.at(i, j));
      }
    }
    m.add_queries(previous.query_count());
    m.set_built_at(previous.built_at());
  }

  const auto& mc = m.cells();
  std::vector<LatLon> centers(mc.size());
  for (std::size_t i = 0; i < mc.size(); ++i) centers[i] = grid.cell_center(mc[i]);

  bool dirty = false;
  std::size_t rows_since_checkpoint = 0;
  try {
    for (std::size_t i = 0; i < mc.size(); ++i) {
      std::uint64_t row_queries = 0;
      for (std::size_t j = 0; j < mc.size(); ++j) {
        if (m.filled(i, j)) continue;
        const int t = provider.minutes(centers[i], centers[j], period);
        ledger.record(1, provider.cost_per_query());
        ++row_queries;
        m.add_queries(1);
        m.set(i, j, t);
        dirty = true;
      }
      if (row_queries > 0 && !opts.store.empty() &&
          ++rows_since_checkpoint >= opts.checkpoint_rows) {
        m.save(opts.store);
        rows_since_checkpoint = 0;
      }
    }
  } catch (const ProviderError&) {
    if (!opts.store.empty()) m.save(opts.store);
    throw;
  }
  if (!opts.store.empty() && (dirty || !have_previous)) m.save(opts.store);
  return m;
}

std::vector<std::uint16_t> build_point_matrix(std::span<const LatLon> points,
                                              const TravelProvider& provider,
                                              const std::string& period,
                                              QueryCostLedger& ledger) {
  const std::size_t n = points.size();
  std::vector<std::uint16_t> out(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const int t = provider.minutes(points[i], points[j], period);
      if (t < 0 || t > kMaxTravelMinutes) {
        throw ProviderError("travel time outside the representable range");
      }
      out[i * n + j] = static_cast<std::uint16_t>(t);
    }
    ledger.record(n, provider.cost_per_query());
  }
  return out;
}

}  // namespace adviser

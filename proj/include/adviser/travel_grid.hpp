#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "adviser/common.hpp"

namespace adviser {

struct BoundingBox {
  double lat_min = 0.0;
  double lon_min = 0.0;
  double lat_max = 0.0;
  double lon_max = 0.0;

  bool contains(const LatLon& p) const {
    return p.lat >= lat_min && p.lat <= lat_max && p.lon >= lon_min &&
           p.lon <= lon_max;
  }
};

// Approximate bounds of Ibadan, used as the default synthetic city.
inline constexpr BoundingBox kIbadanBox{7.28, 3.78, 7.48, 3.98};

// Square cells over a bounding box. Coordinates are projected
// equirectangularly about the box center; row 0 is the southern edge and
// column 0 the western edge.
class Grid {
 public:
  Grid() = default;
  Grid(const BoundingBox& box, double cell_km);

  const BoundingBox& box() const { return box_; }
  double cell_km() const { return cell_km_; }
  int rows() const { return rows_; }
  int cols() const { return cols_; }
  std::size_t cell_count() const {
    return static_cast<std::size_t>(rows_) * static_cast<std::size_t>(cols_);
  }

  bool contains(CellId c) const {
    return c.row >= 0 && c.row < rows_ && c.col >= 0 && c.col < cols_;
  }
  std::size_t flat_index(CellId c) const {
    return static_cast<std::size_t>(c.row) * static_cast<std::size_t>(cols_) +
           static_cast<std::size_t>(c.col);
  }

  // Planar offset (east, north) in km from the south-west corner.
  std::pair<double, double> to_local_km(const LatLon& p) const;
  LatLon from_local_km(double east_km, double north_km) const;
  LatLon cell_center(CellId c) const;

  friend bool operator==(const Grid& a, const Grid& b) {
    return a.box_.lat_min == b.box_.lat_min && a.box_.lon_min == b.box_.lon_min &&
           a.box_.lat_max == b.box_.lat_max && a.box_.lon_max == b.box_.lon_max &&
           a.cell_km_ == b.cell_km_;
  }

 private:
  BoundingBox box_{};
  double cell_km_ = 1.0;
  int rows_ = 0;
  int cols_ = 0;
  double km_per_deg_lat_ = 0.0;
  double km_per_deg_lon_ = 0.0;
};

// A source of point-to-point travel times, e.g. a maps vendor.
class TravelProvider {
 public:
  virtual ~TravelProvider() = default;
  virtual std::string name() const = 0;
  virtual double cost_per_query() const = 0;
  // Whole minutes from `from` to `to` during `period`.
  virtual int minutes(const LatLon& from, const LatLon& to,
                      const std::string& period) const = 0;
};

// Offline stand-in: rectilinear distance at a fixed speed, scaled by a
// per-period congestion factor (1.0 for unknown periods). Minutes are
// rounded up, which keeps the triangle inequality.
class SyntheticTravelProvider : public TravelProvider {
 public:
  SyntheticTravelProvider(const Grid& grid, double speed_kmh,
                          std::map<std::string, double> congestion = {},
                          double cost_per_query = 0.0);

  std::string name() const override { return "synthetic"; }
  double cost_per_query() const override { return cost_per_query_; }
  int minutes(const LatLon& from, const LatLon& to,
              const std::string& period) const override;

  double factor(const std::string& period) const;

 private:
  Grid grid_;
  double speed_kmh_;
  std::map<std::string, double> congestion_;
  double cost_per_query_;
};

std::unique_ptr<SyntheticTravelProvider> synthetic_travel_provider(
    const Grid& grid, double speed_kmh,
    std::map<std::string, double> congestion_by_period = {});

inline constexpr int kMaxTravelMinutes = 1080;

// Dense travel times between a set of cells. Lookups are O(1) through a
// grid-sized index table.
class TravelTimeMatrix {
 public:
  TravelTimeMatrix() = default;
  TravelTimeMatrix(Grid grid, std::string period, std::string provider,
                   std::vector<CellId> cells);

  const Grid& grid() const { return grid_; }
  const std::string& period() const { return period_; }
  const std::string& provider() const { return provider_; }
  const std::string& built_at() const { return built_at_; }
  const std::vector<CellId>& cells() const { return cells_; }
  std::uint64_t query_count() const { return query_count_; }
  bool complete() const;

  bool has_cell(CellId c) const;
  // Throws NotFoundError for cells outside the grid or the matrix.
  int minutes(CellId a, CellId b) const;

  // Builder access.
  int slot(CellId c) const;
  void set(std::size_t i, std::size_t j, int minutes);
  bool filled(std::size_t i, std::size_t j) const {
    return filled_[i * cells_.size() + j] != 0;
  }
  int at(std::size_t i, std::size_t j) const {
    return minutes_[i * cells_.size() + j];
  }
  void set_built_at(std::string ts) { built_at_ = std::move(ts); }
  void add_queries(std::uint64_t n) { query_count_ += n; }

  void save(const std::filesystem::path& base) const;
  // Returns false when no matrix exists at `base`.
  static bool load(const std::filesystem::path& base, TravelTimeMatrix& out);

 private:
  Grid grid_;
  std::string period_;
  std::string provider_;
  std::string built_at_;
  std::vector<CellId> cells_;
  std::vector<int> index_;  // flat grid index -> slot, -1 if absent
  std::vector<std::uint16_t> minutes_;
  std::vector<std::uint8_t> filled_;
  std::uint64_t query_count_ = 0;
};

int travel_time(const TravelTimeMatrix& m, CellId a, CellId b);

struct MatrixBuildOptions {
  bool full_grid = false;
  // Base path for the persisted matrix (`.bin` + `.json`); empty disables
  // persistence.
  std::filesystem::path store;
  std::string timestamp = "1970-01-01T00:00:00Z";
  // Checkpoint to disk every this many rows.
  std::size_t checkpoint_rows = 64;
};

// Queries the provider for every ordered pair of `cells` (or of the full
// grid) that is not already present in the persisted store. Entries found in
// the store are reused, so the total number of queries over any sequence of
// builds is at most C^2 for the final cell set C. A provider failure
// persists the partial matrix before rethrowing.
TravelTimeMatrix build_matrix(const Grid& grid, std::span<const CellId> cells,
                              const TravelProvider& provider,
                              const std::string& period, QueryCostLedger& ledger,
                              const MatrixBuildOptions& opts = {});

// Per-location scheme: one query per ordered pair of points.
std::vector<std::uint16_t> build_point_matrix(std::span<const LatLon> points,
                                              const TravelProvider& provider,
                                              const std::string& period,
                                              QueryCostLedger& ledger);

}  // namespace adviser

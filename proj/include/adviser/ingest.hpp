#pragma once

#include <filesystem>
#include <future>
#include <iosfwd>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "adviser/common.hpp"
#include "adviser/domain.hpp"
#include "adviser/travel_grid.hpp"

namespace adviser {

// Registry CSV layout. Every file starts with the fixed columns
//   id,address,phone,child_birth_date,received_doses,availability,phone_reachable
// followed by the declared feature columns in order. received_doses is a
// ';'-separated list of dose labels, availability a ';'-separated list of
// HH:MM-HH:MM windows, phone_reachable is 0 or 1.
struct FeatureColumn {
  enum class Type { kNumeric, kCategorical };
  std::string name;
  Type type = Type::kNumeric;
  std::vector<std::string> levels;  // categorical only; value = level index
};

struct HeaderSpec {
  std::vector<FeatureColumn> features;

  static const std::vector<std::string>& fixed_columns();
  std::vector<std::string> columns() const;
  static HeaderSpec numeric(const std::vector<std::string>& names);
};

struct RawRecord {
  std::string id;
  std::string address;
  std::string phone;
  Date child_birth_date;
  std::vector<std::string> received_doses;
  std::vector<DailyWindow> availability;
  bool phone_reachable = true;
  FeatureVector features;

  friend bool operator==(const RawRecord&, const RawRecord&) = default;
};

struct RowError {
  std::size_t line = 0;  // 1-based line in the file
  std::string message;
};

struct ParseResult {
  std::vector<RawRecord> records;
  std::vector<RowError> errors;
};

// Malformed rows go to the error report. Parsing aborts with a
// ValidationError when more than one row and more than 10% of data rows are
// malformed, or when the header does not match.
ParseResult parse_registry(std::istream& in, const HeaderSpec& header);
ParseResult parse_registry(const std::filesystem::path& path, const HeaderSpec& header);

void emit_registry(std::ostream& out, std::span<const RawRecord> records,
                   const HeaderSpec& header);

// Lowercased, whitespace-collapsed address.
std::string normalize_address(std::string_view address);

class GeocodeProvider {
 public:
  virtual ~GeocodeProvider() = default;
  virtual std::string name() const = 0;
  virtual double cost_per_query() const = 0;
  // Throws ProviderError on failure.
  virtual LatLon locate(const std::string& normalized_address) const = 0;
};

// Hash-based coordinates inside a bounding box; deterministic per address.
class SyntheticGeocodeProvider : public GeocodeProvider {
 public:
  explicit SyntheticGeocodeProvider(const BoundingBox& box, double cost = 0.005);
  std::string name() const override { return "synthetic"; }
  double cost_per_query() const override { return cost_; }
  LatLon locate(const std::string& normalized_address) const override;

 private:
  BoundingBox box_;
  double cost_;
};

// Selects the provider named by ADVISER_GEO_PROVIDER (default "synthetic").
std::unique_ptr<GeocodeProvider> make_geocode_provider_from_env(const BoundingBox& box);

struct GeocodeEntry {
  LatLon location;
  std::string provider;
  std::string timestamp;
};

// Append-only address cache, optionally backed by a file. Readers share a
// lock; writers are serialized, and concurrent misses on one address wait
// for a single provider call.
class GeocodeCache {
 public:
  GeocodeCache() = default;
  // Loads `path` if it exists; new entries are appended to it.
  explicit GeocodeCache(std::filesystem::path path);

  std::optional<GeocodeEntry> lookup(const std::string& key) const;
  std::size_t size() const;

  // Returns the cached entry or runs `compute` exactly once per key.
  GeocodeEntry get_or_compute(const std::string& key,
                              const std::function<GeocodeEntry()>& compute);

  static std::string key_for(std::string_view address);

 private:
  void append_to_file(const std::string& key, const GeocodeEntry& e);

  std::filesystem::path path_;
  mutable std::shared_mutex mu_;
  std::unordered_map<std::string, GeocodeEntry> entries_;
  std::mutex inflight_mu_;
  std::unordered_map<std::string, std::shared_future<GeocodeEntry>> inflight_;
};

// Empty addresses raise ValidationError; provider failures propagate as
// ProviderError. Cache hits cost nothing.
LatLon geocode(const RawRecord& record, const GeocodeProvider& provider,
               GeocodeCache& cache, QueryCostLedger& ledger,
               const std::string& timestamp = "1970-01-01T00:00:00Z");

// Boundary points belong to the lower-index (south-west) cell. Throws
// ValidationError outside the grid's box.
CellId snap_to_cell(double lat, double lon, const Grid& grid);

Beneficiary to_beneficiary(const RawRecord& r, std::optional<CellId> cell);

}  // namespace adviser

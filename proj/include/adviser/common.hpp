#pragma once

#include <array>
#include <atomic>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace adviser {

// Error hierarchy. Callers switch on the dynamic type to pick exit codes
// and retry policy.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

class NotFoundError : public Error {
 public:
  using Error::Error;
};

// Raised by external providers (geocoding, travel times). Retryable.
class ProviderError : public Error {
 public:
  using Error::Error;
};

class NonConvergenceError : public Error {
 public:
  using Error::Error;
};

using FeatureVector = std::vector<double>;

// Intervention kinds in tie-break order.
enum class InterventionKind : std::uint8_t {
  kPhoneCall = 0,
  kTravelVoucher = 1,
  kPickupService = 2,
  kVaccineDrive = 3,
};

inline constexpr std::size_t kNumKinds = 4;
inline constexpr std::array<InterventionKind, kNumKinds> kAllKinds = {
    InterventionKind::kPhoneCall, InterventionKind::kTravelVoucher,
    InterventionKind::kPickupService, InterventionKind::kVaccineDrive};

inline constexpr std::size_t index_of(InterventionKind k) {
  return static_cast<std::size_t>(k);
}

std::string_view to_string(InterventionKind k);
InterventionKind kind_from_string(std::string_view s);

struct CellId {
  int row = 0;
  int col = 0;

  friend bool operator==(const CellId&, const CellId&) = default;
  friend auto operator<=>(const CellId&, const CellId&) = default;
};

struct LatLon {
  double lat = 0.0;
  double lon = 0.0;
};

// Provider query accounting. Counts are updated atomically so concurrent
// builders share one ledger. Money is tracked in micro-units.
class QueryCostLedger {
 public:
  void record(std::uint64_t queries, double unit_cost) {
    queries_.fetch_add(queries, std::memory_order_relaxed);
    micros_.fetch_add(static_cast<std::int64_t>(unit_cost * 1e6 + 0.5) *
                          static_cast<std::int64_t>(queries),
                      std::memory_order_relaxed);
  }
  std::uint64_t queries() const { return queries_.load(); }
  double cost() const { return static_cast<double>(micros_.load()) / 1e6; }

 private:
  std::atomic<std::uint64_t> queries_{0};
  std::atomic<std::int64_t> micros_{0};
};

// Minutes since midnight, "HH:MM".
int parse_clock(std::string_view hhmm);
std::string format_clock(int minutes);

// 64-bit FNV-1a; stable across platforms, used for cache keys and run ids.
std::uint64_t fnv1a64(std::string_view data);
std::string hex64(std::uint64_t v);

// One step of the splitmix64 generator; used to derive independent seeds.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Shortest round-trip decimal representation of a double.
std::string format_double(double v);
double parse_double(std::string_view s);

std::vector<std::string> split(std::string_view s, char sep);
std::string trim(std::string_view s);

}  // namespace adviser

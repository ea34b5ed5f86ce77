#include "adviser/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>

namespace adviser {

namespace {

// Reads one RFC 4180 record. Returns false at end of input.
bool read_csv_record(std::istream& in, std::vector<std::string>& fields,
                     std::size_t& line) {
  fields.clear();
  if (in.peek() == std::char_traits<char>::eof()) return false;
  std::string field;
  bool quoted = false;
  bool any = false;
  ++line;
  while (true) {
    const int c = in.get();
    if (c == std::char_traits<char>::eof()) {
      if (quoted) throw ValidationError("unterminated quote at line " + std::to_string(line));
      fields.push_back(std::move(field));
      return any || !fields.back().empty() || fields.size() > 1;
    }
    any = true;
    const char ch = static_cast<char>(c);
    if (quoted) {
      if (ch == '"') {
        if (in.peek() == '"') {
          in.get();
          field.push_back('"');
        } else {
          quoted = false;
        }
      } else {
        if (ch == '\n') ++line;
        field.push_back(ch);
      }
      continue;
    }
    if (ch == '"' && field.empty()) {
      quoted = true;
    } else if (ch == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else if (ch == '\n') {
      if (!field.empty() && field.back() == '\r') field.pop_back();
      fields.push_back(std::move(field));
      return true;
    } else {
      field.push_back(ch);
    }
  }
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  if (trim(s).empty()) return out;
  for (const auto& part : split(s, ';')) {
    auto t = trim(part);
    if (t.empty()) throw ValidationError("empty list element");
    out.push_back(std::move(t));
  }
  return out;
}

DailyWindow parse_window(const std::string& s) {
  const auto parts = split(s, '-');
  if (parts.size() != 2) throw ValidationError("malformed availability '" + s + "'");
  DailyWindow w{parse_clock(parts[0]), parse_clock(parts[1])};
  if (w.end_minute < w.start_minute) {
    throw ValidationError("availability ends before it starts: '" + s + "'");
  }
  return w;
}

RawRecord parse_row(const std::vector<std::string>& f, const HeaderSpec& header) {
  const auto& fixed = HeaderSpec::fixed_columns();
  if (f.size() != fixed.size() + header.features.size()) {
    throw ValidationError("expected " +
                          std::to_string(fixed.size() + header.features.size()) +
                          " fields, found " + std::to_string(f.size()));
  }
  RawRecord r;
  r.id = trim(f[0]);
  if (r.id.empty()) throw ValidationError("empty id");
  r.address = f[1];
  r.phone = f[2];
  r.child_birth_date = parse_date(f[3]);
  r.received_doses = split_list(f[4]);
  for (const auto& w : split_list(f[5])) r.availability.push_back(parse_window(w));
  const auto reach = trim(f[6]);
  if (reach != "0" && reach != "1") throw ValidationError("phone_reachable must be 0 or 1");
  r.phone_reachable = reach == "1";
  for (std::size_t k = 0; k < header.features.size(); ++k) {
    const auto& col = header.features[k];
    const auto& cell = f[fixed.size() + k];
    if (col.type == FeatureColumn::Type::kNumeric) {
      const double v = parse_double(cell);
      if (!std::isfinite(v)) throw ValidationError("non-finite " + col.name);
      r.features.push_back(v);
    } else {
      const auto v = trim(cell);
      const auto it = std::find(col.levels.begin(), col.levels.end(), v);
      if (it == col.levels.end()) {
        throw ValidationError("unknown level '" + v + "' for " + col.name);
      }
      r.features.push_back(static_cast<double>(it - col.levels.begin()));
    }
  }
  return r;
}

std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

const std::vector<std::string>& HeaderSpec::fixed_columns() {
  static const std::vector<std::string> kCols = {
      "id", "address", "phone", "child_birth_date", "received_doses",
      "availability", "phone_reachable"};
  return kCols;
}

std::vector<std::string> HeaderSpec::columns() const {
  auto cols = fixed_columns();
  for (const auto& f : features) cols.push_back(f.name);
  return cols;
}

HeaderSpec HeaderSpec::numeric(const std::vector<std::string>& names) {
  HeaderSpec h;
  for (const auto& n : names) h.features.push_back({n, FeatureColumn::Type::kNumeric, {}});
  return h;
}

ParseResult parse_registry(std::istream& in, const HeaderSpec& header) {
  ParseResult result;
  std::vector<std::string> fields;
  std::size_t line = 0;
  if (!read_csv_record(in, fields, line)) {
    throw ValidationError("registry is missing its header row");
  }
  for (auto& f : fields) f = trim(f);
  if (fields != header.columns()) {
    throw ValidationError("registry header does not match the declared columns");
  }
  std::size_t rows = 0;
  while (true) {
    const std::size_t start_line = line + 1;
    bool got = false;
    try {
      got = read_csv_record(in, fields, line);
    } catch (const ValidationError& e) {
      result.errors.push_back({start_line, e.what()});
      ++rows;
      break;
    }
    if (!got) break;
    if (fields.size() == 1 && trim(fields[0]).empty()) continue;
    ++rows;
    try {
      result.records.push_back(parse_row(fields, header));
    } catch (const ValidationError& e) {
      result.errors.push_back({start_line, e.what()});
    }
  }
  if (result.errors.size() > 1 && result.errors.size() * 10 > rows) {
    throw ValidationError(std::to_string(result.errors.size()) + " of " +
                          std::to_string(rows) +
                          " registry rows are malformed; first: line " +
                          std::to_string(result.errors.front().line) + ": " +
                          result.errors.front().message);
  }
  return result;
}

ParseResult parse_registry(const std::filesystem::path& path, const HeaderSpec& header) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw NotFoundError("cannot open registry " + path.string());
  return parse_registry(in, header);
}

void emit_registry(std::ostream& out, std::span<const RawRecord> records,
                   const HeaderSpec& header) {
  const auto cols = header.columns();
  for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << csv_escape(cols[i]);
  out << "\n";
  for (const auto& r : records) {
    if (r.features.size() != header.features.size()) {
      throw ValidationError("record " + r.id + " does not match the header");
    }
    std::string doses;
    for (std::size_t i = 0; i < r.received_doses.size(); ++i) {
      doses += (i ? ";" : "") + r.received_doses[i];
    }
    std::string avail;
    for (std::size_t i = 0; i < r.availability.size(); ++i) {
      avail += (i ? ";" : "") + format_clock(r.availability[i].start_minute) + "-" +
               format_clock(r.availability[i].end_minute);
    }
    out << csv_escape(r.id) << ',' << csv_escape(r.address) << ','
        << csv_escape(r.phone) << ',' << format_date(r.child_birth_date) << ','
        << csv_escape(doses) << ',' << avail << ',' << (r.phone_reachable ? 1 : 0);
    for (std::size_t k = 0; k < header.features.size(); ++k) {
      const auto& col = header.features[k];
      out << ',';
      if (col.type == FeatureColumn::Type::kNumeric) {
        out << format_double(r.features[k]);
      } else {
        const auto idx = static_cast<std::size_t>(r.features[k]);
        if (idx >= col.levels.size()) throw ValidationError("level index out of range");
        out << csv_escape(col.levels[idx]);
      }
    }
    out << "\n";
  }
}

std::string normalize_address(std::string_view address) {
  std::string out;
  bool space = false;
  for (unsigned char c : address) {
    if (std::isspace(c)) {
      space = !out.empty();
      continue;
    }
    if (space) out.push_back(' ');
    space = false;
    out.push_back(static_cast<char>(std::tolower(c)));
  }
  return out;
}

SyntheticGeocodeProvider::SyntheticGeocodeProvider(const BoundingBox& box, double cost)
    : box_(box), cost_(cost) {}

LatLon SyntheticGeocodeProvider::locate(const std::string& normalized_address) const {
  const std::uint64_t h = mix64(fnv1a64(normalized_address));
  const double u = static_cast<double>(h >> 32) / 4294967296.0;
  const double v = static_cast<double>(h & 0xffffffffULL) / 4294967296.0;
  return {box_.lat_min + u * (box_.lat_max - box_.lat_min),
          box_.lon_min + v * (box_.lon_max - box_.lon_min)};
}

std::unique_ptr<GeocodeProvider> make_geocode_provider_from_env(const BoundingBox& box) {
  const char* env = std::getenv("ADVISER_GEO_PROVIDER");
  const std::string name = env && *env ? env : "synthetic";
  if (name == "synthetic") return std::make_unique<SyntheticGeocodeProvider>(box);
  throw ValidationError("unknown geocoding provider '" + name + "'");
}

GeocodeCache::GeocodeCache(std::filesystem::path path) : path_(std::move(path)) {
  std::ifstream in(path_);
  if (!in) return;
  std::string line;
  if (!std::getline(in, line) || trim(line) != "# adviser-geocache v1") {
    throw ValidationError("unsupported geocode cache file " + path_.string());
  }
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    const auto f = split(line, '\t');
    if (f.size() != 5) throw ValidationError("corrupt geocode cache line in " + path_.string());
    entries_[f[0]] = {{parse_double(f[1]), parse_double(f[2])}, f[3], trim(f[4])};
  }
}

std::optional<GeocodeEntry> GeocodeCache::lookup(const std::string& key) const {
  std::shared_lock lock(mu_);
  const auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

std::size_t GeocodeCache::size() const {
  std::shared_lock lock(mu_);
  return entries_.size();
}

std::string GeocodeCache::key_for(std::string_view address) {
  return hex64(fnv1a64(normalize_address(address)));
}

void GeocodeCache::append_to_file(const std::string& key, const GeocodeEntry& e) {
  if (path_.empty()) return;
  const bool fresh = !std::filesystem::exists(path_);
  if (fresh && path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path());
  std::ofstream out(path_, std::ios::app);
  if (!out) throw Error("cannot append to geocode cache " + path_.string());
  if (fresh) out << "# adviser-geocache v1\n";
  out << key << '\t' << format_double(e.location.lat) << '\t'
      << format_double(e.location.lon) << '\t' << e.provider << '\t' << e.timestamp
      << '\n';
}

GeocodeEntry GeocodeCache::get_or_compute(const std::string& key,
                                          const std::function<GeocodeEntry()>& compute) {
  if (auto hit = lookup(key)) return *hit;

  std::promise<GeocodeEntry> promise;
  std::shared_future<GeocodeEntry> waiting;
  {
    std::lock_guard lock(inflight_mu_);
    if (auto hit = lookup(key)) return *hit;
    const auto it = inflight_.find(key);
    if (it != inflight_.end()) {
      waiting = it->second;
    } else {
      inflight_.emplace(key, promise.get_future().share());
    }
  }
  if (waiting.valid()) return waiting.get();

  try {
    auto entry = compute();
    {
      std::unique_lock lock(mu_);
      entries_.emplace(key, entry);
      append_to_file(key, entry);
    }
    promise.set_value(entry);
    std::lock_guard lock(inflight_mu_);
    inflight_.erase(key);
    return entry;
  } catch (...) {
    promise.set_exception(std::current_exception());
    std::lock_guard lock(inflight_mu_);
    inflight_.erase(key);
    throw;
  }
}

LatLon geocode(const RawRecord& record, const GeocodeProvider& provider,
               GeocodeCache& cache, QueryCostLedger& ledger,
               const std::string& timestamp) {
  const auto normalized = normalize_address(record.address);
  if (normalized.empty()) {
    throw ValidationError("record " + record.id + " has an empty address");
  }
  const auto key = hex64(fnv1a64(normalized));
  return cache
      .get_or_compute(key,
                      [&] {
                        ledger.record(1, provider.cost_per_query());
                        return GeocodeEntry{provider.locate(normalized),
                                            provider.name(), timestamp};
                      })
      .location;
}

CellId snap_to_cell(double lat, double lon, const Grid& grid) {
  if (!grid.box().contains({lat, lon})) {
    throw ValidationError("coordinate outside the grid bounding box");
  }
  const auto [east, north] = grid.to_local_km({lat, lon});
  // Points within a micrometre of a boundary count as on it.
  const auto index = [&](double km, int limit) {
    const int i = static_cast<int>(std::ceil(km / grid.cell_km() - 1e-9)) - 1;
    return std::clamp(i, 0, limit - 1);
  };
  return {index(north, grid.rows()), index(east, grid.cols())};
}

Beneficiary to_beneficiary(const RawRecord& r, std::optional<CellId> cell) {
  Beneficiary b;
  b.id = r.id;
  b.features = r.features;
  b.home_cell = cell;
  b.child_birth_date = r.child_birth_date;
  b.received_doses.insert(r.received_doses.begin(), r.received_doses.end());
  b.availability = r.availability;
  b.phone_reachable = r.phone_reachable;
  return b;
}

}  // namespace adviser

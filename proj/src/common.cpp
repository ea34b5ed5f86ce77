#include "adviser/common.hpp"

#include <charconv>
#include <cstdio>
#include <system_error>

namespace adviser {

std::string_view to_string(InterventionKind k) {
  switch (k) {
    case InterventionKind::kPhoneCall:
      return "phone_call";
    case InterventionKind::kTravelVoucher:
      return "travel_voucher";
    case InterventionKind::kPickupService:
      return "pickup_service";
    case InterventionKind::kVaccineDrive:
      return "vaccine_drive";
  }
  return "unknown";
}

InterventionKind kind_from_string(std::string_view s) {
  for (auto k : kAllKinds) {
    if (to_string(k) == s) return k;
  }
  throw ValidationError("unknown intervention kind '" + std::string(s) + "'");
}

int parse_clock(std::string_view hhmm) {
  const auto t = trim(hhmm);
  int h = 0;
  int m = 0;
  char tail = 0;
  if (t.size() != 5 || std::sscanf(t.c_str(), "%2d:%2d%c", &h, &m, &tail) != 2 ||
      h < 0 || h > 23 || m < 0 || m > 59) {
    throw ValidationError("malformed time of day '" + std::string(hhmm) + "'");
  }
  return h * 60 + m;
}

std::string format_clock(int minutes) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%02d:%02d", minutes / 60, minutes % 60);
  return buf;
}

std::uint64_t fnv1a64(std::string_view data) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc()) throw Error("double formatting failed");
  return std::string(buf, ptr);
}

double parse_double(std::string_view s) {
  const auto t = trim(s);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size()) {
    throw ValidationError("not a number: '" + std::string(s) + "'");
  }
  return v;
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      out.emplace_back(s.substr(start));
      break;
    }
    out.emplace_back(s.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

std::string trim(std::string_view s) {
  const auto* ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return std::string(s.substr(b, e - b + 1));
}

}  // namespace adviser

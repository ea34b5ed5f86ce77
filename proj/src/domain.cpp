#include "adviser/domain.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "schedule_data.hpp"

namespace adviser {

namespace {

using std::chrono::day;
using std::chrono::days;
using std::chrono::month;
using std::chrono::year;
using std::chrono::year_month_day;

// "<n>d", "<n>w", "<n>m", "<n>y" -> days.
int parse_age(std::string_view token) {
  const auto t = trim(token);
  if (t.size() < 2) throw ValidationError("malformed age '" + t + "'");
  const char unit = t.back();
  const double n = parse_double(std::string_view(t).substr(0, t.size() - 1));
  if (n < 0) throw ValidationError("negative age '" + t + "'");
  switch (unit) {
    case 'd':
      return static_cast<int>(std::lround(n));
    case 'w':
      return static_cast<int>(std::lround(n * 7.0));
    case 'm':
      return months_to_days(n);
    case 'y':
      return static_cast<int>(std::lround(n * 365.0));
    default:
      throw ValidationError("unknown age unit in '" + t + "'");
  }
}

}  // namespace

Date parse_date(std::string_view iso) {
  const auto t = trim(iso);
  int y = 0;
  unsigned m = 0;
  unsigned d = 0;
  char tail = 0;
  if (t.size() != 10 ||
      std::sscanf(t.c_str(), "%4d-%2u-%2u%c", &y, &m, &d, &tail) != 3) {
    throw ValidationError("malformed date '" + std::string(iso) + "'");
  }
  const year_month_day ymd{year{y}, month{m}, day{d}};
  if (!ymd.ok()) throw ValidationError("invalid date '" + std::string(iso) + "'");
  return Date{ymd};
}

std::string format_date(Date d) {
  const year_month_day ymd{d};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()),
                static_cast<unsigned>(ymd.day()));
  return buf;
}

TimeWindow::TimeWindow(Date s, Date e) : start(s), end(e) {
  if (e < s) {
    throw ValidationError("time window ends before it starts: " +
                          format_date(s) + " > " + format_date(e));
  }
}

int months_to_days(double months) {
  return static_cast<int>(std::lround(months * 30.4));
}

VaccineSchedule::VaccineSchedule(std::vector<VaccineDose> doses,
                                 std::optional<RecurringDose> recurring)
    : doses_(std::move(doses)), recurring_(std::move(recurring)) {
  std::stable_sort(doses_.begin(), doses_.end(),
                   [](const auto& a, const auto& b) {
                     return a.due_age_days < b.due_age_days;
                   });
  std::unordered_set<std::string> keys;
  for (const auto& d : doses_) {
    if (d.due_age_days < 0) throw ValidationError("negative due age for " + d.name);
    if (!keys.insert(d.key()).second) {
      throw ValidationError("duplicate dose " + d.name + " in group " + d.group);
    }
  }
  if (recurring_) {
    const auto& r = *recurring_;
    if (r.period_days <= 0 || r.first_day < 0 || r.last_day < r.first_day) {
      throw ValidationError("malformed recurring dose " + r.name);
    }
  }
}

const VaccineSchedule& VaccineSchedule::default_schedule() {
  static const VaccineSchedule kSchedule = parse(detail::kDefaultScheduleText);
  return kSchedule;
}

VaccineSchedule VaccineSchedule::parse(std::string_view text) {
  std::vector<VaccineDose> doses;
  std::optional<RecurringDose> recurring;
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto cols = split(t, '|');
    if (cols.size() != 3) {
      throw ValidationError("schedule line " + std::to_string(line_no) +
                            ": expected 'group | age | doses'");
    }
    const auto group = trim(cols[0]);
    const auto age = trim(cols[1]);
    std::vector<std::string> names;
    for (const auto& n : split(cols[2], ',')) {
      auto nm = trim(n);
      if (!nm.empty()) names.push_back(std::move(nm));
    }
    if (group.empty() || names.empty()) {
      throw ValidationError("schedule line " + std::to_string(line_no) +
                            ": empty group or dose list");
    }
    if (age.rfind("every ", 0) == 0) {
      // every <period> from <first> to <last>
      std::istringstream words(age);
      std::string every, period, from, first, to, last;
      words >> every >> period >> from >> first >> to >> last;
      if (from != "from" || to != "to" || last.empty() || names.size() != 1) {
        throw ValidationError("schedule line " + std::to_string(line_no) +
                              ": malformed recurring rule");
      }
      if (recurring) throw ValidationError("only one recurring dose is supported");
      recurring = RecurringDose{names.front(), group, parse_age(first),
                                parse_age(period), parse_age(last)};
      continue;
    }
    const int due = parse_age(age);
    for (auto& n : names) doses.push_back({std::move(n), due, group});
  }
  return VaccineSchedule(std::move(doses), std::move(recurring));
}

VaccineSchedule VaccineSchedule::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw NotFoundError("cannot open schedule file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

std::vector<VaccineDose> VaccineSchedule::expanded() const {
  auto out = doses_;
  if (recurring_) {
    const auto& r = *recurring_;
    int k = 1;
    for (int day = r.first_day; day <= r.last_day; day += r.period_days, ++k) {
      out.push_back({r.name + " R" + std::to_string(k), day, r.group});
    }
  }
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return a.due_age_days < b.due_age_days;
  });
  return out;
}

std::vector<std::string> VaccineSchedule::groups() const {
  std::vector<std::string> out;
  for (const auto& d : doses_) {
    if (std::find(out.begin(), out.end(), d.group) == out.end()) {
      out.push_back(d.group);
    }
  }
  if (recurring_ &&
      std::find(out.begin(), out.end(), recurring_->group) == out.end()) {
    out.push_back(recurring_->group);
  }
  return out;
}

bool VaccineSchedule::knows(std::string_view label) const {
  for (const auto& d : expanded()) {
    if (d.name == label || d.key() == label) return true;
  }
  return false;
}

bool dose_received(const VaccineDose& dose,
                   const std::set<std::string>& received) {
  return received.count(dose.name) > 0 || received.count(dose.key()) > 0;
}

void validate_beneficiary(const Beneficiary& b, const VaccineSchedule& s) {
  if (b.id.empty()) throw ValidationError("beneficiary without id");
  for (const auto& r : b.received_doses) {
    if (!s.knows(r)) {
      throw ValidationError("beneficiary " + b.id + ": unknown dose '" + r + "'");
    }
  }
  auto windows = b.availability;
  std::sort(windows.begin(), windows.end(), [](const auto& x, const auto& y) {
    return x.start_minute < y.start_minute;
  });
  for (std::size_t i = 0; i < windows.size(); ++i) {
    const auto& w = windows[i];
    if (w.start_minute < 0 || w.end_minute >= 24 * 60 ||
        w.end_minute < w.start_minute) {
      throw ValidationError("beneficiary " + b.id + ": malformed availability");
    }
    if (i > 0 && windows[i - 1].end_minute >= w.start_minute) {
      throw ValidationError("beneficiary " + b.id +
                            ": overlapping availability windows");
    }
  }
}

TimeWindow dose_window(const VaccineDose& dose, Date birth_date,
                       int half_width) {
  if (half_width < kMinHalfWidth || half_width > kMaxHalfWidth) {
    throw ValidationError("half_width " + std::to_string(half_width) +
                          " outside [3, 5]");
  }
  const Date center = birth_date + days{dose.due_age_days};
  return TimeWindow(center - days{half_width}, center + days{half_width});
}

std::vector<DueDose> next_due_doses(const Beneficiary& b,
                                    const VaccineSchedule& s,
                                    const TimeWindow& horizon, int half_width) {
  std::vector<DueDose> out;
  for (const auto& dose : s.expanded()) {
    if (dose_received(dose, b.received_doses)) continue;
    const auto w = dose_window(dose, b.child_birth_date, half_width);
    if (w.intersects(horizon)) out.push_back({dose, w});
  }
  return out;
}

std::vector<EligibleEntry> eligible_beneficiaries(
    std::span<const Beneficiary> registry, const VaccineSchedule& s,
    const TimeWindow& horizon, int half_width) {
  std::unordered_set<std::string> ids;
  for (const auto& b : registry) {
    if (!ids.insert(b.id).second) {
      throw ValidationError("duplicate beneficiary id '" + b.id + "'");
    }
  }
  std::vector<EligibleEntry> out;
  for (std::size_t i = 0; i < registry.size(); ++i) {
    auto due = next_due_doses(registry[i], s, horizon, half_width);
    if (!due.empty()) out.push_back({i, std::move(due)});
  }
  return out;
}

}  // namespace adviser

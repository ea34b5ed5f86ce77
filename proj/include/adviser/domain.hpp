#pragma once

#include <chrono>
#include <filesystem>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "adviser/common.hpp"

namespace adviser {

using Date = std::chrono::sys_days;

Date parse_date(std::string_view iso);  // YYYY-MM-DD
std::string format_date(Date d);

// Inclusive calendar-day interval.
struct TimeWindow {
  Date start;
  Date end;

  TimeWindow() = default;
  TimeWindow(Date s, Date e);

  bool contains(Date d) const { return start <= d && d <= end; }
  bool intersects(const TimeWindow& o) const {
    return start <= o.end && o.start <= end;
  }
  int width_days() const { return (end - start).count() + 1; }

  friend bool operator==(const TimeWindow&, const TimeWindow&) = default;
};

// Time-of-day interval in minutes since midnight, inclusive.
struct DailyWindow {
  int start_minute = 0;
  int end_minute = 24 * 60 - 1;

  friend bool operator==(const DailyWindow&, const DailyWindow&) = default;
};

struct VaccineDose {
  std::string name;
  int due_age_days = 0;
  std::string group;

  // Dose identity is (name, group); "OPV 3" appears in two groups.
  std::string key() const { return name + "@" + group; }

  friend bool operator==(const VaccineDose&, const VaccineDose&) = default;
};

// A dose given every `period_days` from `first_day` through `last_day`.
struct RecurringDose {
  std::string name;
  std::string group;
  int first_day = 0;
  int period_days = 0;
  int last_day = 0;
};

class VaccineSchedule {
 public:
  VaccineSchedule() = default;
  VaccineSchedule(std::vector<VaccineDose> doses,
                  std::optional<RecurringDose> recurring);

  // The immunization table shipped with the library.
  static const VaccineSchedule& default_schedule();
  static VaccineSchedule parse(std::string_view text);
  static VaccineSchedule load(const std::filesystem::path& path);

  const std::vector<VaccineDose>& doses() const { return doses_; }
  const std::optional<RecurringDose>& recurring() const { return recurring_; }

  // Fixed doses plus every recurring instance, sorted by due age.
  // Recurring instances are named "<name> R<k>" (k from 1).
  std::vector<VaccineDose> expanded() const;

  std::vector<std::string> groups() const;

  // True when `label` names a dose (plain name or name@group).
  bool knows(std::string_view label) const;

 private:
  std::vector<VaccineDose> doses_;
  std::optional<RecurringDose> recurring_;
};

// Age conversions: 1 week = 7 days, 1 month = 30.4 days rounded, 1 year = 365.
int months_to_days(double months);

struct Beneficiary {
  std::string id;
  FeatureVector features;
  std::optional<CellId> home_cell;  // empty when the address did not resolve
  Date child_birth_date;
  std::set<std::string> received_doses;
  std::vector<DailyWindow> availability;
  bool phone_reachable = true;
};

// Throws ValidationError on overlapping availability or unknown dose labels.
void validate_beneficiary(const Beneficiary& b, const VaccineSchedule& s);

bool dose_received(const VaccineDose& dose,
                   const std::set<std::string>& received);

struct HealthCenter {
  std::string id;
  CellId cell;
  int service_deadline_minute = 11 * 60;
};

inline constexpr int kMinHalfWidth = 3;
inline constexpr int kMaxHalfWidth = 5;
inline constexpr int kDefaultHalfWidth = 4;

TimeWindow dose_window(const VaccineDose& dose, Date birth_date,
                       int half_width = kDefaultHalfWidth);

struct DueDose {
  VaccineDose dose;
  TimeWindow window;
};

std::vector<DueDose> next_due_doses(const Beneficiary& b,
                                    const VaccineSchedule& s,
                                    const TimeWindow& horizon,
                                    int half_width = kDefaultHalfWidth);

struct EligibleEntry {
  std::size_t registry_index = 0;
  std::vector<DueDose> doses;
};

// Output order follows registry order. Duplicate ids raise ValidationError.
std::vector<EligibleEntry> eligible_beneficiaries(
    std::span<const Beneficiary> registry, const VaccineSchedule& s,
    const TimeWindow& horizon, int half_width = kDefaultHalfWidth);

}  // namespace adviser

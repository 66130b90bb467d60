#pragma once

// Stop-level records: CSV ingestion, the configurable filtering policy,
// aggregation to sufficient statistics, disaggregation splits and placebo
// relabelings.
//
// Input schema (header required, comma-delimited):
//   group,dept,searched,hit,search_basis,factors,timestamp,driver_age,
//   driver_gender,is_state_patrol
// booleans are 0/1, factors are semicolon-joined tokens, timestamps are
// ISO-8601 (date or date+time).

#include <algorithm>
#include <array>
#include <chrono>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "threshtest/counts.hpp"
#include "threshtest/csv.hpp"

namespace threshtest {

struct SchemaError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DataQualityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct EmptyResultError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class SearchBasis {
  none,
  probable_cause,
  protective_frisk,
  consent,
  incident_to_arrest,
  warrant,
};

enum class Factor {
  erratic_suspicious_behavior,
  observation_of_contraband,
  suspicious_movement,
  informant_tip,
  witness_observation,
  other_official_info,
};

using FactorSet = std::uint8_t;  // bitmask over Factor

inline FactorSet factor_bit(Factor f) { return static_cast<FactorSet>(1u << static_cast<int>(f)); }
inline bool has_factor(FactorSet s, Factor f) { return (s & factor_bit(f)) != 0; }

struct Timestamp {
  int year = 1970, month = 1, day = 1;
  int hour = 0, minute = 0, second = 0;

  bool is_midnight() const { return hour == 0 && minute == 0 && second == 0; }

  // 0 = Monday ... 6 = Sunday
  int weekday() const {
    using namespace std::chrono;
    const year_month_day ymd{std::chrono::year{year}, std::chrono::month{unsigned(month)},
                             std::chrono::day{unsigned(day)}};
    const weekday wd{sys_days{ymd}};
    return static_cast<int>(wd.iso_encoding()) - 1;
  }
};

struct StopRecord {
  std::string group;
  std::string dept;
  bool searched = false;
  bool hit = false;
  SearchBasis basis = SearchBasis::none;
  FactorSet factors = 0;
  Timestamp when;
  int driver_age = 0;
  std::string driver_gender;
  bool is_state_patrol = false;
};

namespace detail_records {

inline const std::array<std::pair<const char*, SearchBasis>, 6> kBasisTokens = {{
    {"none", SearchBasis::none},
    {"probable_cause", SearchBasis::probable_cause},
    {"protective_frisk", SearchBasis::protective_frisk},
    {"consent", SearchBasis::consent},
    {"incident_to_arrest", SearchBasis::incident_to_arrest},
    {"warrant", SearchBasis::warrant},
}};

inline const std::array<std::pair<const char*, Factor>, 6> kFactorTokens = {{
    {"erratic_suspicious_behavior", Factor::erratic_suspicious_behavior},
    {"observation_of_contraband", Factor::observation_of_contraband},
    {"suspicious_movement", Factor::suspicious_movement},
    {"informant_tip", Factor::informant_tip},
    {"witness_observation", Factor::witness_observation},
    {"other_official_info", Factor::other_official_info},
}};

inline std::optional<SearchBasis> parse_basis(const std::string& s) {
  for (const auto& [tok, b] : kBasisTokens)
    if (s == tok) return b;
  return std::nullopt;
}

inline std::optional<FactorSet> parse_factors(const std::string& s) {
  FactorSet out = 0;
  std::size_t start = 0;
  while (start <= s.size()) {
    std::size_t end = s.find(';', start);
    if (end == std::string::npos) end = s.size();
    const std::string tok = s.substr(start, end - start);
    if (!tok.empty()) {
      bool found = false;
      for (const auto& [name, f] : kFactorTokens)
        if (tok == name) {
          out |= factor_bit(f);
          found = true;
          break;
        }
      if (!found) return std::nullopt;
    }
    if (end == s.size()) break;
    start = end + 1;
  }
  return out;
}

inline std::optional<bool> parse_bool(const std::string& s) {
  if (s == "0") return false;
  if (s == "1") return true;
  return std::nullopt;
}

inline std::optional<int> parse_int(const std::string& s) {
  if (s.empty()) return std::nullopt;
  int v = 0;
  std::size_t i = s[0] == '-' ? 1 : 0;
  if (i == s.size()) return std::nullopt;
  for (; i < s.size(); ++i) {
    if (s[i] < '0' || s[i] > '9') return std::nullopt;
    v = v * 10 + (s[i] - '0');
  }
  return s[0] == '-' ? -v : v;
}

inline std::optional<Timestamp> parse_timestamp(const std::string& s) {
  // YYYY-MM-DD, optionally followed by 'T' or ' ' and HH:MM[:SS]
  Timestamp t;
  if (s.size() < 10 || s[4] != '-' || s[7] != '-') return std::nullopt;
  auto num = [&](std::size_t pos, std::size_t len) -> std::optional<int> {
    int v = 0;
    for (std::size_t i = pos; i < pos + len; ++i) {
      if (i >= s.size() || s[i] < '0' || s[i] > '9') return std::nullopt;
      v = v * 10 + (s[i] - '0');
    }
    return v;
  };
  auto y = num(0, 4), mo = num(5, 2), d = num(8, 2);
  if (!y || !mo || !d) return std::nullopt;
  t.year = *y;
  t.month = *mo;
  t.day = *d;
  if (t.month < 1 || t.month > 12 || t.day < 1 || t.day > 31) return std::nullopt;
  if (s.size() == 10) return t;
  if (s.size() < 16 || (s[10] != 'T' && s[10] != ' ') || s[13] != ':') return std::nullopt;
  auto h = num(11, 2), mi = num(14, 2);
  if (!h || !mi) return std::nullopt;
  t.hour = *h;
  t.minute = *mi;
  if (t.hour > 23 || t.minute > 59) return std::nullopt;
  if (s.size() == 16) return t;
  if (s.size() != 19 || s[16] != ':') return std::nullopt;
  auto sec = num(17, 2);
  if (!sec || *sec > 59) return std::nullopt;
  t.second = *sec;
  return t;
}

}  // namespace detail_records

struct ParseReport {
  std::int64_t total_rows = 0;  // data rows seen (header excluded)
  std::int64_t parsed = 0;
  std::int64_t malformed = 0;
  std::vector<std::pair<std::int64_t, std::string>> errors;  // (line, reason), capped

  double malformed_rate() const {
    return total_rows == 0 ? 0.0 : static_cast<double>(malformed) / static_cast<double>(total_rows);
  }
};

inline constexpr double kMalformedFatalRate = 0.01;
inline constexpr std::size_t kMaxLoggedErrors = 100;

// Streams the CSV once. Malformed rows are counted with line numbers and
// skipped; a malformed rate at or above 1% is fatal, as is a missing
// mandatory column.
inline std::pair<std::vector<StopRecord>, ParseReport> parse_records(std::istream& in) {
  using namespace detail_records;
  std::string line;
  if (!csv::get_line(in, line)) throw SchemaError("input is empty; header row required");
  const auto header = csv::split_line(line);
  const std::vector<std::string> expected = {
      "group",     "dept",      "searched",    "hit",           "search_basis",
      "factors",   "timestamp", "driver_age",  "driver_gender", "is_state_patrol"};
  std::array<int, 10> col{};
  for (std::size_t i = 0; i < expected.size(); ++i) {
    auto it = std::find(header.begin(), header.end(), expected[i]);
    if (it == header.end())
      throw SchemaError("missing mandatory column: " + expected[i]);
    col[i] = static_cast<int>(it - header.begin());
  }

  std::vector<StopRecord> records;
  ParseReport report;
  std::int64_t lineno = 1;
  while (csv::get_line(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    ++report.total_rows;
    const auto f = csv::split_line(line);
    auto fail = [&](const std::string& why) {
      ++report.malformed;
      if (report.errors.size() < kMaxLoggedErrors) report.errors.emplace_back(lineno, why);
    };
    if (f.size() < header.size()) {
      fail("too few fields");
      continue;
    }
    StopRecord r;
    r.group = f[col[0]];
    r.dept = f[col[1]];
    const auto searched = parse_bool(f[col[2]]);
    const auto hit = parse_bool(f[col[3]]);
    const auto basis = parse_basis(f[col[4]]);
    const auto factors = parse_factors(f[col[5]]);
    const auto when = parse_timestamp(f[col[6]]);
    const auto age = parse_int(f[col[7]]);
    const auto patrol = parse_bool(f[col[9]]);
    if (!searched || !hit) {
      fail("searched/hit must be 0 or 1");
      continue;
    }
    if (!basis) {
      fail("unknown search_basis");
      continue;
    }
    if (!factors) {
      fail("unknown factor token");
      continue;
    }
    if (!when) {
      fail("bad timestamp");
      continue;
    }
    if (!age) {
      fail("bad driver_age");
      continue;
    }
    if (!patrol) {
      fail("is_state_patrol must be 0 or 1");
      continue;
    }
    if (*hit && !*searched) {
      fail("hit without search");
      continue;
    }
    if ((*searched && *basis == SearchBasis::none) ||
        (!*searched && *basis != SearchBasis::none)) {
      fail("search_basis is none iff searched is 0");
      continue;
    }
    if (r.dept.empty()) {
      fail("empty dept");
      continue;
    }
    r.searched = *searched;
    r.hit = *hit;
    r.basis = *basis;
    r.factors = *factors;
    r.when = *when;
    r.driver_age = *age;
    r.driver_gender = f[col[8]];
    r.is_state_patrol = *patrol;
    records.push_back(std::move(r));
    ++report.parsed;
  }
  if (report.total_rows > 0 && report.malformed_rate() >= kMalformedFatalRate)
    throw DataQualityError("malformed rate " + std::to_string(report.malformed_rate()) +
                           " is at or above the 1% threshold");
  return {std::move(records), std::move(report)};
}

enum class SearchDefinition {
  any_search,
  probable_cause_only,
  probable_cause_no_official_info,
  custom,
};

struct FilterPolicy {
  std::set<std::string> excluded_groups;
  bool drop_missing_group = true;
  bool exclude_state_patrol = true;
  std::optional<int> top_k_departments;
  SearchDefinition search_definition = SearchDefinition::any_search;
  std::set<SearchBasis> custom_bases;  // used when search_definition == custom
  bool exclude_midnight = false;
  std::optional<std::pair<int, int>> age_bounds;  // inclusive

  void validate() const {
    if (top_k_departments && *top_k_departments < 1)
      throw std::invalid_argument("FilterPolicy: top_k_departments must be >= 1");
  }
};

struct ExclusionReport {
  std::int64_t input = 0, output = 0;
  std::vector<std::pair<std::string, std::int64_t>> removed;  // per rule, fixed order
  std::int64_t searches_redefined = 0;  // searches reclassified as non-searches
};

namespace detail_records {

inline bool search_counts(const StopRecord& r, const FilterPolicy& p) {
  if (!r.searched) return false;
  switch (p.search_definition) {
    case SearchDefinition::any_search:
      return true;
    case SearchDefinition::probable_cause_only:
      return r.basis == SearchBasis::probable_cause;
    case SearchDefinition::probable_cause_no_official_info:
      return r.basis == SearchBasis::probable_cause &&
             !has_factor(r.factors, Factor::other_official_info);
    case SearchDefinition::custom:
      return p.custom_bases.count(r.basis) > 0;
  }
  return false;
}

}  // namespace detail_records

// Exclusions run in fixed order: group rules, state patrol, top-k
// departments (ranked by stop count after the preceding rules), search
// redefinition, midnight, age bounds.
inline std::pair<std::vector<StopRecord>, ExclusionReport> apply_policy(
    std::vector<StopRecord> records, const FilterPolicy& policy) {
  policy.validate();
  ExclusionReport rep;
  rep.input = static_cast<std::int64_t>(records.size());

  auto remove_if_counted = [&](const std::string& rule, auto pred) {
    const auto before = records.size();
    std::erase_if(records, pred);
    rep.removed.emplace_back(rule, static_cast<std::int64_t>(before - records.size()));
  };

  remove_if_counted("excluded_groups", [&](const StopRecord& r) {
    return policy.excluded_groups.count(r.group) > 0;
  });
  remove_if_counted("missing_group", [&](const StopRecord& r) {
    return policy.drop_missing_group && r.group.empty();
  });
  remove_if_counted("state_patrol", [&](const StopRecord& r) {
    return policy.exclude_state_patrol && r.is_state_patrol;
  });

  if (policy.top_k_departments) {
    std::map<std::string, std::int64_t> dept_stops;
    for (const auto& r : records) ++dept_stops[r.dept];
    std::vector<std::pair<std::string, std::int64_t>> ranked(dept_stops.begin(),
                                                             dept_stops.end());
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
      return a.second != b.second ? a.second > b.second : a.first < b.first;
    });
    std::set<std::string> keep;
    for (std::size_t i = 0; i < ranked.size() && i < static_cast<std::size_t>(*policy.top_k_departments); ++i)
      keep.insert(ranked[i].first);
    remove_if_counted("top_k_departments",
                      [&](const StopRecord& r) { return keep.count(r.dept) == 0; });
  } else {
    rep.removed.emplace_back("top_k_departments", 0);
  }

  // Redefinition rewrites flags; no rows are removed.
  for (auto& r : records) {
    const bool counts = detail_records::search_counts(r, policy);
    if (r.searched && !counts) {
      r.searched = false;
      r.hit = false;
      ++rep.searches_redefined;
    }
  }

  remove_if_counted("midnight", [&](const StopRecord& r) {
    return policy.exclude_midnight && r.when.is_midnight();
  });
  remove_if_counted("age_bounds", [&](const StopRecord& r) {
    return policy.age_bounds &&
           (r.driver_age < policy.age_bounds->first || r.driver_age > policy.age_bounds->second);
  });

  rep.output = static_cast<std::int64_t>(records.size());
  if (records.empty()) throw EmptyResultError("no records survive the filter policy");
  return {std::move(records), std::move(rep)};
}

inline CountsTable aggregate(const std::vector<StopRecord>& records) {
  CountsTable t;
  for (const auto& r : records)
    t.add(r.group, r.dept, 1, r.searched ? 1 : 0, r.hit ? 1 : 0);
  return t;
}

enum class DisaggregationAxis { year, time_of_day, age_band, gender };

struct Disaggregation {
  std::vector<std::pair<std::string, std::vector<StopRecord>>> subsets;
  std::vector<std::string> warnings;
};

inline constexpr std::int64_t kSmallSubsetWarning = 1000;

// Partition after axis-specific exclusions: exact-midnight rows are
// dropped from the time-of-day split, implausible ages (< 16 or > 105)
// from the age split.
inline Disaggregation disaggregate(const std::vector<StopRecord>& records,
                                   DisaggregationAxis axis) {
  std::map<std::string, std::vector<StopRecord>> parts;
  for (const auto& r : records) {
    std::string key;
    switch (axis) {
      case DisaggregationAxis::year:
        key = std::to_string(r.when.year);
        break;
      case DisaggregationAxis::time_of_day:
        if (r.when.is_midnight()) continue;
        key = (r.when.hour >= 20 || r.when.hour < 5) ? "night" : "day";
        break;
      case DisaggregationAxis::age_band:
        if (r.driver_age < 16 || r.driver_age > 105) continue;
        key = r.driver_age <= 25 ? "16-25" : (r.driver_age <= 40 ? "26-40" : "41-105");
        break;
      case DisaggregationAxis::gender:
        key = r.driver_gender;
        break;
    }
    parts[key].push_back(r);
  }
  Disaggregation out;
  for (auto& [key, recs] : parts) {
    if (static_cast<std::int64_t>(recs.size()) < kSmallSubsetWarning)
      out.warnings.push_back("subset '" + key + "' has only " +
                             std::to_string(recs.size()) + " records");
    out.subsets.emplace_back(key, std::move(recs));
  }
  return out;
}

enum class PlaceboAxis { day_of_week, season };

inline const char* season_of_month(int month) {
  if (month == 12 || month <= 2) return "winter";
  if (month <= 5) return "spring";
  if (month <= 8) return "summer";
  return "fall";
}

inline const char* weekday_name(int wd) {
  static constexpr const char* kNames[7] = {"Monday", "Tuesday",  "Wednesday", "Thursday",
                                            "Friday", "Saturday", "Sunday"};
  return kNames[wd];
}

// Overwrites the group label with the placebo label; everything else is
// left untouched.
inline std::vector<StopRecord> placebo_relabel(std::vector<StopRecord> records,
                                               PlaceboAxis axis) {
  for (auto& r : records)
    r.group = axis == PlaceboAxis::day_of_week ? weekday_name(r.when.weekday())
                                               : season_of_month(r.when.month);
  return records;
}

}  // namespace threshtest

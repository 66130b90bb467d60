#pragma once

// The benchmark test (search-rate comparison) and outcome test (hit-rate
// comparison), with per-department sign verdicts and the concordance
// cross-tabulation the threshold test is judged against.
//
// Verdict convention: +1 flags treatment consistent with discrimination
// against the group relative to the reference (searched more for the
// benchmark test, lower hit rate for the outcome test, lower threshold
// for the threshold test), -1 the reverse, 0 no difference or below the
// evidence floor.

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "threshtest/counts.hpp"
#include "threshtest/csv.hpp"

namespace threshtest {

struct RateCell {
  std::int64_t n = 0, searches = 0, hits = 0;
  double search_rate = std::numeric_limits<double>::quiet_NaN();  // S/n
  double hit_rate = std::numeric_limits<double>::quiet_NaN();     // H/S, NaN when S = 0
};

struct GroupAggregate {
  std::int64_t n = 0, searches = 0, hits = 0;
  double search_rate = std::numeric_limits<double>::quiet_NaN();
  double hit_rate = std::numeric_limits<double>::quiet_NaN();
};

struct RateTable {
  std::vector<std::string> groups, depts;
  std::vector<RateCell> cells;  // row-major group*D + dept
  std::vector<GroupAggregate> aggregates;

  const RateCell& cell(int g, int d) const {
    return cells[static_cast<std::size_t>(g) * depts.size() + d];
  }
};

inline RateTable build_rate_table(const CountsTable& counts) {
  RateTable t;
  t.groups = counts.groups();
  t.depts = counts.depts();
  const int R = counts.group_count(), D = counts.dept_count();
  t.cells.resize(static_cast<std::size_t>(R) * D);
  t.aggregates.resize(R);
  for (int g = 0; g < R; ++g) {
    GroupAggregate& agg = t.aggregates[g];
    for (int d = 0; d < D; ++d) {
      const auto& c = counts.cell(g, d);
      RateCell& rc = t.cells[static_cast<std::size_t>(g) * D + d];
      rc.n = c.n;
      rc.searches = c.searches;
      rc.hits = c.hits;
      if (c.n > 0) rc.search_rate = static_cast<double>(c.searches) / static_cast<double>(c.n);
      if (c.searches > 0)
        rc.hit_rate = static_cast<double>(c.hits) / static_cast<double>(c.searches);
      agg.n += c.n;
      agg.searches += c.searches;
      agg.hits += c.hits;
    }
    if (agg.n > 0) agg.search_rate = static_cast<double>(agg.searches) / static_cast<double>(agg.n);
    if (agg.searches > 0)
      agg.hit_rate = static_cast<double>(agg.hits) / static_cast<double>(agg.searches);
  }
  return t;
}

// Minimum evidence before a sign verdict is issued; departments below the
// floor get verdict 0, departments with no data at all are skipped.
struct VerdictFloors {
  std::int64_t min_stops = 50;     // benchmark test, both groups
  std::int64_t min_searches = 10;  // outcome test, both groups
};

struct VerdictEntry {
  int verdict = 0;
  bool skipped = false;
};

struct TestResult {
  RateTable rates;
  std::string reference_group;
  std::vector<std::string> groups;  // non-reference groups, table order
  std::vector<std::string> depts;
  // verdicts[i] is group groups[i]; inner index is the department
  std::vector<std::vector<VerdictEntry>> verdicts;

  const VerdictEntry& verdict(int gi, int d) const { return verdicts[gi][d]; }
};

namespace detail_classic {

inline int sign(double x) { return x > 0.0 ? 1 : (x < 0.0 ? -1 : 0); }

inline TestResult run_test(const CountsTable& counts, const std::string& reference_group,
                           const VerdictFloors& floors, bool outcome) {
  const int ref = counts.group_index(reference_group);
  if (ref < 0)
    throw std::invalid_argument("reference group '" + reference_group + "' not present");
  TestResult res;
  res.rates = build_rate_table(counts);
  res.reference_group = reference_group;
  res.depts = counts.depts();
  const int R = counts.group_count(), D = counts.dept_count();
  for (int g = 0; g < R; ++g) {
    if (g == ref) continue;
    res.groups.push_back(counts.groups()[g]);
    std::vector<VerdictEntry> row(D);
    for (int d = 0; d < D; ++d) {
      const RateCell& cg = res.rates.cell(g, d);
      const RateCell& cr = res.rates.cell(ref, d);
      VerdictEntry e;
      if (outcome) {
        if (cg.searches == 0 || cr.searches == 0) {
          e.skipped = true;
        } else if (cg.searches < floors.min_searches || cr.searches < floors.min_searches) {
          e.verdict = 0;
        } else {
          e.verdict = sign(cr.hit_rate - cg.hit_rate);
        }
      } else {
        if (cg.n == 0 || cr.n == 0) {
          e.skipped = true;
        } else if (cg.n < floors.min_stops || cr.n < floors.min_stops) {
          e.verdict = 0;
        } else {
          e.verdict = sign(cg.search_rate - cr.search_rate);
        }
      }
      row[d] = e;
    }
    res.verdicts.push_back(std::move(row));
  }
  return res;
}

}  // namespace detail_classic

inline TestResult benchmark_test(const CountsTable& counts, const std::string& reference_group,
                                 const VerdictFloors& floors = {}) {
  return detail_classic::run_test(counts, reference_group, floors, /*outcome=*/false);
}

inline TestResult outcome_test(const CountsTable& counts, const std::string& reference_group,
                               const VerdictFloors& floors = {}) {
  return detail_classic::run_test(counts, reference_group, floors, /*outcome=*/true);
}

// Per-department threshold-test verdicts from posterior-mean thresholds,
// aligned with the classic-test convention above.
struct ThresholdVerdicts {
  std::string reference_group;
  std::vector<std::string> groups;  // non-reference
  std::vector<std::string> depts;
  std::vector<std::vector<VerdictEntry>> verdicts;
};

inline ThresholdVerdicts threshold_verdicts(const CountsTable& counts,
                                            const std::vector<double>& mean_thresholds,
                                            const std::string& reference_group) {
  const int R = counts.group_count(), D = counts.dept_count();
  if (static_cast<int>(mean_thresholds.size()) != R * D)
    throw std::invalid_argument("threshold_verdicts: need R*D posterior means");
  const int ref = counts.group_index(reference_group);
  if (ref < 0)
    throw std::invalid_argument("reference group '" + reference_group + "' not present");
  ThresholdVerdicts out;
  out.reference_group = reference_group;
  out.depts = counts.depts();
  for (int g = 0; g < R; ++g) {
    if (g == ref) continue;
    out.groups.push_back(counts.groups()[g]);
    std::vector<VerdictEntry> row(D);
    for (int d = 0; d < D; ++d) {
      const double tg = mean_thresholds[static_cast<std::size_t>(g) * D + d];
      const double tr = mean_thresholds[static_cast<std::size_t>(ref) * D + d];
      row[d].verdict = detail_classic::sign(tr - tg);
    }
    out.verdicts.push_back(std::move(row));
  }
  return out;
}

// 3x3 cross-tabulation of verdicts (-1, 0, +1) between two tests; only
// departments where neither side is skipped are counted.
struct ConcordanceMatrix {
  std::array<std::array<std::int64_t, 3>, 3> counts{};

  std::int64_t at(int a, int b) const { return counts[a + 1][b + 1]; }
  std::int64_t& at(int a, int b) { return counts[a + 1][b + 1]; }
  std::int64_t agreements() const { return at(-1, -1) + at(0, 0) + at(1, 1); }
  std::int64_t total() const {
    std::int64_t t = 0;
    for (const auto& row : counts)
      for (auto v : row) t += v;
    return t;
  }
};

struct GroupConcordance {
  std::string group;
  ConcordanceMatrix benchmark_vs_outcome;
  ConcordanceMatrix benchmark_vs_threshold;  // present when thresholds supplied
  ConcordanceMatrix outcome_vs_threshold;
  bool has_threshold = false;
};

struct ConcordanceReport {
  std::vector<GroupConcordance> groups;
};

inline ConcordanceReport concordance_report(const TestResult& benchmark,
                                            const TestResult& outcome,
                                            const ThresholdVerdicts* thresholds = nullptr) {
  if (benchmark.groups != outcome.groups || benchmark.depts != outcome.depts)
    throw std::invalid_argument("concordance_report: result sets cover different cells");
  if (thresholds &&
      (thresholds->groups != benchmark.groups || thresholds->depts != benchmark.depts))
    throw std::invalid_argument("concordance_report: threshold verdicts cover different cells");
  ConcordanceReport rep;
  const int D = static_cast<int>(benchmark.depts.size());
  for (std::size_t gi = 0; gi < benchmark.groups.size(); ++gi) {
    GroupConcordance gc;
    gc.group = benchmark.groups[gi];
    gc.has_threshold = thresholds != nullptr;
    for (int d = 0; d < D; ++d) {
      const auto& b = benchmark.verdicts[gi][d];
      const auto& o = outcome.verdicts[gi][d];
      if (!b.skipped && !o.skipped) gc.benchmark_vs_outcome.at(b.verdict, o.verdict)++;
      if (thresholds) {
        const auto& t = thresholds->verdicts[gi][d];
        if (!b.skipped) gc.benchmark_vs_threshold.at(b.verdict, t.verdict)++;
        if (!o.skipped) gc.outcome_vs_threshold.at(o.verdict, t.verdict)++;
      }
    }
    rep.groups.push_back(gc);
  }
  return rep;
}

// Aggregate rate table mirroring the headline summary (one row per group).
inline void write_aggregate_rates_csv(std::ostream& out, const RateTable& t) {
  out << "group,stops,searches,hits,search_rate,hit_rate\n";
  for (std::size_t g = 0; g < t.groups.size(); ++g) {
    const auto& a = t.aggregates[g];
    csv::write_row(out, {t.groups[g], std::to_string(a.n), std::to_string(a.searches),
                         std::to_string(a.hits), csv::fmt(a.search_rate),
                         csv::fmt(a.hit_rate)});
  }
}

// Scatter data: reference rate on x, group rate on y, sized by stops.
inline void write_scatter_csv(std::ostream& out, const TestResult& res, bool outcome) {
  const auto& rates = res.rates;
  const int ref = [&] {
    for (std::size_t g = 0; g < rates.groups.size(); ++g)
      if (rates.groups[g] == res.reference_group) return static_cast<int>(g);
    return -1;
  }();
  out << "group,dept,x_reference_rate,y_group_rate,stops\n";
  for (std::size_t gi = 0; gi < res.groups.size(); ++gi) {
    const int g = [&] {
      for (std::size_t k = 0; k < rates.groups.size(); ++k)
        if (rates.groups[k] == res.groups[gi]) return static_cast<int>(k);
      return -1;
    }();
    for (std::size_t d = 0; d < res.depts.size(); ++d) {
      const RateCell& cg = rates.cell(g, static_cast<int>(d));
      const RateCell& cr = rates.cell(ref, static_cast<int>(d));
      const double x = outcome ? cr.hit_rate : cr.search_rate;
      const double y = outcome ? cg.hit_rate : cg.search_rate;
      if (std::isnan(x) || std::isnan(y)) continue;
      csv::write_row(out, {res.groups[gi], res.depts[d], csv::fmt(x), csv::fmt(y),
                           std::to_string(cg.n)});
    }
  }
}

}  // namespace threshtest

#pragma once

// Sufficient statistics for the search/hit process: stop, search and hit
// counts per (group, department) cell. The cell invariant 0 <= H <= S <= n
// is enforced on every mutation.

#include <algorithm>
#include <cstdint>
#include <istream>
#include <map>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "threshtest/csv.hpp"

namespace threshtest {

struct CellIndex {
  int group = 0;
  int dept = 0;
};

struct CellCounts {
  std::int64_t n = 0;
  std::int64_t searches = 0;
  std::int64_t hits = 0;
};

class CountsTable {
 public:
  CountsTable() = default;

  // Fixed label sets up front; starts all-zero.
  CountsTable(std::vector<std::string> groups, std::vector<std::string> depts)
      : groups_(std::move(groups)), depts_(std::move(depts)) {
    for (std::size_t i = 0; i < groups_.size(); ++i) group_ix_[groups_[i]] = static_cast<int>(i);
    for (std::size_t i = 0; i < depts_.size(); ++i) dept_ix_[depts_[i]] = static_cast<int>(i);
    if (group_ix_.size() != groups_.size() || dept_ix_.size() != depts_.size())
      throw std::invalid_argument("CountsTable: duplicate labels");
    cells_.resize(groups_.size() * depts_.size());
  }

  int group_count() const { return static_cast<int>(groups_.size()); }
  int dept_count() const { return static_cast<int>(depts_.size()); }
  bool empty() const { return cells_.empty(); }

  const std::vector<std::string>& groups() const { return groups_; }
  const std::vector<std::string>& depts() const { return depts_; }

  int group_index(const std::string& label) const {
    auto it = group_ix_.find(label);
    return it == group_ix_.end() ? -1 : it->second;
  }
  int dept_index(const std::string& label) const {
    auto it = dept_ix_.find(label);
    return it == dept_ix_.end() ? -1 : it->second;
  }

  // Grows the label sets on demand.
  void add(const std::string& group, const std::string& dept, std::int64_t n,
           std::int64_t searches, std::int64_t hits) {
    const int g = intern(groups_, group_ix_, group);
    const int d = intern(depts_, dept_ix_, dept);
    CellCounts& c = cells_[index(g, d)];
    c.n += n;
    c.searches += searches;
    c.hits += hits;
    check_cell(c, group, dept);
  }

  const CellCounts& cell(int g, int d) const { return cells_[index(g, d)]; }

  std::int64_t stops(int g, int d) const { return cell(g, d).n; }
  std::int64_t searches(int g, int d) const { return cell(g, d).searches; }
  std::int64_t hits(int g, int d) const { return cell(g, d).hits; }

  std::int64_t dept_stops(int d) const {
    std::int64_t s = 0;
    for (int g = 0; g < group_count(); ++g) s += stops(g, d);
    return s;
  }

  std::int64_t total_stops() const {
    std::int64_t s = 0;
    for (const auto& c : cells_) s += c.n;
    return s;
  }

  // Reference department for the identifying constraint: most stops,
  // ties broken by lexicographically smallest label.
  int largest_dept() const {
    if (depts_.empty()) throw std::logic_error("CountsTable: no departments");
    int best = 0;
    std::int64_t best_n = dept_stops(0);
    for (int d = 1; d < dept_count(); ++d) {
      const std::int64_t nd = dept_stops(d);
      if (nd > best_n || (nd == best_n && depts_[d] < depts_[best])) {
        best = d;
        best_n = nd;
      }
    }
    return best;
  }

  void to_csv(std::ostream& out) const {
    out << "group,dept,n,searches,hits\n";
    for (int g = 0; g < group_count(); ++g)
      for (int d = 0; d < dept_count(); ++d) {
        const CellCounts& c = cell(g, d);
        csv::write_row(out, {groups_[g], depts_[d], std::to_string(c.n),
                             std::to_string(c.searches), std::to_string(c.hits)});
      }
  }

  static CountsTable from_csv(std::istream& in) {
    std::string line;
    if (!csv::get_line(in, line))
      throw std::runtime_error("counts csv: empty input");
    const auto header = csv::split_line(line);
    const std::vector<std::string> expected = {"group", "dept", "n", "searches", "hits"};
    if (header != expected)
      throw std::runtime_error("counts csv: header must be group,dept,n,searches,hits");
    CountsTable t;
    std::size_t lineno = 1;
    while (csv::get_line(in, line)) {
      ++lineno;
      if (line.empty()) continue;
      const auto f = csv::split_line(line);
      if (f.size() != 5)
        throw std::runtime_error("counts csv: bad field count at line " + std::to_string(lineno));
      try {
        t.add(f[0], f[1], std::stoll(f[2]), std::stoll(f[3]), std::stoll(f[4]));
      } catch (const std::invalid_argument&) {
        throw std::runtime_error("counts csv: bad number at line " + std::to_string(lineno));
      }
    }
    return t;
  }

 private:
  std::size_t index(int g, int d) const {
    return static_cast<std::size_t>(g) * depts_.size() + static_cast<std::size_t>(d);
  }

  int intern(std::vector<std::string>& labels, std::map<std::string, int>& ix,
             const std::string& label) {
    auto it = ix.find(label);
    if (it != ix.end()) return it->second;
    const int id = static_cast<int>(labels.size());
    labels.push_back(label);
    ix[label] = id;
    // grow the dense cell grid
    std::vector<CellCounts> grown(groups_.size() * depts_.size());
    if (&labels == &groups_) {
      std::copy(cells_.begin(), cells_.end(), grown.begin());
    } else {
      const std::size_t old_d = depts_.size() - 1;
      for (std::size_t g = 0; g < groups_.size(); ++g)
        for (std::size_t d = 0; d < old_d; ++d)
          grown[g * depts_.size() + d] = cells_[g * old_d + d];
    }
    cells_ = std::move(grown);
    return id;
  }

  static void check_cell(const CellCounts& c, const std::string& group,
                         const std::string& dept) {
    if (c.n < 0 || c.searches < 0 || c.hits < 0 || c.hits > c.searches ||
        c.searches > c.n)
      throw std::invalid_argument("CountsTable: cell (" + group + "," + dept +
                                  ") violates 0 <= hits <= searches <= stops");
  }

  std::vector<std::string> groups_, depts_;
  std::map<std::string, int> group_ix_, dept_ix_;
  std::vector<CellCounts> cells_;
};

}  // namespace threshtest

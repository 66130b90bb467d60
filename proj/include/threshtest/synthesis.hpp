#pragma once

// Synthetic data from the generative process (optionally with noisy
// per-stop thresholds), posterior predictive checks, stop-weighted
// aggregate thresholds, and parameter-recovery scoring.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "threshtest/counts.hpp"
#include "threshtest/csv.hpp"
#include "threshtest/model.hpp"
#include "threshtest/records.hpp"
#include "threshtest/rng.hpp"
#include "threshtest/sampler.hpp"

namespace threshtest {

struct SynthSpec {
  ModelParams truth;
  std::vector<std::string> group_labels, dept_labels;
  std::vector<std::int64_t> stops;  // per cell, row-major group*D + dept
  double threshold_noise_sigma = 0.0;  // sd of the per-stop threshold draw
  std::uint64_t seed = 0;
  bool emit_records = false;

  void validate() const {
    truth.validate();
    const std::size_t R = group_labels.size(), D = dept_labels.size();
    if (static_cast<int>(R) != truth.group_count() || static_cast<int>(D) != truth.dept_count())
      throw std::invalid_argument("SynthSpec: label counts do not match truth dimensions");
    if (stops.size() != R * D)
      throw std::invalid_argument("SynthSpec: need one stop count per cell");
    for (auto n : stops)
      if (n < 0) throw std::invalid_argument("SynthSpec: stop counts must be >= 0");
    if (threshold_noise_sigma < 0.0)
      throw std::invalid_argument("SynthSpec: threshold noise sigma must be >= 0");
  }
};

struct SynthResult {
  CountsTable counts;
  std::optional<std::vector<StopRecord>> records;
  std::vector<std::string> warnings;
};

// Per stop: signal p ~ beta(phi_rd, lambda_rd); threshold T = t_rd for
// sigma = 0, otherwise N(t_rd, sigma) clamped to [0,1]; search iff
// p >= T; hit ~ Bernoulli(p) given a search.
inline SynthResult generate(const SynthSpec& spec) {
  spec.validate();
  SynthResult out;
  if (spec.threshold_noise_sigma > 0.05)
    out.warnings.push_back("threshold noise sigma above the studied 0-0.05 range");
  out.counts = CountsTable(spec.group_labels, spec.dept_labels);
  if (spec.emit_records) out.records.emplace();

  const int R = static_cast<int>(spec.group_labels.size());
  const int D = static_cast<int>(spec.dept_labels.size());
  for (int g = 0; g < R; ++g)
    for (int d = 0; d < D; ++d) {
      const std::size_t ix = static_cast<std::size_t>(g) * D + d;
      const std::int64_t n = spec.stops[ix];
      if (n == 0) continue;
      CounterRng rng(spec.seed, 0x53594e5448ULL + ix);
      const double phi = link_phi(spec.truth.phi_r[g], spec.truth.phi_d[d]);
      const double lambda = link_lambda(spec.truth.lambda_r[g], spec.truth.lambda_d[d]);
      const double a = phi * lambda, b = (1.0 - phi) * lambda;
      const double t = spec.truth.threshold(g, d);
      std::int64_t searches = 0, hits = 0;
      for (std::int64_t i = 0; i < n; ++i) {
        const double p = rng.beta(a, b);
        double threshold = t;
        if (spec.threshold_noise_sigma > 0.0)
          threshold = std::clamp(rng.normal(t, spec.threshold_noise_sigma), 0.0, 1.0);
        const bool searched = p >= threshold;
        const bool hit = searched && rng.bernoulli(p);
        searches += searched;
        hits += hit;
        if (out.records) {
          StopRecord r;
          r.group = spec.group_labels[g];
          r.dept = spec.dept_labels[d];
          r.searched = searched;
          r.hit = hit;
          r.basis = searched ? SearchBasis::probable_cause : SearchBasis::none;
          // deterministic synthetic clock: cycle through 2009-2014
          const std::int64_t k = i + static_cast<std::int64_t>(ix) * 7919;
          r.when.year = 2009 + static_cast<int>(k / 372 % 6);
          r.when.month = 1 + static_cast<int>(k / 31 % 12);
          r.when.day = 1 + static_cast<int>(k % 28);
          r.when.hour = 1 + static_cast<int>(k % 23);
          r.when.minute = static_cast<int>(k % 60);
          r.driver_age = 20 + static_cast<int>(k % 50);
          r.driver_gender = (k % 2) ? "F" : "M";
          out.records->push_back(std::move(r));
        }
      }
      out.counts.add(spec.group_labels[g], spec.dept_labels[d], n, searches, hits);
    }
  return out;
}

struct PpcCell {
  std::string group, dept;
  std::int64_t stops = 0, searches = 0;
  double observed_search_rate = 0.0, predicted_search_rate = 0.0;
  double observed_hit_rate = 0.0, predicted_hit_rate = 0.0;  // NaN when S = 0
  double search_residual = 0.0, hit_residual = 0.0;
};

struct PpcReport {
  std::vector<PpcCell> cells;
  double weighted_rmse_search = 0.0;
  double weighted_rmse_hit = 0.0;  // cells with zero searches excluded

  void to_csv(std::ostream& out) const {
    out << "group,dept,stops,observed_search_rate,predicted_search_rate,search_residual,"
           "observed_hit_rate,predicted_hit_rate,hit_residual\n";
    for (const auto& c : cells)
      csv::write_row(out, {c.group, c.dept, std::to_string(c.stops),
                           csv::fmt(c.observed_search_rate), csv::fmt(c.predicted_search_rate),
                           csv::fmt(c.search_residual), csv::fmt(c.observed_hit_rate),
                           csv::fmt(c.predicted_hit_rate), csv::fmt(c.hit_residual)});
  }
};

// Analytic per-cell search and hit rates for each posterior draw,
// averaged over all draws, against the observed rates. RMSEs are
// weighted by stop count.
inline PpcReport posterior_predictive(const PosteriorDraws& draws, const PosteriorModel& model,
                                      const CountsTable& counts) {
  const int R = counts.group_count(), D = counts.dept_count();
  const std::size_t ncells = static_cast<std::size_t>(R) * D;
  std::vector<double> mean_p(ncells, 0.0), mean_q(ncells, 0.0);
  std::vector<double> p, q;
  std::int64_t n_draws = 0;
  std::vector<double> v(model.dim());
  for (int c = 0; c < draws.draws.chains; ++c)
    for (int i = 0; i < draws.draws.iters; ++i) {
      const double* row = draws.draws.row(c, i);
      v.assign(row, row + model.dim());
      const ModelParams params = model.constrain(v);
      cell_probs(counts, params, p, q);
      for (std::size_t ix = 0; ix < ncells; ++ix) {
        mean_p[ix] += p[ix];
        mean_q[ix] += q[ix];
      }
      ++n_draws;
    }
  if (n_draws == 0) throw std::invalid_argument("posterior_predictive: no draws");
  for (std::size_t ix = 0; ix < ncells; ++ix) {
    mean_p[ix] /= static_cast<double>(n_draws);
    mean_q[ix] /= static_cast<double>(n_draws);
  }

  PpcReport rep;
  double se_search = 0.0, w_search = 0.0, se_hit = 0.0, w_hit = 0.0;
  for (int g = 0; g < R; ++g)
    for (int d = 0; d < D; ++d) {
      const auto& c = counts.cell(g, d);
      if (c.n == 0) continue;
      const std::size_t ix = static_cast<std::size_t>(g) * D + d;
      PpcCell cell;
      cell.group = counts.groups()[g];
      cell.dept = counts.depts()[d];
      cell.stops = c.n;
      cell.searches = c.searches;
      cell.observed_search_rate = static_cast<double>(c.searches) / static_cast<double>(c.n);
      cell.predicted_search_rate = mean_p[ix];
      cell.search_residual = cell.observed_search_rate - cell.predicted_search_rate;
      const double w = static_cast<double>(c.n);
      se_search += w * cell.search_residual * cell.search_residual;
      w_search += w;
      if (c.searches > 0) {
        cell.observed_hit_rate = static_cast<double>(c.hits) / static_cast<double>(c.searches);
        cell.predicted_hit_rate = mean_q[ix];
        cell.hit_residual = cell.observed_hit_rate - cell.predicted_hit_rate;
        se_hit += w * cell.hit_residual * cell.hit_residual;
        w_hit += w;
      } else {
        cell.observed_hit_rate = std::numeric_limits<double>::quiet_NaN();
        cell.predicted_hit_rate = mean_q[ix];
        cell.hit_residual = std::numeric_limits<double>::quiet_NaN();
      }
      rep.cells.push_back(std::move(cell));
    }
  rep.weighted_rmse_search = w_search > 0.0 ? std::sqrt(se_search / w_search) : 0.0;
  rep.weighted_rmse_hit = w_hit > 0.0 ? std::sqrt(se_hit / w_hit) : 0.0;
  return rep;
}

struct AggregateThreshold {
  std::string group;
  double mean = 0.0, lo = 0.0, hi = 0.0;  // posterior mean and central 95%
};

// Stop-weighted group threshold: sum_d t_rd * n_d / sum_d n_d, computed
// per posterior draw and then summarized.
inline std::vector<AggregateThreshold> aggregate_thresholds(
    const PosteriorDraws& draws, const PosteriorModel& model,
    const std::vector<std::int64_t>& dept_stops) {
  const int R = model.group_count(), D = model.dept_count();
  if (static_cast<int>(dept_stops.size()) != D)
    throw std::invalid_argument("aggregate_thresholds: need one stop count per department");
  double total_w = 0.0;
  for (auto n : dept_stops) total_w += static_cast<double>(n);
  if (!(total_w > 0.0))
    throw std::invalid_argument("aggregate_thresholds: departments have no stops");

  const std::int64_t n_draws =
      static_cast<std::int64_t>(draws.draws.chains) * draws.draws.iters;
  if (n_draws == 0) throw std::invalid_argument("aggregate_thresholds: no draws");
  std::vector<std::vector<double>> series(R, std::vector<double>(n_draws));
  std::vector<double> v(model.dim());
  std::int64_t k = 0;
  for (int c = 0; c < draws.draws.chains; ++c)
    for (int i = 0; i < draws.draws.iters; ++i, ++k) {
      const double* row = draws.draws.row(c, i);
      v.assign(row, row + model.dim());
      const ModelParams params = model.constrain(v);
      for (int g = 0; g < R; ++g) {
        double acc = 0.0;
        for (int d = 0; d < D; ++d)
          acc += params.threshold(g, d) * static_cast<double>(dept_stops[d]);
        series[g][k] = acc / total_w;
      }
    }

  std::vector<AggregateThreshold> out(R);
  for (int g = 0; g < R; ++g) {
    auto& s = series[g];
    double mean = 0.0;
    for (double x : s) mean += x;
    mean /= static_cast<double>(n_draws);
    std::sort(s.begin(), s.end());
    out[g] = {model.counts().groups()[g], mean, quantile_sorted(s, 0.025),
              quantile_sorted(s, 0.975)};
  }
  return out;
}

struct RecoveryCell {
  std::string group, dept;
  double true_t = 0.0, posterior_mean = 0.0, abs_error = 0.0;
  double lo = 0.0, hi = 0.0;
  bool covered = false;
  double expected_searches = 0.0;  // n_rd * search_prob under the truth
};

struct RecoveryReport {
  std::vector<RecoveryCell> cells;
  double coverage = 0.0;  // fraction of cells whose 95% interval covers truth

  void to_csv(std::ostream& out) const {
    out << "group,dept,true_t,posterior_mean,abs_error,lo95,hi95,covered,expected_searches\n";
    for (const auto& c : cells)
      csv::write_row(out, {c.group, c.dept, csv::fmt(c.true_t), csv::fmt(c.posterior_mean),
                           csv::fmt(c.abs_error), csv::fmt(c.lo), csv::fmt(c.hi),
                           c.covered ? "1" : "0", csv::fmt(c.expected_searches)});
  }
};

inline RecoveryReport recovery_report(const ModelParams& truth, const PosteriorDraws& draws,
                                      const PosteriorModel& model) {
  const CountsTable& counts = model.counts();
  const int R = model.group_count(), D = model.dept_count();
  if (truth.group_count() != R || truth.dept_count() != D)
    throw std::invalid_argument("recovery_report: truth does not match model shape");

  const std::int64_t n_draws =
      static_cast<std::int64_t>(draws.draws.chains) * draws.draws.iters;
  if (n_draws == 0) throw std::invalid_argument("recovery_report: no draws");
  const std::size_t ncells = static_cast<std::size_t>(R) * D;
  std::vector<std::vector<double>> t_draws(ncells, std::vector<double>(n_draws));
  std::vector<double> v(model.dim());
  std::int64_t k = 0;
  for (int c = 0; c < draws.draws.chains; ++c)
    for (int i = 0; i < draws.draws.iters; ++i, ++k) {
      const double* row = draws.draws.row(c, i);
      v.assign(row, row + model.dim());
      const ModelParams params = model.constrain(v);
      for (std::size_t ix = 0; ix < ncells; ++ix) t_draws[ix][k] = params.t[ix];
    }

  RecoveryReport rep;
  std::int64_t covered = 0;
  for (int g = 0; g < R; ++g)
    for (int d = 0; d < D; ++d) {
      const std::size_t ix = static_cast<std::size_t>(g) * D + d;
      RecoveryCell cell;
      cell.group = counts.groups()[g];
      cell.dept = counts.depts()[d];
      cell.true_t = truth.threshold(g, d);
      auto& s = t_draws[ix];
      double mean = 0.0;
      for (double x : s) mean += x;
      cell.posterior_mean = mean / static_cast<double>(n_draws);
      cell.abs_error = std::fabs(cell.posterior_mean - cell.true_t);
      std::sort(s.begin(), s.end());
      cell.lo = quantile_sorted(s, 0.025);
      cell.hi = quantile_sorted(s, 0.975);
      cell.covered = cell.true_t >= cell.lo && cell.true_t <= cell.hi;
      covered += cell.covered;
      const double phi = link_phi(truth.phi_r[g], truth.phi_d[d]);
      const double lambda = link_lambda(truth.lambda_r[g], truth.lambda_d[d]);
      cell.expected_searches =
          static_cast<double>(counts.cell(g, d).n) *
          search_prob(make_cell_signal(phi, lambda), cell.true_t);
      rep.cells.push_back(std::move(cell));
    }
  rep.coverage = rep.cells.empty()
                     ? 0.0
                     : static_cast<double>(covered) / static_cast<double>(rep.cells.size());
  return rep;
}

}  // namespace threshtest

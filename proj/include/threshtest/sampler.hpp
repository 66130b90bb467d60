#pragma once

// Gradient-based MCMC: multinomial No-U-Turn sampling on a diagonal
// metric, dual-averaging step-size adaptation with an expanding-window
// variance estimate during warmup, and the usual post-hoc diagnostics
// (split R-hat, bulk ESS, pooled summaries).
//
// Chains are seeded independently from the master seed, so results are
// bit-identical for a given (seed, config) regardless of thread count.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "threshtest/csv.hpp"
#include "threshtest/rng.hpp"

namespace threshtest {

struct SamplerConfig {
  int chains = 5;
  int warmup_iters = 2500;
  int sampling_iters = 2500;
  double target_accept = 0.8;
  int max_tree_depth = 10;
  std::uint64_t seed = 0;
  int threads = 0;  // 0: one thread per chain up to hardware concurrency

  void validate() const {
    if (chains < 1 || warmup_iters < 1 || sampling_iters < 1)
      throw std::invalid_argument("SamplerConfig: chains and iterations must be >= 1");
    if (!(target_accept > 0.0) || !(target_accept < 1.0))
      throw std::invalid_argument("SamplerConfig: target_accept must lie in (0,1)");
    if (max_tree_depth < 1)
      throw std::invalid_argument("SamplerConfig: max_tree_depth must be >= 1");
  }
};

struct SamplerInitError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Dense chains x iterations x dimension array, chain-major.
struct DrawsMatrix {
  int chains = 0, iters = 0, dim = 0;
  std::vector<double> data;

  void resize(int c, int n, int d) {
    chains = c;
    iters = n;
    dim = d;
    data.assign(static_cast<std::size_t>(c) * n * d, 0.0);
  }
  double at(int c, int i, int j) const {
    return data[(static_cast<std::size_t>(c) * iters + i) * dim + j];
  }
  double* row(int c, int i) {
    return data.data() + (static_cast<std::size_t>(c) * iters + i) * dim;
  }
  const double* row(int c, int i) const {
    return data.data() + (static_cast<std::size_t>(c) * iters + i) * dim;
  }
};

struct PosteriorDraws {
  DrawsMatrix draws;                // post-warmup unconstrained draws
  std::vector<double> logp;         // chains x iters
  std::vector<double> accept_stat;  // chains x iters
  std::vector<int> divergences;     // per chain
  std::vector<double> step_size;    // per chain, frozen after warmup
  std::vector<std::vector<double>> inv_metric;  // per chain, diagonal

  int total_divergences() const {
    int n = 0;
    for (int d : divergences) n += d;
    return n;
  }
  double logp_at(int c, int i) const { return logp[static_cast<std::size_t>(c) * draws.iters + i]; }
};

namespace nuts {

struct State {
  std::vector<double> q, p, grad;
  double logp = 0.0;
};

inline double kinetic(const std::vector<double>& p, const std::vector<double>& inv_metric) {
  double k = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) k += inv_metric[i] * p[i] * p[i];
  return 0.5 * k;
}

// One leapfrog step of size eps (signed by direction).
template <class Target>
void leapfrog(Target& target, State& s, double eps, const std::vector<double>& inv_metric) {
  const std::size_t n = s.q.size();
  for (std::size_t i = 0; i < n; ++i) s.p[i] += 0.5 * eps * s.grad[i];
  for (std::size_t i = 0; i < n; ++i) s.q[i] += eps * inv_metric[i] * s.p[i];
  s.logp = target(s.q, s.grad);
  for (std::size_t i = 0; i < n; ++i) s.p[i] += 0.5 * eps * s.grad[i];
}

inline double log_sum_exp(double a, double b) {
  const double m = std::max(a, b);
  if (m == -std::numeric_limits<double>::infinity()) return m;
  return m + std::log(std::exp(a - m) + std::exp(b - m));
}

inline bool uturn(const State& left, const State& right,
                  const std::vector<double>& inv_metric) {
  double dot_l = 0.0, dot_r = 0.0;
  for (std::size_t i = 0; i < left.q.size(); ++i) {
    const double dq = right.q[i] - left.q[i];
    dot_l += dq * inv_metric[i] * left.p[i];
    dot_r += dq * inv_metric[i] * right.p[i];
  }
  return dot_l < 0.0 || dot_r < 0.0;
}

struct Tree {
  State left, right;
  std::vector<double> q_prop;
  double logp_prop = 0.0;
  double log_w = -std::numeric_limits<double>::infinity();
  double sum_accept = 0.0;
  int n_leapfrog = 0;
  bool diverged = false;
  bool turning = false;
};

inline constexpr double kDivergenceEnergy = 1000.0;

template <class Target>
Tree build_tree(Target& target, int depth, const State& from, int dir, double eps,
                double h0, const std::vector<double>& inv_metric, CounterRng& rng) {
  if (depth == 0) {
    Tree t;
    t.left = from;
    leapfrog(target, t.left, dir * eps, inv_metric);
    const double h = -t.left.logp + kinetic(t.left.p, inv_metric);
    const double dh = h0 - h;  // log multinomial weight
    t.diverged = !std::isfinite(h) || (h - h0) > kDivergenceEnergy;
    t.log_w = t.diverged ? -std::numeric_limits<double>::infinity() : dh;
    t.sum_accept = std::isfinite(dh) ? std::min(1.0, std::exp(dh)) : 0.0;
    t.n_leapfrog = 1;
    t.right = t.left;
    t.q_prop = t.left.q;
    t.logp_prop = t.left.logp;
    return t;
  }
  Tree t1 = build_tree(target, depth - 1, from, dir, eps, h0, inv_metric, rng);
  if (t1.diverged || t1.turning) return t1;
  Tree t2 = build_tree(target, depth - 1, dir > 0 ? t1.right : t1.left, dir, eps, h0,
                       inv_metric, rng);
  t1.n_leapfrog += t2.n_leapfrog;
  t1.sum_accept += t2.sum_accept;
  if (t2.diverged || t2.turning) {
    t1.diverged = t2.diverged;
    t1.turning = t2.turning;
    return t1;
  }
  const double log_w = log_sum_exp(t1.log_w, t2.log_w);
  if (std::log(rng.uniform()) < t2.log_w - log_w) {
    t1.q_prop = std::move(t2.q_prop);
    t1.logp_prop = t2.logp_prop;
  }
  t1.log_w = log_w;
  if (dir > 0)
    t1.right = std::move(t2.right);
  else
    t1.left = std::move(t2.left);
  t1.turning = uturn(t1.left, t1.right, inv_metric);
  return t1;
}

struct Transition {
  double accept_stat = 0.0;
  bool diverged = false;
};

template <class Target>
Transition transition(Target& target, State& s, double eps, int max_depth,
                      const std::vector<double>& inv_metric, CounterRng& rng) {
  const std::size_t n = s.q.size();
  for (std::size_t i = 0; i < n; ++i)
    s.p[i] = rng.normal() / std::sqrt(inv_metric[i]);
  const double h0 = -s.logp + kinetic(s.p, inv_metric);

  State left = s, right = s;
  std::vector<double> q_prop = s.q;
  double logp_prop = s.logp;
  double log_w = 0.0;  // weight of the root, relative to itself
  double sum_accept = 0.0;
  int n_leapfrog = 0;
  Transition result;

  for (int depth = 0; depth < max_depth; ++depth) {
    const int dir = rng.bernoulli(0.5) ? 1 : -1;
    Tree sub = build_tree(target, depth, dir > 0 ? right : left, dir, eps, h0,
                          inv_metric, rng);
    sum_accept += sub.sum_accept;
    n_leapfrog += sub.n_leapfrog;
    if (sub.diverged) {
      result.diverged = true;
      break;
    }
    if (sub.turning) break;
    // biased progressive sampling toward the new subtree
    if (std::log(rng.uniform()) < sub.log_w - log_w) {
      q_prop = std::move(sub.q_prop);
      logp_prop = sub.logp_prop;
    }
    log_w = log_sum_exp(log_w, sub.log_w);
    if (dir > 0)
      right = std::move(sub.right);
    else
      left = std::move(sub.left);
    if (uturn(left, right, inv_metric)) break;
  }

  s.q = std::move(q_prop);
  s.logp = target(s.q, s.grad);
  result.accept_stat = n_leapfrog > 0 ? sum_accept / n_leapfrog : 0.0;
  return result;
}

template <class Target>
double find_reasonable_epsilon(Target& target, const State& init,
                               const std::vector<double>& inv_metric, CounterRng& rng) {
  double eps = 1.0;
  State s = init;
  for (std::size_t i = 0; i < s.p.size(); ++i)
    s.p[i] = rng.normal() / std::sqrt(inv_metric[i]);
  const double h0 = -s.logp + kinetic(s.p, inv_metric);
  State trial = s;
  leapfrog(target, trial, eps, inv_metric);
  double h1 = -trial.logp + kinetic(trial.p, inv_metric);
  double ratio = std::exp(h0 - h1);
  const double dir = (std::isfinite(ratio) && ratio > 0.5) ? 1.0 : -1.0;
  for (int iter = 0; iter < 100; ++iter) {
    if (dir > 0 ? ratio <= 0.5 : ratio >= 0.5) break;
    eps *= dir > 0 ? 2.0 : 0.5;
    if (eps > 1e7 || eps < 1e-10) break;
    trial = s;
    leapfrog(target, trial, eps, inv_metric);
    h1 = -trial.logp + kinetic(trial.p, inv_metric);
    ratio = std::exp(h0 - h1);
    if (!std::isfinite(ratio)) ratio = 0.0;
  }
  return eps;
}

struct DualAveraging {
  double delta = 0.8;
  double gamma = 0.05, t0 = 10.0, kappa = 0.75;
  double mu = 0.0, log_eps = 0.0, log_eps_bar = 0.0, h_bar = 0.0;
  int t = 0;

  void restart(double eps) {
    mu = std::log(10.0 * eps);
    log_eps = std::log(eps);
    log_eps_bar = log_eps;
    h_bar = 0.0;
    t = 0;
  }
  void update(double accept) {
    ++t;
    const double w = 1.0 / (t + t0);
    h_bar = (1.0 - w) * h_bar + w * (delta - accept);
    log_eps = mu - std::sqrt(static_cast<double>(t)) / gamma * h_bar;
    const double eta = std::pow(static_cast<double>(t), -kappa);
    log_eps_bar = eta * log_eps + (1.0 - eta) * log_eps_bar;
  }
  double eps() const { return std::exp(log_eps); }
  double eps_averaged() const { return std::exp(log_eps_bar); }
};

struct Welford {
  std::int64_t n = 0;
  std::vector<double> mean, m2;

  void reset(std::size_t dim) {
    n = 0;
    mean.assign(dim, 0.0);
    m2.assign(dim, 0.0);
  }
  void add(const std::vector<double>& x) {
    ++n;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double d = x[i] - mean[i];
      mean[i] += d / static_cast<double>(n);
      m2[i] += d * (x[i] - mean[i]);
    }
  }
  // Shrunk toward a small identity, as is standard for warmup estimates.
  std::vector<double> regularized_variance() const {
    std::vector<double> v(mean.size(), 1.0);
    if (n < 2) return v;
    const double w = static_cast<double>(n) / (n + 5.0);
    for (std::size_t i = 0; i < v.size(); ++i)
      v[i] = w * (m2[i] / (n - 1.0)) + 1e-3 * (1.0 - w);
    return v;
  }
};

// Warmup layout: a fast step-size phase, expanding variance-estimation
// windows, then a final fast phase.
struct AdaptSchedule {
  int init_len, term_len;
  std::vector<int> window_ends;  // iteration index just after each window

  explicit AdaptSchedule(int warmup) {
    init_len = std::max(1, static_cast<int>(0.15 * warmup));
    term_len = std::max(1, static_cast<int>(0.10 * warmup));
    if (init_len + term_len >= warmup) {
      init_len = std::max(1, warmup / 2);
      term_len = std::max(0, warmup - init_len);
      return;
    }
    const int middle_end = warmup - term_len;
    int start = init_len, size = 25;
    while (start < middle_end) {
      int end = start + size;
      if (end + 2 * size > middle_end) end = middle_end;
      window_ends.push_back(std::min(end, middle_end));
      start = window_ends.back();
      size *= 2;
    }
  }
};

}  // namespace nuts

// Runs config.chains independent NUTS chains against the target
// log-density, which must be callable as
//   double target(const std::vector<double>& q, std::vector<double>& grad)
// and safe for concurrent invocation.
template <class Target>
PosteriorDraws sample(Target&& target, int dim, const SamplerConfig& config) {
  config.validate();
  if (dim < 1) throw std::invalid_argument("sample: dimension must be >= 1");

  PosteriorDraws out;
  out.draws.resize(config.chains, config.sampling_iters, dim);
  out.logp.assign(static_cast<std::size_t>(config.chains) * config.sampling_iters, 0.0);
  out.accept_stat.assign(static_cast<std::size_t>(config.chains) * config.sampling_iters, 0.0);
  out.divergences.assign(config.chains, 0);
  out.step_size.assign(config.chains, 0.0);
  out.inv_metric.assign(config.chains, std::vector<double>(dim, 1.0));

  std::vector<std::string> failures(config.chains);

  auto run_chain = [&](int chain) {
    try {
      CounterRng rng(config.seed, static_cast<std::uint64_t>(chain));
      nuts::State s;
      s.q.assign(dim, 0.0);
      s.p.assign(dim, 0.0);
      s.grad.assign(dim, 0.0);

      bool ok = false;
      const double jitter_sd = std::sqrt(0.1);
      for (int attempt = 0; attempt < 100 && !ok; ++attempt) {
        for (int i = 0; i < dim; ++i) s.q[i] = jitter_sd * rng.normal();
        s.logp = target(s.q, s.grad);
        ok = std::isfinite(s.logp);
        for (int i = 0; i < dim && ok; ++i) ok = std::isfinite(s.grad[i]);
      }
      if (!ok)
        throw SamplerInitError(
            "sampler: no finite-density start found in 100 attempts");

      std::vector<double> inv_metric(dim, 1.0);
      double eps = nuts::find_reasonable_epsilon(target, s, inv_metric, rng);
      nuts::DualAveraging da;
      da.delta = config.target_accept;
      da.restart(eps);
      nuts::Welford welford;
      welford.reset(dim);

      const nuts::AdaptSchedule schedule(config.warmup_iters);
      std::size_t next_window = 0;

      for (int iter = 0; iter < config.warmup_iters; ++iter) {
        const auto tr =
            nuts::transition(target, s, da.eps(), config.max_tree_depth, inv_metric, rng);
        da.update(tr.accept_stat);
        const bool in_middle =
            iter >= schedule.init_len && next_window < schedule.window_ends.size();
        if (in_middle) {
          welford.add(s.q);
          if (iter + 1 == schedule.window_ends[next_window]) {
            inv_metric = welford.regularized_variance();
            welford.reset(dim);
            ++next_window;
            const double cur = da.eps();
            da.restart(cur);
          }
        }
      }
      eps = da.eps_averaged();

      for (int iter = 0; iter < config.sampling_iters; ++iter) {
        const auto tr =
            nuts::transition(target, s, eps, config.max_tree_depth, inv_metric, rng);
        if (tr.diverged) ++out.divergences[chain];
        std::copy(s.q.begin(), s.q.end(), out.draws.row(chain, iter));
        out.logp[static_cast<std::size_t>(chain) * config.sampling_iters + iter] = s.logp;
        out.accept_stat[static_cast<std::size_t>(chain) * config.sampling_iters + iter] =
            tr.accept_stat;
      }
      out.step_size[chain] = eps;
      out.inv_metric[chain] = inv_metric;
    } catch (const std::exception& e) {
      failures[chain] = e.what();
    }
  };

  int workers = config.threads > 0 ? config.threads
                                   : static_cast<int>(std::thread::hardware_concurrency());
  workers = std::max(1, std::min(workers, config.chains));
  if (workers == 1) {
    for (int c = 0; c < config.chains; ++c) run_chain(c);
  } else {
    std::vector<std::thread> pool;
    std::atomic_int next{0};
    for (int w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (int c = next.fetch_add(1); c < config.chains; c = next.fetch_add(1))
          run_chain(c);
      });
    for (auto& th : pool) th.join();
  }

  for (const auto& f : failures)
    if (!f.empty()) throw SamplerInitError(f);
  return out;
}

// ---- diagnostics ---------------------------------------------------------

namespace detail_diag {

// Half-chain views: each chain split in two, odd middle draw dropped.
struct SplitView {
  const DrawsMatrix* m;
  int n_half;
  int halves;

  explicit SplitView(const DrawsMatrix& mat)
      : m(&mat), n_half(mat.iters / 2), halves(2 * mat.chains) {}

  double at(int half, int i, int j) const {
    const int chain = half / 2;
    const int offset = (half % 2 == 0) ? 0 : m->iters - n_half;
    return m->at(chain, offset + i, j);
  }
};

}  // namespace detail_diag

// Rank-free split potential-scale-reduction per parameter. Requires at
// least two chains and four draws per chain; a parameter constant across
// all draws reports NaN.
inline std::vector<double> split_rhat(const DrawsMatrix& m) {
  if (m.chains < 2 || m.iters < 4)
    throw std::invalid_argument("split_rhat: need >= 2 chains and >= 4 draws per chain");
  detail_diag::SplitView v(m);
  const int n = v.n_half, k = v.halves;
  std::vector<double> rhat(m.dim);
  for (int j = 0; j < m.dim; ++j) {
    std::vector<double> means(k, 0.0), vars(k, 0.0);
    for (int h = 0; h < k; ++h) {
      double mean = 0.0;
      for (int i = 0; i < n; ++i) mean += v.at(h, i, j);
      mean /= n;
      double ss = 0.0;
      for (int i = 0; i < n; ++i) {
        const double d = v.at(h, i, j) - mean;
        ss += d * d;
      }
      means[h] = mean;
      vars[h] = ss / (n - 1);
    }
    double w = 0.0, grand = 0.0;
    for (int h = 0; h < k; ++h) {
      w += vars[h];
      grand += means[h];
    }
    w /= k;
    grand /= k;
    double b_over_n = 0.0;
    for (int h = 0; h < k; ++h) {
      const double d = means[h] - grand;
      b_over_n += d * d;
    }
    b_over_n /= (k - 1);
    if (w == 0.0 && b_over_n == 0.0) {
      rhat[j] = std::numeric_limits<double>::quiet_NaN();
    } else if (w == 0.0) {
      rhat[j] = std::numeric_limits<double>::infinity();
    } else {
      const double var_plus = (n - 1.0) / n * w + b_over_n;
      rhat[j] = std::sqrt(var_plus / w);
    }
  }
  return rhat;
}

// Bulk effective sample size on split chains, Geyer initial monotone
// sequence over paired autocorrelations.
inline std::vector<double> ess_bulk(const DrawsMatrix& m) {
  if (m.chains < 1 || m.iters < 4)
    throw std::invalid_argument("ess_bulk: need >= 4 draws per chain");
  detail_diag::SplitView v(m);
  const int n = v.n_half, k = v.halves;
  std::vector<double> ess(m.dim);
  std::vector<double> x(static_cast<std::size_t>(k) * n);
  std::vector<double> means(k), acov0(k);
  for (int j = 0; j < m.dim; ++j) {
    for (int h = 0; h < k; ++h) {
      double mean = 0.0;
      for (int i = 0; i < n; ++i) {
        const double val = v.at(h, i, j);
        x[static_cast<std::size_t>(h) * n + i] = val;
        mean += val;
      }
      means[h] = mean / n;
    }
    auto acov = [&](int h, int lag) {
      const double* xs = x.data() + static_cast<std::size_t>(h) * n;
      double s = 0.0;
      for (int i = 0; i + lag < n; ++i)
        s += (xs[i] - means[h]) * (xs[i + lag] - means[h]);
      return s / n;  // biased, as usual for ESS
    };
    double w_unbiased = 0.0, mean_acov0 = 0.0;
    for (int h = 0; h < k; ++h) {
      acov0[h] = acov(h, 0);
      mean_acov0 += acov0[h];
      w_unbiased += acov0[h] * n / (n - 1.0);
    }
    mean_acov0 /= k;
    w_unbiased /= k;
    double grand = 0.0;
    for (int h = 0; h < k; ++h) grand += means[h];
    grand /= k;
    double b_over_n = 0.0;
    for (int h = 0; h < k; ++h) {
      const double d = means[h] - grand;
      b_over_n += d * d;
    }
    b_over_n = k > 1 ? b_over_n / (k - 1) : 0.0;
    const double var_plus = (n - 1.0) / n * w_unbiased + b_over_n;
    if (!(var_plus > 0.0)) {
      ess[j] = std::numeric_limits<double>::quiet_NaN();
      continue;
    }
    auto rho = [&](int lag) {
      double mean_acov = 0.0;
      for (int h = 0; h < k; ++h) mean_acov += acov(h, lag);
      mean_acov /= k;
      return 1.0 - (w_unbiased - mean_acov) / var_plus;
    };
    // Geyer pairs: gamma_0 = 1 + rho_1, then rho_{2t} + rho_{2t+1}.
    double tau = 0.0;
    double prev_pair = std::numeric_limits<double>::infinity();
    int lag = 1;
    double pair = 1.0 + rho(1);
    while (pair > 0.0) {
      pair = std::min(pair, prev_pair);
      tau += 2.0 * pair;
      prev_pair = pair;
      lag += 2;
      if (lag + 1 >= n) break;
      pair = rho(lag) + rho(lag + 1);
    }
    tau -= 1.0;
    const double total = static_cast<double>(k) * n;
    tau = std::max(tau, 1.0 / std::log10(total + 10.0));
    ess[j] = std::min(total / tau, total * std::log10(total + 10.0));
  }
  return ess;
}

struct DiagnosticsReport {
  std::vector<double> rhat;
  std::vector<double> ess;
  int divergences = 0;
  std::vector<std::string> warnings;

  double max_rhat() const {
    double m = -std::numeric_limits<double>::infinity();
    for (double r : rhat)
      if (!std::isnan(r)) m = std::max(m, r);
    return m;
  }
  bool converged(double threshold = 1.05) const {
    if (rhat.empty()) return false;
    for (double r : rhat)
      if (std::isnan(r) || r >= threshold) return false;
    return true;
  }
};

inline DiagnosticsReport diagnose(const DrawsMatrix& m, int divergences,
                                  const std::vector<std::string>& names = {}) {
  DiagnosticsReport rep;
  rep.rhat = split_rhat(m);
  rep.ess = ess_bulk(m);
  rep.divergences = divergences;
  for (int j = 0; j < m.dim; ++j)
    if (std::isnan(rep.rhat[j]))
      rep.warnings.push_back("parameter " +
                             (names.empty() ? std::to_string(j) : names[j]) +
                             " is constant across all draws; R-hat undefined");
  return rep;
}

struct SummaryRow {
  double mean = 0.0, sd = 0.0;
  double q025 = 0.0, q50 = 0.0, q975 = 0.0;
};

// Linear-interpolation quantile of a sorted sample.
inline double quantile_sorted(const std::vector<double>& sorted, double p) {
  if (sorted.empty()) throw std::invalid_argument("quantile: empty sample");
  if (sorted.size() == 1) return sorted[0];
  const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
  const std::size_t lo = static_cast<std::size_t>(h);
  if (lo + 1 >= sorted.size()) return sorted.back();
  const double frac = h - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

inline std::vector<SummaryRow> summarize(const DrawsMatrix& m) {
  if (m.chains == 0 || m.iters == 0)
    throw std::invalid_argument("summarize: empty draws");
  std::vector<SummaryRow> rows(m.dim);
  const std::size_t total = static_cast<std::size_t>(m.chains) * m.iters;
  std::vector<double> pool(total);
  for (int j = 0; j < m.dim; ++j) {
    for (int c = 0; c < m.chains; ++c)
      for (int i = 0; i < m.iters; ++i)
        pool[static_cast<std::size_t>(c) * m.iters + i] = m.at(c, i, j);
    double mean = 0.0;
    for (double x : pool) mean += x;
    mean /= static_cast<double>(total);
    double ss = 0.0;
    for (double x : pool) ss += (x - mean) * (x - mean);
    const double sd = total > 1 ? std::sqrt(ss / (static_cast<double>(total) - 1.0)) : 0.0;
    std::sort(pool.begin(), pool.end());
    rows[j] = {mean, sd, quantile_sorted(pool, 0.025), quantile_sorted(pool, 0.5),
               quantile_sorted(pool, 0.975)};
  }
  return rows;
}

// One row per stored draw: chain, iteration, log-density, then the named
// parameters; the header line documents the column names.
inline void write_draws_csv(std::ostream& out, const DrawsMatrix& m,
                            const std::vector<std::string>& names,
                            const std::vector<double>& logp) {
  if (static_cast<int>(names.size()) != m.dim)
    throw std::invalid_argument("write_draws_csv: name count != dimension");
  out << "chain,iteration,log_density";
  for (const auto& n : names) out << ',' << csv::escape(n);
  out << '\n';
  for (int c = 0; c < m.chains; ++c)
    for (int i = 0; i < m.iters; ++i) {
      out << (c + 1) << ',' << (i + 1) << ','
          << csv::fmt(logp[static_cast<std::size_t>(c) * m.iters + i]);
      const double* row = m.row(c, i);
      for (int j = 0; j < m.dim; ++j) out << ',' << csv::fmt(row[j]);
      out << '\n';
    }
}

}  // namespace threshtest

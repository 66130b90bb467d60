#pragma once

// Test-only oracles, deliberately independent of the library code paths
// they check: adaptive quadrature over the beta density, central finite
// differences, and Monte-Carlo simulation of the generative process
// driven by std::mt19937_64.

#include <cmath>
#include <functional>
#include <random>
#include <stdexcept>
#include <vector>

namespace oracles {

// Adaptive Simpson on [lo, hi].
inline double integrate(const std::function<double(double)>& f, double lo, double hi,
                        double tol = 1e-13, int max_depth = 60) {
  std::function<double(double, double, double, double, double, double, int)> rec =
      [&](double a, double b, double fa, double fb, double fm, double whole,
          int depth) -> double {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    if (depth <= 0 || std::fabs(left + right - whole) <= 15.0 * tol)
      return left + right + (left + right - whole) / 15.0;
    return rec(a, m, fa, fm, flm, left, depth - 1) +
           rec(m, b, fm, fb, frm, right, depth - 1);
  };
  const double fa = f(lo), fb = f(hi), fm = f(0.5 * (lo + hi));
  const double whole = (hi - lo) / 6.0 * (fa + 4.0 * fm + fb);
  return rec(lo, hi, fa, fb, fm, whole, max_depth);
}

inline double beta_pdf(double x, double a, double b) {
  if (x <= 0.0 || x >= 1.0) return 0.0;
  return std::exp((a - 1.0) * std::log(x) + (b - 1.0) * std::log1p(-x) -
                  (std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b)));
}

// Regularized incomplete beta by quadrature of the density.
inline double reg_inc_beta_quad(double x, double a, double b, double tol = 1e-13) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  // integrate over the smaller tail for accuracy
  if (x < 0.5) return integrate([&](double t) { return beta_pdf(t, a, b); }, 0.0, x, tol);
  return 1.0 - integrate([&](double t) { return beta_pdf(t, a, b); }, x, 1.0, tol);
}

inline double central_diff(const std::function<double(double)>& f, double x,
                           double h = 1e-6) {
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

struct McEstimate {
  double search_rate = 0.0, search_se = 0.0;
  double hit_rate = 0.0, hit_se = 0.0;
  long long searches = 0;
};

// Full generative simulation: p ~ beta(a,b); search iff p >= t;
// hit ~ Bernoulli(p) given a search.
inline McEstimate mc_search_hit(double phi, double lambda, double t, long long n,
                                std::mt19937_64& rng) {
  const double a = phi * lambda, b = (1.0 - phi) * lambda;
  std::gamma_distribution<double> ga(a, 1.0), gb(b, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  long long searches = 0, hits = 0;
  for (long long i = 0; i < n; ++i) {
    const double x = ga(rng), y = gb(rng);
    const double p = x / (x + y);
    if (p >= t) {
      ++searches;
      if (unif(rng) < p) ++hits;
    }
  }
  McEstimate e;
  e.searches = searches;
  e.search_rate = static_cast<double>(searches) / static_cast<double>(n);
  e.search_se = std::sqrt(e.search_rate * (1.0 - e.search_rate) / static_cast<double>(n));
  if (searches > 0) {
    e.hit_rate = static_cast<double>(hits) / static_cast<double>(searches);
    e.hit_se = std::sqrt(std::max(e.hit_rate * (1.0 - e.hit_rate), 1e-12) /
                         static_cast<double>(searches));
  }
  return e;
}

// Conditional-mean estimate of E[p | p >= t]: mean and SE of accepted draws.
inline McEstimate mc_conditional_mean(double phi, double lambda, double t, long long n,
                                      std::mt19937_64& rng) {
  const double a = phi * lambda, b = (1.0 - phi) * lambda;
  std::gamma_distribution<double> ga(a, 1.0), gb(b, 1.0);
  long long searches = 0;
  double sum = 0.0, sumsq = 0.0;
  for (long long i = 0; i < n; ++i) {
    const double x = ga(rng), y = gb(rng);
    const double p = x / (x + y);
    if (p >= t) {
      ++searches;
      sum += p;
      sumsq += p * p;
    }
  }
  McEstimate e;
  e.searches = searches;
  e.search_rate = static_cast<double>(searches) / static_cast<double>(n);
  e.search_se = std::sqrt(e.search_rate * (1.0 - e.search_rate) / static_cast<double>(n));
  if (searches > 1) {
    e.hit_rate = sum / static_cast<double>(searches);
    const double var =
        (sumsq - sum * sum / static_cast<double>(searches)) / (static_cast<double>(searches) - 1.0);
    e.hit_se = std::sqrt(std::max(var, 0.0) / static_cast<double>(searches));
  }
  return e;
}

}  // namespace oracles

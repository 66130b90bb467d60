#pragma once

// The generative model of stops, searches and hits. Signal distributions
// are beta(phi, lambda) in mean / total-count form, thresholds sit in
// (0,1), and the observed cell counts are binomial in the implied search
// and hit probabilities. The sampler-facing surface is an unconstrained
// vector with a bijective map to ModelParams; its log density carries all
// change-of-variables terms.

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "threshtest/counts.hpp"
#include "threshtest/dual.hpp"
#include "threshtest/special.hpp"

namespace threshtest {

inline double inv_logit(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

template <std::size_t N>
Dual<N> inv_logit(const Dual<N>& x) {
  Dual<N> r;
  r.val = inv_logit(x.val);
  const double s = r.val * (1.0 - r.val);
  for (std::size_t i = 0; i < N; ++i) r.der[i] = s * x.der[i];
  return r;
}

inline double logit(double p) { return std::log(p) - std::log1p(-p); }

// Cell mean on the logit scale: group effect plus department effect.
inline double link_phi(double phi_r, double phi_d) { return inv_logit(phi_r + phi_d); }

// Cell concentration on the log scale; the exponent is clamped so the
// sampler never produces infinite lambda.
inline constexpr double kLambdaExpMin = -20.0;
inline constexpr double kLambdaExpMax = 20.0;

inline double link_lambda(double lambda_r, double lambda_d) {
  double s = lambda_r + lambda_d;
  if (s < kLambdaExpMin) s = kLambdaExpMin;
  if (s > kLambdaExpMax) s = kLambdaExpMax;
  return std::exp(s);
}

// Beta signal in mean / total-count form, plus the tilted mean that the
// hit-rate identity uses.
template <class S>
struct CellSignalT {
  S phi;
  S lambda;
  S mu;
};

using CellSignal = CellSignalT<double>;

template <class S>
CellSignalT<S> make_cell_signal(const S& phi, const S& lambda) {
  if (!(value_of(phi) > 0.0) || !(value_of(phi) < 1.0))
    throw std::domain_error("make_cell_signal: requires 0 < phi < 1");
  if (!(value_of(lambda) > 0.0))
    throw std::domain_error("make_cell_signal: requires lambda > 0");
  return {phi, lambda, (phi * lambda + 1.0) / (lambda + 1.0)};
}

inline CellSignal make_cell_signal(double phi, double lambda) {
  return make_cell_signal<double>(phi, lambda);
}

// P(signal >= t) = 1 - I_t(phi*lambda, (1-phi)*lambda), evaluated through
// the complement so thresholds deep in the upper tail stay accurate.
template <class S>
S search_prob(const CellSignalT<S>& cell, const S& t) {
  const S a = cell.phi * cell.lambda;
  const S b = cell.lambda - a;
  return reg_inc_beta_pair(t, a, b).second;
}

inline double search_prob(const CellSignal& cell, double t) {
  return search_prob<double>(cell, t);
}

// E[signal | signal >= t]; switches to log space when the search
// probability underflows toward zero.
template <class S>
S hit_prob(const CellSignalT<S>& cell, const S& t) {
  const S a = cell.phi * cell.lambda;
  const S b = cell.lambda - a;
  const S denom = reg_inc_beta_pair(t, a, b).second;
  if (value_of(denom) < 1e-300)
    throw std::domain_error("hit_prob: degenerate cell, search probability underflows");
  const S numer = reg_inc_beta_pair(t, a + 1.0, b).second;
  if (value_of(denom) < 1e-12)
    return exp(log(cell.phi) + log(numer) - log(denom));
  return cell.phi * numer / denom;
}

inline double hit_prob(const CellSignal& cell, double t) {
  return hit_prob<double>(cell, t);
}

struct ModelParams {
  std::vector<double> phi_r, lambda_r;  // per group, logit/log scale
  std::vector<double> phi_d, lambda_d;  // per department, reference entries 0
  std::vector<double> t;                // thresholds, row-major group*D + dept
  double mu_phi = 0.0, sigma_phi = 1.0;
  double mu_lambda = 0.0, sigma_lambda = 1.0;
  std::vector<double> mu_t, sigma_t;  // per group
  int ref_dept = 0;

  int group_count() const { return static_cast<int>(phi_r.size()); }
  int dept_count() const { return static_cast<int>(phi_d.size()); }
  double threshold(int g, int d) const { return t[static_cast<std::size_t>(g) * phi_d.size() + d]; }
  double& threshold(int g, int d) { return t[static_cast<std::size_t>(g) * phi_d.size() + d]; }

  void validate() const {
    const std::size_t R = phi_r.size(), D = phi_d.size();
    if (lambda_r.size() != R || mu_t.size() != R || sigma_t.size() != R ||
        lambda_d.size() != D || t.size() != R * D)
      throw std::invalid_argument("ModelParams: inconsistent dimensions");
    if (ref_dept < 0 || ref_dept >= static_cast<int>(D))
      throw std::invalid_argument("ModelParams: reference department out of range");
    if (phi_d[ref_dept] != 0.0 || lambda_d[ref_dept] != 0.0)
      throw std::invalid_argument("ModelParams: reference department effects must be 0");
    if (!(sigma_phi > 0.0) || !(sigma_lambda > 0.0))
      throw std::invalid_argument("ModelParams: sigmas must be positive");
    for (double s : sigma_t)
      if (!(s > 0.0)) throw std::invalid_argument("ModelParams: sigma_t must be positive");
    for (double x : t)
      if (!(x > 0.0) || !(x < 1.0))
        throw std::invalid_argument("ModelParams: thresholds must lie in (0,1)");
  }
};

namespace detail {

inline constexpr double kLogSqrt2Pi = 0.91893853320467274178;
inline constexpr double kProbClip = 1e-12;

inline double normal_lpdf(double x, double mean, double sd) {
  const double z = (x - mean) / sd;
  return -kLogSqrt2Pi - std::log(sd) - 0.5 * z * z;
}

inline double half_normal_lpdf(double x, double sd) {
  // support x >= 0
  return 0.69314718055994530942 + normal_lpdf(x, 0.0, sd);
}

inline double lchoose(std::int64_t n, std::int64_t k) {
  return std::lgamma(static_cast<double>(n) + 1.0) -
         std::lgamma(static_cast<double>(k) + 1.0) -
         std::lgamma(static_cast<double>(n - k) + 1.0);
}

template <class S>
S clip_lo(const S& p) {
  return value_of(p) < kProbClip ? S(kProbClip) : p;
}

}  // namespace detail

// Sum of binomial log-pmfs over cells given per-cell search and hit
// probabilities. Exactly-degenerate probabilities against incompatible
// counts yield -inf and set the flag; they are not thrown.
inline double log_likelihood_cells(const CountsTable& counts,
                                   const std::vector<double>& p,
                                   const std::vector<double>& q,
                                   bool* degenerate = nullptr) {
  const int R = counts.group_count(), D = counts.dept_count();
  if (degenerate) *degenerate = false;
  double ll = 0.0;
  for (int g = 0; g < R; ++g)
    for (int d = 0; d < D; ++d) {
      const auto& c = counts.cell(g, d);
      if (c.n == 0) continue;
      const std::size_t ix = static_cast<std::size_t>(g) * D + d;
      const double pr = p[ix];
      if ((pr == 0.0 && c.searches > 0) || (pr == 1.0 && c.searches < c.n)) {
        if (degenerate) *degenerate = true;
        return -std::numeric_limits<double>::infinity();
      }
      ll += detail::lchoose(c.n, c.searches);
      if (pr > 0.0) ll += static_cast<double>(c.searches) * std::log(pr);
      if (pr < 1.0) ll += static_cast<double>(c.n - c.searches) * std::log1p(-pr);
      if (c.searches == 0) continue;
      const double qr = q[ix];
      if ((qr == 0.0 && c.hits > 0) || (qr == 1.0 && c.hits < c.searches)) {
        if (degenerate) *degenerate = true;
        return -std::numeric_limits<double>::infinity();
      }
      ll += detail::lchoose(c.searches, c.hits);
      if (qr > 0.0) ll += static_cast<double>(c.hits) * std::log(qr);
      if (qr < 1.0) ll += static_cast<double>(c.searches - c.hits) * std::log1p(-qr);
    }
  return ll;
}

inline void cell_probs(const CountsTable& counts, const ModelParams& params,
                       std::vector<double>& p, std::vector<double>& q) {
  const int R = counts.group_count(), D = counts.dept_count();
  p.assign(static_cast<std::size_t>(R) * D, 0.0);
  q.assign(static_cast<std::size_t>(R) * D, 0.0);
  for (int g = 0; g < R; ++g)
    for (int d = 0; d < D; ++d) {
      const double phi = link_phi(params.phi_r[g], params.phi_d[d]);
      const double lambda = link_lambda(params.lambda_r[g], params.lambda_d[d]);
      const CellSignal cell = make_cell_signal(phi, lambda);
      const double t = params.threshold(g, d);
      const std::size_t ix = static_cast<std::size_t>(g) * D + d;
      p[ix] = search_prob(cell, t);
      q[ix] = p[ix] < 1e-300 ? 0.0 : hit_prob(cell, t);
    }
}

inline double log_likelihood(const CountsTable& counts, const ModelParams& params,
                             bool* degenerate = nullptr) {
  params.validate();
  std::vector<double> p, q;
  cell_probs(counts, params, p, q);
  return log_likelihood_cells(counts, p, q, degenerate);
}

// Prior over the constrained parameters exactly as the hierarchy states
// it: N(0,2) on group effects and hyper-locations, half-N(0,2) on scales,
// N(mu, sigma) on non-reference department effects, and N(mu_t, sigma_t)
// on each logit threshold. Transform Jacobians are not included here.
inline double log_prior(const ModelParams& params) {
  params.validate();
  const int R = params.group_count(), D = params.dept_count();
  double lp = 0.0;
  for (int g = 0; g < R; ++g) {
    lp += detail::normal_lpdf(params.phi_r[g], 0.0, 2.0);
    lp += detail::normal_lpdf(params.lambda_r[g], 0.0, 2.0);
    lp += detail::normal_lpdf(params.mu_t[g], 0.0, 2.0);
    lp += detail::half_normal_lpdf(params.sigma_t[g], 2.0);
  }
  lp += detail::normal_lpdf(params.mu_phi, 0.0, 2.0);
  lp += detail::normal_lpdf(params.mu_lambda, 0.0, 2.0);
  lp += detail::half_normal_lpdf(params.sigma_phi, 2.0);
  lp += detail::half_normal_lpdf(params.sigma_lambda, 2.0);
  for (int d = 0; d < D; ++d) {
    if (d == params.ref_dept) continue;
    lp += detail::normal_lpdf(params.phi_d[d], params.mu_phi, params.sigma_phi);
    lp += detail::normal_lpdf(params.lambda_d[d], params.mu_lambda, params.sigma_lambda);
  }
  for (int g = 0; g < R; ++g)
    for (int d = 0; d < D; ++d)
      lp += detail::normal_lpdf(logit(params.threshold(g, d)), params.mu_t[g],
                                params.sigma_t[g]);
  return lp;
}

// Unconstrained posterior over a flat vector. Department effects and
// logit thresholds are parameterized non-centrally (standardized offsets
// scaled inside constrain); scales enter through their logs.
class PosteriorModel {
 public:
  explicit PosteriorModel(const CountsTable& counts)
      : counts_(counts),
        R_(counts.group_count()),
        D_(counts.dept_count()),
        ref_(counts.largest_dept()) {
    if (R_ == 0 || D_ == 0) throw std::invalid_argument("PosteriorModel: empty counts table");
    off_phi_r_ = 0;
    off_lambda_r_ = R_;
    off_z_phi_ = 2 * R_;
    off_z_lambda_ = off_z_phi_ + (D_ - 1);
    off_u_ = off_z_lambda_ + (D_ - 1);
    off_mu_phi_ = off_u_ + R_ * D_;
    off_mu_lambda_ = off_mu_phi_ + 1;
    off_mu_t_ = off_mu_lambda_ + 1;
    off_s_phi_ = off_mu_t_ + R_;
    off_s_lambda_ = off_s_phi_ + 1;
    off_s_t_ = off_s_lambda_ + 1;
    dim_ = off_s_t_ + R_;
    // constant pieces of the cell pmfs
    lchoose_search_.resize(static_cast<std::size_t>(R_) * D_);
    lchoose_hit_.resize(static_cast<std::size_t>(R_) * D_);
    for (int g = 0; g < R_; ++g)
      for (int d = 0; d < D_; ++d) {
        const auto& c = counts_.cell(g, d);
        const std::size_t ix = static_cast<std::size_t>(g) * D_ + d;
        lchoose_search_[ix] = c.n > 0 ? detail::lchoose(c.n, c.searches) : 0.0;
        lchoose_hit_[ix] = c.searches > 0 ? detail::lchoose(c.searches, c.hits) : 0.0;
      }
  }

  int dim() const { return dim_; }
  int group_count() const { return R_; }
  int dept_count() const { return D_; }
  int ref_dept() const { return ref_; }
  const CountsTable& counts() const { return counts_; }

  ModelParams constrain(const std::vector<double>& v) const {
    check_size(v);
    ModelParams p;
    p.ref_dept = ref_;
    p.phi_r.assign(v.begin() + off_phi_r_, v.begin() + off_phi_r_ + R_);
    p.lambda_r.assign(v.begin() + off_lambda_r_, v.begin() + off_lambda_r_ + R_);
    p.mu_phi = v[off_mu_phi_];
    p.mu_lambda = v[off_mu_lambda_];
    p.mu_t.assign(v.begin() + off_mu_t_, v.begin() + off_mu_t_ + R_);
    p.sigma_phi = std::exp(v[off_s_phi_]);
    p.sigma_lambda = std::exp(v[off_s_lambda_]);
    p.sigma_t.resize(R_);
    for (int g = 0; g < R_; ++g) p.sigma_t[g] = std::exp(v[off_s_t_ + g]);
    p.phi_d.assign(D_, 0.0);
    p.lambda_d.assign(D_, 0.0);
    for (int d = 0; d < D_; ++d) {
      if (d == ref_) continue;
      const int s = slot(d);
      p.phi_d[d] = p.mu_phi + p.sigma_phi * v[off_z_phi_ + s];
      p.lambda_d[d] = p.mu_lambda + p.sigma_lambda * v[off_z_lambda_ + s];
    }
    p.t.resize(static_cast<std::size_t>(R_) * D_);
    for (int g = 0; g < R_; ++g)
      for (int d = 0; d < D_; ++d)
        p.threshold(g, d) =
            inv_logit(p.mu_t[g] + p.sigma_t[g] * v[off_u_ + static_cast<std::size_t>(g) * D_ + d]);
    return p;
  }

  std::vector<double> unconstrain(const ModelParams& p) const {
    p.validate();
    if (p.group_count() != R_ || p.dept_count() != D_ || p.ref_dept != ref_)
      throw std::invalid_argument("unconstrain: params do not match model shape");
    std::vector<double> v(dim_, 0.0);
    for (int g = 0; g < R_; ++g) {
      v[off_phi_r_ + g] = p.phi_r[g];
      v[off_lambda_r_ + g] = p.lambda_r[g];
      v[off_mu_t_ + g] = p.mu_t[g];
      v[off_s_t_ + g] = std::log(p.sigma_t[g]);
    }
    v[off_mu_phi_] = p.mu_phi;
    v[off_mu_lambda_] = p.mu_lambda;
    v[off_s_phi_] = std::log(p.sigma_phi);
    v[off_s_lambda_] = std::log(p.sigma_lambda);
    for (int d = 0; d < D_; ++d) {
      if (d == ref_) continue;
      const int s = slot(d);
      v[off_z_phi_ + s] = (p.phi_d[d] - p.mu_phi) / p.sigma_phi;
      v[off_z_lambda_ + s] = (p.lambda_d[d] - p.mu_lambda) / p.sigma_lambda;
    }
    for (int g = 0; g < R_; ++g)
      for (int d = 0; d < D_; ++d)
        v[off_u_ + static_cast<std::size_t>(g) * D_ + d] =
            (logit(p.threshold(g, d)) - p.mu_t[g]) / p.sigma_t[g];
    return v;
  }

  // Log of |det d(centered)/d(unconstrained)|: one sigma factor per
  // non-centered coordinate plus the exp transforms of the sigmas.
  double log_jacobian(const std::vector<double>& v) const {
    check_size(v);
    double lj = static_cast<double>(D_) * (v[off_s_phi_] + v[off_s_lambda_]);
    for (int g = 0; g < R_; ++g) lj += static_cast<double>(D_ + 1) * v[off_s_t_ + g];
    return lj;
  }

  double log_posterior(const std::vector<double>& v) const {
    std::vector<double> grad;
    return log_posterior_grad(v, grad);
  }

  // Value and full gradient. The likelihood contribution per cell is
  // differentiated with a three-tangent dual sweep w.r.t. the cell's
  // logit-mean, log-concentration and logit-threshold, then scattered
  // through the non-centered transform; prior and Jacobian gradients are
  // closed-form. Pathological regions are clipped to keep both the value
  // and the gradient finite.
  double log_posterior_grad(const std::vector<double>& v, std::vector<double>& grad) const {
    check_size(v);
    grad.assign(dim_, 0.0);

    const double s_phi = v[off_s_phi_], s_lambda = v[off_s_lambda_];
    const double sigma_phi = std::exp(s_phi), sigma_lambda = std::exp(s_lambda);

    double total = 0.0;
    for (int g = 0; g < R_; ++g) {
      const double mu_t = v[off_mu_t_ + g];
      const double sigma_t = std::exp(v[off_s_t_ + g]);
      for (int d = 0; d < D_; ++d) {
        const auto& c = counts_.cell(g, d);
        if (c.n == 0) continue;
        const int s = d == ref_ ? -1 : slot(d);
        const double z_phi = s < 0 ? 0.0 : v[off_z_phi_ + s];
        const double z_lambda = s < 0 ? 0.0 : v[off_z_lambda_ + s];
        const double eta_phi =
            v[off_phi_r_ + g] + (s < 0 ? 0.0 : v[off_mu_phi_] + sigma_phi * z_phi);
        const double eta_lambda =
            v[off_lambda_r_ + g] + (s < 0 ? 0.0 : v[off_mu_lambda_] + sigma_lambda * z_lambda);
        const double u = v[off_u_ + static_cast<std::size_t>(g) * D_ + d];
        const double ell = mu_t + sigma_t * u;

        double d_ephi, d_elam, d_ell;
        total += cell_loglik_grad(g, d, eta_phi, eta_lambda, ell, d_ephi, d_elam, d_ell);

        grad[off_phi_r_ + g] += d_ephi;
        grad[off_lambda_r_ + g] += d_elam;
        if (s >= 0) {
          grad[off_mu_phi_] += d_ephi;
          grad[off_z_phi_ + s] += sigma_phi * d_ephi;
          grad[off_s_phi_] += sigma_phi * z_phi * d_ephi;
          grad[off_mu_lambda_] += d_elam;
          grad[off_z_lambda_ + s] += sigma_lambda * d_elam;
          grad[off_s_lambda_] += sigma_lambda * z_lambda * d_elam;
        }
        grad[off_u_ + static_cast<std::size_t>(g) * D_ + d] += sigma_t * d_ell;
        grad[off_mu_t_ + g] += d_ell;
        grad[off_s_t_ + g] += sigma_t * u * d_ell;
      }
    }

    total += log_prior(constrain(v)) + log_jacobian(v);

    // prior + Jacobian gradient, unconstrained coordinates
    for (int g = 0; g < R_; ++g) {
      grad[off_phi_r_ + g] += -v[off_phi_r_ + g] / 4.0;
      grad[off_lambda_r_ + g] += -v[off_lambda_r_ + g] / 4.0;
      grad[off_mu_t_ + g] += -v[off_mu_t_ + g] / 4.0;
      const double sigma_t = std::exp(v[off_s_t_ + g]);
      grad[off_s_t_ + g] += 1.0 - sigma_t * sigma_t / 4.0;
    }
    grad[off_mu_phi_] += -v[off_mu_phi_] / 4.0;
    grad[off_mu_lambda_] += -v[off_mu_lambda_] / 4.0;
    grad[off_s_phi_] += 1.0 - sigma_phi * sigma_phi / 4.0;
    grad[off_s_lambda_] += 1.0 - sigma_lambda * sigma_lambda / 4.0;
    for (int d = 0; d < D_; ++d) {
      if (d == ref_) continue;
      const int s = slot(d);
      grad[off_z_phi_ + s] += -v[off_z_phi_ + s];
      grad[off_z_lambda_ + s] += -v[off_z_lambda_ + s];
    }
    for (std::size_t i = 0; i < static_cast<std::size_t>(R_) * D_; ++i)
      grad[off_u_ + i] += -v[off_u_ + i];

    if (!std::isfinite(total)) {
      total = -1e300;
      grad.assign(dim_, 0.0);
    }
    return total;
  }

  std::vector<std::string> param_names() const {
    std::vector<std::string> names;
    const auto& gl = counts_.groups();
    const auto& dl = counts_.depts();
    for (int g = 0; g < R_; ++g) names.push_back("phi_r[" + gl[g] + "]");
    for (int g = 0; g < R_; ++g) names.push_back("lambda_r[" + gl[g] + "]");
    for (int d = 0; d < D_; ++d) names.push_back("phi_d[" + dl[d] + "]");
    for (int d = 0; d < D_; ++d) names.push_back("lambda_d[" + dl[d] + "]");
    for (int g = 0; g < R_; ++g)
      for (int d = 0; d < D_; ++d) names.push_back("t[" + gl[g] + "," + dl[d] + "]");
    names.push_back("mu_phi");
    names.push_back("sigma_phi");
    names.push_back("mu_lambda");
    names.push_back("sigma_lambda");
    for (int g = 0; g < R_; ++g) names.push_back("mu_t[" + gl[g] + "]");
    for (int g = 0; g < R_; ++g) names.push_back("sigma_t[" + gl[g] + "]");
    return names;
  }

  // Constrained parameters flattened in param_names() order.
  std::vector<double> constrained_row(const ModelParams& p) const {
    std::vector<double> row;
    row.reserve(param_names_count());
    row.insert(row.end(), p.phi_r.begin(), p.phi_r.end());
    row.insert(row.end(), p.lambda_r.begin(), p.lambda_r.end());
    row.insert(row.end(), p.phi_d.begin(), p.phi_d.end());
    row.insert(row.end(), p.lambda_d.begin(), p.lambda_d.end());
    row.insert(row.end(), p.t.begin(), p.t.end());
    row.push_back(p.mu_phi);
    row.push_back(p.sigma_phi);
    row.push_back(p.mu_lambda);
    row.push_back(p.sigma_lambda);
    row.insert(row.end(), p.mu_t.begin(), p.mu_t.end());
    row.insert(row.end(), p.sigma_t.begin(), p.sigma_t.end());
    return row;
  }

  std::size_t param_names_count() const {
    return static_cast<std::size_t>(2 * R_ + 2 * D_ + R_ * D_ + 4 + 2 * R_);
  }

 private:
  int slot(int d) const { return d < ref_ ? d : d - 1; }

  void check_size(const std::vector<double>& v) const {
    if (static_cast<int>(v.size()) != dim_)
      throw std::invalid_argument("PosteriorModel: vector has wrong dimension");
  }

  double cell_loglik_grad(int g, int d, double eta_phi, double eta_lambda, double ell,
                          double& d_ephi, double& d_elam, double& d_ell) const {
    using D3 = Dual<3>;
    const auto& c = counts_.cell(g, d);
    const std::size_t ix = static_cast<std::size_t>(g) * D_ + d;

    const D3 ephi = D3::seed(eta_phi, 0);
    D3 elam = D3::seed(eta_lambda, 1);
    if (eta_lambda < kLambdaExpMin) elam = D3(kLambdaExpMin);
    if (eta_lambda > kLambdaExpMax) elam = D3(kLambdaExpMax);
    const D3 l = D3::seed(ell, 2);

    const D3 phi = inv_logit(ephi);
    const D3 lambda = exp(elam);
    const D3 t = inv_logit(l);
    const D3 a = phi * lambda;
    const D3 b = lambda - a;

    const auto pr = reg_inc_beta_pair(t, a, b);
    const D3 p_search = detail::clip_lo(pr.second);
    const D3 p_stay = detail::clip_lo(pr.first);

    D3 ll = D3(lchoose_search_[ix]) + static_cast<double>(c.searches) * log(p_search) +
            static_cast<double>(c.n - c.searches) * log(p_stay);

    if (c.searches > 0) {
      D3 q(0.5);  // placeholder for fully-degenerate cells
      if (value_of(pr.second) >= 1e-300) {
        const D3 numer = reg_inc_beta_pair(t, a + 1.0, b).second;
        if (value_of(pr.second) < 1e-12) {
          q = value_of(numer) < 1e-300 ? D3(0.5)
                                       : exp(log(phi) + log(numer) - log(pr.second));
        } else {
          q = phi * numer / pr.second;
        }
      }
      const D3 q_hit = detail::clip_lo(q);
      const D3 q_miss = detail::clip_lo(1.0 - q);
      ll = ll + D3(lchoose_hit_[ix]) + static_cast<double>(c.hits) * log(q_hit) +
           static_cast<double>(c.searches - c.hits) * log(q_miss);
    }

    d_ephi = ll.der[0];
    d_elam = ll.der[1];
    d_ell = ll.der[2];
    return ll.val;
  }

  CountsTable counts_;
  int R_, D_, ref_;
  int off_phi_r_, off_lambda_r_, off_z_phi_, off_z_lambda_, off_u_;
  int off_mu_phi_, off_mu_lambda_, off_mu_t_, off_s_phi_, off_s_lambda_, off_s_t_;
  int dim_ = 0;
  std::vector<double> lchoose_search_, lchoose_hit_;
};

}  // namespace threshtest

#pragma once

// Forward-mode dual numbers with a fixed number of tangent slots.
// Dual<N> carries a value and N partial derivatives through arbitrary
// compositions of the smooth operations below; the chain rule is applied
// per operation, so the tangents stay exact up to rounding.

#include <array>
#include <cmath>
#include <cstddef>

namespace threshtest {

template <std::size_t N>
struct Dual {
  double val = 0.0;
  std::array<double, N> der{};

  constexpr Dual() = default;
  constexpr Dual(double v) : val(v) {}  // constant: all tangents zero

  // Value seeded as the i-th independent input (d/dx_i = 1).
  static constexpr Dual seed(double v, std::size_t i) {
    Dual d(v);
    d.der[i] = 1.0;
    return d;
  }

  Dual& operator+=(const Dual& o) {
    val += o.val;
    for (std::size_t i = 0; i < N; ++i) der[i] += o.der[i];
    return *this;
  }
  Dual& operator-=(const Dual& o) {
    val -= o.val;
    for (std::size_t i = 0; i < N; ++i) der[i] -= o.der[i];
    return *this;
  }
  Dual& operator*=(const Dual& o) {
    for (std::size_t i = 0; i < N; ++i) der[i] = der[i] * o.val + val * o.der[i];
    val *= o.val;
    return *this;
  }
  Dual& operator/=(const Dual& o) {
    const double inv = 1.0 / o.val;
    for (std::size_t i = 0; i < N; ++i) der[i] = (der[i] - val * inv * o.der[i]) * inv;
    val *= inv;
    return *this;
  }
};

inline constexpr double value_of(double x) { return x; }
template <std::size_t N>
constexpr double value_of(const Dual<N>& x) { return x.val; }

template <std::size_t N>
Dual<N> operator-(const Dual<N>& a) {
  Dual<N> r;
  r.val = -a.val;
  for (std::size_t i = 0; i < N; ++i) r.der[i] = -a.der[i];
  return r;
}

template <std::size_t N>
Dual<N> operator+(Dual<N> a, const Dual<N>& b) { return a += b; }
template <std::size_t N>
Dual<N> operator+(Dual<N> a, double b) { a.val += b; return a; }
template <std::size_t N>
Dual<N> operator+(double a, Dual<N> b) { b.val += a; return b; }

template <std::size_t N>
Dual<N> operator-(Dual<N> a, const Dual<N>& b) { return a -= b; }
template <std::size_t N>
Dual<N> operator-(Dual<N> a, double b) { a.val -= b; return a; }
template <std::size_t N>
Dual<N> operator-(double a, const Dual<N>& b) { return -b + a; }

template <std::size_t N>
Dual<N> operator*(Dual<N> a, const Dual<N>& b) { return a *= b; }
template <std::size_t N>
Dual<N> operator*(Dual<N> a, double b) {
  a.val *= b;
  for (std::size_t i = 0; i < N; ++i) a.der[i] *= b;
  return a;
}
template <std::size_t N>
Dual<N> operator*(double a, Dual<N> b) { return b * a; }

template <std::size_t N>
Dual<N> operator/(Dual<N> a, const Dual<N>& b) { return a /= b; }
template <std::size_t N>
Dual<N> operator/(Dual<N> a, double b) { return a * (1.0 / b); }
template <std::size_t N>
Dual<N> operator/(double a, const Dual<N>& b) { return Dual<N>(a) /= b; }

template <std::size_t N>
Dual<N> exp(const Dual<N>& a) {
  Dual<N> r;
  r.val = std::exp(a.val);
  for (std::size_t i = 0; i < N; ++i) r.der[i] = r.val * a.der[i];
  return r;
}

template <std::size_t N>
Dual<N> log(const Dual<N>& a) {
  Dual<N> r;
  r.val = std::log(a.val);
  const double inv = 1.0 / a.val;
  for (std::size_t i = 0; i < N; ++i) r.der[i] = inv * a.der[i];
  return r;
}

template <std::size_t N>
Dual<N> log1p(const Dual<N>& a) {
  Dual<N> r;
  r.val = std::log1p(a.val);
  const double inv = 1.0 / (1.0 + a.val);
  for (std::size_t i = 0; i < N; ++i) r.der[i] = inv * a.der[i];
  return r;
}

template <std::size_t N>
Dual<N> sqrt(const Dual<N>& a) {
  Dual<N> r;
  r.val = std::sqrt(a.val);
  const double s = 0.5 / r.val;
  for (std::size_t i = 0; i < N; ++i) r.der[i] = s * a.der[i];
  return r;
}

// pow restricted to positive base, the only case the model visits.
template <std::size_t N>
Dual<N> pow(const Dual<N>& a, double p) {
  Dual<N> r;
  r.val = std::pow(a.val, p);
  const double s = p * std::pow(a.val, p - 1.0);
  for (std::size_t i = 0; i < N; ++i) r.der[i] = s * a.der[i];
  return r;
}
template <std::size_t N>
Dual<N> pow(const Dual<N>& a, const Dual<N>& b) { return exp(b * log(a)); }
template <std::size_t N>
Dual<N> pow(double a, const Dual<N>& b) { return exp(b * std::log(a)); }

}  // namespace threshtest

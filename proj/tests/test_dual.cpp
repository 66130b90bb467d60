#include "threshtest/dual.hpp"

#include <cmath>
#include <random>

#include <catch2/catch_amalgamated.hpp>

#include "oracles.hpp"

using threshtest::Dual;

namespace {

// Composites exercising every smooth operation the model uses.
template <class S>
S composite_a(const S& x, const S& y) {
  return exp(x * y) / (log(x + 3.0) + 1.5) + pow(x, 2.7) - y / x;
}

template <class S>
S composite_b(const S& x, const S& y) {
  return log1p(exp(-x)) * sqrt(y + 2.0) + pow(y, x) + (x - y) * (x + y);
}

template <class S>
S composite_c(const S& x, const S& y) {
  return 1.0 / (1.0 + exp(-(x * 0.7 - y))) + log(x * x + y * y + 0.3) - 2.0 * x;
}

}  // namespace

TEST_CASE("dual arithmetic follows the chain rule on composites", "[dual]") {
  std::mt19937_64 rng(20240811);
  std::uniform_real_distribution<double> ux(0.4, 3.0), uy(0.2, 2.0);
  for (int trial = 0; trial < 200; ++trial) {
    const double x = ux(rng), y = uy(rng);
    auto check = [&](auto&& f) {
      const Dual<2> r = f(Dual<2>::seed(x, 0), Dual<2>::seed(y, 1));
      const double fx = oracles::central_diff(
          [&](double v) { return f(v, y); }, x);
      const double fy = oracles::central_diff(
          [&](double v) { return f(x, v); }, y);
      REQUIRE(r.val == Catch::Approx(f(x, y)).epsilon(1e-12));
      REQUIRE(r.der[0] == Catch::Approx(fx).epsilon(1e-6).margin(1e-8));
      REQUIRE(r.der[1] == Catch::Approx(fy).epsilon(1e-6).margin(1e-8));
    };
    check([](auto a, auto b) { return composite_a(a, b); });
    check([](auto a, auto b) { return composite_b(a, b); });
    check([](auto a, auto b) { return composite_c(a, b); });
  }
}

TEST_CASE("dual partials stay fixed-length through computation", "[dual]") {
  const Dual<3> x = Dual<3>::seed(1.3, 0);
  const Dual<3> y = Dual<3>::seed(0.4, 2);
  const Dual<3> z = exp(x * y) - log(x) / y;
  REQUIRE(z.der.size() == 3);
  REQUIRE(z.der[1] == 0.0);  // untouched slot stays zero
}

TEST_CASE("constants carry zero tangents", "[dual]") {
  const Dual<2> c(2.5);
  REQUIRE(c.der[0] == 0.0);
  REQUIRE(c.der[1] == 0.0);
  const Dual<2> r = c * Dual<2>::seed(3.0, 0) + 1.0;
  REQUIRE(r.val == 8.5);
  REQUIRE(r.der[0] == 2.5);
  REQUIRE(r.der[1] == 0.0);
}

TEST_CASE("division and unary minus", "[dual]") {
  const Dual<1> x = Dual<1>::seed(2.0, 0);
  const Dual<1> r = -(1.0 / x);  // d/dx (-1/x) = 1/x^2
  REQUIRE(r.val == -0.5);
  REQUIRE(r.der[0] == Catch::Approx(0.25).epsilon(1e-14));
}

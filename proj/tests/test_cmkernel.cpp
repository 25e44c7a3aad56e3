#include <doctest.h>

#include <cmath>
#include <sstream>
#include <vector>

#include "vstate/cmkernel.hpp"
#include "vstate/universal.hpp"

using namespace vstate;

namespace {

std::vector<Measure> builtin_measures() {
  return {Measure::euler(), Measure::gsqg(0.5), Measure::gsqg(0.3), Measure::qgsw(1.0),
          Measure::truncated_low(1.0, 0.0, 0.0, 0.1), Measure::truncated_high(1.0, 0.0, 1.0, 2.0, 1.0)};
}

}  // namespace

TEST_CASE("k0_eval reproduces the planar kernels") {
  const Measure e = Measure::euler();
  for (double t : {0.5, 1.0, 2.0}) CHECK(std::abs(k0_eval(e, t, 0.0) + std::log(t) / (2 * pi)) < 1e-9);
  const double cb = gsqg_c(0.5);
  CHECK(k0_eval(Measure::gsqg(0.5), 1.0, cb) == cb);
  for (double t : {0.3, 2.5}) {
    CHECK(k0_eval(Measure::gsqg(0.5), t, cb) == doctest::Approx(cb * std::pow(t, -0.5)).epsilon(1e-9));
    CHECK(k0_eval(Measure::qgsw(1.0), t, bessel_k(0, 1.0) / (2 * pi)) ==
          doctest::Approx(bessel_k(0, t) / (2 * pi)).epsilon(1e-9));
  }
  CHECK_THROWS_AS(k0_eval(e, 0.0, 0.0), domain_error);
}

TEST_CASE("normalisation point returns c0 exactly") {
  for (const auto& mu : builtin_measures()) CHECK(k0_eval(mu, 1.0, 0.37) == 0.37);
}

TEST_CASE("spectral_integral examples") {
  const Measure e = Measure::euler();
  CHECK(std::abs(spectral_integral([](double x) { return phi_n(3, 0.5 * x); }, e) - 1.0 / 6.0) < 1e-7);
  CHECK(spectral_integral([](double) { return 0.0; }, e) == 0.0);
  const double v = spectral_integral([](double x) { return phi_nb(2, 0.5, x); }, Measure::qgsw(1.0));
  CHECK(v == doctest::Approx(bessel_i(2, 0.5) * bessel_k(2, 1.0)).epsilon(1e-9));
}

TEST_CASE("atoms contribute g(x)/x and g'(0)") {
  Measure mu;
  mu.atoms = {{2.0, 3.0}};
  CHECK(spectral_integral([](double x) { return x * x; }, mu) == doctest::Approx(6.0));
  mu.atoms = {{0.0, 1.5}};
  CHECK(spectral_integral([](double x) { return std::sin(2 * x); }, mu) == doctest::Approx(3.0).epsilon(1e-7));
  // -K0' of an atom at a is mass * e^{-t a}
  mu.atoms = {{0.7, 2.0}};
  CHECK(k0_minus_derivative(mu, 1.3) == doctest::Approx(2.0 * std::exp(-1.3 * 0.7)));
}

TEST_CASE("-K0' is positive and decreasing for every built-in measure") {
  for (const auto& mu : builtin_measures()) {
    double prev = INFINITY;
    for (int i = 0; i <= 25; ++i) {
      const double t = std::pow(10.0, -3.0 + 5.0 * i / 25.0);
      const double d = k0_minus_derivative(mu, t);
      CHECK(d > 0.0);
      CHECK(d < prev);
      prev = d;
      // central differences of K0 itself, where double precision resolves them
      const double h = 1e-3 * t;
      if (d * h < 1e-7 * std::max(1.0, std::abs(k0_eval(mu, t, 0.0)))) continue;
      const double fd = -(k0_eval(mu, t + h, 0.0) - k0_eval(mu, t - h, 0.0)) / (2 * h);
      CHECK(fd == doctest::Approx(d).epsilon(1e-5));
    }
  }
}

TEST_CASE("integrability of K0 near the origin") {
  const double alpha = 0.5;
  for (const auto& mu : builtin_measures()) {
    auto f = [&](double t) { return std::abs(k0_eval(mu, t, 0.0)) * std::pow(t, -alpha + alpha * alpha); };
    // slabs [1e-4^k, 1e-4^(k-1)] contribute geometrically less
    std::vector<double> slab;
    double total = 0.0;
    for (int k = 1; k <= 5; ++k) {
      const double v = integrate(f, std::pow(1e-4, k), std::pow(1e-4, k - 1), 1e-14, 1e-9).value;
      slab.push_back(v);
      total += v;
    }
    for (int k = 2; k < 5; ++k) CHECK(slab[k] < 0.5 * slab[k - 1]);
    CHECK(std::isfinite(total));
    CHECK(total < 1e3);
  }
}

TEST_CASE("mass against 1/(1+x^2) is finite") {
  const double e = spectral_integral([](double x) { return x / (1 + x * x); }, Measure::euler());
  CHECK(e == doctest::Approx(0.25).epsilon(1e-9));
  for (const auto& mu : builtin_measures()) {
    const double v = spectral_integral([](double x) { return x / (1 + x * x); }, mu);
    CHECK(std::isfinite(v));
    CHECK(v > 0.0);
  }
}

TEST_CASE("validate rejects bad measures") {
  CHECK_THROWS_AS(validate(Measure{}), domain_error);
  CHECK_THROWS_AS(validate(Measure::gsqg(1.2)), domain_error);
  CHECK_THROWS_AS(validate(Measure::qgsw(-1.0)), domain_error);
  CHECK_THROWS_AS(validate(Measure::truncated_low(1.0, -1.5, 0.0, 1.0)), domain_error);
  Measure bad;
  bad.atoms = {{1.0, -2.0}};
  CHECK_THROWS_AS(validate(bad), domain_error);
  CHECK_NOTHROW(validate(Measure::euler()));
}

TEST_CASE("measure_from_config") {
  std::istringstream in(
      "[measure]\n"
      "family = truncated-low\n"
      "coef = 2\n"
      "cut = 0.5\n"
      "atoms = 1:0.5, 0:0.25\n");
  const Config cfg = Config::parse(in);
  const Measure mu = measure_from_config(cfg);
  CHECK(mu.density.family == DensityFamily::TruncatedLow);
  CHECK(mu.density.coef == 2.0);
  CHECK(mu.density.cut == 0.5);
  REQUIRE(mu.atoms.size() == 2);
  CHECK(mu.atoms[1].mass == 0.25);
  Config c2;
  c2.set("measure.family", "lognormal");
  CHECK_THROWS_AS(measure_from_config(c2), usage_error);
}

#include <doctest.h>

#include <cmath>
#include <vector>

#include "vstate/dispersion.hpp"

using namespace vstate;

namespace {

std::vector<KernelModel> builtin_models() {
  return {EulerPlane{},      GsqgPlane{0.5},          QgswPlane{1.0},      EulerDisc{2.0},
          GsqgDisc{0.5, 2.0}, QgswDisc{1.0, 2.0},     EulerAnnulus{0.1, 10.0}, EulerExterior{0.2}};
}

// the measure tuned so that V1 - V2 changes sign between b = 0.2 and b = 0.3
CustomConvolution tuned() { return {Measure::truncated_low(1.0, 0.0, 0.0, 0.1), 0.5, 0.0, 0.0}; }

double vieta_residual(const DispersionPoint& d, double om) {
  return om * om - (d.A + d.B) * om + d.A * d.B + d.coupling * d.coupling;
}

}  // namespace

TEST_CASE("spectral_row examples") {
  const SpectralRow r = spectral_row(EulerPlane{}, 4, 0.5);
  CHECK(r.lambda_b == 0.125);
  CHECK(r.lambda_1 == 0.125);
  CHECK(r.lambda_t == 0.0078125);
  CHECK(r.p_b == 0.0);
  CHECK(r.p_t == 0.0);
  CHECK(r.src_lambda == Source::ClosedForm);
  const KernelModel c = CustomConvolution{Measure::euler(), 0.5, 0.0, 0.0};
  for (int n : {1, 4, 9}) {
    const SpectralRow q = spectral_row(c, n, 0.5);
    const SpectralRow e = spectral_row(EulerPlane{}, n, 0.5);
    CHECK(q.src_lambda == Source::Quadrature);
    CHECK(std::abs(q.lambda_b - e.lambda_b) < 1e-7 * e.lambda_b);
    CHECK(std::abs(q.lambda_1 - e.lambda_1) < 1e-7 * e.lambda_1);
    CHECK(std::abs(q.lambda_t - e.lambda_t) < 1e-7 * e.lambda_t);
  }
  const SpectralRow g = spectral_row(QgswPlane{1.0}, 1, 0.5);
  CHECK(g.lambda_t == doctest::Approx(bessel_i(1, 0.5) * bessel_k(1, 1.0)).epsilon(1e-13));
  // forcing the quadrature route reproduces the closed forms
  const SpectralRow f = spectral_row(QgswPlane{1.0}, 3, 0.5, true);
  const SpectralRow h = spectral_row(QgswPlane{1.0}, 3, 0.5);
  CHECK(f.src_lambda == Source::Quadrature);
  CHECK(f.lambda_t == doctest::Approx(h.lambda_t).epsilon(1e-7));
}

TEST_CASE("spectral row invariants") {
  for (const auto& m : builtin_models()) {
    const double b = 0.5;
    SpectralRow prev = spectral_row(m, 1, b);
    for (int n = 2; n <= 12; ++n) {
      const SpectralRow r = spectral_row(m, n, b);
      CHECK(r.lambda_b > 0.0);
      CHECK(r.lambda_t > 0.0);
      CHECK(prev.lambda_b - r.lambda_b > 0.0);
      prev = r;
    }
  }
}

TEST_CASE("lambda~ decays faster than n^-4") {
  for (const KernelModel& m : {KernelModel{EulerPlane{}}, KernelModel{GsqgPlane{0.5}}, KernelModel{QgswPlane{1.0}}})
    for (double b : {0.3, 0.6, 0.9}) {
      // n^4 b^n peaks near n = 4/|log b|; past that the sequence falls
      const int peak = static_cast<int>(std::ceil(4.0 / -std::log(b)));
      double top = 0.0, prev = INFINITY, v = 0.0;
      for (int n = 1; n <= 100; ++n) {
        v = std::pow(n, 4) * spectral_row(m, n, b).lambda_t;
        CHECK(v > 0.0);
        top = std::max(top, v);
        if (n > peak) CHECK(v < prev);
        prev = v;
      }
      CHECK(v < 0.05 * top);
    }
}

TEST_CASE("degenerate and stable points of the Euler plane") {
  const DispersionPoint d3 = dispersion_point(EulerPlane{}, 3, 0.5);
  CHECK(d3.A == doctest::Approx(1.0 / 6.0).epsilon(1e-15));
  CHECK(d3.B == doctest::Approx(5.0 / 24.0).epsilon(1e-15));
  CHECK(std::abs(d3.delta) < 1e-12);
  CHECK(d3.stability == Stability::Degenerate);
  REQUIRE(d3.omega_plus.has_value());
  CHECK(std::abs(*d3.omega_plus - 0.1875) < 1e-12);
  CHECK(std::abs(*d3.omega_minus - 0.1875) < 1e-12);

  const DispersionPoint d4 = dispersion_point(EulerPlane{}, 4, 0.5);
  // Delta = 63/4096, Omega = 3/16 +- sqrt(63)/128
  CHECK(std::abs(d4.delta - 63.0 / 4096.0) < 1e-15);
  CHECK(std::abs(d4.delta - 0.01538086) < 1e-9);
  CHECK(std::abs(*d4.omega_plus - (0.1875 + std::sqrt(63.0) / 128.0)) < 1e-15);
  CHECK(std::abs(*d4.omega_minus - (0.1875 - std::sqrt(63.0) / 128.0)) < 1e-15);
  CHECK(d4.stability == Stability::Stable);

  CHECK(classify(EulerPlane{}, 3, 0.5) == Stability::Degenerate);
  CHECK(classify(EulerPlane{}, 4, 0.5) == Stability::Stable);
  CHECK(classify(EulerPlane{}, 2, 0.5) == Stability::Degenerate);
  CHECK(std::abs(dispersion_point(EulerPlane{}, 2, 0.5).delta) < 1e-15);
  CHECK(classify(EulerPlane{}, 1, 0.5) == Stability::Stable);
  // A - B = b^2/2 = 2 lambda~ at n = 2 for every b
  for (double b : {0.2, 0.7, 0.9}) CHECK(classify(EulerPlane{}, 2, b) == Stability::Degenerate);
  // (3, 0.8): A - B = 1/3 - 0.18 < 2 lambda~ = 0.512/3
  CHECK(classify(EulerPlane{}, 3, 0.8) == Stability::Unstable);
  CHECK_FALSE(dispersion_point(EulerPlane{}, 3, 0.8).omega_plus.has_value());
}

TEST_CASE("roots satisfy the quadratic and Vieta") {
  for (const auto& m : builtin_models())
    for (double b : {0.3, 0.5, 0.8})
      for (int n : {1, 2, 3, 5, 8, 13, 21}) {
        const DispersionPoint d = dispersion_point(m, n, b);
        CHECK(d.delta == doctest::Approx((d.A - d.B) * (d.A - d.B) - 4 * d.coupling * d.coupling).epsilon(1e-14));
        if (!d.omega_plus) {
          CHECK(d.stability == Stability::Unstable);
          continue;
        }
        CHECK(std::abs(vieta_residual(d, *d.omega_plus)) < 1e-9);
        CHECK(std::abs(vieta_residual(d, *d.omega_minus)) < 1e-9);
        if (d.delta > 0) {
          CHECK(std::abs(*d.omega_plus + *d.omega_minus - (d.A + d.B)) < 1e-10);
          CHECK(std::abs(*d.omega_plus * *d.omega_minus - (d.A * d.B + d.coupling * d.coupling)) < 1e-10);
        }
      }
}

TEST_CASE("delta_inf") {
  CHECK(delta_inf(EulerPlane{}, 0.5) == doctest::Approx(0.140625).epsilon(1e-15));
  // Delta_n - Delta_inf = -0.75/n + 1/n^2 for the Euler plane at b = 0.5
  const double g200 = dispersion_point(EulerPlane{}, 200, 0.5).delta - delta_inf(EulerPlane{}, 0.5);
  CHECK(std::abs(g200 - (-0.75 / 200 + 1.0 / (200.0 * 200.0))) < 1e-14);
  CHECK(std::abs(g200) > 1e-3);
  CHECK(std::abs(dispersion_point(EulerPlane{}, 748, 0.5).delta - delta_inf(EulerPlane{}, 0.5)) > 1e-3);
  CHECK(std::abs(dispersion_point(EulerPlane{}, 749, 0.5).delta - delta_inf(EulerPlane{}, 0.5)) < 1e-3);
  const double psi = delta_inf_psi(Measure::euler(), 0.5);
  CHECK(std::abs(psi - delta_inf(EulerPlane{}, 0.5)) < 1e-7);
  const CustomConvolution t = tuned();
  CHECK(std::abs(delta_inf_psi(t.mu, 0.3) - delta_inf(t, 0.3)) < 1e-7);
}

TEST_CASE("Delta_n tends to Delta_inf with a monotone gap") {
  for (const auto& m : builtin_models())
    for (double b : {0.3, 0.7}) {
      const double dinf = delta_inf(m, b);
      double prev = INFINITY;
      for (int n = 30; n <= 60; n += 3) {
        const double g = std::abs(dispersion_point(m, n, b).delta - dinf);
        CHECK(g <= prev);
        prev = g;
      }
      CHECK(std::abs(dispersion_point(m, 120, b).delta - dinf) < prev);
    }
}

TEST_CASE("s_membership") {
  for (double b : {0.15, 0.5, 0.95}) CHECK(s_membership(EulerAnnulus{0.1, 10.0}, b));
  CHECK(s_membership(QgswDisc{1.0, 2.0}, 0.5));
  for (double b : {0.1, 0.5, 0.9}) CHECK(s_membership(EulerPlane{}, b));
  CHECK_THROWS_AS(s_membership(EulerAnnulus{0.3, 10.0}, 0.2), domain_error);

  const CustomConvolution t = tuned();
  auto gap = [&](double b) {
    const auto [v1, v2] = v1_v2(t, b);
    return v1 - v2;
  };
  double lo = 0.2, hi = 0.3;
  REQUIRE(gap(lo) < 0.0);
  REQUIRE(gap(hi) > 0.0);
  for (int it = 0; it < 40; ++it) {
    const double mid = 0.5 * (lo + hi);
    (gap(mid) < 0.0 ? lo : hi) = mid;
  }
  const double bstar = 0.5 * (lo + hi);
  CHECK_FALSE(s_membership(t, bstar, 1e-9));
  CHECK(s_membership(t, 0.1, 1e-9));
  CHECK(s_membership(t, 0.5, 1e-9));
  CHECK_THROWS_AS(min_fold(t, bstar), domain_error);
  MESSAGE("V1 = V2 at b = " << bstar);
}

TEST_CASE("q_matrix and kernel_vector") {
  const DispersionPoint d = dispersion_point(EulerPlane{}, 4, 0.5);
  for (Branch br : {Branch::Plus, Branch::Minus}) {
    const double om = br == Branch::Plus ? *d.omega_plus : *d.omega_minus;
    const Mat2 Q = q_matrix(EulerPlane{}, 4, 0.5, om);
    CHECK(std::abs(Q[0][0] * Q[1][1] - Q[0][1] * Q[1][0]) < 1e-10);
    const Vec2 v = kernel_vector(EulerPlane{}, 4, 0.5, br);
    CHECK(std::abs(Q[0][0] * v[0] + Q[0][1] * v[1]) < 1e-10);
    CHECK(std::abs(Q[1][0] * v[0] + Q[1][1] * v[1]) < 1e-10);
    CHECK(v[0] == doctest::Approx(-0.0078125).epsilon(1e-14));
    CHECK(std::hypot(v[0], v[1]) > 0.0);
  }
  CHECK_THROWS_AS(kernel_vector(EulerPlane{}, 3, 0.5, Branch::Plus), domain_error);
  CHECK_THROWS_AS(kernel_vector(EulerPlane{}, 2, 0.5, Branch::Minus), domain_error);
}

TEST_CASE("kernel vectors for models with a smooth part") {
  for (const KernelModel& m : {KernelModel{EulerAnnulus{0.1, 10.0}}, KernelModel{QgswDisc{1.0, 2.0}}}) {
    const DispersionPoint d = dispersion_point(m, 6, 0.5);
    REQUIRE(d.delta > 0.0);
    for (Branch br : {Branch::Plus, Branch::Minus}) {
      const double om = br == Branch::Plus ? *d.omega_plus : *d.omega_minus;
      const Mat2 Q = q_matrix(d, om);
      const Vec2 v = kernel_vector(d, br);
      CHECK(std::abs(Q[0][0] * v[0] + Q[0][1] * v[1]) < 1e-10);
      CHECK(std::abs(Q[1][0] * v[0] + Q[1][1] * v[1]) < 1e-10);
    }
  }
}

TEST_CASE("closed inequalities match the sign of Delta") {
  for (double R1 : {0.05, 0.1, 0.3})
    for (double R2 : {2.0, 10.0})
      for (double b = R1 + 0.05; b < 0.99; b += 0.07) {
        const EulerAnnulus a{R1, R2};
        for (int n = 2; n <= 40; ++n) {
          const double delta = dispersion_point(a, n, b).delta;
          if (std::abs(delta) < 1e-9) continue;
          CHECK(annulus_condition(a, n, b) == (delta > 0.0));
        }
      }
  for (double R : {0.05, 0.2, 0.5})
    for (double b = R + 0.02; b < 0.99; b += 0.05) {
      const EulerExterior e{R};
      for (int n = 1; n <= 40; ++n) {
        const double delta = dispersion_point(e, n, b).delta;
        if (std::abs(delta) < 1e-9) continue;
        CHECK(exterior_condition(e, n, b) == (delta > 0.0));
      }
    }
  // the form with +(R/b)^{2m} disagrees with Delta here
  const EulerExterior e{0.5};
  CHECK(dispersion_point(e, 1, 0.52).delta > 0.0);
  CHECK_FALSE(exterior_condition_printed(e, 1, 0.52));
  CHECK(exterior_condition(e, 1, 0.52));
}

TEST_CASE("min_fold") {
  SUBCASE("annulus: direct scan equals the closed threshold") {
    const EulerAnnulus a{0.1, 10.0};
    for (double b : {0.3, 0.5, 0.8}) CHECK(min_fold(a, b) == annulus_closed_threshold(a, b));
  }
  SUBCASE("Euler plane minimality") {
    const int m = min_fold(EulerPlane{}, 0.5);
    CHECK(m == 4);
    CHECK(dispersion_point(EulerPlane{}, m, 0.5).delta > 0.0);
    DispersionCache cache(EulerPlane{}, 0.5, default_tol);
    CHECK(check_fold(cache, m, default_k_max).ok);
    CHECK_FALSE(check_fold(cache, m - 1, default_k_max).ok);
    CHECK(min_fold(EulerPlane{}, 0.3) == 3);
    CHECK(min_fold(EulerPlane{}, 0.8) == 7);
  }
  SUBCASE("exterior matches its inequality") {
    for (double b : {0.3, 0.5, 0.8}) {
      CHECK(min_fold(EulerExterior{0.1}, b) == exterior_closed_threshold(EulerExterior{0.1}, b));
      CHECK(min_fold(EulerExterior{0.2}, b) == exterior_closed_threshold(EulerExterior{0.2}, b));
    }
    const int m = min_fold(EulerExterior{0.1}, 0.5);
    const double b = 0.5, R = 0.1;
    const double rb = std::pow(R / b, 2 * m);
    CHECK(m > b * b / (1 - b * b) * (2 - std::pow(R, 2 * m) - rb + 2 * std::pow(b, m) * (1 - rb)));
  }
  SUBCASE("shrinking tol never raises the threshold") {
    for (const KernelModel& m : {KernelModel{EulerPlane{}}, KernelModel{QgswPlane{1.0}}, KernelModel{EulerAnnulus{0.1, 10.0}}})
      for (double b : {0.3, 0.6}) {
        int prev = 1 << 30;
        for (double tol : {1e-4, 1e-6, 1e-9, 1e-12}) {
          // no qualifying fold counts as an infinite threshold
          int f = 1 << 30;
          try {
            f = min_fold(m, b, default_k_max, tol);
          } catch (const not_found_error&) {
          }
          CHECK(f <= prev);
          prev = f;
        }
      }
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(min_fold(EulerPlane{}, 0.5, 3), domain_error);
    CHECK_THROWS_AS(min_fold(EulerPlane{}, 0.99, default_k_max, default_tol, 5), not_found_error);
  }
}

TEST_CASE("monotonicity scans") {
  const auto e = monotonicity_scan(EulerPlane{}, 0.5, 10, 51);
  CHECK(e.ok);
  CHECK(e.kase == 1);
  CHECK(e.v1 == 0.0);
  CHECK(e.v2 == doctest::Approx(-0.375));
  const auto q = monotonicity_scan(QgswPlane{1.0}, 0.5, 10, 51);
  CHECK(q.ok);
  CHECK(q.kase == 1);
  const auto t = monotonicity_scan(tuned(), 0.1, 10, 21);
  CHECK(t.v1 < t.v2);
  CHECK(t.kase == 2);
  CHECK(t.ok);
  MESSAGE(t.message);
}

TEST_CASE("monotonicity scan reports a violation") {
  // Omega-_1 = 0 = -V1 breaks the strict sandwich; Delta_2 = 0 comes next
  const auto r = monotonicity_scan(EulerPlane{}, 0.5, 1, 5);
  CHECK_FALSE(r.ok);
  CHECK(r.first_violation == 1);
  const auto r2 = monotonicity_scan(EulerPlane{}, 0.5, 2, 5);
  CHECK_FALSE(r2.ok);
  CHECK(r2.first_violation == 2);
  CHECK(r2.message == "Delta <= tol");
}

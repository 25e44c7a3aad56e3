// SPDX-License-Identifier: Apache-2.0
/// @file universal.hpp
/// @brief The universal functions phi_n, phi_{n,b} and Psi_b.
#pragma once

#include <algorithm>
#include <cmath>
#include <complex>

#include "errors.hpp"
#include "quadrature.hpp"
#include "specfun.hpp"

namespace vstate {

enum class UniversalMethod { TrigQuadrature, LaplaceQuadrature, PeriodicTrapezoid, ClosedN1 };

struct UniversalEval {
  int n = 1;
  double b = 1.0;
  double x = 0.0;
  double value = 0.0;
  UniversalMethod method = UniversalMethod::TrigQuadrature;
};

namespace detail {

inline constexpr double phi_crossover = 30.0;

// 4 int_0^{pi/2} e^{-2x sin psi} cos(2n psi) dpsi
inline double phi_trig(int n, double x) {
  auto f = [=](double p) { return std::exp(-2.0 * x * std::sin(p)) * std::cos(2.0 * n * p); };
  // split so each piece holds a bounded number of oscillations
  const int pieces = std::max(1, n / 4);
  double s = 0.0;
  for (int k = 0; k < pieces; ++k) {
    const double a = 0.5 * pi * k / pieces, c = 0.5 * pi * (k + 1) / pieces;
    s += integrate(f, a, c, 1e-15, 1e-13).value;
  }
  return 4.0 * s;
}

// t = 2x sin psi:  (2/x) int_0^{2x} e^{-t} cos(2n asin(t/2x)) / sqrt(1-(t/2x)^2) dt
inline double phi_laplace(int n, double x) {
  const double top = std::min(2.0 * x, 60.0);
  auto f = [=](double t) {
    const double u = t / (2.0 * x);
    return std::exp(-t) * std::cos(2.0 * n * std::asin(u)) / std::sqrt(1.0 - u * u);
  };
  double s = integrate(f, 0.0, std::min(5.0, top), 1e-16, 1e-14).value;
  if (top > 5.0) s += integrate(f, 5.0, top, 1e-16, 1e-14).value;
  return 2.0 / x * s;
}

}  // namespace detail

/// phi_n(x) = int_0^{2pi} e^{-2x sin(eta/2)} e^{i n eta} deta.
inline UniversalEval phi_n_eval(int n, double x) {
  if (n < 1) throw domain_error("phi_n: n must be >= 1");
  if (x < 0.0) throw domain_error("phi_n: x must be >= 0");
  UniversalEval e{n, 1.0, x, 0.0, UniversalMethod::TrigQuadrature};
  if (x == 0.0) return e;
  if (x <= detail::phi_crossover) {
    e.value = detail::phi_trig(n, x);
  } else {
    e.value = detail::phi_laplace(n, x);
    e.method = UniversalMethod::LaplaceQuadrature;
  }
  return e;
}

inline double phi_n(int n, double x) { return phi_n_eval(n, x).value; }

namespace detail {

// e^z - 1 without cancellation for small |z|
inline std::complex<double> cexpm1(std::complex<double> z) {
  if (std::abs(z) > 0.5) return std::exp(z) - 1.0;
  std::complex<double> term = z, sum = z;
  for (int k = 2; k < 30; ++k) {
    term *= z / static_cast<double>(k);
    sum += term;
    if (std::abs(term) < 1e-18 * std::abs(sum)) break;
  }
  return sum;
}

}  // namespace detail

/// phi_{n,b}(x) = int_0^{2pi} e^{-x sqrt(1+b^2-2b cos eta)} e^{i n eta} deta.
///
/// For b < 1 the integrand is analytic in the strip |Im eta| < log(1/b).
/// The trapezoid rule is applied on the shifted line Im eta = tau, which
/// factors out e^{-n tau} and keeps relative accuracy when phi_{n,b} is tiny.
/// tau maximises n tau - x (1 - b - s0(tau)), s0(tau) = sqrt(1+b^2-2b cosh tau),
/// over [0, 3/4 log(1/b)].
inline UniversalEval phi_nb_eval(int n, double b, double x) {
  if (n < 1) throw domain_error("phi_nb: n must be >= 1");
  if (!(b > 0.0 && b <= 1.0)) throw domain_error("phi_nb: b must lie in (0,1]");
  if (x < 0.0) throw domain_error("phi_nb: x must be >= 0");
  if (b == 1.0) return phi_n_eval(n, x);
  UniversalEval e{n, b, x, 0.0, UniversalMethod::PeriodicTrapezoid};
  if (x == 0.0) return e;
  // below the bound 2 pi e^{-(1-b)x} the value is not representable
  if ((1.0 - b) * x > 700.0) return e;
  const double bb = 1.0 + b * b;
  const double tau_max = 0.75 * std::log(1.0 / b);
  auto s0_of = [&](double t) { return std::sqrt(bb - 2.0 * b * std::cosh(t)); };
  double tau = 0.0, best = 0.0;
  for (int k = 1; k <= 24; ++k) {
    const double t = tau_max * k / 24.0;
    const double gain = n * t - x * ((1.0 - b) - s0_of(t));
    if (gain > best) best = gain, tau = t;
  }
  const double s0 = s0_of(tau);
  const std::complex<double> I(0.0, 1.0);
  auto g = [&](double eta) {
    const std::complex<double> z(eta, tau);
    const std::complex<double> s = std::sqrt(bb - 2.0 * b * std::cos(z));
    return detail::cexpm1(-x * (s - s0)) * std::exp(I * (n * eta));
  };
  const double two_pi = 2.0 * pi;
  int N = std::max(64, 4 * n);
  std::complex<double> sum = 0.0;
  double mag = 0.0;
  for (int j = 0; j < N; ++j) {
    const auto v = g(two_pi * j / N);
    sum += v;
    mag = std::max(mag, std::abs(v));
  }
  std::complex<double> prev = sum * (two_pi / N), cur = prev;
  while (true) {
    std::complex<double> add = 0.0;
    for (int j = 0; j < N; ++j) {
      const auto v = g(two_pi * (j + 0.5) / N);
      add += v;
      mag = std::max(mag, std::abs(v));
    }
    sum += add;
    N *= 2;
    cur = sum * (two_pi / N);
    if (std::abs(cur - prev) <= 1e-13 * std::abs(cur) + 1e-15 * mag) break;
    if (N >= (1 << 22)) throw convergence_error("phi_nb: trapezoid doubling did not settle");
    prev = cur;
  }
  e.value = std::exp(-n * tau - x * s0) * cur.real();
  return e;
}

inline double phi_nb(int n, double b, double x) { return phi_nb_eval(n, b, x).value; }

/// phi_{1,b}(x) = 2bx int_{-1}^{1} e^{-x s} sqrt(1-y^2)/s dy,
/// s = sqrt(1+b^2-2by), evaluated with y = cos(theta).
inline double phi_1b_closed(double b, double x) {
  if (!(b > 0.0 && b <= 1.0)) throw domain_error("phi_1b_closed: b must lie in (0,1]");
  if (x < 0.0) throw domain_error("phi_1b_closed: x must be >= 0");
  if (x == 0.0) return 0.0;
  const double bb = 1.0 + b * b;
  auto f = [=](double th) {
    const double s = std::sqrt(std::max(bb - 2.0 * b * std::cos(th), 0.0));
    const double st = std::sin(th);
    if (s == 0.0) return 0.0;
    return std::exp(-x * s) * st * st / s;
  };
  // the integrand is sharp near theta = 0 when b -> 1
  const double knee = std::min(0.5, std::max(1e-3, 1.0 - b));
  const double v = integrate(f, 0.0, knee, 1e-16, 1e-13).value +
                   integrate(f, knee, pi, 1e-16, 1e-13).value;
  return 2.0 * b * x * v;
}

/// Psi_b(x) = phi_1(x) + phi_1(bx) - (b + 1/b) phi_{1,b}(x).
inline double psi_b(double b, double x) {
  if (!(b > 0.0 && b < 1.0)) throw domain_error("psi_b: b must lie in (0,1)");
  if (x < 0.0) throw domain_error("psi_b: x must be >= 0");
  if (x == 0.0) return 0.0;
  return phi_n(1, x) + phi_n(1, b * x) - (b + 1.0 / b) * phi_nb(1, b, x);
}

/// int_{-1}^{1} sqrt((1-y^2)/(1+b^2-2by)) dy, the integral entering Psi_b'(0).
inline double psi_slope_integral(double b) {
  const double bb = 1.0 + b * b;
  auto f = [=](double th) {
    const double st = std::sin(th);
    return st * st / std::sqrt(bb - 2.0 * b * std::cos(th));
  };
  return integrate(f, 0.0, pi, 1e-15, 1e-14).value;
}

/// Psi_b'(0) = (8/3)(1+b) - 2(1+b^2) int_{-1}^{1} sqrt((1-y^2)/(1+b^2-2by)) dy.
inline double psi_slope_at_zero(double b) {
  return 8.0 / 3.0 * (1.0 + b) - 2.0 * (1.0 + b * b) * psi_slope_integral(b);
}

}  // namespace vstate

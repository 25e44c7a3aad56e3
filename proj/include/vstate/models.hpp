// SPDX-License-Identifier: Apache-2.0
/// @file models.hpp
/// @brief Kernel models with closed-form spectral data, annulus Green
/// coefficients, Sneddon sums and the QGSW Bessel-zero identity.
#pragma once

#include <cmath>
#include <complex>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <variant>

#include "cmkernel.hpp"
#include "config.hpp"
#include "errors.hpp"
#include "quadrature.hpp"
#include "specfun.hpp"
#include "universal.hpp"

namespace vstate {

// ---------------------------------------------------------------- models

struct EulerPlane {};
struct GsqgPlane {
  double beta = 0.5;
};
struct QgswPlane {
  double eps = 1.0;
};
struct EulerDisc {
  double R = 2.0;
};
struct GsqgDisc {
  double beta = 0.5;
  double R = 2.0;
};
struct QgswDisc {
  double eps = 1.0;
  double R = 2.0;
};
struct EulerAnnulus {
  double R1 = 0.1;
  double R2 = 10.0;
};
struct EulerExterior {
  double R = 0.1;
};
/// K(x,y) = K0(|x-y|) with K0 given by mu. `c` and `ct` are optional
/// constants standing in for the smooth-part velocities c_b, c~_b.
struct CustomConvolution {
  Measure mu;
  double alpha = 0.5;
  double c = 0.0;
  double ct = 0.0;
};

using KernelModel = std::variant<EulerPlane, GsqgPlane, QgswPlane, EulerDisc, GsqgDisc, QgswDisc,
                                 EulerAnnulus, EulerExterior, CustomConvolution>;

template <class... F>
struct overloaded : F... {
  using F::operator()...;
};
template <class... F>
overloaded(F...) -> overloaded<F...>;

inline std::string model_name(const KernelModel& m) {
  return std::visit(overloaded{[](const EulerPlane&) { return "euler-plane"; },
                               [](const GsqgPlane&) { return "gsqg-plane"; },
                               [](const QgswPlane&) { return "qgsw-plane"; },
                               [](const EulerDisc&) { return "euler-disc"; },
                               [](const GsqgDisc&) { return "gsqg-disc"; },
                               [](const QgswDisc&) { return "qgsw-disc"; },
                               [](const EulerAnnulus&) { return "euler-annulus"; },
                               [](const EulerExterior&) { return "euler-exterior"; },
                               [](const CustomConvolution&) { return "custom"; }},
                    m);
}

/// Admissible open b-interval S_max.
inline std::pair<double, double> s_max(const KernelModel& m) {
  if (auto* a = std::get_if<EulerAnnulus>(&m)) return {a->R1, 1.0};
  if (auto* e = std::get_if<EulerExterior>(&m)) return {e->R, 1.0};
  return {0.0, 1.0};
}

inline bool has_smooth_part(const KernelModel& m) {
  return !(std::holds_alternative<EulerPlane>(m) || std::holds_alternative<GsqgPlane>(m) ||
           std::holds_alternative<QgswPlane>(m) || std::holds_alternative<CustomConvolution>(m));
}

/// Throws domain_error when parameters are outside the model's range.
inline void validate(const KernelModel& m) {
  std::visit(overloaded{
                 [](const EulerPlane&) {},
                 [](const GsqgPlane& g) {
                   if (!(g.beta > 0.0 && g.beta < 1.0)) throw domain_error("gsqg: beta must lie in (0,1)");
                 },
                 [](const QgswPlane& q) {
                   if (!(q.eps > 0.0)) throw domain_error("qgsw: eps must be > 0");
                 },
                 [](const EulerDisc& d) {
                   if (!(d.R > 1.0)) throw domain_error("disc: R must be > 1");
                 },
                 [](const GsqgDisc& g) {
                   if (!(g.beta > 0.0 && g.beta < 1.0)) throw domain_error("gsqg: beta must lie in (0,1)");
                   if (!(g.R > 1.0)) throw domain_error("disc: R must be > 1");
                 },
                 [](const QgswDisc& q) {
                   if (!(q.eps > 0.0)) throw domain_error("qgsw: eps must be > 0");
                   if (!(q.R > 1.0)) throw domain_error("disc: R must be > 1");
                 },
                 [](const EulerAnnulus& a) {
                   if (!(a.R1 > 0.0 && a.R1 < 1.0)) throw domain_error("annulus: R1 must lie in (0,1)");
                   if (!(a.R2 > 1.0 && std::isfinite(a.R2)))
                     throw domain_error("annulus: R2 must be finite and > 1");
                 },
                 [](const EulerExterior& e) {
                   if (!(e.R > 0.0 && e.R < 1.0)) throw domain_error("exterior: R must lie in (0,1)");
                 },
                 [](const CustomConvolution& c) { vstate::validate(c.mu); },
             },
             m);
}

inline void check_b(const KernelModel& m, double b) {
  const auto [lo, hi] = s_max(m);
  if (!(b > lo && b < hi)) throw domain_error("b outside the admissible interval S_max");
}

/// Built-in Bernstein measure of the K0 part, or mu for custom kernels.
inline Measure model_measure(const KernelModel& m) {
  return std::visit(overloaded{[](const GsqgPlane& g) { return Measure::gsqg(g.beta); },
                               [](const GsqgDisc& g) { return Measure::gsqg(g.beta); },
                               [](const QgswPlane& q) { return Measure::qgsw(q.eps); },
                               [](const QgswDisc& q) { return Measure::qgsw(q.eps); },
                               [](const CustomConvolution& c) { return c.mu; },
                               [](const auto&) { return Measure::euler(); }},
                    m);
}

// ------------------------------------------------------- closed lambdas

/// Lambda_{n,b}(beta) = 2 pi c_beta b^n (beta/2)_n / n! F(beta/2, n+beta/2; n+1; b^2).
inline double gsqg_capital_lambda(int n, double b, double beta) {
  if (!(beta > 0.0 && beta < 1.0)) throw domain_error("gsqg_capital_lambda: beta must lie in (0,1)");
  if (!(b > 0.0 && b <= 1.0)) throw domain_error("gsqg_capital_lambda: b must lie in (0,1]");
  if (n < 1) throw domain_error("gsqg_capital_lambda: n must be >= 1");
  const double h = 0.5 * beta;
  // (h)_n / n! without overflow
  double ratio = 1.0;
  for (int k = 0; k < n; ++k) ratio *= (h + k) / (k + 1.0);
  return 2.0 * pi * gsqg_c(beta) * std::pow(b, n) * ratio * hyp2f1(h, n + h, n + 1.0, b * b);
}

namespace detail {

inline double ik_product(double nu, double s, double t) { return bessel_ik(nu, s, t); }

}  // namespace detail

/// lambda_{n,b} in closed form, absent for custom kernels.
inline std::optional<double> closed_lambda(const KernelModel& m, int n, double b) {
  if (n < 1) throw domain_error("closed_lambda: n must be >= 1");
  return std::visit(
      overloaded{[&](const GsqgPlane& g) -> std::optional<double> {
                   return std::pow(b, -g.beta) * gsqg_capital_lambda(n, 1.0, g.beta);
                 },
                 [&](const GsqgDisc& g) -> std::optional<double> {
                   return std::pow(b, -g.beta) * gsqg_capital_lambda(n, 1.0, g.beta);
                 },
                 [&](const QgswPlane& q) -> std::optional<double> {
                   return detail::ik_product(n, b * q.eps, b * q.eps);
                 },
                 [&](const QgswDisc& q) -> std::optional<double> {
                   return detail::ik_product(n, b * q.eps, b * q.eps);
                 },
                 [](const CustomConvolution&) -> std::optional<double> { return std::nullopt; },
                 [&](const auto&) -> std::optional<double> { return 1.0 / (2.0 * n); }},
      m);
}

/// lambda~_{n,b} in closed form, absent for custom kernels.
inline std::optional<double> closed_tilde_lambda(const KernelModel& m, int n, double b) {
  if (n < 1) throw domain_error("closed_tilde_lambda: n must be >= 1");
  return std::visit(
      overloaded{[&](const GsqgPlane& g) -> std::optional<double> {
                   return gsqg_capital_lambda(n, b, g.beta);
                 },
                 [&](const GsqgDisc& g) -> std::optional<double> {
                   return gsqg_capital_lambda(n, b, g.beta);
                 },
                 [&](const QgswPlane& q) -> std::optional<double> {
                   return detail::ik_product(n, b * q.eps, q.eps);
                 },
                 [&](const QgswDisc& q) -> std::optional<double> {
                   return detail::ik_product(n, b * q.eps, q.eps);
                 },
                 [](const CustomConvolution&) -> std::optional<double> { return std::nullopt; },
                 [&](const auto&) -> std::optional<double> { return std::pow(b, n) / (2.0 * n); }},
      m);
}

/// lambda_{n,b} = int phi_n(bx) dmu(x)/x.
inline double quadrature_lambda(const Measure& mu, int n, double b) {
  return spectral_integral([&](double x) { return phi_n(n, b * x); }, mu);
}

/// lambda~_{n,b} = int phi_{n,b}(x) dmu(x)/x.
inline double quadrature_tilde_lambda(const Measure& mu, int n, double b) {
  if (b == 1.0) return quadrature_lambda(mu, n, 1.0);
  return spectral_integral([&](double x) { return phi_nb(n, b, x); }, mu);
}

// ------------------------------------------------------------- annulus

/// Coefficients of the annulus Green function
/// K = (1/2pi)(-log|x-y| + A0(|y|) + B0(|y|) log|x|
///     - sum_m (1/m)(A_m(|y|)|x|^m + B_m(|y|)|x|^{-m}) cos m(theta-eta)).
struct AnnulusGreenCoefficients {
  double R1 = 0.1;
  double R2 = 10.0;

  double A0(double r) const { return std::log(R2) * std::log(R1 / r) / std::log(R1 / R2); }
  double B0(double r) const { return std::log(r / R2) / std::log(R1 / R2); }
  // written with R2^{-2m} factored out so large m does not overflow
  double Am(int m, double r) const {
    const double q2m = std::pow(R1 / R2, 2.0 * m);
    return (std::pow(r / (R2 * R2), m) - std::pow(R1 * R1 / (r * R2 * R2), m)) / (1.0 - q2m);
  }
  double Bm(int m, double r) const {
    const double q2m = std::pow(R1 / R2, 2.0 * m);
    return (std::pow(R1 * R1 / r, m) - std::pow(R1 * R1 * r / (R2 * R2), m)) / (1.0 - q2m);
  }
  /// C_b = (-(b^2/2) log b - (1-b^2)/4 - ((1-b^2)/2) log R2) / log(R1/R2).
  double frak_c(double b) const {
    const double w = 1.0 - b * b;
    return (-0.5 * b * b * std::log(b) - 0.25 * w - 0.5 * w * std::log(R2)) / std::log(R1 / R2);
  }
};

inline AnnulusGreenCoefficients annulus_green(const EulerAnnulus& a) { return {a.R1, a.R2}; }

// ------------------------------------------------------ Bessel-zero sums

/// A Bessel-zero series split into the K exact terms and an asymptotic
/// remainder. `error` bounds the part the asymptotic sum cannot resolve.
struct SeriesSum {
  double value = 0.0;
  double partial = 0.0;
  double tail = 0.0;
  double error = 0.0;
  long terms = 0;
  bool truncation_warning = false;
};

inline constexpr int default_series_terms = 500;
inline constexpr long default_tail_terms = 200000;

namespace detail {

inline double j_any(double nu, double z) {
  if (z < 40.0) return bessel_j(nu, z);
  return bessel_j_asym(nu, z, 5);
}

// Sum over the zeros x_k of J_n of num(x) / (w(x) J_{n+1}(x)^2).
// Exact zeros up to K, McMahon zeros and Hankel forms up to K2, then the
// non-oscillating envelope env * sum_{k>K2} 1/w(x_k), with x_k ~ (k + n/2 - 1/4) pi.
template <class Num, class W, class WTail>
SeriesSum zero_series(int n, Num&& num, W&& w, double env, WTail&& w_tail, int K, long K2,
                      double tol) {
  if (K < 1) throw domain_error("zero_series: K must be >= 1");
  SeriesSum s;
  const auto& z = bessel_zero_cache(n, K);
  for (int k = 0; k < K; ++k) {
    const double x = z[k];
    const double j = bessel_j(n + 1, x);
    s.partial += num(x) / (w(x) * j * j);
  }
  double last = 0.0;
  for (long k = K + 1; k <= K2; ++k) {
    const double x = mcmahon_zero(n, k);
    const double j = bessel_j_asym(n + 1, x, 5);
    last = num(x) / (w(x) * j * j);
    s.tail += last;
  }
  const double shift = 0.5 * n - 0.25;
  const double rem = env == 0.0 ? 0.0 : env * w_tail((K2 + 0.5 + shift) * pi);
  s.tail += rem;
  s.value = s.partial + s.tail;
  s.error = std::abs(last) + 1e-3 * std::abs(rem);
  s.terms = K2;
  s.truncation_warning = s.error > tol;
  return s;
}

}  // namespace detail

/// sum_k J_bi(a x_k) J_gi(b x_k) / (x_k^q J_{n+1}(x_k)^2) over the zeros of J_n.
inline SeriesSum sneddon_series(int bi, int gi, int n, double q, double a, double b,
                                int K = default_series_terms, long K2 = default_tail_terms,
                                double tol = 1e-6) {
  if (!(a >= 0.0 && a <= 1.0 && b >= 0.0 && b <= 1.0))
    throw domain_error("sneddon_series: a, b must lie in [0,1]");
  if (!(q > 1.0)) throw domain_error("sneddon_series: q must be > 1");
  if (a == 0.0 || b == 0.0) {
    if ((a == 0.0 && bi > 0) || (b == 0.0 && gi > 0)) return {};
  }
  auto num = [&](double x) { return detail::j_any(bi, a * x) * detail::j_any(gi, b * x); };
  auto w = [&](double x) { return std::pow(x, q); };
  // cos(a x - phi1) cos(b x - phi2) splits into a difference and a sum phase;
  // either is constant over k only when a = b, or a = b = 1
  double env = 0.0;
  if (a == b && a > 0.0) {
    env += std::cos(0.5 * pi * (gi - bi)) / (2.0 * a);
    if (a == 1.0) env += std::cos(pi * (n - 1 - 0.5 * (bi + gi))) / 2.0;
  }
  auto w_tail = [&](double x0) { return std::pow(x0, 1.0 - q) / (pi * (q - 1.0)); };
  return detail::zero_series(n, num, w, env, w_tail, K, K2, tol);
}

/// The closed part of Sneddon's formula,
/// J = a^bi Gamma(1+(bi+gi-q)/2) / (2^q b^{2+bi-q} Gamma(bi+1) Gamma((gi-bi+q)/2))
///     F(1+(bi+gi-q)/2, 1+(bi-gi-q)/2; bi+1; a^2/b^2),  a <= b.
inline double sneddon_j_closed(int bi, int gi, double q, double a, double b) {
  if (!(a > 0.0 && a <= b)) throw domain_error("sneddon_j_closed: needs 0 < a <= b");
  const double s = 0.5 * (bi + gi - q);
  const double pref = std::pow(a, bi) * gamma_fn(1.0 + s) * rgamma(bi + 1.0) *
                      rgamma(0.5 * (gi - bi + q)) / (std::pow(2.0, q) * std::pow(b, 2.0 + bi - q));
  return pref * hyp2f1(1.0 + s, 1.0 + 0.5 * (bi - gi - q), bi + 1.0, a * a / (b * b));
}

/// The same quantity as the integral (1/pi) sin(pi(gi-bi+q)/2) int rho^{1-q} I_bi(a rho) K_gi(b rho).
inline double sneddon_j_integral(int bi, int gi, double q, double a, double b) {
  if (!(a > 0.0 && a < b)) throw domain_error("sneddon_j_integral: needs 0 < a < b");
  auto f = [&](double r) {
    if (r <= 0.0) return 0.0;
    return std::pow(r, 1.0 - q) * bessel_ie(bi, a * r) * bessel_ke(gi, b * r) * std::exp((a - b) * r);
  };
  const double top = 60.0 / (b - a);
  double v = 0.0;
  const double cuts[] = {0.0, 1.0, 5.0, 20.0};
  for (int i = 0; i < 4; ++i) {
    const double lo = cuts[i], hi = i < 3 ? cuts[i + 1] : top;
    if (lo >= top) break;
    v += integrate_or_throw(f, lo, std::min(hi, top), 1e-14, 1e-12, "sneddon_j_integral");
  }
  return std::sin(0.5 * pi * (gi - bi + q)) / pi * v;
}

namespace detail {

// int_0^inf rho^{1-q} I_bi(a rho) I_gi(b rho) K_n(rho)/I_n(rho) d rho
inline double sneddon_tail_integral(int bi, int gi, int n, double q, double a, double b) {
  auto f = [&](double r) {
    if (r <= 0.0) return 0.0;
    if (r < 1e-8) {
      // leading small-argument behaviour of the Bessel quotient
      const double ia = std::pow(0.5 * a * r, bi) * rgamma(bi + 1.0);
      const double ig = std::pow(0.5 * b * r, gi) * rgamma(gi + 1.0);
      const double ki = n == 0 ? -std::log(0.5 * r) - euler_gamma
                               : gamma_fn(n) * gamma_fn(n + 1.0) * 0.5 * std::pow(2.0 / r, 2 * n);
      return std::pow(r, 1.0 - q) * ia * ig * ki;
    }
    const double iab = bessel_ie(bi, a * r) * bessel_ie(gi, b * r);
    return std::pow(r, 1.0 - q) * iab * bessel_ke(n, r) / bessel_ie(n, r) *
           std::exp((a + b - 2.0) * r);
  };
  const double rate = 2.0 - a - b;
  const double top = rate > 0.0 ? 40.0 / rate : 1e3;
  double v = 0.0;
  const double cuts[] = {0.0, 1.0, 5.0, 20.0};
  for (int i = 0; i < 4; ++i) {
    const double lo = cuts[i], hi = i < 3 ? cuts[i + 1] : top;
    if (lo >= top) break;
    v += integrate_or_throw(f, lo, std::min(hi, top), 1e-15, 1e-12, "sneddon_integral");
  }
  return v;
}

}  // namespace detail

/// Right side of Sneddon's formula: J plus
/// (1/pi) sin(pi(bi+gi-2n-q)/2) int rho^{1-q} I_bi(a rho) I_gi(b rho) K_n/I_n d rho.
inline double sneddon_integral(int bi, int gi, int n, double q, double a, double b) {
  if (!(q > 1.0 && q < bi + gi - 2 * n + 2))
    throw domain_error("sneddon_integral: needs 1 < q < bi + gi - 2n + 2");
  if (!(a >= 0.0 && a <= 1.0 && b >= 0.0 && b <= 1.0))
    throw domain_error("sneddon_integral: a, b must lie in [0,1]");
  if ((a == 0.0 && bi > 0) || (b == 0.0 && gi > 0)) return 0.0;
  if (a > b) {
    std::swap(a, b);
    std::swap(bi, gi);
  }
  const double J = sneddon_j_closed(bi, gi, q, a, b);
  const double s = std::sin(0.5 * pi * (bi + gi - 2 * n - q));
  return J + s / pi * detail::sneddon_tail_integral(bi, gi, n, q, a, b);
}

/// Truncated left side and closed right side of
/// sum_k J1(X x_k) J1(Y x_k) / ((x_k^2 + eps^2) J1(x_k)^2) over the zeros of J0
/// = (1/2)(I1(Y eps)/I0(eps))(I1(X eps) K0(eps) + I0(eps) K1(X eps)),  Y <= X.
struct IdentityCheck {
  SeriesSum series;
  double closed = 0.0;
};

inline double qgsw_identity_closed(double X, double Y, double eps) {
  if (Y > X) std::swap(X, Y);
  if (Y == 0.0) return 0.0;
  // every product below is written with matching exponential scalings
  const double i1y = bessel_ie(1.0, Y * eps), i0 = bessel_ie(0.0, eps);
  const double t1 = bessel_ie(1.0, X * eps) * bessel_ke(0.0, eps) * std::exp((X - 1.0) * eps);
  const double t2 = bessel_ie(0.0, eps) * bessel_ke(1.0, X * eps) * std::exp((1.0 - X) * eps);
  return 0.5 * i1y / i0 * std::exp((Y - 1.0) * eps) * (t1 + t2);
}

inline SeriesSum qgsw_identity_series(double X, double Y, double eps, int K = default_series_terms,
                                      long K2 = default_tail_terms, double tol = 1e-7) {
  if (!(X >= 0.0 && X <= 1.0 && Y >= 0.0 && Y <= 1.0))
    throw domain_error("qgsw_identity: X, Y must lie in [0,1]");
  if (!(eps > 0.0)) throw domain_error("qgsw_identity: eps must be > 0");
  if (X == 0.0 || Y == 0.0) return {};
  auto num = [&](double x) { return detail::j_any(1, X * x) * detail::j_any(1, Y * x); };
  auto w = [&](double x) { return x * x + eps * eps; };
  double env = 0.0;
  if (X == Y) {
    env += 1.0 / (2.0 * X);
    if (X == 1.0) env += 0.5;
  }
  auto w_tail = [&](double x0) { return (0.5 * pi - std::atan(x0 / eps)) / (pi * eps); };
  return detail::zero_series(0, num, w, env, w_tail, K, K2, tol);
}

inline IdentityCheck qgsw_disc_identity(double X, double Y, double eps, int K = default_series_terms) {
  if (Y > X) throw domain_error("qgsw_disc_identity: needs Y <= X");
  return {qgsw_identity_series(X, Y, eps, K), qgsw_identity_closed(X, Y, eps)};
}

// ------------------------------------------------------------ V terms

/// QGSW disc velocities in closed form.
inline std::pair<double, double> qgsw_disc_v_terms(double eps, double R, double b) {
  if (!(eps > 0.0 && R > 1.0 && b > 0.0 && b < 1.0))
    throw domain_error("qgsw_disc_v_terms: needs eps > 0, R > 1, 0 < b < 1");
  const double be = b * eps;
  // K0(R eps)/I0(R eps) times the I1 products, scaled
  const double kr = bessel_ke(0.0, R * eps) / bessel_ie(0.0, R * eps);
  const double i1b = bessel_ie(1.0, be), i1 = bessel_ie(1.0, eps);
  const double d1 = kr * i1b * (i1 * std::exp((1.0 + b - 2.0 * R) * eps) / b -
                                i1b * std::exp((2.0 * b - 2.0 * R) * eps));
  const double d2 = kr * i1 * (i1 * std::exp((2.0 - 2.0 * R) * eps) -
                               b * i1b * std::exp((1.0 + b - 2.0 * R) * eps));
  const double v1 = -d1 - (detail::ik_product(1.0, be, eps) / b - detail::ik_product(1.0, be, be));
  const double v2 = -d2 - (detail::ik_product(1.0, eps, eps) - b * detail::ik_product(1.0, be, eps));
  return {v1, v2};
}

/// QGSW disc velocities from the Bessel-zero series over the zeros of J0.
inline std::pair<double, double> qgsw_disc_v_series(double eps, double R, double b,
                                                    int K = default_series_terms) {
  if (!(eps > 0.0 && R > 1.0 && b > 0.0 && b < 1.0))
    throw domain_error("qgsw_disc_v_series: needs eps > 0, R > 1, 0 < b < 1");
  const double e = eps * R;
  const double s_ab = qgsw_identity_series(1.0 / R, b / R, e, K).value;
  const double s_bb = qgsw_identity_series(b / R, b / R, e, K).value;
  const double s_aa = qgsw_identity_series(1.0 / R, 1.0 / R, e, K).value;
  return {-2.0 * (s_ab / b - s_bb), -2.0 * (s_aa - b * s_ab)};
}

namespace detail {

// (1/2z)(1 - 3/(8z^2) - ...): large-z expansion of I1(z) K1(z), summed to the smallest term
inline double ik1_asym_coef(int k) {
  double c = 1.0;
  for (int j = 1; j <= k; ++j) {
    const double m = (2.0 * j - 1.0) * (2.0 * j - 1.0);
    c *= -(2.0 * j - 1.0) / (2.0 * j) * (4.0 - m) / 4.0;
  }
  return c;
}

// int_L^inf I1(c rho) K1(c rho) rho^{beta-1} d rho from the large-argument expansion
inline double ik1_power_tail(double c, double beta, double L) {
  double s = 0.0, last = 1e300;
  for (int k = 0; k < 8; ++k) {
    const double t = ik1_asym_coef(k) / (2.0 * std::pow(c, 1.0 + 2.0 * k)) *
                     std::pow(L, beta - 1.0 - 2.0 * k) / (1.0 + 2.0 * k - beta);
    if (std::abs(t) > last) break;
    s += t;
    last = std::abs(t);
  }
  return s;
}

// int_0^top f(rho) rho^{beta-1} d rho with rho = u^{1/beta}
template <class F>
double power_weighted(F&& f, double beta, double top, const char* what) {
  auto g = [&](double u) {
    if (u <= 0.0) return f(0.0) / beta;
    return f(std::pow(u, 1.0 / beta)) / beta;
  };
  double v = 0.0;
  const double cuts[] = {0.0, 1.0, 5.0, 20.0, 80.0};
  for (int i = 0; i < 5; ++i) {
    const double lo = cuts[i], hi = i < 4 ? std::min(cuts[i + 1], top) : top;
    if (lo >= top) break;
    v += integrate_or_throw(g, std::pow(lo, beta), std::pow(hi, beta), 1e-15, 1e-12, what);
  }
  return v;
}

}  // namespace detail

/// The four integrals making up the gSQG disc velocities:
/// V1 = plane1 + disc1, V2 = plane2 + disc2. The plane parts are the
/// K1-integrals and carry no R; the disc parts carry K0(R rho)/I0(R rho).
struct GsqgDiscVParts {
  double plane1 = 0.0, disc1 = 0.0, plane2 = 0.0, disc2 = 0.0;
};

inline GsqgDiscVParts gsqg_disc_v_parts(double beta, double R, double b) {
  if (!(beta > 0.0 && beta < 1.0 && R > 1.0 && b > 0.0 && b < 1.0))
    throw domain_error("gsqg_disc_v_terms: needs 0 < beta < 1, R > 1, 0 < b < 1");
  const double pre = -2.0 * std::sin(0.5 * pi * beta) / pi;
  const double tiny = 1e-150;
  // I1(b r)(K1(r)/b - K1(b r)) and K1(r)(I1(r) - b I1(b r))
  auto f1 = [&](double r) {
    r = std::max(r, tiny);
    return detail::ik_product(1.0, b * r, r) / b - detail::ik_product(1.0, b * r, b * r);
  };
  auto f2 = [&](double r) {
    r = std::max(r, tiny);
    return detail::ik_product(1.0, r, r) - b * detail::ik_product(1.0, b * r, r);
  };
  // I1(b r)(I1(r)/b - I1(b r)) K0/I0(R r) and I1(r)(I1(r) - b I1(b r)) K0/I0(R r)
  auto kr = [&](double r) { return bessel_ke(0.0, R * r) / bessel_ie(0.0, R * r); };
  auto g1 = [&](double r) {
    r = std::max(r, tiny);
    const double ib = bessel_ie(1.0, b * r), i1 = bessel_ie(1.0, r);
    return kr(r) * ib * (i1 * std::exp((1.0 + b - 2.0 * R) * r) / b -
                         ib * std::exp((2.0 * b - 2.0 * R) * r));
  };
  auto g2 = [&](double r) {
    r = std::max(r, tiny);
    const double ib = bessel_ie(1.0, b * r), i1 = bessel_ie(1.0, r);
    return kr(r) * i1 * (i1 * std::exp((2.0 - 2.0 * R) * r) -
                         b * ib * std::exp((1.0 + b - 2.0 * R) * r));
  };
  // beyond L only the I1 K1 products of equal argument survive
  const double L = std::max({60.0, 40.0 / (1.0 - b), 60.0 / b});
  const double Ld = std::max(20.0, 40.0 / (2.0 * R - 1.0 - b));
  GsqgDiscVParts p;
  p.plane1 = pre * (detail::power_weighted(f1, beta, L, "gsqg_disc_v_terms") -
                    detail::ik1_power_tail(b, beta, L));
  p.plane2 = pre * (detail::power_weighted(f2, beta, L, "gsqg_disc_v_terms") +
                    detail::ik1_power_tail(1.0, beta, L));
  p.disc1 = pre * detail::power_weighted(g1, beta, Ld, "gsqg_disc_v_terms");
  p.disc2 = pre * detail::power_weighted(g2, beta, Ld, "gsqg_disc_v_terms");
  return p;
}

inline std::pair<double, double> gsqg_disc_v_terms(double beta, double R, double b) {
  const auto p = gsqg_disc_v_parts(beta, R, b);
  return {p.plane1 + p.disc1, p.plane2 + p.disc2};
}

/// gSQG disc velocities from the Bessel-zero series over the zeros of J0:
/// V1 = -2R^{-beta} sum x^{beta-2} J1(xb/R)(J1(x/R)/b - J1(xb/R)) / J1(x)^2.
inline std::pair<double, double> gsqg_disc_v_series(double beta, double R, double b,
                                                    int K = default_series_terms) {
  if (!(beta > 0.0 && beta < 1.0 && R > 1.0 && b > 0.0 && b < 1.0))
    throw domain_error("gsqg_disc_v_series: needs 0 < beta < 1, R > 1, 0 < b < 1");
  const double q = 2.0 - beta;
  const double s_ab = sneddon_series(1, 1, 0, q, 1.0 / R, b / R, K).value;
  const double s_bb = sneddon_series(1, 1, 0, q, b / R, b / R, K).value;
  const double s_aa = sneddon_series(1, 1, 0, q, 1.0 / R, 1.0 / R, K).value;
  const double f = -2.0 * std::pow(R, -beta);
  return {f * (s_ab / b - s_bb), f * (s_aa - b * s_ab)};
}

// ------------------------------------------------------------- p terms

/// Interaction coefficients of the smooth part K1.
struct PTerms {
  double p_b = 0.0;      ///< p_{n,b}
  double p_1 = 0.0;      ///< p_{n,1}
  double p_tilde = 0.0;  ///< p~_{n,b}
};

namespace detail {

// I_n(s r)/I_n(t r) for s <= t
inline double i_ratio(int n, double s, double t, double r) {
  if (r < 1e-8) return std::pow(s / t, n);
  return bessel_i_ratio(n, s * r, t * r);
}

// I_n(R r) K_n(R r)
inline double ik_same(int n, double x) {
  if (x < 1e-8) return n == 0 ? -std::log(0.5 * x) - euler_gamma : 0.5 / n;
  return bessel_ik(n, x, x);
}

// -(2 sin(pi beta/2)/pi) int s^{beta-1} I_n(u s) I_n(v s) K_n(R s)/I_n(R s) ds
inline double gsqg_disc_p_integral(int n, double beta, double R, double u, double v) {
  auto f = [&](double s) {
    return i_ratio(n, u, R, s) * i_ratio(n, v, R, s) * ik_same(n, R * s);
  };
  const double top = std::max(20.0, 40.0 / (2.0 * R - u - v)) + 2.0 * n / R;
  return -2.0 * std::sin(0.5 * pi * beta) / pi * power_weighted(f, beta, top, "gsqg_disc_p");
}

}  // namespace detail

/// p-terms of the gSQG disc from the modified Bessel integrals.
inline PTerms gsqg_disc_p(int n, double beta, double R, double b) {
  PTerms p;
  p.p_b = detail::gsqg_disc_p_integral(n, beta, R, b, b);
  p.p_tilde = detail::gsqg_disc_p_integral(n, beta, R, b, 1.0);
  p.p_1 = detail::gsqg_disc_p_integral(n, beta, R, 1.0, 1.0);
  return p;
}

/// p-terms of the gSQG disc from the Bessel-zero series over the zeros of J_n,
/// 2R^{-beta} sum x^{beta-2} J_n(xu/R) J_n(xv/R) / J_{n+1}(x)^2 minus lambda.
inline PTerms gsqg_disc_p_series(int n, double beta, double R, double b,
                                 int K = default_series_terms) {
  const double q = 2.0 - beta;
  const double f = 2.0 * std::pow(R, -beta);
  const double lam_b = std::pow(b, -beta) * gsqg_capital_lambda(n, 1.0, beta);
  const double lam_1 = gsqg_capital_lambda(n, 1.0, beta);
  const double lam_t = gsqg_capital_lambda(n, b, beta);
  PTerms p;
  p.p_b = f * sneddon_series(n, n, n, q, b / R, b / R, K).value - lam_b;
  p.p_tilde = f * sneddon_series(n, n, n, q, b / R, 1.0 / R, K).value - lam_t;
  p.p_1 = f * sneddon_series(n, n, n, q, 1.0 / R, 1.0 / R, K).value - lam_1;
  return p;
}

/// p-terms of the QGSW disc: -I_n(u eps) I_n(v eps) K_n(R eps)/I_n(R eps).
inline PTerms qgsw_disc_p(int n, double eps, double R, double b) {
  auto t = [&](double u, double v) {
    const double x = R * eps;
    return -detail::i_ratio(n, u, R, eps) * detail::i_ratio(n, v, R, eps) * detail::ik_same(n, x);
  };
  return {t(b, b), t(1.0, 1.0), t(b, 1.0)};
}

inline PTerms closed_p(const KernelModel& m, int n, double b) {
  if (n < 1) throw domain_error("closed_p: n must be >= 1");
  return std::visit(
      overloaded{
          [&](const EulerDisc& d) {
            const double r2 = d.R * d.R;
            return PTerms{-std::pow(b * b / r2, n) / (2.0 * n), -std::pow(r2, -n) / (2.0 * n),
                          -std::pow(b / r2, n) / (2.0 * n)};
          },
          [&](const GsqgDisc& g) { return gsqg_disc_p(n, g.beta, g.R, b); },
          [&](const QgswDisc& q) { return qgsw_disc_p(n, q.eps, q.R, b); },
          [&](const EulerAnnulus& a) {
            const auto G = annulus_green(a);
            const double bn = std::pow(b, n), bmn = std::pow(b, -n);
            return PTerms{-(G.Am(n, b) * bn + G.Bm(n, b) * bmn) / (2.0 * n),
                          -(G.Am(n, 1.0) + G.Bm(n, 1.0)) / (2.0 * n),
                          -(G.Am(n, 1.0) * bn + G.Bm(n, 1.0) * bmn) / (2.0 * n)};
          },
          [&](const EulerExterior& e) {
            const double r2n = std::pow(e.R, 2.0 * n);
            return PTerms{-r2n * std::pow(b, -2.0 * n) / (2.0 * n), -r2n / (2.0 * n),
                          -r2n * std::pow(b, -n) / (2.0 * n)};
          },
          [](const auto&) { return PTerms{}; }},
      m);
}

// ------------------------------------------------------------ velocities

/// (V1_b[0], V2_b[0]).
inline std::pair<double, double> v1_v2(const KernelModel& m, double b) {
  auto generic = [b](double l1b, double lt, double l11, double c, double ct) {
    return std::pair<double, double>{l1b - lt / b + c, -l11 + b * lt + ct};
  };
  return std::visit(
      overloaded{
          [&](const EulerPlane&) { return std::pair<double, double>{0.0, 0.5 * (b * b - 1.0)}; },
          [&](const EulerDisc&) { return std::pair<double, double>{0.0, 0.5 * (b * b - 1.0)}; },
          [&](const GsqgPlane& g) {
            const double l11 = gsqg_capital_lambda(1, 1.0, g.beta);
            return generic(std::pow(b, -g.beta) * l11, gsqg_capital_lambda(1, b, g.beta), l11, 0.0,
                           0.0);
          },
          [&](const QgswPlane& q) {
            const double e = q.eps;
            return generic(detail::ik_product(1.0, b * e, b * e), detail::ik_product(1.0, b * e, e),
                           detail::ik_product(1.0, e, e), 0.0, 0.0);
          },
          [&](const GsqgDisc& g) { return gsqg_disc_v_terms(g.beta, g.R, b); },
          [&](const QgswDisc& q) { return qgsw_disc_v_terms(q.eps, q.R, b); },
          [&](const EulerAnnulus& a) {
            const double c = annulus_green(a).frak_c(b);
            return std::pair<double, double>{c / (b * b), -0.5 * (1.0 - b * b) + c};
          },
          [&](const EulerExterior&) {
            return std::pair<double, double>{(1.0 - b * b) / (2.0 * b * b), 0.0};
          },
          [&](const CustomConvolution& c) {
            return generic(quadrature_lambda(c.mu, 1, b), quadrature_tilde_lambda(c.mu, 1, b),
                           quadrature_lambda(c.mu, 1, 1.0), c.c, c.ct);
          }},
      m);
}

// ------------------------------------------------- smooth part, pointwise

/// K1(x, y) for the Euler disc, annulus and exterior (complex points).
inline double euler_k1(const KernelModel& m, std::complex<double> x, std::complex<double> y) {
  const double inv2pi = 1.0 / (2.0 * pi);
  if (auto* d = std::get_if<EulerDisc>(&m)) return inv2pi * std::log(std::abs(d->R - x * std::conj(y) / d->R));
  if (auto* e = std::get_if<EulerExterior>(&m))
    return inv2pi * std::log(std::abs(e->R - x * std::conj(y) / e->R));
  if (auto* a = std::get_if<EulerAnnulus>(&m)) {
    const auto G = annulus_green(*a);
    const double s = std::abs(y), r = std::abs(x);
    const double R22 = a->R2 * a->R2, R11 = a->R1 * a->R1, q2 = R11 / R22;
    const auto w1 = x * std::conj(y) / R22, w2 = R11 * x / (y * R22);
    const auto w3 = R11 / (x * std::conj(y)), w4 = R11 * y / (x * R22);
    double sum = G.A0(s) + G.B0(s) * std::log(r);
    // the factors stay near 1, so one log of the running product suffices
    std::complex<double> num = 1.0, den = 1.0;
    double cj = 1.0;
    for (int j = 0; j < 100000; ++j) {
      num *= (1.0 - cj * w1) * (1.0 - cj * w3);
      den *= (1.0 - cj * w2) * (1.0 - cj * w4);
      cj *= q2;
      if (cj < 1e-18) break;
      if (j % 16 == 15) {
        sum += std::log(std::abs(num / den));
        num = den = 1.0;
      }
    }
    return inv2pi * (sum + std::log(std::abs(num / den)));
  }
  throw domain_error("euler_k1: model has no closed-form smooth kernel");
}

/// grad_x K1(x, y), returned as the complex number dK/dx1 + i dK/dx2.
inline std::complex<double> euler_k1_grad(const KernelModel& m, std::complex<double> x,
                                          std::complex<double> y) {
  const double inv2pi = 1.0 / (2.0 * pi);
  // grad Re f = conj(f') for analytic f
  auto disc_like = [&](double R) {
    const auto yb = std::conj(y);
    return inv2pi * std::conj((-yb / R) / (R - x * yb / R));
  };
  if (auto* d = std::get_if<EulerDisc>(&m)) return disc_like(d->R);
  if (auto* e = std::get_if<EulerExterior>(&m)) return disc_like(e->R);
  if (auto* a = std::get_if<EulerAnnulus>(&m)) {
    const auto G = annulus_green(*a);
    const double s = std::abs(y);
    const double R22 = a->R2 * a->R2, R11 = a->R1 * a->R1, q2 = R11 / R22;
    const auto yb = std::conj(y);
    const auto k1 = yb / R22, k2 = R11 / (y * R22);
    const auto k3 = R11 / yb, k4 = R11 * y / R22;
    std::complex<double> d = G.B0(s) / x;
    double cj = 1.0;
    for (int j = 0; j < 100000; ++j) {
      d += -cj * k1 / (1.0 - cj * k1 * x) + cj * k2 / (1.0 - cj * k2 * x);
      d += cj * k3 / (x * x) / (1.0 - cj * k3 / x) - cj * k4 / (x * x) / (1.0 - cj * k4 / x);
      cj *= q2;
      if (cj < 1e-18) break;
    }
    return inv2pi * std::conj(d);
  }
  throw domain_error("euler_k1_grad: model has no closed-form smooth kernel");
}

// ------------------------------------------------------------- config

/// Builds a model from keys model.name, model.beta, model.eps, model.R,
/// model.R1, model.R2, model.alpha, model.c, model.ct (+ measure.* for custom).
/// An annulus with R2 = inf becomes the exterior model.
inline KernelModel model_from_config(const Config& cfg) {
  const std::string name = cfg.get_string("model.name", "euler-plane");
  const double beta = cfg.get_double("model.beta", 0.5);
  const double eps = cfg.get_double("model.eps", 1.0);
  KernelModel m;
  if (name == "euler-plane") m = EulerPlane{};
  else if (name == "gsqg-plane") m = GsqgPlane{beta};
  else if (name == "qgsw-plane") m = QgswPlane{eps};
  else if (name == "euler-disc") m = EulerDisc{cfg.get_double("model.R", 2.0)};
  else if (name == "gsqg-disc") m = GsqgDisc{beta, cfg.get_double("model.R", 2.0)};
  else if (name == "qgsw-disc") m = QgswDisc{eps, cfg.get_double("model.R", 2.0)};
  else if (name == "euler-annulus") {
    const double r1 = cfg.get_double("model.R1", 0.1), r2 = cfg.get_double("model.R2", 10.0);
    if (std::isinf(r2)) m = EulerExterior{r1};
    else m = EulerAnnulus{r1, r2};
  } else if (name == "euler-exterior") m = EulerExterior{cfg.get_double("model.R", 0.1)};
  else if (name == "custom") {
    m = CustomConvolution{measure_from_config(cfg), cfg.get_double("model.alpha", 0.5),
                          cfg.get_double("model.c", 0.0), cfg.get_double("model.ct", 0.0)};
  } else throw usage_error("unknown model '" + name + "'");
  validate(m);
  return m;
}

}  // namespace vstate

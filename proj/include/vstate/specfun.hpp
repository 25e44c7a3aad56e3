// SPDX-License-Identifier: Apache-2.0
/// @file specfun.hpp
/// @brief Gamma, Bessel J/I/K and their zeros, Gauss 2F1, Chebyshev T/U.
///
/// Gamma and the Bessel functions are thin wrappers over the C++17
/// mathematical special functions with explicit domain and overflow
/// signalling, plus exponentially scaled I/K for large arguments.
#pragma once

#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"

namespace vstate {

inline constexpr double pi = std::numbers::pi;
inline constexpr double euler_gamma = std::numbers::egamma;

// ---------------------------------------------------------------- gamma

inline constexpr double gamma_overflow = 171.6243769563027;

/// Gamma function for x > 0.
inline double gamma_fn(double x) {
  if (!(x > 0.0)) throw domain_error("gamma_fn: x must be positive");
  if (x > gamma_overflow) throw overflow_error("gamma_fn: overflow");
  return std::tgamma(x);
}

/// 1/Gamma(x) for any real x, zero at the poles.
inline double rgamma(double x) {
  if (x <= 0.0 && x == std::floor(x)) return 0.0;
  if (x > gamma_overflow) return 0.0;
  return 1.0 / std::tgamma(x);
}

/// Rising factorial (x)_n = x(x+1)...(x+n-1), with (x)_0 = 1.
inline double pochhammer(double x, int n) {
  double p = 1.0;
  for (int k = 0; k < n; ++k) p *= x + k;
  return p;
}

// --------------------------------------------------------------- Bessel

/// J_nu(x) for x >= 0.
inline double bessel_j(double nu, double x) {
  if (x < 0.0) throw domain_error("bessel_j: negative argument");
  if (x == 0.0) return nu == 0.0 ? 1.0 : 0.0;
  return std::cyl_bessel_j(nu, x);
}
inline double bessel_j(int n, double x) { return bessel_j(static_cast<double>(n), x); }

/// dJ_n/dx.
inline double bessel_jp(int n, double x) {
  if (n == 0) return -bessel_j(1, x);
  return 0.5 * (bessel_j(n - 1, x) - bessel_j(n + 1, x));
}

namespace detail {

// a_k(nu) of the Hankel large-argument expansions
inline double hankel_coef(double nu, int k) {
  const double mu = 4.0 * nu * nu;
  double a = 1.0;
  for (int j = 1; j <= k; ++j) a *= (mu - (2.0 * j - 1) * (2.0 * j - 1)) / (j * 8.0);
  return a;
}

// sum_k (sign)^k a_k / x^k, stopped at the smallest term
inline double hankel_sum(double nu, double x, double sign) {
  double s = 1.0, term = 1.0, last = 1e300;
  const double mu = 4.0 * nu * nu;
  for (int k = 1; k < 60; ++k) {
    term *= sign * (mu - (2.0 * k - 1) * (2.0 * k - 1)) / (k * 8.0 * x);
    if (std::abs(term) >= last) break;
    s += term;
    last = std::abs(term);
    if (last < 1e-17 * std::abs(s)) break;
  }
  return s;
}

inline constexpr double scaled_crossover = 500.0;

}  // namespace detail

/// e^{-x} I_nu(x).
inline double bessel_ie(double nu, double x) {
  if (x < 0.0) throw domain_error("bessel_ie: negative argument");
  if (x == 0.0) return nu == 0.0 ? 1.0 : 0.0;
  if (x < detail::scaled_crossover) return std::cyl_bessel_i(nu, x) * std::exp(-x);
  return detail::hankel_sum(nu, x, -1.0) / std::sqrt(2.0 * pi * x);
}

/// e^{x} K_nu(x).
inline double bessel_ke(double nu, double x) {
  if (!(x > 0.0)) throw domain_error("bessel_ke: argument must be positive");
  if (x < detail::scaled_crossover) return std::cyl_bessel_k(nu, x) * std::exp(x);
  return detail::hankel_sum(nu, x, 1.0) * std::sqrt(pi / (2.0 * x));
}

/// I_nu(x) for x >= 0.
inline double bessel_i(double nu, double x) {
  if (x < 0.0) throw domain_error("bessel_i: negative argument");
  if (x == 0.0) return nu == 0.0 ? 1.0 : 0.0;
  if (x > 700.0) throw overflow_error("bessel_i: overflow");
  return std::cyl_bessel_i(nu, x);
}
inline double bessel_i(int n, double x) { return bessel_i(static_cast<double>(n), x); }

/// K_nu(x) for x > 0.
inline double bessel_k(double nu, double x) {
  if (!(x > 0.0)) throw domain_error("bessel_k: argument must be positive");
  if (x > 700.0) return 0.0;
  return std::cyl_bessel_k(nu, x);
}
inline double bessel_k(int n, double x) { return bessel_k(static_cast<double>(n), x); }

/// K_n(x)/I_n(x) without overflow; zero once the ratio underflows.
inline double bessel_k_over_i(double nu, double x) {
  if (x > 370.0) return 0.0;
  return bessel_ke(nu, x) / bessel_ie(nu, x) * std::exp(-2.0 * x);
}

namespace detail {

// Debye polynomials u_1..u_3 of the uniform expansion, in t = 1/sqrt(1+z^2)
inline void debye_u(double t, double u[4]) {
  const double t2 = t * t;
  u[0] = 1.0;
  u[1] = t * (3.0 - 5.0 * t2) / 24.0;
  u[2] = t2 * (81.0 - 462.0 * t2 + 385.0 * t2 * t2) / 1152.0;
  u[3] = t * t2 * (30375.0 - 369603.0 * t2 + 765765.0 * t2 * t2 - 425425.0 * t2 * t2 * t2) / 414720.0;
}

inline bool usable(double v) {
  return std::isfinite(v) && v > 1e-280 && v < 1e280;
}

}  // namespace detail

/// log I_nu(x), through the uniform expansion when I_nu(x) leaves the double range.
inline double log_bessel_i(double nu, double x) {
  if (!(x > 0.0)) throw domain_error("log_bessel_i: argument must be positive");
  if (x < detail::scaled_crossover) {
    const double v = std::cyl_bessel_i(nu, x) * std::exp(-x);
    if (detail::usable(v)) return std::log(v) + x;
  } else {
    return std::log(bessel_ie(nu, x)) + x;
  }
  if (nu < 1.0) throw overflow_error("log_bessel_i: order too small for uniform expansion");
  const double z = x / nu, sq = std::sqrt(1.0 + z * z);
  const double eta = sq + std::log(z / (1.0 + sq));
  double u[4];
  detail::debye_u(1.0 / sq, u);
  const double corr = 1.0 + u[1] / nu + u[2] / (nu * nu) + u[3] / (nu * nu * nu);
  return nu * eta - 0.5 * std::log(2.0 * pi * nu) - 0.5 * std::log(sq) + std::log(corr);
}

/// log K_nu(x), through the uniform expansion when K_nu(x) leaves the double range.
inline double log_bessel_k(double nu, double x) {
  if (!(x > 0.0)) throw domain_error("log_bessel_k: argument must be positive");
  if (x < detail::scaled_crossover) {
    const double v = std::cyl_bessel_k(nu, x) * std::exp(x);
    if (detail::usable(v)) return std::log(v) - x;
  } else {
    return std::log(bessel_ke(nu, x)) - x;
  }
  if (nu < 1.0) throw overflow_error("log_bessel_k: order too small for uniform expansion");
  const double z = x / nu, sq = std::sqrt(1.0 + z * z);
  const double eta = sq + std::log(z / (1.0 + sq));
  double u[4];
  detail::debye_u(1.0 / sq, u);
  const double corr = 1.0 - u[1] / nu + u[2] / (nu * nu) - u[3] / (nu * nu * nu);
  return -nu * eta + 0.5 * std::log(pi / (2.0 * nu)) - 0.5 * std::log(sq) + std::log(corr);
}

/// I_nu(s) K_nu(t) for 0 < s, t, safe for large orders.
inline double bessel_ik(double nu, double s, double t) {
  const double a = bessel_ie(nu, s), c = bessel_ke(nu, t);
  if (detail::usable(a) && detail::usable(c)) return a * c * std::exp(s - t);
  return std::exp(log_bessel_i(nu, s) + log_bessel_k(nu, t));
}

/// I_nu(s)/I_nu(t) for 0 < s, t, safe for large orders.
inline double bessel_i_ratio(double nu, double s, double t) {
  const double a = bessel_ie(nu, s), c = bessel_ie(nu, t);
  if (detail::usable(a) && detail::usable(c)) return a / c * std::exp(s - t);
  return std::exp(log_bessel_i(nu, s) - log_bessel_i(nu, t));
}

/// Large-argument Hankel form of J_nu, used for far tails of zero series.
inline double bessel_j_asym(double nu, double x, int terms = 3) {
  const double w = x - 0.5 * nu * pi - 0.25 * pi;
  double P = 0.0, Q = 0.0, xp = 1.0;
  for (int k = 0; k < 2 * terms; ++k) {
    const double a = detail::hankel_coef(nu, k) / xp;
    if (k % 2 == 0)
      P += (k % 4 == 0 ? 1.0 : -1.0) * a;
    else
      Q += (k % 4 == 1 ? 1.0 : -1.0) * a;
    xp *= x;
  }
  return std::sqrt(2.0 / (pi * x)) * (P * std::cos(w) - Q * std::sin(w));
}

// ----------------------------------------------------------- zeros of J

/// McMahon's expansion of the k-th positive zero of J_n.
inline double mcmahon_zero(int n, long k) {
  const double mu = 4.0 * n * n;
  const double be = (k + 0.5 * n - 0.25) * pi;
  const double e = 8.0 * be;
  const double e2 = e * e;
  return be - (mu - 1) / e - 4 * (mu - 1) * (7 * mu - 31) / (3 * e * e2) -
         32 * (mu - 1) * (83 * mu * mu - 982 * mu + 3779) / (15 * e * e2 * e2);
}

struct BesselZeroTable {
  int order = 0;
  std::vector<double> zeros;
};

namespace detail {

// root of J_n in [lo, hi] with a sign change; Newton steps kept inside the bracket
inline double refine_zero(int n, double lo, double hi) {
  double flo = bessel_j(n, lo);
  double x = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    const double f = bessel_j(n, x);
    if (std::abs(f) < 1e-15) return x;
    if ((f < 0) == (flo < 0)) {
      lo = x;
      flo = f;
    } else {
      hi = x;
    }
    const double d = bessel_jp(n, x);
    double xn = x - f / d;
    if (!(xn > lo && xn < hi)) xn = 0.5 * (lo + hi);
    if (std::abs(xn - x) < 1e-15 * x) return xn;
    x = xn;
  }
  if (std::abs(bessel_j(n, x)) < 1e-12) return x;
  throw convergence_error("bessel_zeros: refinement stalled");
}

}  // namespace detail

/// First `count` positive zeros of J_n. Zeros are bracketed by a scan with
/// step 0.4 seeded past the previous zero, then polished.
inline BesselZeroTable bessel_zeros(int n, int count) {
  if (count < 1) throw domain_error("bessel_zeros: count must be positive");
  if (n < 0) throw domain_error("bessel_zeros: negative order");
  BesselZeroTable t;
  t.order = n;
  t.zeros.reserve(count);
  // j_{n,1} > n, and consecutive zeros are more than 2.5 apart
  double x = n == 0 ? 1.0 : static_cast<double>(n);
  if (n > 0) x = std::max(x, mcmahon_zero(n, 1) - 0.5 * n - 1.0);
  x = std::max(x, 0.5);
  double fx = bessel_j(n, x);
  const double step = 0.4;
  while (static_cast<int>(t.zeros.size()) < count) {
    double y = x + step, fy = bessel_j(n, y);
    if (fy == 0.0) {
      t.zeros.push_back(y);
      x = y + 1.0;
      fx = bessel_j(n, x);
      continue;
    }
    if ((fx < 0) != (fy < 0)) {
      const double z = detail::refine_zero(n, x, y);
      t.zeros.push_back(z);
      x = z + 2.5;
      fx = bessel_j(n, x);
    } else {
      x = y;
      fx = fy;
    }
  }
  return t;
}

/// Cached copy of bessel_zeros, grown on demand.
inline const std::vector<double>& bessel_zero_cache(int n, int count) {
  static std::mutex mtx;
  static std::map<int, std::vector<double>> cache;
  std::lock_guard<std::mutex> lock(mtx);
  auto& v = cache[n];
  if (static_cast<int>(v.size()) < count) v = bessel_zeros(n, count).zeros;
  return v;
}

// ------------------------------------------------------- hypergeometric

namespace detail {

inline double hyp2f1_series(double a, double b, double c, double z,
                            long max_terms = 2000000) {
  double sum = 1.0, term = 1.0;
  for (long k = 0; k < max_terms; ++k) {
    term *= (a + k) * (b + k) / ((c + k) * (k + 1.0)) * z;
    sum += term;
    if (term == 0.0) return sum;
    if (std::abs(term) < 1e-17 * std::abs(sum) && k > 2) return sum;
  }
  throw convergence_error("hyp2f1: series did not converge");
}

inline bool is_integer(double x, double tol = 1e-12) {
  return std::abs(x - std::round(x)) < tol;
}

}  // namespace detail

/// Gauss hypergeometric F(a,b;c;z) for z in [0, 1]. At z = 1 it needs
/// c - a - b > 0. Above z = 0.75 the 1 - z connection formula is used
/// unless c - a - b is an integer.
inline double hyp2f1(double a, double b, double c, double z) {
  if (c <= 0.0 && c == std::floor(c))
    throw domain_error("hyp2f1: pole at nonpositive integer c");
  if (z < 0.0 || z > 1.0) throw domain_error("hyp2f1: z outside [0, 1]");
  if (z == 0.0) return 1.0;
  const double s = c - a - b;
  if (z == 1.0) {
    if (!(s > 0.0)) throw domain_error("hyp2f1: divergent at z = 1");
    return std::tgamma(c) * std::tgamma(s) * rgamma(c - a) * rgamma(c - b);
  }
  if (z <= 0.75 || detail::is_integer(s, 1e-9)) return detail::hyp2f1_series(a, b, c, z);
  const double w = 1.0 - z;
  const double t1 = std::tgamma(c) * std::tgamma(s) * rgamma(c - a) * rgamma(c - b);
  const double t2 = std::tgamma(c) * std::tgamma(-s) * rgamma(a) * rgamma(b);
  double v = 0.0;
  if (t1 != 0.0) v += t1 * detail::hyp2f1_series(a, b, 1.0 - s, w);
  if (t2 != 0.0) v += t2 * std::pow(w, s) * detail::hyp2f1_series(c - a, c - b, 1.0 + s, w);
  return v;
}

// ------------------------------------------------------------ Chebyshev

/// T_n(x) by the three-term recurrence.
inline double chebyshev_t(int n, double x) {
  if (n == 0) return 1.0;
  double t0 = 1.0, t1 = x;
  for (int k = 1; k < n; ++k) {
    const double t2 = 2.0 * x * t1 - t0;
    t0 = t1;
    t1 = t2;
  }
  return t1;
}

/// U_n(x) by the three-term recurrence.
inline double chebyshev_u(int n, double x) {
  if (n == 0) return 1.0;
  double u0 = 1.0, u1 = 2.0 * x;
  for (int k = 1; k < n; ++k) {
    const double u2 = 2.0 * x * u1 - u0;
    u0 = u1;
    u1 = u2;
  }
  return u1;
}

}  // namespace vstate

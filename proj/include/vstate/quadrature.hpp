// SPDX-License-Identifier: Apache-2.0
/// @file quadrature.hpp
/// @brief Adaptive Gauss-Kronrod, Gauss-Legendre and periodic trapezoid rules.
#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <queue>
#include <utility>
#include <vector>

#include "errors.hpp"

namespace vstate {

struct QuadResult {
  double value = 0.0;
  double error = 0.0;
  int intervals = 0;
  bool converged = false;
};

namespace detail {

inline constexpr double xgk[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0};
inline constexpr double wgk[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
// Gauss weights at xgk[1], xgk[3], xgk[5], xgk[7]
inline constexpr double wg[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
  double a, b, value, error;
  bool operator<(const Segment& o) const { return error < o.error; }
};

template <class F>
Segment gk15(F& f, double a, double b) {
  const double c = 0.5 * (a + b), h = 0.5 * (b - a);
  const double fc = f(c);
  double rk = fc * wgk[7], rg = fc * wg[3];
  for (int j = 0; j < 7; ++j) {
    const double dx = h * xgk[j];
    const double s = f(c - dx) + f(c + dx);
    rk += wgk[j] * s;
    if (j % 2 == 1) rg += wg[j / 2] * s;
  }
  return {a, b, rk * h, std::abs((rk - rg) * h)};
}

}  // namespace detail

/// Globally adaptive G7K15 on [a, b]. Stops when the summed error
/// estimate is below max(abstol, reltol*|I|) or the interval budget is spent.
template <class F>
QuadResult integrate(F&& f, double a, double b, double abstol = 1e-12,
                     double reltol = 1e-12, int max_intervals = 4000) {
  QuadResult out;
  if (a == b) {
    out.converged = true;
    return out;
  }
  std::priority_queue<detail::Segment> heap;
  auto first = detail::gk15(f, a, b);
  double total = first.value, err = first.error;
  heap.push(first);
  int n = 1;
  while (err > std::max(abstol, reltol * std::abs(total)) && n < max_intervals) {
    auto s = heap.top();
    heap.pop();
    const double m = 0.5 * (s.a + s.b);
    if (m <= s.a || m >= s.b) {  // interval too small to split
      heap.push(s);
      break;
    }
    auto l = detail::gk15(f, s.a, m), r = detail::gk15(f, m, s.b);
    total += l.value + r.value - s.value;
    err += l.error + r.error - s.error;
    heap.push(l);
    heap.push(r);
    ++n;
  }
  // re-add to limit cancellation drift in the running sums
  total = 0.0;
  err = 0.0;
  while (!heap.empty()) {
    total += heap.top().value;
    err += heap.top().error;
    heap.pop();
  }
  out.value = total;
  out.error = err;
  out.intervals = n;
  out.converged = err <= std::max(abstol, reltol * std::abs(total));
  return out;
}

/// Integral over [a, inf) through x = a + t/(1-t).
template <class F>
QuadResult integrate_to_inf(F&& f, double a, double abstol = 1e-12,
                            double reltol = 1e-12, int max_intervals = 4000) {
  auto g = [&](double t) {
    if (t >= 1.0) return 0.0;
    const double u = 1.0 - t;
    const double v = f(a + t / u);
    return std::isfinite(v) ? v / (u * u) : 0.0;
  };
  return integrate(g, 0.0, 1.0, abstol, reltol, max_intervals);
}

/// Value of an adaptive integral, throwing if the error target was missed.
template <class F>
double integrate_or_throw(F&& f, double a, double b, double abstol,
                          double reltol, const char* what) {
  auto r = integrate(std::forward<F>(f), a, b, abstol, reltol);
  if (!r.converged && r.error > 100 * std::max(abstol, reltol * std::abs(r.value)))
    throw convergence_error(std::string(what) + ": quadrature did not converge");
  return r.value;
}

/// Gauss-Legendre nodes and weights on [-1, 1].
inline std::pair<std::vector<double>, std::vector<double>> gauss_legendre(int n) {
  std::vector<double> x(n), w(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = z;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (z * p1 - p0) / (z * z - 1.0);
      const double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    {
      double p0 = 1.0, p1 = z;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (z * p1 - p0) / (z * z - 1.0);
    }
    x[i] = -z;
    x[n - 1 - i] = z;
    w[i] = w[n - 1 - i] = 2.0 / ((1.0 - z * z) * dp * dp);
  }
  return {x, w};
}

/// Periodic trapezoid on [0, 2pi) with node doubling until two successive
/// values agree to tol.
template <class F>
QuadResult periodic_trapezoid(F&& f, double tol = 1e-12, int n0 = 64,
                              int nmax = 1 << 20) {
  const double two_pi = 2.0 * std::numbers::pi;
  int n = n0;
  double sum = 0.0;
  for (int j = 0; j < n; ++j) sum += f(two_pi * j / n);
  double prev = sum * two_pi / n;
  QuadResult out;
  while (n < nmax) {
    // odd nodes of the refined grid
    double add = 0.0;
    for (int j = 0; j < n; ++j) add += f(two_pi * (j + 0.5) / n);
    sum += add;
    n *= 2;
    const double cur = sum * two_pi / n;
    out.value = cur;
    out.error = std::abs(cur - prev);
    if (out.error <= tol * std::max(1.0, std::abs(cur))) {
      out.converged = true;
      break;
    }
    prev = cur;
  }
  out.intervals = n;
  return out;
}

}  // namespace vstate

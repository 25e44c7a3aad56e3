// SPDX-License-Identifier: Apache-2.0
/// @file cmkernel.hpp
/// @brief Bernstein measures, reconstruction of K0 from mu, and the
/// weighted integral of g(x) dmu(x)/x.
#pragma once

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "config.hpp"
#include "errors.hpp"
#include "quadrature.hpp"
#include "specfun.hpp"

namespace vstate {

enum class DensityFamily { None, EulerFlat, GsqgPower, QgswShifted, TruncatedLow, TruncatedHigh };

struct Atom {
  double x = 0.0;
  double mass = 0.0;
};

/// Density part of a measure.
///
/// TruncatedLow:  f(x) = coef x^power e^{-rate x} on (0, cut)
/// TruncatedHigh: f(x) = coef x^power e^{-rate x} on (cut, inf), with the
///                declared growth exponent gamma (f <= C x^{1-gamma}).
struct Density {
  DensityFamily family = DensityFamily::None;
  double beta = 0.5;
  double eps = 1.0;
  double coef = 1.0;
  double power = 0.0;
  double rate = 0.0;
  double cut = 1.0;
  double gamma = 1.0;
};

struct Measure {
  std::vector<Atom> atoms;
  Density density;

  static Measure euler() { return {{}, {DensityFamily::EulerFlat}}; }
  static Measure gsqg(double beta) {
    Measure m;
    m.density.family = DensityFamily::GsqgPower;
    m.density.beta = beta;
    return m;
  }
  static Measure qgsw(double eps) {
    Measure m;
    m.density.family = DensityFamily::QgswShifted;
    m.density.eps = eps;
    return m;
  }
  static Measure truncated_low(double coef, double power, double rate, double cut) {
    Measure m;
    m.density = {DensityFamily::TruncatedLow, 0.5, 1.0, coef, power, rate, cut, 1.0};
    return m;
  }
  static Measure truncated_high(double coef, double power, double rate, double cut,
                                double gamma) {
    Measure m;
    m.density = {DensityFamily::TruncatedHigh, 0.5, 1.0, coef, power, rate, cut, gamma};
    return m;
  }
};

/// c_beta = Gamma(beta/2) / (pi 2^{2-beta} Gamma(1-beta/2)).
inline double gsqg_c(double beta) {
  return gamma_fn(0.5 * beta) / (pi * std::pow(2.0, 2.0 - beta) * gamma_fn(1.0 - 0.5 * beta));
}

/// Density of mu with respect to dx (zero off the support).
inline double density_value(const Density& d, double x) {
  switch (d.family) {
    case DensityFamily::None:
      return 0.0;
    case DensityFamily::EulerFlat:
      return x >= 0.0 ? 1.0 / (2.0 * pi) : 0.0;
    case DensityFamily::GsqgPower:
      return x >= 0.0 ? gsqg_c(d.beta) * std::pow(x, d.beta) / gamma_fn(d.beta) : 0.0;
    case DensityFamily::QgswShifted:
      return x > d.eps ? x / (2.0 * pi * std::sqrt(x * x - d.eps * d.eps)) : 0.0;
    case DensityFamily::TruncatedLow:
      return (x > 0.0 && x < d.cut) ? d.coef * std::pow(x, d.power) * std::exp(-d.rate * x) : 0.0;
    case DensityFamily::TruncatedHigh:
      return x > d.cut ? d.coef * std::pow(x, d.power) * std::exp(-d.rate * x) : 0.0;
  }
  return 0.0;
}

/// Checks the structural assumptions on mu and throws domain_error on failure.
inline void validate(const Measure& mu) {
  bool nonzero = false;
  for (const auto& a : mu.atoms) {
    if (!(a.x >= 0.0)) throw domain_error("measure: atom location must be >= 0");
    if (!(a.mass > 0.0)) throw domain_error("measure: atom mass must be > 0");
    nonzero = true;
  }
  const auto& d = mu.density;
  switch (d.family) {
    case DensityFamily::None:
      break;
    case DensityFamily::EulerFlat:
      nonzero = true;
      break;
    case DensityFamily::GsqgPower:
      if (!(d.beta > 0.0 && d.beta < 1.0)) throw domain_error("measure: gSQG beta must lie in (0,1)");
      nonzero = true;
      break;
    case DensityFamily::QgswShifted:
      if (!(d.eps > 0.0)) throw domain_error("measure: QGSW eps must be > 0");
      nonzero = true;
      break;
    case DensityFamily::TruncatedLow:
      if (!(d.cut > 0.0) || !(d.coef > 0.0)) throw domain_error("measure: truncated-low needs cut > 0, coef > 0");
      if (!(d.power > -1.0)) throw domain_error("measure: truncated-low density not integrable at 0");
      nonzero = true;
      break;
    case DensityFamily::TruncatedHigh:
      if (!(d.cut > 0.0) || !(d.coef > 0.0)) throw domain_error("measure: truncated-high needs cut > 0, coef > 0");
      if (d.rate < 0.0) throw domain_error("measure: truncated-high rate must be >= 0");
      if (d.rate == 0.0 && !(d.power <= 1.0 - d.gamma && d.gamma > 0.0))
        throw domain_error("measure: truncated-high density exceeds the x^{1-gamma} bound");
      nonzero = true;
      break;
  }
  if (!nonzero) throw domain_error("measure: identically zero");
}

namespace detail {

// int h(x) rho(x) dx / x over the density support, in a variable that makes
// the integrand smooth: x = e^u in general, x = eps cosh v for QGSW.
template <class H>
QuadResult density_integral(const Density& d, H&& h, double abstol, double reltol) {
  QuadResult out;
  out.converged = true;
  auto add = [&](const QuadResult& r) {
    out.value += r.value;
    out.error += r.error;
    out.intervals += r.intervals;
    out.converged = out.converged && r.converged;
  };
  if (d.family == DensityFamily::None) return out;
  if (d.family == DensityFamily::QgswShifted) {
    const double e = d.eps;
    add(integrate_to_inf([&](double v) { return h(e * std::cosh(v)) / (2.0 * pi); }, 0.0,
                         abstol, reltol));
    return out;
  }
  auto in_u = [&](double u) {
    const double x = std::exp(u);
    if (x == 0.0 || !std::isfinite(x)) return 0.0;
    const double r = density_value(d, x);
    return r == 0.0 ? 0.0 : h(x) * r;
  };
  double lo_u = -std::numeric_limits<double>::infinity();
  double hi_u = std::numeric_limits<double>::infinity();
  if (d.family == DensityFamily::TruncatedLow) hi_u = std::log(d.cut);
  if (d.family == DensityFamily::TruncatedHigh) lo_u = std::log(d.cut);
  const double mid = std::isfinite(lo_u) ? lo_u : (std::isfinite(hi_u) ? hi_u : 0.0);
  if (!std::isfinite(lo_u))
    add(integrate_to_inf([&](double w) { return in_u(mid - w); }, 0.0, abstol, reltol));
  if (!std::isfinite(hi_u))
    add(integrate_to_inf([&](double w) { return in_u(mid + w); }, 0.0, abstol, reltol));
  return out;
}

}  // namespace detail

/// int_0^inf g(x) dmu(x)/x. Atoms at x > 0 contribute mass g(x)/x; an atom
/// at the origin contributes mass g'(0), estimated by Richardson extrapolation.
template <class G>
QuadResult spectral_integral_ex(G&& g, const Measure& mu, double abstol = 1e-16,
                                double reltol = 1e-11) {
  QuadResult r = detail::density_integral(mu.density, g, abstol, reltol);
  for (const auto& a : mu.atoms) {
    if (a.x > 0.0) {
      r.value += a.mass * g(a.x) / a.x;
    } else {
      const double h = 1e-4;
      r.value += a.mass * (2.0 * g(h) / h - g(2.0 * h) / (2.0 * h));
    }
  }
  return r;
}

template <class G>
double spectral_integral(G&& g, const Measure& mu, double abstol = 1e-16,
                         double reltol = 1e-11) {
  auto r = spectral_integral_ex(std::forward<G>(g), mu, abstol, reltol);
  if (!r.converged && r.error > 1e-9 + 1e-9 * std::abs(r.value))
    throw convergence_error("spectral_integral: tail or quadrature tolerance not reached");
  return r.value;
}

/// K0(t) = c0 + int (e^{-tx} - e^{-x})/x dmu(x), normalised by K0(1) = c0.
inline double k0_eval(const Measure& mu, double t, double c0) {
  if (!(t > 0.0)) throw domain_error("k0_eval: t must be positive");
  if (t == 1.0) return c0;
  auto h = [t](double x) {
    if (x < 1e-8) return (1.0 - t) * x + 0.5 * (t * t - 1.0) * x * x;
    return std::exp(-t * x) - std::exp(-x);
  };
  auto r = spectral_integral_ex(h, mu, 1e-13, 1e-12);
  if (!r.converged && r.error > 1e-9 + 1e-9 * std::abs(r.value))
    throw convergence_error("k0_eval: integrand tail did not decay");
  return c0 + r.value;
}

/// -K0'(t) = int e^{-tx} dmu(x).
inline double k0_minus_derivative(const Measure& mu, double t) {
  if (!(t > 0.0)) throw domain_error("k0_minus_derivative: t must be positive");
  return spectral_integral([t](double x) { return x * std::exp(-t * x); }, mu, 1e-13, 1e-12);
}

inline const char* family_name(DensityFamily f) {
  switch (f) {
    case DensityFamily::None: return "none";
    case DensityFamily::EulerFlat: return "euler";
    case DensityFamily::GsqgPower: return "gsqg";
    case DensityFamily::QgswShifted: return "qgsw";
    case DensityFamily::TruncatedLow: return "truncated-low";
    case DensityFamily::TruncatedHigh: return "truncated-high";
  }
  return "none";
}

/// Builds a measure from keys
///   measure.family = euler | gsqg | qgsw | truncated-low | truncated-high | none
///   measure.beta, measure.eps, measure.coef, measure.power, measure.rate,
///   measure.cut, measure.gamma
///   measure.atoms = x1:m1, x2:m2, ...
inline Measure measure_from_config(const Config& cfg, const std::string& prefix = "measure.") {
  Measure mu;
  const std::string fam = cfg.get_string(prefix + "family", "none");
  auto& d = mu.density;
  d.beta = cfg.get_double(prefix + "beta", 0.5);
  d.eps = cfg.get_double(prefix + "eps", 1.0);
  d.coef = cfg.get_double(prefix + "coef", 1.0);
  d.power = cfg.get_double(prefix + "power", 0.0);
  d.rate = cfg.get_double(prefix + "rate", 0.0);
  d.cut = cfg.get_double(prefix + "cut", 1.0);
  d.gamma = cfg.get_double(prefix + "gamma", 1.0);
  if (fam == "none") d.family = DensityFamily::None;
  else if (fam == "euler") d.family = DensityFamily::EulerFlat;
  else if (fam == "gsqg") d.family = DensityFamily::GsqgPower;
  else if (fam == "qgsw") d.family = DensityFamily::QgswShifted;
  else if (fam == "truncated-low") d.family = DensityFamily::TruncatedLow;
  else if (fam == "truncated-high") d.family = DensityFamily::TruncatedHigh;
  else throw usage_error("unknown measure family '" + fam + "'");
  const std::string atoms = cfg.get_string(prefix + "atoms", "");
  for (const auto& item : split_list(atoms)) {
    const auto colon = item.find(':');
    if (colon == std::string::npos) throw usage_error("atom '" + item + "' must be x:mass");
    mu.atoms.push_back({parse_double(item.substr(0, colon)), parse_double(item.substr(colon + 1))});
  }
  validate(mu);
  return mu;
}

}  // namespace vstate

// SPDX-License-Identifier: Apache-2.0
/// @file dispersion.hpp
/// @brief Spectral rows, the dispersion quadratic, symmetry-fold
/// thresholds, monotonicity scans and stability classification.
#pragma once

#include <array>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "errors.hpp"
#include "models.hpp"
#include "universal.hpp"

namespace vstate {

enum class Source { None, ClosedForm, Quadrature, Integral };

inline const char* source_name(Source s) {
  switch (s) {
    case Source::None: return "none";
    case Source::ClosedForm: return "closed-form";
    case Source::Quadrature: return "quadrature";
    case Source::Integral: return "integral";
  }
  return "none";
}

struct SpectralRow {
  int n = 1;
  double b = 0.5;
  double lambda_b = 0.0;  ///< lambda_{n,b}
  double lambda_1 = 0.0;  ///< lambda_{n,1}
  double lambda_t = 0.0;  ///< lambda~_{n,b}
  double p_b = 0.0;
  double p_1 = 0.0;
  double p_t = 0.0;
  double c = 0.0;   ///< c_b
  double ct = 0.0;  ///< c~_b
  Source src_lambda = Source::ClosedForm;
  Source src_p = Source::None;
  Source src_c = Source::None;
};

enum class Stability { Stable, Unstable, Degenerate };

inline const char* stability_name(Stability s) {
  switch (s) {
    case Stability::Stable: return "stable";
    case Stability::Unstable: return "unstable";
    case Stability::Degenerate: return "degenerate";
  }
  return "degenerate";
}

inline constexpr double default_tol = 1e-9;

struct DispersionPoint {
  int n = 1;
  double b = 0.5;
  double A = 0.0;
  double B = 0.0;
  double coupling = 0.0;  ///< lambda~ + p~
  double delta = 0.0;
  std::optional<double> omega_plus;
  std::optional<double> omega_minus;
  Stability stability = Stability::Degenerate;
  double v1 = 0.0;
  double v2 = 0.0;
};

/// The K1 velocity constants (c_b, c~_b).
inline std::pair<double, double> smooth_constants(const KernelModel& m, double b) {
  return std::visit(
      overloaded{[&](const EulerAnnulus& a) {
                   const double c = annulus_green(a).frak_c(b);
                   return std::pair<double, double>{c / (b * b), c};
                 },
                 [&](const EulerExterior&) {
                   return std::pair<double, double>{(1.0 - b * b) / (2.0 * b * b), 0.5 * (1.0 - b * b)};
                 },
                 [&](const CustomConvolution& c) { return std::pair<double, double>{c.c, c.ct}; },
                 [&](const GsqgDisc& g) {
                   const auto v = v1_v2(m, b);
                   const auto p = v1_v2(GsqgPlane{g.beta}, b);
                   return std::pair<double, double>{v.first - p.first, v.second - p.second};
                 },
                 [&](const QgswDisc& q) {
                   const auto v = v1_v2(m, b);
                   const auto p = v1_v2(QgswPlane{q.eps}, b);
                   return std::pair<double, double>{v.first - p.first, v.second - p.second};
                 },
                 [](const auto&) { return std::pair<double, double>{0.0, 0.0}; }},
      m);
}

/// Assembles lambda, lambda~, p, p~ and the K1 constants. Closed forms are used
/// unless absent or `force_quadrature` is set, in which case lambda and
/// lambda~ come from the measure quadrature.
inline SpectralRow spectral_row(const KernelModel& m, int n, double b, bool force_quadrature = false) {
  if (n < 1) throw domain_error("spectral_row: n must be >= 1");
  check_b(m, b);
  SpectralRow r;
  r.n = n;
  r.b = b;
  const auto lb = closed_lambda(m, n, b);
  if (lb && !force_quadrature) {
    r.lambda_b = *lb;
    r.lambda_1 = *closed_lambda(m, n, 1.0);
    r.lambda_t = *closed_tilde_lambda(m, n, b);
    r.src_lambda = Source::ClosedForm;
  } else {
    const Measure mu = model_measure(m);
    r.lambda_b = quadrature_lambda(mu, n, b);
    r.lambda_1 = quadrature_lambda(mu, n, 1.0);
    r.lambda_t = quadrature_tilde_lambda(mu, n, b);
    r.src_lambda = Source::Quadrature;
  }
  if (has_smooth_part(m)) {
    const PTerms p = closed_p(m, n, b);
    r.p_b = p.p_b;
    r.p_1 = p.p_1;
    r.p_t = p.p_tilde;
    r.src_p = std::holds_alternative<GsqgDisc>(m) ? Source::Integral : Source::ClosedForm;
  }
  const auto [c, ct] = smooth_constants(m, b);
  r.c = c;
  r.ct = ct;
  if (has_smooth_part(m) || std::holds_alternative<CustomConvolution>(m))
    r.src_c = std::holds_alternative<GsqgDisc>(m) ? Source::Integral : Source::ClosedForm;
  return r;
}

inline Stability classify_delta(double delta, double tol = default_tol) {
  if (delta > tol) return Stability::Stable;
  if (delta < -tol) return Stability::Unstable;
  return Stability::Degenerate;
}

/// A = -V1 + lambda + p, B = -V2 - lambda_{n,1} - p_{n,1},
/// Delta = (A-B)^2 - 4(lambda~+p~)^2, Omega = (A+B +- sqrt(Delta))/2.
/// The roots are reported when Delta >= -tol, with Delta clamped at 0.
inline DispersionPoint assemble(const SpectralRow& r, double v1, double v2, double tol = default_tol) {
  DispersionPoint d;
  d.n = r.n;
  d.b = r.b;
  d.v1 = v1;
  d.v2 = v2;
  d.A = -v1 + r.lambda_b + r.p_b;
  d.B = -v2 - r.lambda_1 - r.p_1;
  d.coupling = r.lambda_t + r.p_t;
  d.delta = (d.A - d.B) * (d.A - d.B) - 4.0 * d.coupling * d.coupling;
  d.stability = classify_delta(d.delta, tol);
  if (d.delta >= -tol) {
    // inside the degenerate band the roots are reported as the double root
    const double s = d.stability == Stability::Degenerate ? 0.0 : std::sqrt(d.delta);
    d.omega_plus = 0.5 * (d.A + d.B + s);
    d.omega_minus = 0.5 * (d.A + d.B - s);
  }
  return d;
}

inline DispersionPoint dispersion_point(const KernelModel& m, int n, double b,
                                        double tol = default_tol) {
  const auto [v1, v2] = v1_v2(m, b);
  return assemble(spectral_row(m, n, b), v1, v2, tol);
}

inline Stability classify(const KernelModel& m, int n, double b, double tol = default_tol) {
  return dispersion_point(m, n, b, tol).stability;
}

/// Delta_inf = (V1 - V2)^2.
inline double delta_inf(const KernelModel& m, double b) {
  const auto [v1, v2] = v1_v2(m, b);
  return (v1 - v2) * (v1 - v2);
}

/// (int Psi_b(x) dmu(x)/x + c - c~)^2 for a convolution kernel plus constants.
inline double delta_inf_psi(const Measure& mu, double b, double c = 0.0, double ct = 0.0) {
  const double g = spectral_integral([&](double x) { return psi_b(b, x); }, mu);
  return (g + c - ct) * (g + c - ct);
}

/// b lies in S when |V1 - V2| > tol.
inline bool s_membership(const KernelModel& m, double b, double tol = default_tol) {
  check_b(m, b);
  const auto [v1, v2] = v1_v2(m, b);
  return std::abs(v1 - v2) > tol;
}

// --------------------------------------------------------- Q and kernel

using Mat2 = std::array<std::array<double, 2>, 2>;
using Vec2 = std::array<double, 2>;

/// Q_{n,b}(Omega) = [[Omega - A, lambda~ + p~], [-(lambda~ + p~), Omega - B]].
inline Mat2 q_matrix(const DispersionPoint& d, double omega) {
  return {{{omega - d.A, d.coupling}, {-d.coupling, omega - d.B}}};
}

inline Mat2 q_matrix(const KernelModel& m, int n, double b, double omega) {
  return q_matrix(dispersion_point(m, n, b), omega);
}

enum class Branch { Plus, Minus };

/// (-lambda~ - p~, Omega_pm - A), generator of ker Q_{m,b}(Omega_pm).
inline Vec2 kernel_vector(const DispersionPoint& d, Branch br, double tol = default_tol) {
  if (!(d.delta > tol)) throw domain_error("kernel_vector: spectrum is degenerate (Delta <= tol)");
  const double om = br == Branch::Plus ? *d.omega_plus : *d.omega_minus;
  return {-d.coupling, om - d.A};
}

inline Vec2 kernel_vector(const KernelModel& m, int mfold, double b, Branch br,
                          double tol = default_tol) {
  return kernel_vector(dispersion_point(m, mfold, b, tol), br, tol);
}

// ----------------------------------------------------------- thresholds

/// Closed Delta > 0 condition for the annulus,
/// n > b^2/((1-b^2)(b^2+2C_b)) 1/(1-(R1/R2)^{2n}) (2 - R1^{2n} - R1^{2n}/b^{2n}
///     - (b^{2n}+1-2R1^{2n})/R2^{2n} + 2(1-R2^{-2n}) b^n (1 - R1^{2n}/b^{2n})).
inline bool annulus_condition(const EulerAnnulus& a, int n, double b) {
  const double C = annulus_green(a).frak_c(b);
  const double r1 = std::pow(a.R1, 2.0 * n), r2 = std::pow(a.R2, -2.0 * n);
  const double q = std::pow(a.R1 / a.R2, 2.0 * n), b2n = std::pow(b, 2.0 * n), bn = std::pow(b, n);
  const double bracket = 2.0 - r1 - r1 / b2n - (b2n + 1.0 - 2.0 * r1) * r2 +
                         2.0 * (1.0 - r2) * bn * (1.0 - r1 / b2n);
  const double rhs = b * b / ((1.0 - b * b) * (b * b + 2.0 * C)) / (1.0 - q) * bracket;
  return n > rhs;
}

/// Exterior condition in the form obtained from Delta_{m,b} > 0,
/// m > b^2/(1-b^2) (2 - R^{2m} - (R/b)^{2m} + 2 b^m (1 - (R/b)^{2m})).
inline bool exterior_condition(const EulerExterior& e, int m, double b) {
  const double r2m = std::pow(e.R, 2.0 * m), rb = std::pow(e.R / b, 2.0 * m);
  return m > b * b / (1.0 - b * b) * (2.0 - r2m - rb + 2.0 * std::pow(b, m) * (1.0 - rb));
}

/// The same inequality with +(R/b)^{2m} in place of -(R/b)^{2m}.
inline bool exterior_condition_printed(const EulerExterior& e, int m, double b) {
  const double r2m = std::pow(e.R, 2.0 * m), rb = std::pow(e.R / b, 2.0 * m);
  return m > b * b / (1.0 - b * b) * (2.0 - r2m + rb + 2.0 * std::pow(b, m) * (1.0 - rb));
}

/// Smallest m >= 2 satisfying `cond`, or 0 when none up to m_cap.
template <class Cond>
int first_m(Cond&& cond, int m_cap) {
  for (int m = 2; m <= m_cap; ++m)
    if (cond(m)) return m;
  return 0;
}

inline int annulus_closed_threshold(const EulerAnnulus& a, double b, int m_cap = 1000) {
  return first_m([&](int m) { return annulus_condition(a, m, b); }, m_cap);
}

inline int exterior_closed_threshold(const EulerExterior& e, double b, int m_cap = 1000) {
  return first_m([&](int m) { return exterior_condition(e, m, b); }, m_cap);
}

struct FoldCheck {
  bool ok = false;
  std::string reason;
};

/// Memoised dispersion points at a fixed b.
class DispersionCache {
 public:
  DispersionCache(KernelModel m, double b, double tol)
      : model_(std::move(m)), b_(b), tol_(tol) {
    const auto v = v1_v2(model_, b_);
    v1_ = v.first;
    v2_ = v.second;
  }
  const DispersionPoint& at(int n) {
    auto it = pts_.find(n);
    if (it == pts_.end()) it = pts_.emplace(n, assemble(spectral_row(model_, n, b_), v1_, v2_, tol_)).first;
    return it->second;
  }
  double v1() const { return v1_; }
  double v2() const { return v2_; }
  double tol() const { return tol_; }

 private:
  KernelModel model_;
  double b_, tol_, v1_ = 0.0, v2_ = 0.0;
  std::map<int, DispersionPoint> pts_;
};

/// Conditions at fold m: Delta_{km} > tol for k <= k_max, pairwise distinct
/// Omega values over k <= k_max together with -V1, -V2, and a tail where
/// |Delta_{km} - Delta_inf| decreases over the last five samples.
inline FoldCheck check_fold(DispersionCache& cache, int m, int k_max) {
  const double tol = cache.tol();
  const double dinf = (cache.v1() - cache.v2()) * (cache.v1() - cache.v2());
  std::vector<double> omegas{-cache.v1(), -cache.v2()};
  for (int k = 1; k <= k_max; ++k) {
    const auto& d = cache.at(k * m);
    if (!(d.delta > tol)) return {false, "Delta_" + std::to_string(k * m) + " <= tol"};
    omegas.push_back(*d.omega_plus);
    omegas.push_back(*d.omega_minus);
  }
  for (size_t i = 0; i < omegas.size(); ++i)
    for (size_t j = i + 1; j < omegas.size(); ++j)
      if (std::abs(omegas[i] - omegas[j]) <= tol) return {false, "Omega collision"};
  if (!(dinf > 4.0 * tol)) return {false, "Delta_inf <= 4 tol"};
  const int k0 = std::max(1, k_max - 4);
  double prev = std::numeric_limits<double>::infinity();
  for (int k = k0; k <= k_max; ++k) {
    const double g = std::abs(cache.at(k * m).delta - dinf);
    if (!(g < prev) && g != 0.0) return {false, "tail not monotone"};
    prev = g;
  }
  return {true, ""};
}

inline constexpr int default_k_max = 40;
inline constexpr int default_m_cap = 200;

/// Smallest fold m >= 2 meeting check_fold. Throws not_found_error past m_cap.
inline int min_fold(const KernelModel& m, double b, int k_max = default_k_max, double tol = default_tol,
                    int m_cap = default_m_cap) {
  if (!s_membership(m, b, tol)) throw domain_error("min_fold: b is not in S (V1 = V2)");
  if (k_max < 5) throw domain_error("min_fold: k_max must be >= 5");
  DispersionCache cache(m, b, tol);
  for (int f = 2; f <= m_cap; ++f)
    if (check_fold(cache, f, k_max).ok) return f;
  throw not_found_error("min_fold: no fold m <= " + std::to_string(m_cap) + " qualifies");
}

// ---------------------------------------------------------- monotonicity

struct MonotonicityReport {
  bool ok = true;
  int kase = 1;  ///< 1 when V1 > V2, 2 when V1 < V2
  int first_violation = 0;
  std::string message;
  double v1 = 0.0, v2 = 0.0;
};

/// Checks the orderings for n in [n_start, n_start + count). With V1 > V2:
/// -V1 < Omega-_n decreasing, Omega+_n increasing < -V2. With V1 < V2:
/// Omega-_n increasing < -V2 < -V1 < Omega+_n decreasing.
inline MonotonicityReport monotonicity_scan(const KernelModel& m, double b, int n_start, int count,
                                            double tol = default_tol) {
  DispersionCache cache(m, b, tol);
  MonotonicityReport rep;
  rep.v1 = cache.v1();
  rep.v2 = cache.v2();
  rep.kase = rep.v1 > rep.v2 ? 1 : 2;
  auto fail = [&](int n, const std::string& why) {
    if (rep.ok) {
      rep.ok = false;
      rep.first_violation = n;
      rep.message = why;
    }
  };
  const double lo1 = -rep.v1, lo2 = -rep.v2;
  for (int n = n_start; n < n_start + count && rep.ok; ++n) {
    const auto& d = cache.at(n);
    if (!(d.delta > tol)) {
      fail(n, "Delta <= tol");
      break;
    }
    const double op = *d.omega_plus, om = *d.omega_minus;
    if (rep.kase == 1) {
      if (!(lo1 < om && om < op && op < lo2)) fail(n, "sandwich -V1 < Omega- < Omega+ < -V2 broken");
    } else {
      if (!(om < lo2 && lo2 < lo1 && lo1 < op)) fail(n, "sandwich Omega- < -V2 < -V1 < Omega+ broken");
    }
    if (n + 1 < n_start + count) {
      const auto& e = cache.at(n + 1);
      if (!(e.delta > tol)) {
        fail(n + 1, "Delta <= tol");
        break;
      }
      const bool up = *e.omega_plus > op, down = *e.omega_minus < om;
      if (rep.kase == 1 && !(up && down)) fail(n, "Omega+ not increasing or Omega- not decreasing");
      if (rep.kase == 2 && (up || down)) fail(n, "Omega+ not decreasing or Omega- not increasing");
    }
  }
  return rep;
}

}  // namespace vstate

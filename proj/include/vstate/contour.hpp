// SPDX-License-Identifier: Apache-2.0
/// @file contour.hpp
/// @brief Discretized contour-dynamics functional for doubly connected
/// patches, its finite-difference linearization and local branch
/// continuation from the annulus.
///
/// Boundaries are z_1 = sqrt(b^2 + 2 r_1) e^{i theta} and
/// z_2 = sqrt(1 + 2 r_2) e^{i theta}, with r_j even and m-fold symmetric.
/// F_0[r]_j(theta) is the stream function at z_j(theta); F = Omega r' + d/dtheta F_0.
#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include "dispersion.hpp"
#include "errors.hpp"
#include "models.hpp"
#include "quadrature.hpp"
#include "specfun.hpp"

namespace vstate {

using cplx = std::complex<double>;

/// Cosine coefficients of r_1, r_2 at frequencies m, 2m, ..., Nm.
struct PerturbationState {
  int m = 1;
  int N = 8;
  std::vector<double> r1;
  std::vector<double> r2;
  double omega = 0.0;
  double s = 0.0;

  static PerturbationState zero(int m, int N, double omega = 0.0) {
    if (m < 1 || N < 1) throw domain_error("PerturbationState: m and N must be >= 1");
    return {m, N, std::vector<double>(N, 0.0), std::vector<double>(N, 0.0), omega, 0.0};
  }
};

/// Sine coefficients of F_1, F_2 at frequencies m, ..., Nm. `leakage` is the
/// largest coefficient of d/dtheta F_0 outside that basis.
struct ResidualVector {
  std::vector<double> f1;
  std::vector<double> f2;
  double leakage = 0.0;

  double norm_inf() const {
    double n = 0.0;
    for (double v : f1) n = std::max(n, std::abs(v));
    for (double v : f2) n = std::max(n, std::abs(v));
    return n;
  }
};

struct ContourOptions {
  int grid = 0;           ///< theta points; 0 selects 4 N m
  int radial_nodes = 16;  ///< Gauss-Legendre nodes across the annulus for K1
};

inline int grid_size(const PerturbationState& st, const ContourOptions& o) {
  const int M = o.grid > 0 ? o.grid : 4 * st.N * st.m;
  if (M < 2 * st.N * st.m + 2 || M % 2) throw domain_error("contour: grid must be even and exceed 2 N m");
  return M;
}

// ------------------------------------------------------------ weights

namespace detail {

/// Product-quadrature weights W_k with int_T w(theta_i - eta) g(eta) deta
/// ~ sum_j W_{i-j} g(eta_j), from the cosine moments c_n of w.
template <class Moment>
std::vector<double> product_weights(int M, Moment&& c) {
  std::vector<double> cn(M / 2 + 1);
  for (int n = 0; n <= M / 2; ++n) cn[n] = c(n);
  std::vector<double> W(M);
  for (int k = 0; k < M; ++k) {
    double s = cn[0] + cn[M / 2] * ((k % 2) ? -1.0 : 1.0);
    for (int n = 1; n < M / 2; ++n) s += 2.0 * cn[n] * std::cos(2.0 * pi * n * k / M);
    W[k] = s / M;
  }
  return W;
}

}  // namespace detail

/// int_0^{2pi} log(4 sin^2(s/2)) cos(ns) ds = -2pi/n (0 for n = 0).
inline double log_weight_moment(int n) { return n == 0 ? 0.0 : -2.0 * pi / n; }

/// int_0^{2pi} |2 sin(s/2)|^{-beta} cos(ns) ds
///   = 2pi Gamma(1-beta) (beta/2)_n / (Gamma(1-beta/2) Gamma(1-beta/2+n)).
inline double power_weight_moment(int n, double beta) {
  const double h = 0.5 * beta;
  const double lead = std::lgamma(1.0 - beta) - std::lgamma(1.0 - h);
  if (n == 0) return 2.0 * pi * std::exp(lead - std::lgamma(1.0 - h));
  return 2.0 * pi * std::exp(lead + std::lgamma(h + n) - std::lgamma(h) - std::lgamma(1.0 - h + n));
}

// ------------------------------------------------------------- kernels

enum class SingularKind { Log, Power, Bessel };

/// (1 - x K_1(x)) / x^2, with the small-x series
/// -log(x/2) I_1(x)/x + 1/4 sum_k (psi(k+1)+psi(k+2)) (x^2/4)^k / (k!(k+1)!).
inline double qgsw_flux_h(double x) {
  if (!(x > 0.0)) throw domain_error("qgsw_flux_h: x must be > 0");
  if (x >= 2.0) return (1.0 - x * bessel_k(1, x)) / (x * x);
  const double q = 0.25 * x * x;
  double term = 1.0, psi1 = -euler_gamma, psi2 = 1.0 - euler_gamma, s = 0.0;
  for (int k = 0; k < 60; ++k) {
    const double add = (psi1 + psi2) * term;
    s += add;
    if (std::abs(add) < 1e-18 * std::abs(s)) break;
    term *= q / ((k + 1.0) * (k + 2.0));
    psi1 += 1.0 / (k + 1.0);
    psi2 += 1.0 / (k + 2.0);
  }
  return -std::log(0.5 * x) * bessel_i(1, x) / x + 0.25 * s;
}

/// Radial part K_0 of a contour model; the constant of K_0 does not enter F.
struct RadialKernel {
  SingularKind kind = SingularKind::Log;
  double beta = 0.5;
  double eps = 1.0;
  double cb = 0.0;

  /// H(t) with div_y[(y-x) H(|y-x|)] = K_0(|y-x|), as a function of T = t^2.
  double flux(double T) const {
    switch (kind) {
      case SingularKind::Log: return (1.0 - std::log(T)) / (8.0 * pi);
      case SingularKind::Power: return cb * std::pow(T, -0.5 * beta) / (2.0 - beta);
      case SingularKind::Bessel: return qgsw_flux_h(eps * std::sqrt(T)) / (2.0 * pi);
    }
    return 0.0;
  }

  /// Splits g H(t) into a log(4 sin^2) or |2 sin|^{-beta} coefficient and a
  /// smooth remainder, given T = t^2 and S = 4 sin^2((theta-eta)/2).
  std::pair<double, double> split(double g, double T, double S) const {
    switch (kind) {
      case SingularKind::Log: return {-g / (8.0 * pi), g * (1.0 - std::log(T / S)) / (8.0 * pi)};
      case SingularKind::Power: return {cb * g * std::pow(T / S, -0.5 * beta) / (2.0 - beta), 0.0};
      case SingularKind::Bessel: {
        const double x = eps * std::sqrt(T);
        const double a = -g * bessel_i(1, x) / (4.0 * pi * x);
        return {a, g * qgsw_flux_h(x) / (2.0 * pi) - a * std::log(S)};
      }
    }
    return {0.0, 0.0};
  }
};

inline RadialKernel radial_kernel(const KernelModel& m) {
  RadialKernel k;
  if (std::holds_alternative<EulerPlane>(m) || std::holds_alternative<EulerDisc>(m) ||
      std::holds_alternative<EulerAnnulus>(m) || std::holds_alternative<EulerExterior>(m))
    return k;
  if (auto* g = std::get_if<GsqgPlane>(&m)) {
    k.kind = SingularKind::Power;
    k.beta = g->beta;
    k.cb = gsqg_c(g->beta);
    return k;
  }
  if (auto* q = std::get_if<QgswPlane>(&m)) {
    k.kind = SingularKind::Bessel;
    k.eps = q->eps;
    return k;
  }
  throw domain_error("contour: model '" + model_name(m) + "' is not supported");
}

// ------------------------------------------------------------ geometry

struct BoundarySamples {
  std::vector<double> theta;
  std::vector<double> R;
  std::vector<cplx> z;
  std::vector<cplx> dz;
};

inline BoundarySamples sample_boundary(double base, const std::vector<double>& c, int m, int M) {
  BoundarySamples s;
  s.theta.resize(M);
  s.R.resize(M);
  s.z.resize(M);
  s.dz.resize(M);
  for (int i = 0; i < M; ++i) {
    const double th = 2.0 * pi * i / M;
    double r = 0.0, dr = 0.0;
    for (size_t k = 0; k < c.size(); ++k) {
      const double f = (k + 1.0) * m;
      r += c[k] * std::cos(f * th);
      dr -= f * c[k] * std::sin(f * th);
    }
    const double R2 = base * base + 2.0 * r;
    if (!(R2 > 0.0)) throw geometry_error("contour: boundary radius squared is not positive");
    const double R = std::sqrt(R2);
    const cplx e = std::polar(1.0, th);
    s.theta[i] = th;
    s.R[i] = R;
    s.z[i] = R * e;
    s.dz[i] = cplx(dr / R, R) * e;
  }
  return s;
}

/// Pointwise checks: 0 < R_1 < R_2 and both curves inside the fluid domain.
inline void check_geometry(const KernelModel& model, const BoundarySamples& in,
                           const BoundarySamples& out) {
  double lo = 0.0, hi = std::numeric_limits<double>::infinity();
  if (auto* d = std::get_if<EulerDisc>(&model)) hi = d->R;
  if (auto* a = std::get_if<EulerAnnulus>(&model)) lo = a->R1, hi = a->R2;
  if (auto* e = std::get_if<EulerExterior>(&model)) lo = e->R;
  for (size_t i = 0; i < in.R.size(); ++i) {
    if (!(in.R[i] < out.R[i])) throw geometry_error("contour: inner and outer boundaries intersect");
    if (!(in.R[i] > lo) || !(out.R[i] < hi)) throw geometry_error("contour: boundary leaves the fluid domain");
  }
}

// ------------------------------------------------------------------ F0

struct F0Samples {
  std::vector<double> theta;
  std::vector<double> f1;
  std::vector<double> f2;
};

namespace detail {

// stream function of the K0 part at the nodes of `tgt`, flux through `src`
inline void k0_flux(const RadialKernel& K, const BoundarySamples& tgt, const BoundarySamples& src,
                    double orient, bool self, const std::vector<double>& W, std::vector<double>& acc) {
  const int M = static_cast<int>(src.z.size());
  const double h = 2.0 * pi / M;
  for (int i = 0; i < M; ++i) {
    const cplx x = tgt.z[i];
    double sum = 0.0;
    for (int j = 0; j < M; ++j) {
      if (self && j == i) continue;
      const cplx D = src.z[j] - x;
      const cplx nu = cplx(0.0, -orient) * src.dz[j];
      const double g = D.real() * nu.real() + D.imag() * nu.imag();
      const double T = std::norm(D);
      if (self) {
        const double sn = std::sin(0.5 * (src.theta[i] - src.theta[j]));
        const auto [a, rem] = K.split(g, T, 4.0 * sn * sn);
        sum += a * W[(i - j + M) % M] + rem * h;
      } else {
        sum += g * K.flux(T) * h;
      }
    }
    acc[i] += sum;
  }
}

}  // namespace detail

/// F_0[r] on the theta grid. The K0 area integral is turned into boundary
/// fluxes of (y - x) H(|y - x|); K1 is integrated over the region directly.
inline F0Samples eval_f0(const KernelModel& model, double b, const PerturbationState& st,
                         const ContourOptions& opt = {}) {
  if (!(b > 0.0 && b < 1.0)) throw domain_error("eval_f0: b must lie in (0,1)");
  if (static_cast<int>(st.r1.size()) != st.N || static_cast<int>(st.r2.size()) != st.N)
    throw domain_error("eval_f0: coefficient vectors must have N entries");
  check_b(model, b);
  const RadialKernel K = radial_kernel(model);
  const int M = grid_size(st, opt);
  const auto in = sample_boundary(b, st.r1, st.m, M);
  const auto out = sample_boundary(1.0, st.r2, st.m, M);
  check_geometry(model, in, out);

  const std::vector<double> W =
      K.kind == SingularKind::Power
          ? detail::product_weights(M, [&](int n) { return power_weight_moment(n, K.beta); })
          : detail::product_weights(M, log_weight_moment);

  F0Samples f;
  f.theta = in.theta;
  f.f1.assign(M, 0.0);
  f.f2.assign(M, 0.0);
  // outer boundary: normal -i dz, inner boundary: +i dz
  detail::k0_flux(K, in, out, 1.0, false, W, f.f1);
  detail::k0_flux(K, in, in, -1.0, true, W, f.f1);
  detail::k0_flux(K, out, out, 1.0, true, W, f.f2);
  detail::k0_flux(K, out, in, -1.0, false, W, f.f2);

  if (has_smooth_part(model)) {
    const auto [xi, wi] = gauss_legendre(opt.radial_nodes);
    const double h = 2.0 * pi / M;
    std::vector<cplx> pts;
    std::vector<double> wts;
    pts.reserve(static_cast<size_t>(M) * xi.size());
    for (int j = 0; j < M; ++j) {
      const double a = in.R[j], c = out.R[j];
      const cplx e = std::polar(1.0, in.theta[j]);
      for (size_t q = 0; q < xi.size(); ++q) {
        const double rho = 0.5 * (a + c) + 0.5 * (c - a) * xi[q];
        pts.push_back(rho * e);
        wts.push_back(0.5 * (c - a) * wi[q] * rho * h);
      }
    }
    for (int i = 0; i < M; ++i) {
      double s1 = 0.0, s2 = 0.0;
      for (size_t p = 0; p < pts.size(); ++p) {
        s1 += wts[p] * euler_k1(model, in.z[i], pts[p]);
        s2 += wts[p] * euler_k1(model, out.z[i], pts[p]);
      }
      f.f1[i] += s1;
      f.f2[i] += s2;
    }
  }
  return f;
}

/// Cosine coefficient of samples at frequency `freq`.
inline double cos_coefficient(const std::vector<double>& v, int freq) {
  const int M = static_cast<int>(v.size());
  double s = 0.0;
  for (int i = 0; i < M; ++i) s += v[i] * std::cos(2.0 * pi * freq * i / M);
  return 2.0 * s / M;
}

inline double sin_coefficient(const std::vector<double>& v, int freq) {
  const int M = static_cast<int>(v.size());
  double s = 0.0;
  for (int i = 0; i < M; ++i) s += v[i] * std::sin(2.0 * pi * freq * i / M);
  return 2.0 * s / M;
}

/// Largest coefficient of d/dtheta of `v` outside the even m-fold basis.
inline double off_basis_leakage(const std::vector<double>& v, int m) {
  const int M = static_cast<int>(v.size());
  double worst = 0.0;
  for (int n = 1; n < M / 2; ++n) {
    worst = std::max(worst, n * std::abs(sin_coefficient(v, n)));
    if (n % m) worst = std::max(worst, n * std::abs(cos_coefficient(v, n)));
  }
  return worst;
}

/// F(Omega, r) = Omega r' + d/dtheta F_0[r] on the sine basis:
/// f_{j,k} = -k m (Omega r_{j,k} + [F_0]_{j,k}).
inline ResidualVector eval_f(const KernelModel& model, double b, const PerturbationState& st,
                             const ContourOptions& opt = {}, bool with_leakage = false) {
  const F0Samples f0 = eval_f0(model, b, st, opt);
  ResidualVector r;
  r.f1.resize(st.N);
  r.f2.resize(st.N);
  for (int k = 1; k <= st.N; ++k) {
    const double km = static_cast<double>(k) * st.m;
    r.f1[k - 1] = -km * (st.omega * st.r1[k - 1] + cos_coefficient(f0.f1, k * st.m));
    r.f2[k - 1] = -km * (st.omega * st.r2[k - 1] + cos_coefficient(f0.f2, k * st.m));
  }
  if (with_leakage)
    r.leakage = std::max(off_basis_leakage(f0.f1, st.m), off_basis_leakage(f0.f2, st.m));
  return r;
}

// ------------------------------------------------------------ Jacobian

inline Eigen::VectorXd pack(const ResidualVector& r) {
  const int N = static_cast<int>(r.f1.size());
  Eigen::VectorXd v(2 * N);
  for (int k = 0; k < N; ++k) v[k] = r.f1[k], v[N + k] = r.f2[k];
  return v;
}

inline double& coefficient(PerturbationState& st, int idx) {
  return idx < st.N ? st.r1[idx] : st.r2[idx - st.N];
}

/// Central-difference Jacobian of the residual with respect to
/// (r_{1,1..N}, r_{2,1..N}), rows ordered (f_{1,1..N}, f_{2,1..N}).
/// With `richardson` the steps h and h/2 are combined to cancel the h^2 term.
inline Eigen::MatrixXd fd_jacobian(const KernelModel& model, double b, const PerturbationState& st,
                                   const ContourOptions& opt = {}, double h = 1e-6,
                                   bool richardson = false) {
  const int n = 2 * st.N;
  Eigen::MatrixXd J(n, n);
  PerturbationState p = st;
  auto central = [&](int c, double step) {
    const double keep = coefficient(p, c);
    coefficient(p, c) = keep + step;
    const Eigen::VectorXd fp = pack(eval_f(model, b, p, opt));
    coefficient(p, c) = keep - step;
    const Eigen::VectorXd fm = pack(eval_f(model, b, p, opt));
    coefficient(p, c) = keep;
    return Eigen::VectorXd((fp - fm) / (2.0 * step));
  };
  for (int c = 0; c < n; ++c)
    J.col(c) = richardson ? Eigen::VectorXd((4.0 * central(c, 0.5 * h) - central(c, h)) / 3.0)
                          : central(c, h);
  return J;
}

/// -k m Q_{km,b}(Omega) arranged as fd_jacobian, zero off the 2x2 blocks.
inline Eigen::MatrixXd analytic_jacobian(const KernelModel& model, double b, int m, int N, double omega) {
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(2 * N, 2 * N);
  for (int k = 1; k <= N; ++k) {
    const Mat2 Q = q_matrix(dispersion_point(model, k * m, b), omega);
    const double km = static_cast<double>(k) * m;
    J(k - 1, k - 1) = -km * Q[0][0];
    J(k - 1, N + k - 1) = -km * Q[0][1];
    J(N + k - 1, k - 1) = -km * Q[1][0];
    J(N + k - 1, N + k - 1) = -km * Q[1][1];
  }
  return J;
}

struct LinearizationCheck {
  std::vector<double> block_error;  ///< per k: max|J_k + km Q| / max|km Q|
  double max_block_error = 0.0;
  double off_block = 0.0;      ///< largest FD entry outside the 2x2 blocks
  double off_block_rel = 0.0;  ///< off_block over the largest block entry
};

inline LinearizationCheck check_linearization(const KernelModel& model, double b, int m, int N,
                                              double omega, const ContourOptions& opt = {}) {
  PerturbationState st = PerturbationState::zero(m, N, omega);
  const Eigen::MatrixXd J = fd_jacobian(model, b, st, opt, 1e-4, true);
  const Eigen::MatrixXd A = analytic_jacobian(model, b, m, N, omega);
  LinearizationCheck out;
  for (int k = 0; k < N; ++k) {
    const int idx[2] = {k, N + k};
    double num = 0.0, den = 0.0;
    for (int r : idx)
      for (int c : idx) {
        num = std::max(num, std::abs(J(r, c) - A(r, c)));
        den = std::max(den, std::abs(A(r, c)));
      }
    out.block_error.push_back(num / den);
    out.max_block_error = std::max(out.max_block_error, num / den);
  }
  for (int r = 0; r < 2 * N; ++r)
    for (int c = 0; c < 2 * N; ++c)
      if ((r % N) != (c % N)) out.off_block = std::max(out.off_block, std::abs(J(r, c)));
  out.off_block_rel = out.off_block / A.cwiseAbs().maxCoeff();
  return out;
}

/// Forward slope in Omega of the smallest singular value of the mode-m
/// block of the FD Jacobian at Omega_pm.
inline double transversality(const KernelModel& model, double b, int m, Branch br,
                             const ContourOptions& opt = {}, double dOmega = 1e-4) {
  const DispersionPoint d = dispersion_point(model, m, b);
  if (!(d.delta > default_tol)) throw domain_error("transversality: Delta_{m,b} <= tol");
  const double om = br == Branch::Plus ? *d.omega_plus : *d.omega_minus;
  const int N = 4;
  PerturbationState st = PerturbationState::zero(m, N, 0.0);
  const Eigen::MatrixXd J = fd_jacobian(model, b, st, opt, 1e-4, true);
  Eigen::Matrix2d J0;
  J0 << J(0, 0), J(0, N), J(N, 0), J(N, N);
  auto sigma = [&](double w) {
    Eigen::Matrix2d B = J0;
    B(0, 0) -= m * w;
    B(1, 1) -= m * w;
    return Eigen::JacobiSVD<Eigen::Matrix2d>(B).singularValues()(1);
  };
  return (sigma(om + dOmega) - sigma(om)) / dOmega;
}

// -------------------------------------------------------------- branch

struct BranchOptions {
  int N = 8;
  ContourOptions contour;
  double tol = 1e-11;     ///< Newton stopping tolerance on the residual
  double accept = 1e-8;   ///< largest residual accepted for a branch point
  int max_iter = 30;
  double fd_step = 1e-7;
};

struct BranchPoint {
  double s = 0.0;
  PerturbationState state;
  double residual = 0.0;
  int iterations = 0;
};

struct BranchResult {
  std::vector<BranchPoint> points;
  double omega0 = 0.0;
  Vec2 kernel{0.0, 0.0};
  bool diverged = false;
  double last_s = 0.0;
  std::string message;
};

/// Amplitude-parameterized branch from the annulus. Unknowns are the 2N
/// coefficients and Omega; the extra equation fixes
/// <(r_{1,1}, r_{2,1}), v> / <v, v> = s, v = kernel_vector.
inline BranchResult branch_continue(const KernelModel& model, double b, int m, Branch br, double s_max,
                                    int steps, const BranchOptions& opt = {}) {
  if (steps < 1) throw domain_error("branch_continue: steps must be >= 1");
  if (!(s_max > 0.0)) throw domain_error("branch_continue: s_max must be > 0");
  {
    DispersionCache cache(model, b, default_tol);
    const FoldCheck fc = check_fold(cache, m, std::max(default_k_max, opt.N));
    if (!fc.ok) throw domain_error("branch_continue: fold m fails the spectral conditions (" + fc.reason + ")");
  }
  const DispersionPoint d = dispersion_point(model, m, b);
  const Vec2 v = kernel_vector(d, br);
  const double vv = v[0] * v[0] + v[1] * v[1];
  const int N = opt.N, n = 2 * N;

  BranchResult res;
  res.omega0 = br == Branch::Plus ? *d.omega_plus : *d.omega_minus;
  res.kernel = v;

  BranchPoint p0;
  p0.state = PerturbationState::zero(m, N, res.omega0);
  p0.residual = eval_f(model, b, p0.state, opt.contour).norm_inf();
  res.points.push_back(p0);

  auto system = [&](const PerturbationState& st, double s) {
    Eigen::VectorXd F(n + 1);
    F.head(n) = pack(eval_f(model, b, st, opt.contour));
    F[n] = (st.r1[0] * v[0] + st.r2[0] * v[1]) / vv - s;
    return F;
  };
  auto jacobian = [&](const PerturbationState& st) {
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n + 1, n + 1);
    J.topLeftCorner(n, n) = fd_jacobian(model, b, st, opt.contour, opt.fd_step);
    for (int k = 1; k <= N; ++k) {
      J(k - 1, n) = -static_cast<double>(k) * m * st.r1[k - 1];
      J(N + k - 1, n) = -static_cast<double>(k) * m * st.r2[k - 1];
    }
    J(n, 0) = v[0] / vv;
    J(n, N) = v[1] / vv;
    return J;
  };

  for (int i = 1; i <= steps; ++i) {
    const double s = s_max * i / steps;
    PerturbationState st;
    if (res.points.size() >= 2) {
      // secant predictor through the last two points
      const auto& a = res.points[res.points.size() - 2];
      const auto& c = res.points.back();
      const double t = (s - c.s) / (c.s - a.s);
      st = c.state;
      for (int k = 0; k < N; ++k) {
        st.r1[k] += t * (c.state.r1[k] - a.state.r1[k]);
        st.r2[k] += t * (c.state.r2[k] - a.state.r2[k]);
      }
      st.omega += t * (c.state.omega - a.state.omega);
    } else {
      st = PerturbationState::zero(m, N, res.omega0);
      st.r1[0] = s * v[0];
      st.r2[0] = s * v[1];
    }
    st.s = s;

    double rn = std::numeric_limits<double>::infinity();
    int it = 0;
    bool failed = false;
    try {
      Eigen::PartialPivLU<Eigen::MatrixXd> lu(jacobian(st));
      Eigen::VectorXd F = system(st, s);
      rn = F.head(n).lpNorm<Eigen::Infinity>();
      double prev = rn;
      for (it = 0; it < opt.max_iter && rn > opt.tol; ++it) {
        const Eigen::VectorXd dx = lu.solve(-F);
        for (int k = 0; k < N; ++k) st.r1[k] += dx[k], st.r2[k] += dx[N + k];
        st.omega += dx[n];
        F = system(st, s);
        rn = F.head(n).lpNorm<Eigen::Infinity>();
        if (!std::isfinite(rn)) break;
        // chord steps stall: refresh the Jacobian
        if (rn > 0.25 * prev) lu.compute(jacobian(st));
        prev = rn;
      }
    } catch (const geometry_error& e) {
      failed = true;
      res.message = e.what();
    }
    if (failed || !(rn <= opt.accept)) {
      res.diverged = true;
      if (res.message.empty()) res.message = "Newton did not converge at s = " + std::to_string(s);
      break;
    }
    BranchPoint bp;
    bp.s = s;
    bp.state = st;
    bp.residual = rn;
    bp.iterations = it;
    res.points.push_back(bp);
    res.last_s = s;
  }
  return res;
}

/// ||r/s - v cos(m theta)|| / ||v|| over the coefficient vector.
inline double tangent_error(const BranchPoint& p, const Vec2& v) {
  if (p.s == 0.0) throw domain_error("tangent_error: needs s > 0");
  double e = 0.0;
  for (int k = 0; k < p.state.N; ++k) {
    const double a = p.state.r1[k] / p.s - (k == 0 ? v[0] : 0.0);
    const double c = p.state.r2[k] / p.s - (k == 0 ? v[1] : 0.0);
    e += a * a + c * c;
  }
  return std::sqrt(e) / std::hypot(v[0], v[1]);
}

// -------------------------------------------------------------- export

struct BoundaryCurves {
  std::vector<double> theta;
  std::vector<cplx> inner;
  std::vector<cplx> outer;
};

inline BoundaryCurves boundary_export(const PerturbationState& st, double b, int samples = 256) {
  if (samples < 4) throw domain_error("boundary_export: samples must be >= 4");
  const auto in = sample_boundary(b, st.r1, st.m, samples);
  const auto out = sample_boundary(1.0, st.r2, st.m, samples);
  return {in.theta, in.z, out.z};
}

}  // namespace vstate

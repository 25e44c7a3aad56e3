// Acceptance runner: one PASS/FAIL line per criterion, nonzero exit on any
// failure.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "vstate/cli.hpp"
#include "vstate/contour.hpp"
#include "vstate/dispersion.hpp"
#include "vstate/models.hpp"
#include "vstate/universal.hpp"

using namespace vstate;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      if (pass) detail << "failed: ";
      else detail << "; ";
      detail << what;
      pass = false;
    }
  }
};

std::vector<double> log_grid(int count, double lo, double hi) {
  std::vector<double> g;
  for (int i = 0; i < count; ++i) g.push_back(lo * std::pow(hi / lo, double(i) / (count - 1)));
  return g;
}

void euler_quadrature(Outcome& o) {
  const Measure mu = Measure::euler();
  double worst = 0.0;
  for (double b : {0.3, 0.5, 0.8})
    for (int n = 1; n <= 10; ++n) {
      worst = std::max(worst, std::abs(quadrature_lambda(mu, n, b) * 2.0 * n - 1.0));
      worst = std::max(worst, std::abs(quadrature_tilde_lambda(mu, n, b) * 2.0 * n / std::pow(b, n) - 1.0));
    }
  o.require(worst < 1e-7, "relative error " + fmt(worst));
  o.detail << "max relative error " << worst;
}

// Omega_pm = 3/16 +- sqrt(63)/128 at n = 4; the reference values 0.2495117/0.1254883
// correspond to sqrt(63) ~ 127/16 and are reported as a deviation only
void degenerate_point(Outcome& o) {
  const DispersionPoint d3 = dispersion_point(EulerPlane{}, 3, 0.5);
  o.require(std::abs(d3.delta) < 1e-12, "Delta_3 = " + fmt(d3.delta));
  o.require(d3.omega_plus && d3.omega_minus, "Delta_3 roots missing");
  if (d3.omega_plus && d3.omega_minus) {
    o.require(std::abs(*d3.omega_plus - 0.1875) < 1e-12 && std::abs(*d3.omega_minus - 0.1875) < 1e-12,
              "double root != 0.1875");
  }
  const DispersionPoint d4 = dispersion_point(EulerPlane{}, 4, 0.5);
  const double delta = 63.0 / 4096.0, op = 0.1875 + std::sqrt(63.0) / 128.0, om = 0.1875 - std::sqrt(63.0) / 128.0;
  o.require(std::abs(d4.delta - delta) < 1e-9, "Delta_4 = " + fmt(d4.delta));
  o.require(std::abs(d4.delta - 0.01538086) < 1e-9, "Delta_4 off the reference 0.01538086");
  o.require(d4.omega_plus && std::abs(*d4.omega_plus - op) < 1e-9, "Omega+_4 off 3/16 + sqrt(63)/128");
  o.require(d4.omega_minus && std::abs(*d4.omega_minus - om) < 1e-9, "Omega-_4 off 3/16 - sqrt(63)/128");
  o.detail << "Delta_3 = " << d3.delta << ", Delta_4 = " << d4.delta << ", Omega+- = " << fmt(d4.omega_plus) << ", "
           << fmt(d4.omega_minus) << " (reference 0.2495117/0.1254883 differ by "
           << std::abs(d4.omega_plus.value_or(0) - 0.2495117) << ")";
}

void phi_bounds(Outcome& o) {
  long violations = 0, points = 0;
  for (int n = 1; n <= 20; ++n)
    for (double x : log_grid(30, 1e-2, 50.0)) {
      const double v = phi_n(n, x), w = phi_n(n + 1, x);
      const double base = x / (n * n + x * x);
      const double lo = 8.0 * n * n / (4.0 * n * n + 1) * base, hi = 8.0 * n * n / (4.0 * n * n - 1) * base;
      const double dd = (2.0 * n + 1) * x / ((n * n + x * x) * ((n + 1.0) * (n + 1.0) + x * x));
      ++points;
      if (!(lo <= v && v <= hi)) ++violations;
      if (!(dd <= v - w && v - w <= 8 * dd)) ++violations;
    }
  o.require(violations == 0, std::to_string(violations) + " violations");
  o.detail << points << " grid points, " << violations << " violations";
}

void strict_decrease(Outcome& o) {
  long violations = 0, points = 0;
  for (double b : {0.2, 0.5, 0.8, 1.0})
    for (double x : log_grid(30, 1e-2, 50.0)) {
      double prev = phi_nb(1, b, x);
      for (int n = 2; n <= 20; ++n) {
        const double v = phi_nb(n, b, x);
        ++points;
        if (!(v < prev)) ++violations;
        prev = v;
      }
    }
  o.require(violations == 0, std::to_string(violations) + " violations");
  o.detail << points << " comparisons, " << violations << " violations";
}

void psi_positive(Outcome& o) {
  double low = INFINITY;
  for (int i = 1; i <= 200; ++i) low = std::min(low, psi_b(0.5, 0.1 * i));
  o.require(low > 0.0, "min Psi = " + fmt(low));
  const double inner = psi_slope_integral(0.5);
  o.require(std::abs(inner - 1.52) < 0.01, "inner integral " + fmt(inner));
  o.detail << "min Psi_0.5 on (0,20] = " << low << ", inner integral = " << inner
           << ", Psi'(0) = " << psi_slope_at_zero(0.5);
}

void qgsw_identity(Outcome& o) {
  const double pts[5][3] = {{0.5, 0.5, 1.0}, {0.7, 0.7, 1.0}, {0.9, 0.3, 2.0}, {0.6, 0.2, 0.5}, {1.0, 0.5, 3.0}};
  double worst = 0.0;
  for (const auto& p : pts) {
    const IdentityCheck c = qgsw_disc_identity(p[0], p[1], p[2], 500);
    worst = std::max(worst, std::abs(c.series.value - c.closed));
  }
  o.require(worst < 1e-6, "error " + fmt(worst));
  o.detail << "max |series - closed| = " << worst << " over 5 samples";
}

void sneddon(Outcome& o) {
  struct P { int bi, gi, n; double q, a, b; };
  const P ps[3] = {{1, 1, 0, 1.5, 0.5, 0.5}, {1, 1, 0, 1.3, 0.3, 0.8}, {2, 2, 2, 1.6, 0.4, 0.4}};
  double worst = 0.0;
  for (const auto& p : ps)
    worst = std::max(worst, std::abs(sneddon_series(p.bi, p.gi, p.n, p.q, p.a, p.b).value -
                                     sneddon_integral(p.bi, p.gi, p.n, p.q, p.a, p.b)));
  o.require(worst < 1e-5, "error " + fmt(worst));
  o.detail << "max |series - (J + integral)| = " << worst << " over 3 sets";
}

void qgsw_disc(Outcome& o) {
  double worst = 0.0;
  int sign_bad = 0;
  for (double eps : {0.5, 1.0, 2.0})
    for (double R : {1.5, 3.0})
      for (double b : {0.3, 0.6, 0.9}) {
        const auto [c1, c2] = qgsw_disc_v_terms(eps, R, b);
        const auto [s1, s2] = qgsw_disc_v_series(eps, R, b, 500);
        worst = std::max({worst, std::abs(c1 - s1), std::abs(c2 - s2)});
        if (!(c2 < 0.0 && c1 - c2 > 0.0)) ++sign_bad;
      }
  o.require(worst < 1e-5, "closed vs series " + fmt(worst));
  o.require(sign_bad == 0, std::to_string(sign_bad) + " sign failures");
  o.detail << "max |closed - series| = " << worst << " on 18 (eps, R, b), sign failures " << sign_bad;
}

void gsqg_disc(Outcome& o) {
  int sign_bad = 0;
  double worst = 0.0;
  for (double beta : {0.3, 0.7})
    for (double b : {0.3, 0.6, 0.9}) {
      for (double R : {1.5, 3.0}) {
        const auto [v1, v2] = gsqg_disc_v_terms(beta, R, b);
        if (!(v1 - v2 > 0.0 && v2 < 0.0)) ++sign_bad;
      }
      const auto [p1, p2] = v1_v2(GsqgPlane{beta}, b);
      const auto [d1, d2] = gsqg_disc_v_terms(beta, 50.0, b);
      worst = std::max({worst, std::abs(d1 - p1), std::abs(d2 - p2)});
    }
  o.require(sign_bad == 0, std::to_string(sign_bad) + " sign failures");
  o.require(worst < 1e-4, "R = 50 gap " + fmt(worst));
  o.detail << "sign failures " << sign_bad << " of 12, R = 50 vs plane max gap " << worst;
}

// radial derivative of the smooth-part stream function of the patch b < r < 1
double annulus_k1_velocity(const EulerAnnulus& a, double b, double r) {
  const auto [xi, wi] = gauss_legendre(40);
  const int M = 256;
  double s = 0.0;
  for (int j = 0; j < M; ++j)
    for (size_t q = 0; q < xi.size(); ++q) {
      const double rho = 0.5 * (b + 1) + 0.5 * (1 - b) * xi[q];
      const auto g = euler_k1_grad(a, cplx(r, 0.0), std::polar(rho, 2 * pi * j / M));
      s += g.real() * 0.5 * (1 - b) * wi[q] * rho * 2 * pi / M;
    }
  return s;
}

void annulus_threshold(Outcome& o) {
  const EulerAnnulus a{0.1, 10.0};
  double worst = 0.0;
  for (double b : {0.3, 0.5, 0.8}) {
    const int direct = min_fold(a, b);
    const int closed = annulus_closed_threshold(a, b);
    o.require(direct == closed, "b = " + fmt(b) + ": " + std::to_string(direct) + " vs " + std::to_string(closed));
    o.detail << "b=" << b << ": m=" << direct << "/" << closed << "; ";
    // outer boundary velocity is c_b itself, inner is c_b / b^2
    const double c = annulus_green(a).frak_c(b);
    worst = std::max(worst, std::abs(annulus_k1_velocity(a, b, 1.0) - c));
    worst = std::max(worst, std::abs(annulus_k1_velocity(a, b, b) / b - c / (b * b)));
  }
  o.require(worst < 1e-12, "c_b gap " + fmt(worst));
  o.detail << "c_b closed vs Green's-function quadrature " << worst;
}

void contour_linearization(Outcome& o, double& seconds) {
  const auto t0 = std::chrono::steady_clock::now();
  for (const KernelModel& m : {KernelModel{EulerPlane{}}, KernelModel{EulerAnnulus{0.1, 10.0}}}) {
    const double om = *dispersion_point(m, 4, 0.5).omega_plus;
    const LinearizationCheck c = check_linearization(m, 0.5, 4, 8, om);
    o.require(c.max_block_error < 1e-4, model_name(m) + " block error " + fmt(c.max_block_error));
    o.detail << model_name(m) << " max block error " << c.max_block_error << ", off-block " << c.off_block_rel
             << "; ";
  }
  seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void branch_tangent(Outcome& o) {
  for (Branch br : {Branch::Plus, Branch::Minus}) {
    const BranchResult r = branch_continue(EulerPlane{}, 0.5, 5, br, 1e-4, 1);
    const char* tag = br == Branch::Plus ? "+" : "-";
    if (r.diverged) {
      o.require(false, std::string("branch ") + tag + " diverged: " + r.message);
      continue;
    }
    const BranchPoint& p = r.points.back();
    const double te = tangent_error(p, r.kernel), dw = std::abs(p.state.omega - r.omega0);
    o.require(te < 1e-2, std::string("tangent ") + tag + " " + fmt(te));
    o.require(dw < 1e-3, std::string("Omega drift ") + tag + " " + fmt(dw));
    o.detail << "branch " << tag << ": tangent error " << te << ", |dOmega| " << dw << "; ";
  }
}

void monotonicity(Outcome& o) {
  for (const KernelModel& m : {KernelModel{EulerPlane{}}, KernelModel{QgswPlane{1.0}}, KernelModel{EulerAnnulus{0.1, 10.0}}}) {
    const MonotonicityReport r = monotonicity_scan(m, 0.5, 20, 101);
    o.require(r.ok, model_name(m) + " at n = " + std::to_string(r.first_violation) + ": " + r.message);
    // gaps to the limits shrink like 1/n
    const DispersionPoint a = dispersion_point(m, 20, 0.5), c = dispersion_point(m, 120, 0.5);
    const double g20 = std::max(*a.omega_minus + r.v1, -r.v2 - *a.omega_plus);
    const double g120 = std::max(*c.omega_minus + r.v1, -r.v2 - *c.omega_plus);
    o.require(g120 < g20 / 4 && g120 * 120 < 1.0, model_name(m) + " limit gap " + fmt(g120));
    o.detail << model_name(m) << " case " << r.kase << " ok, limit gap n=20 " << g20 << " n=120 " << g120 << "; ";
  }
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* title;
    double budget;  ///< seconds, 0 for none
    std::function<void(Outcome&, double&)> run;
  };
  auto timed = [](void (*f)(Outcome&)) {
    return [f](Outcome& o, double& s) {
      const auto t0 = std::chrono::steady_clock::now();
      f(o);
      s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    };
  };
  const std::vector<Criterion> all = {
      {1, "Euler-plane spectrum by measure quadrature", 10, timed(euler_quadrature)},
      {2, "degenerate and stable dispersion points", 0, timed(degenerate_point)},
      {3, "phi bounds with explicit constants", 30, timed(phi_bounds)},
      {4, "strict decrease of phi_{n,b} in n", 0, timed(strict_decrease)},
      {5, "Psi_0.5 positivity and slope integral", 0, timed(psi_positive)},
      {6, "QGSW summation identity", 20, timed(qgsw_identity)},
      {7, "Sneddon formula", 0, timed(sneddon)},
      {8, "QGSW disc velocities", 0, timed(qgsw_disc)},
      {9, "gSQG disc velocities", 0, timed(gsqg_disc)},
      {10, "annulus threshold and c_b", 0, timed(annulus_threshold)},
      {11, "contour linearization", 120, contour_linearization},
      {12, "branch tangent", 0, timed(branch_tangent)},
      {13, "monotonicity scan", 0, timed(monotonicity)},
  };
  int failed = 0;
  for (const auto& c : all) {
    Outcome o;
    double seconds = 0.0;
    try {
      c.run(o, seconds);
    } catch (const std::exception& e) {
      o.require(false, std::string("exception: ") + e.what());
    }
    if (c.budget > 0 && seconds > c.budget) o.require(false, "runtime " + fmt(seconds) + " s over budget");
    failed += !o.pass;
    std::printf("%s criterion %d: %s | %s (%.2f s)\n", o.pass ? "PASS" : "FAIL", c.id, c.title,
                o.detail.str().c_str(), seconds);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(all.size()) - failed, all.size());
  return failed ? 1 : 0;
}

// SPDX-License-Identifier: Apache-2.0
/// @file cli.hpp
/// @brief Batch commands behind the vstate tool: spectral tables, threshold
/// scans, universal-function samples, identity checks and branches.
#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "config.hpp"
#include "contour.hpp"
#include "dispersion.hpp"
#include "errors.hpp"
#include "models.hpp"
#include "universal.hpp"

namespace vstate {

struct RunConfig {
  std::string command;
  KernelModel model;
  std::vector<double> b;
  std::vector<int> n;
  std::vector<double> x;
  int m = 4;
  Branch branch = Branch::Plus;
  double tol = default_tol;
  int k_max = default_k_max;
  int m_cap = default_m_cap;
  double s_max = 1e-2;
  int steps = 4;
  int contour_N = 8;
  ContourOptions contour;
  int samples = 256;
  std::string out;
  Config raw;
};

// ------------------------------------------------------------ parsing

/// "lo:hi:count" (inclusive, evenly spaced) or a comma list.
inline std::vector<double> parse_real_grid(const std::string& text, const std::string& what) {
  std::vector<double> v;
  if (text.find(':') != std::string::npos) {
    std::vector<std::string> p;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ':')) p.push_back(item);
    if (p.size() != 3) throw usage_error(what + ": range must be lo:hi:count");
    const double lo = parse_double(p[0]), hi = parse_double(p[1]);
    const long cnt = parse_int(p[2]);
    if (cnt < 1) throw usage_error(what + ": range count must be >= 1");
    for (long i = 0; i < cnt; ++i) v.push_back(cnt == 1 ? lo : lo + (hi - lo) * i / (cnt - 1));
  } else {
    for (const auto& s : split_list(text)) v.push_back(parse_double(s));
  }
  if (v.empty()) throw usage_error(what + ": empty grid");
  return v;
}

/// "a:b" (inclusive) or a comma list.
inline std::vector<int> parse_int_range(const std::string& text, const std::string& what) {
  std::vector<int> v;
  const auto colon = text.find(':');
  if (colon != std::string::npos) {
    const long a = parse_int(text.substr(0, colon)), c = parse_int(text.substr(colon + 1));
    for (long i = a; i <= c; ++i) v.push_back(static_cast<int>(i));
  } else {
    for (const auto& s : split_list(text)) v.push_back(static_cast<int>(parse_int(s)));
  }
  if (v.empty()) throw usage_error(what + ": empty range");
  for (int k : v)
    if (k < 1) throw usage_error(what + ": entries must be >= 1");
  return v;
}

/// Keys: model.* and measure.* (see model_from_config), run.b, run.n, run.x,
/// run.m, run.branch, run.tol, run.k_max, run.m_cap, run.s_max, run.steps,
/// run.samples, run.out, contour.N, contour.grid, contour.radial.
inline RunConfig make_run_config(const std::string& command, const Config& cfg) {
  RunConfig rc;
  rc.command = command;
  rc.raw = cfg;
  try {
    rc.model = model_from_config(cfg);
  } catch (const domain_error& e) {
    throw usage_error(e.what());
  }
  rc.b = parse_real_grid(cfg.get_string("run.b", "0.5"), "b");
  rc.n = parse_int_range(cfg.get_string("run.n", "1:10"), "n");
  rc.x = parse_real_grid(cfg.get_string("run.x", "0:20:201"), "x");
  rc.m = static_cast<int>(cfg.get_int("run.m", 4));
  if (rc.m < 1) throw usage_error("m must be >= 1");
  const std::string br = cfg.get_string("run.branch", "plus");
  if (br == "plus" || br == "+") rc.branch = Branch::Plus;
  else if (br == "minus" || br == "-") rc.branch = Branch::Minus;
  else throw usage_error("branch must be plus or minus");
  rc.tol = cfg.get_double("run.tol", default_tol);
  rc.k_max = static_cast<int>(cfg.get_int("run.k_max", default_k_max));
  rc.m_cap = static_cast<int>(cfg.get_int("run.m_cap", default_m_cap));
  rc.s_max = cfg.get_double("run.s_max", 1e-2);
  rc.steps = static_cast<int>(cfg.get_int("run.steps", 4));
  rc.samples = static_cast<int>(cfg.get_int("run.samples", 256));
  rc.contour_N = static_cast<int>(cfg.get_int("contour.N", 8));
  rc.contour.grid = static_cast<int>(cfg.get_int("contour.grid", 0));
  rc.contour.radial_nodes = static_cast<int>(cfg.get_int("contour.radial", 16));
  rc.out = cfg.get_string("run.out", "");
  if (!(rc.tol > 0.0)) throw usage_error("tol must be > 0");
  if (rc.k_max < 5) throw usage_error("k_max must be >= 5");
  if (rc.steps < 1) throw usage_error("steps must be >= 1");
  if (!(rc.s_max > 0.0)) throw usage_error("s_max must be > 0");
  if (rc.contour_N < 1 || rc.contour.radial_nodes < 2) throw usage_error("contour.N and contour.radial too small");
  if (command != "universal" && command != "verify") {
    const auto [lo, hi] = s_max(rc.model);
    for (double b : rc.b)
      if (!(b > lo && b < hi)) throw usage_error("b = " + std::to_string(b) + " lies outside S_max");
  }
  return rc;
}

// ---------------------------------------------------------------- CSV

inline std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.15g", v);
  return buf;
}

inline std::string fmt(const std::optional<double>& v) { return v ? fmt(*v) : std::string(); }

class CsvWriter {
 public:
  explicit CsvWriter(std::ostream& os) : os_(os) {}
  void meta(const std::string& key, const std::string& value) { os_ << "# " << key << " = " << value << "\n"; }
  void row(const std::vector<std::string>& cells) {
    for (size_t i = 0; i < cells.size(); ++i) os_ << (i ? "," : "") << cells[i];
    os_ << "\n";
  }

 private:
  std::ostream& os_;
};

inline void write_model_meta(CsvWriter& w, const RunConfig& rc) {
  w.meta("command", rc.command);
  w.meta("model", model_name(rc.model));
  for (const auto& [k, v] : rc.raw.values())
    if (k.rfind("model.", 0) == 0 || k.rfind("measure.", 0) == 0) w.meta(k, v);
}

/// Output sink: DIR/<name> when an output directory is set, else `fallback`.
class Sink {
 public:
  Sink(const RunConfig& rc, const std::string& name, std::ostream& fallback) {
    if (rc.out.empty()) {
      os_ = &fallback;
      return;
    }
    std::filesystem::create_directories(rc.out);
    file_ = std::make_unique<std::ofstream>(std::filesystem::path(rc.out) / name);
    if (!*file_) throw usage_error("cannot write to '" + rc.out + "'");
    os_ = file_.get();
  }
  std::ostream& stream() { return *os_; }

 private:
  std::unique_ptr<std::ofstream> file_;
  std::ostream* os_ = nullptr;
};

// ----------------------------------------------------------- commands

inline int cmd_spectra(const RunConfig& rc, std::ostream& os) {
  Sink sink(rc, "spectra.csv", os);
  CsvWriter w(sink.stream());
  write_model_meta(w, rc);
  w.row({"n", "b", "lambda_b", "lambda_1", "lambda_t", "p_b", "p_1", "p_t", "c", "ct", "src_lambda",
         "src_p", "src_c", "V1", "V2", "A", "B", "coupling", "delta", "omega_plus", "omega_minus",
         "stability"});
  for (double b : rc.b) {
    const auto [v1, v2] = v1_v2(rc.model, b);
    for (int n : rc.n) {
      const SpectralRow r = spectral_row(rc.model, n, b);
      const DispersionPoint d = assemble(r, v1, v2, rc.tol);
      w.row({std::to_string(n), fmt(b), fmt(r.lambda_b), fmt(r.lambda_1), fmt(r.lambda_t), fmt(r.p_b),
             fmt(r.p_1), fmt(r.p_t), fmt(r.c), fmt(r.ct), source_name(r.src_lambda), source_name(r.src_p),
             source_name(r.src_c), fmt(v1), fmt(v2), fmt(d.A), fmt(d.B), fmt(d.coupling), fmt(d.delta),
             fmt(d.omega_plus), fmt(d.omega_minus), stability_name(d.stability)});
    }
  }
  return 0;
}

inline int cmd_threshold(const RunConfig& rc, std::ostream& os) {
  Sink sink(rc, "threshold.csv", os);
  CsvWriter w(sink.stream());
  write_model_meta(w, rc);
  w.meta("tol", fmt(rc.tol));
  w.meta("k_max", std::to_string(rc.k_max));
  w.meta("m_cap", std::to_string(rc.m_cap));
  w.row({"b", "min_fold", "delta_inf", "V1", "V2", "in_S", "closed_threshold", "status"});
  for (double b : rc.b) {
    const auto [v1, v2] = v1_v2(rc.model, b);
    const bool in_s = s_membership(rc.model, b, rc.tol);
    std::string mf, status = "ok", closed;
    if (!in_s) {
      status = "not-in-S";
    } else {
      try {
        mf = std::to_string(min_fold(rc.model, b, rc.k_max, rc.tol, rc.m_cap));
      } catch (const not_found_error&) {
        status = "not-found";
      }
    }
    if (auto* a = std::get_if<EulerAnnulus>(&rc.model)) {
      const int t = annulus_closed_threshold(*a, b, rc.m_cap);
      closed = t ? std::to_string(t) : "";
    }
    if (auto* e = std::get_if<EulerExterior>(&rc.model)) {
      const int t = exterior_closed_threshold(*e, b, rc.m_cap);
      closed = t ? std::to_string(t) : "";
    }
    w.row({fmt(b), mf, fmt((v1 - v2) * (v1 - v2)), fmt(v1), fmt(v2), in_s ? "true" : "false", closed, status});
  }
  return 0;
}

inline int cmd_universal(const RunConfig& rc, std::ostream& os) {
  Sink sink(rc, "universal.csv", os);
  CsvWriter w(sink.stream());
  w.meta("command", rc.command);
  w.row({"x", "b", "n", "phi_n", "phi_nb", "b_phi_1b", "psi_b"});
  for (double b : rc.b) {
    if (!(b > 0.0 && b < 1.0)) throw usage_error("universal: b must lie in (0,1)");
    for (int n : rc.n)
      for (double x : rc.x) {
        if (x < 0.0) throw usage_error("universal: x must be >= 0");
        w.row({fmt(x), fmt(b), std::to_string(n), fmt(phi_n(n, x)), fmt(phi_nb(n, b, x)),
               fmt(b * phi_nb(1, b, x)), fmt(psi_b(b, x))});
      }
  }
  return 0;
}

struct SuiteResult {
  std::string name;
  double max_error = 0.0;
  double threshold = 0.0;
  bool pass = false;
};

inline std::vector<SuiteResult> run_verify_suites(const ContourOptions& contour = {}) {
  std::vector<SuiteResult> out;
  {
    SuiteResult s{"qgsw-identity", 0.0, 1e-6};
    const double pts[5][3] = {{0.5, 0.5, 1.0}, {0.7, 0.7, 1.0}, {0.9, 0.3, 2.0}, {0.6, 0.2, 0.5}, {1.0, 0.5, 3.0}};
    for (const auto& p : pts) {
      const IdentityCheck c = qgsw_disc_identity(p[0], p[1], p[2]);
      s.max_error = std::max(s.max_error, std::abs(c.series.value - c.closed));
    }
    out.push_back(s);
  }
  {
    SuiteResult s{"sneddon", 0.0, 1e-5};
    struct P { int bi, gi, n; double q, a, b; };
    const P ps[3] = {{1, 1, 0, 1.5, 0.5, 0.5}, {1, 1, 0, 1.3, 0.3, 0.8}, {2, 2, 2, 1.6, 0.4, 0.4}};
    for (const auto& p : ps) {
      const double series = sneddon_series(p.bi, p.gi, p.n, p.q, p.a, p.b).value;
      const double ref = sneddon_integral(p.bi, p.gi, p.n, p.q, p.a, p.b);
      s.max_error = std::max(s.max_error, std::abs(series - ref));
    }
    out.push_back(s);
  }
  {
    SuiteResult s{"euler-quadrature", 0.0, 1e-7};
    const Measure mu = Measure::euler();
    for (double b : {0.3, 0.5, 0.8})
      for (int n = 1; n <= 10; ++n) {
        const double l = 1.0 / (2.0 * n), lt = std::pow(b, n) / (2.0 * n);
        s.max_error = std::max(s.max_error, std::abs(quadrature_lambda(mu, n, b) / l - 1.0));
        s.max_error = std::max(s.max_error, std::abs(quadrature_tilde_lambda(mu, n, b) / lt - 1.0));
      }
    out.push_back(s);
  }
  {
    SuiteResult s{"contour-fd-jacobian", 0.0, 1e-4};
    const KernelModel m = EulerPlane{};
    const double om = *dispersion_point(m, 4, 0.5).omega_plus;
    s.max_error = check_linearization(m, 0.5, 4, 8, om, contour).max_block_error;
    out.push_back(s);
  }
  for (auto& s : out) s.pass = s.max_error < s.threshold;
  return out;
}

inline int cmd_verify(const RunConfig& rc, std::ostream& os) {
  const auto suites = run_verify_suites(rc.contour);
  Sink sink(rc, "verify.csv", os);
  CsvWriter w(sink.stream());
  w.meta("command", rc.command);
  w.row({"suite", "max_error", "threshold", "status"});
  bool ok = true;
  for (const auto& s : suites) {
    w.row({s.name, fmt(s.max_error), fmt(s.threshold), s.pass ? "pass" : "fail"});
    ok = ok && s.pass;
  }
  return ok ? 0 : 1;
}

inline void write_boundary(std::ostream& os, const PerturbationState& st, double b, int samples) {
  CsvWriter w(os);
  w.meta("s", fmt(st.s));
  w.row({"theta", "x_inner", "y_inner", "x_outer", "y_outer"});
  const BoundaryCurves c = boundary_export(st, b, samples);
  for (size_t i = 0; i < c.theta.size(); ++i)
    w.row({fmt(c.theta[i]), fmt(c.inner[i].real()), fmt(c.inner[i].imag()), fmt(c.outer[i].real()),
           fmt(c.outer[i].imag())});
}

/// Branch table for the first b of the run. Returns 1 when Newton stops early.
inline int cmd_branch(const RunConfig& rc, std::ostream& os) {
  const double b = rc.b.front();
  BranchOptions bo;
  bo.N = rc.contour_N;
  bo.contour = rc.contour;
  const BranchResult res = branch_continue(rc.model, b, rc.m, rc.branch, rc.s_max, rc.steps, bo);
  Sink sink(rc, "branch.csv", os);
  CsvWriter w(sink.stream());
  write_model_meta(w, rc);
  w.meta("b", fmt(b));
  w.meta("m", std::to_string(rc.m));
  w.meta("branch", rc.branch == Branch::Plus ? "plus" : "minus");
  w.meta("omega0", fmt(res.omega0));
  w.meta("kernel_vector", fmt(res.kernel[0]) + " " + fmt(res.kernel[1]));
  w.meta("diverged", res.diverged ? "true" : "false");
  w.meta("last_s", fmt(res.last_s));
  if (!res.message.empty()) w.meta("message", res.message);
  std::vector<std::string> head{"s", "omega", "residual", "iterations"};
  for (int k = 1; k <= bo.N; ++k) head.push_back("r1_" + std::to_string(k * rc.m));
  for (int k = 1; k <= bo.N; ++k) head.push_back("r2_" + std::to_string(k * rc.m));
  w.row(head);
  for (const auto& p : res.points) {
    std::vector<std::string> row{fmt(p.s), fmt(p.state.omega), fmt(p.residual), std::to_string(p.iterations)};
    for (double c : p.state.r1) row.push_back(fmt(c));
    for (double c : p.state.r2) row.push_back(fmt(c));
    w.row(row);
  }
  if (!rc.out.empty()) {
    for (size_t i = 0; i < res.points.size(); ++i) {
      std::ofstream f(std::filesystem::path(rc.out) / ("boundary_" + std::to_string(i) + ".csv"));
      if (!f) throw usage_error("cannot write boundary file");
      write_boundary(f, res.points[i].state, b, rc.samples);
    }
  }
  if (res.diverged) {
    std::cerr << "branch: " << res.message << " (last converged s = " << fmt(res.last_s) << ")\n";
    return 1;
  }
  return 0;
}

inline int run_command(const RunConfig& rc, std::ostream& os) {
  if (rc.command == "spectra") return cmd_spectra(rc, os);
  if (rc.command == "threshold") return cmd_threshold(rc, os);
  if (rc.command == "universal") return cmd_universal(rc, os);
  if (rc.command == "verify") return cmd_verify(rc, os);
  if (rc.command == "branch") return cmd_branch(rc, os);
  throw usage_error("unknown command '" + rc.command + "'");
}

}  // namespace vstate

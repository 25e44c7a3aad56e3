// SPDX-License-Identifier: Apache-2.0
// vstate: command-line front-end.
//
//   vstate <command> [--config PATH] [--model NAME --param key=val ...]
//          [--b ...] [--n ...] [--m ...] [--out DIR]
//
// Exit status: 0 success, 2 usage error, 1 numerical failure.

#include <CLI11.hpp>

#include <iostream>
#include <string>
#include <vector>

#include "vstate/cli.hpp"

namespace {

struct Flags {
  std::string config;
  std::string model;
  std::vector<std::string> params;
  std::string b, n, x, m, out, branch, s_max, steps, N, grid;
};

void add_common(CLI::App* sub, Flags& f) {
  sub->add_option("--config", f.config, "INI-style config file");
  sub->add_option("--model", f.model, "model name, e.g. euler-plane, gsqg-disc, euler-annulus");
  sub->add_option("--param", f.params, "key=val; bare keys go to model.*")->take_all();
  sub->add_option("--b", f.b, "b list 'a,b,..' or range 'lo:hi:count'");
  sub->add_option("--n", f.n, "n range 'a:b' or list");
  sub->add_option("--m", f.m, "symmetry fold");
  sub->add_option("--out", f.out, "output directory (default: stdout)");
}

vstate::Config merge(const Flags& f) {
  vstate::Config cfg;
  if (!f.config.empty()) cfg = vstate::Config::load(f.config);
  auto put = [&](const char* key, const std::string& v) {
    if (!v.empty()) cfg.set(key, v);
  };
  put("model.name", f.model);
  for (const auto& p : f.params) {
    const auto eq = p.find('=');
    if (eq == std::string::npos || eq == 0) throw vstate::usage_error("--param expects key=val, got '" + p + "'");
    std::string key = vstate::trim(p.substr(0, eq));
    if (key.find('.') == std::string::npos) key = "model." + key;
    cfg.set(key, vstate::trim(p.substr(eq + 1)));
  }
  put("run.b", f.b);
  put("run.n", f.n);
  put("run.x", f.x);
  put("run.m", f.m);
  put("run.out", f.out);
  put("run.branch", f.branch);
  put("run.s_max", f.s_max);
  put("run.steps", f.steps);
  put("contour.N", f.N);
  put("contour.grid", f.grid);
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectral and contour-dynamics tools for doubly connected V-states"};
  app.require_subcommand(1);
  Flags f;
  auto* spectra = app.add_subcommand("spectra", "table of lambda, p, V, Delta and Omega per (n, b)");
  auto* universal = app.add_subcommand("universal", "samples of phi_n, phi_{n,b}, b phi_{1,b}, Psi_b");
  auto* threshold = app.add_subcommand("threshold", "smallest admissible fold m per b");
  auto* verify = app.add_subcommand("verify", "identity and linearization suites");
  auto* branch = app.add_subcommand("branch", "local bifurcation branch from the annulus");
  for (auto* s : {spectra, universal, threshold, verify, branch}) add_common(s, f);
  universal->add_option("--x", f.x, "x grid 'lo:hi:count' or list");
  branch->add_option("--branch", f.branch, "plus or minus");
  branch->add_option("--s-max", f.s_max, "largest amplitude s");
  branch->add_option("--steps", f.steps, "number of s steps");
  branch->add_option("--N", f.N, "modes per boundary");
  branch->add_option("--grid", f.grid, "theta grid size (default 4 N m)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  const std::string cmd = app.get_subcommands().front()->get_name();
  try {
    const vstate::RunConfig rc = vstate::make_run_config(cmd, merge(f));
    return vstate::run_command(rc, std::cout);
  } catch (const vstate::usage_error& e) {
    std::cerr << "vstate: " << e.what() << "\n";
    return 2;
  } catch (const vstate::numerical_error& e) {
    std::cerr << "vstate: numerical failure: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "vstate: " << e.what() << "\n";
    return 1;
  }
}

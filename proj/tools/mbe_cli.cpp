// Command-line driver: convergence sweeps, coarsening simulations, property verification
// and DOC kernel dumps.

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "mbe/adaptive.hpp"
#include "mbe/model.hpp"
#include "mbe/snapshot.hpp"
#include "mbe/solver.hpp"
#include "mbe/trace_io.hpp"
#include "mbe/verify.hpp"

namespace fs = std::filesystem;
using namespace mbe;

namespace {

enum Exit { kOk = 0, kSolverFailure = 1, kConfigError = 2, kVerificationFailure = 3 };

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  int M = 64;
  double L = 6.283185307179586;
  double delta = 0.1;
  double T = 1.0;
  double tau = 1e-3;
  std::vector<int> N_list{40, 80, 160, 320};
  double graded_r = 2.0;
  std::string forcing = "discrete";
  bool adaptive = false;
  ControllerConfig controller;
  SolverConfig solver;
  std::vector<double> snapshots{0.0, 0.05, 2.5, 5.5, 8.0, 30.0};
  std::string out;
  std::uint64_t seed = 20240917;

  // verify / verify-kernels
  long trials = 1000;
  double inject_fault = 0.0;
  int levels = 20;
  std::string mesh = "random";
};

std::string join(const std::vector<int>& v) {
  std::string s;
  for (std::size_t k = 0; k < v.size(); ++k) s += (k ? "," : "") + std::to_string(v[k]);
  return s;
}

std::string join(const std::vector<double>& v) {
  std::string s;
  for (std::size_t k = 0; k < v.size(); ++k) s += (k ? "," : "") + format_real(v[k]);
  return s;
}

void add_model_options(CLI::App* cmd, RunConfig& c) {
  cmd->add_option("--M", c.M, "grid points per dimension")->capture_default_str();
  cmd->add_option("--L", c.L, "domain edge length")->capture_default_str();
  cmd->add_option("--delta", c.delta, "surface diffusion coefficient")->capture_default_str();
  cmd->add_option("--T", c.T, "final time")->capture_default_str();
  cmd->add_option("--out", c.out, "output directory")->capture_default_str();
  cmd->add_option("--seed", c.seed, "random seed")->capture_default_str();
}

void add_solver_options(CLI::App* cmd, RunConfig& c) {
  cmd->add_option("--picard-tol", c.solver.picard_tol, "Picard increment tolerance (L2)")->capture_default_str();
  cmd->add_option("--max-picard", c.solver.max_picard, "Picard iteration cap")->capture_default_str();
  cmd->add_option("--omega", c.solver.relaxation, "Picard relaxation in (0,1]")->capture_default_str();
}

// Effective parameters as a config file that can be fed back through --config.
void write_echo(const fs::path& dir, const std::string& section, const std::vector<std::pair<std::string, std::string>>& kv) {
  std::ofstream os = open_output(dir / "config.ini");
  os << "[" << section << "]\n";
  for (const auto& [k, v] : kv) os << k << " = " << v << "\n";
}

std::vector<std::pair<std::string, std::string>> common_echo(const RunConfig& c) {
  return {{"M", std::to_string(c.M)},
          {"L", format_real(c.L)},
          {"delta", format_real(c.delta)},
          {"T", format_real(c.T)},
          {"out", c.out},
          {"seed", std::to_string(c.seed)}};
}

void append_solver_echo(std::vector<std::pair<std::string, std::string>>& kv, const RunConfig& c) {
  kv.push_back({"picard-tol", format_real(c.solver.picard_tol)});
  kv.push_back({"max-picard", std::to_string(c.solver.max_picard)});
  kv.push_back({"omega", format_real(c.solver.relaxation)});
}

fs::path prepare_out(const RunConfig& c) {
  fs::path dir(c.out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw ConfigError("cannot create output directory '" + c.out + "'");
  return dir;
}

// Validation wrapper: std::invalid_argument from the library becomes a config error.
template <typename F>
auto validated(F&& f) {
  try {
    return f();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

// ---------------------------------------------------------------------------

int cmd_converge(RunConfig c) {
  const ForcingMode mode = validated([&] { return parse_forcing_mode(c.forcing); });
  if (mode == ForcingMode::none) throw ConfigError("converge: --forcing must be discrete or analytic");
  if (c.N_list.empty()) throw ConfigError("converge: --N-list is empty");
  for (int N : c.N_list)
    if (N < 1) throw ConfigError("converge: every N in --N-list must be positive");
  if (!(c.T > 0.0)) throw ConfigError("converge: --T must be positive");
  if (!(c.graded_r >= 1.0)) throw ConfigError("converge: --graded-r must be at least 1");
  const ModelParams params = validated([&] { return ModelParams(c.delta, GridSpec{c.L, c.M}); });
  validated([&] {
    c.solver.validate();
    return 0;
  });
  c.solver.mode = mode;
  const fs::path dir = prepare_out(c);

  auto echo = common_echo(c);
  echo.push_back({"N-list", join(c.N_list)});
  echo.push_back({"graded-r", format_real(c.graded_r)});
  echo.push_back({"forcing", std::string(to_string(mode))});
  append_solver_echo(echo, c);
  write_echo(dir, "converge", echo);

  auto run_case = [&](int N) {
    const TimeMesh mesh = TimeMesh::graded(c.T, N, c.graded_r);
    const FieldD g0 = manufactured_forcing(0.0, params, mode);
    const FieldD u0 = initial_data(manufactured(0.0, params.grid), params, mesh.tau(1), &g0);
    const ForcingProvider forcing = [&](double t) { return manufactured_forcing(t, params, mode); };
    const MarchResult run = march(u0, mesh, c.solver, params, forcing);
    return norm_l2(run.final - manufactured(c.T, params.grid));
  };

  // Independent marches, one task per N; results are collected in input order.
  std::vector<std::future<double>> jobs;
  for (int N : c.N_list) jobs.push_back(std::async(std::launch::async, run_case, N));
  std::vector<double> errors;
  for (auto& j : jobs) errors.push_back(j.get());

  std::ofstream os = open_output(dir / "convergence.csv");
  // rms_error = error / L, the L2 error normalized by |Omega|^(1/2).
  os << "N,error,order,rms_error\n";
  std::printf("%8s %24s %10s %12s\n", "N", "error", "order", "rms_error");
  for (std::size_t k = 0; k < errors.size(); ++k) {
    std::string order;
    if (k > 0) order = format_real(std::log(errors[k - 1] / errors[k]) / std::log(double(c.N_list[k]) / c.N_list[k - 1]));
    os << c.N_list[k] << ',' << format_real(errors[k]) << ',' << order << ',' << format_real(errors[k] / c.L) << '\n';
    std::printf("%8d %24.17g %10s %12.4e\n", c.N_list[k], errors[k], order.empty() ? "-" : order.substr(0, 8).c_str(),
                errors[k] / c.L);
  }
  return kOk;
}

// ---------------------------------------------------------------------------

const char* kPlotScript = R"PY(#!/usr/bin/env python3
"""Renders energy, step size, roughness and height snapshots from a simulate run.

Usage: python3 plot.py [run-dir]   (defaults to the directory holding this script)
"""
import csv
import os
import sys

import numpy as np
import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

run = sys.argv[1] if len(sys.argv) > 1 else os.path.dirname(os.path.abspath(__file__))


def read_csv(name):
    with open(os.path.join(run, name)) as fh:
        return list(csv.DictReader(fh))


def read_mbe1(path):
    with open(path, "rb") as fh:
        header = fh.readline().split()
        m, length, t = int(header[1]), float(header[2]), float(header[3])
        data = np.frombuffer(fh.read(m * m * 8), dtype="<f8").reshape(m, m)
    return data, length, t


energy = read_csv("energy.csv")
t = np.array([float(r["t"]) for r in energy])
E = np.array([float(r["E"]) for r in energy])
Emod = np.array([float(r["E_mod"]) for r in energy])
R = np.array([float(r["roughness"]) for r in energy])
tau = np.array([float(r["tau"]) for r in energy])

fig, ax = plt.subplots(1, 3, figsize=(15, 4))
ax[0].plot(t, E, label="E")
ax[0].plot(t, Emod, "--", label="modified E")
ax[0].set_xscale("symlog", linthresh=1e-2)
ax[0].set_xlabel("t")
ax[0].legend()
ax[0].set_title("energy")
ax[1].semilogy(t[1:], tau[1:], ".", ms=2)
ax[1].set_xlabel("t")
ax[1].set_title("step size")
ax[2].plot(t, R)
ax[2].set_xlabel("t")
ax[2].set_title("roughness")
fig.tight_layout()
fig.savefig(os.path.join(run, "energy.png"), dpi=120)

snaps = read_csv("snapshots.csv")
if snaps:
    fig, ax = plt.subplots(1, len(snaps), figsize=(3.2 * len(snaps), 3))
    ax = np.atleast_1d(ax)
    for a, row in zip(ax, snaps):
        u, length, ts = read_mbe1(os.path.join(run, row["file"]))
        im = a.imshow(u.T, origin="lower", extent=[0, length, 0, length], cmap="viridis")
        a.set_title("t = %g" % ts)
        fig.colorbar(im, ax=a, shrink=0.8)
    fig.tight_layout()
    fig.savefig(os.path.join(run, "snapshots.png"), dpi=120)
)PY";

int cmd_simulate(RunConfig c) {
  const ForcingMode mode = validated([&] { return parse_forcing_mode(c.forcing); });
  if (mode != ForcingMode::none) throw ConfigError("simulate: only --forcing none is supported");
  if (!(c.T >= 0.0)) throw ConfigError("simulate: --T must be non-negative");
  if (!c.adaptive && !(c.tau > 0.0)) throw ConfigError("simulate: --tau must be positive");
  const ModelParams params = validated([&] { return ModelParams(c.delta, GridSpec{c.L, c.M}); });
  validated([&] {
    c.solver.validate();
    if (c.adaptive) c.controller.validate();
    return 0;
  });
  for (double s : c.snapshots)
    if (!(s >= 0.0)) throw ConfigError("simulate: snapshot times must be non-negative");
  const fs::path dir = prepare_out(c);

  auto echo = common_echo(c);
  echo.push_back({"forcing", "none"});
  echo.push_back({"adaptive", c.adaptive ? "true" : "false"});
  echo.push_back({"tau", format_real(c.tau)});
  echo.push_back({"rho", format_real(c.controller.rho)});
  echo.push_back({"tol", format_real(c.controller.tol)});
  echo.push_back({"tau-min", format_real(c.controller.tau_min)});
  echo.push_back({"tau-max", format_real(c.controller.tau_max)});
  echo.push_back({"ratio-cap", format_real(c.controller.ratio_cap)});
  append_solver_echo(echo, c);
  echo.push_back({"snapshots", join(c.snapshots)});
  write_echo(dir, "simulate", echo);

  std::vector<double> snap_times;
  for (double s : c.snapshots)
    if (s <= c.T * (1.0 + 1e-12)) snap_times.push_back(s);
  const FieldD phi0 = coarsening_initial_data(params.grid);

  std::vector<EnergyRecord> trace;
  std::vector<Snapshot> snapshots;
  if (c.adaptive) {
    const FieldD u0 = initial_data(phi0, params, c.controller.tau_min);
    AdaptiveResult run;
    if (c.T > 0.0) {
      AdaptiveOptions opts;
      opts.snapshot_times = snap_times;
      run = run_adaptive(u0, c.T, c.controller, c.solver, params, {}, opts);
    } else {
      EnergyRecord r0;
      r0.E = r0.E_mod = discrete_energy(u0, params);
      r0.roughness = roughness(u0);
      run.trace.push_back(r0);
      TrialRecord t0;
      t0.record = r0;
      t0.accepted = true;
      run.trials.push_back(t0);
      if (!snap_times.empty()) run.snapshots.push_back({0.0, u0});
    }
    std::ofstream steps = open_output(dir / "steps.csv");
    write_trial_csv(steps, run.trials);
    std::printf("adaptive: %d accepted steps, %d rejections, tau in [%.3g, %.3g], max ratio %.4f\n",
                run.accepted_steps, run.rejections, run.tau_min_seen, run.tau_max_seen, run.max_ratio);
    if (run.energy_restriction_warnings > 0)
      std::fprintf(stderr, "warning: %d steps exceed the energy-stability step restriction\n",
                   run.energy_restriction_warnings);
    if (run.energy_increases > 0)
      std::fprintf(stderr, "warning: modified energy rose on %d compliant steps\n", run.energy_increases);
    trace = std::move(run.trace);
    snapshots = std::move(run.snapshots);
  } else {
    const int steps = c.T > 0.0 ? static_cast<int>(std::ceil(c.T / c.tau - 1e-9)) : 0;
    const TimeMesh mesh = steps > 0 ? TimeMesh::uniform(c.T / steps, steps) : TimeMesh();
    const FieldD u0 = initial_data(phi0, params, steps > 0 ? mesh.tau(1) : c.tau);
    MarchOptions opts;
    opts.snapshot_times = snap_times;
    MarchResult run = march(u0, mesh, c.solver, params, {}, opts);
    std::printf("fixed: %d steps of %.6g\n", steps, steps > 0 ? mesh.tau(1) : 0.0);
    if (run.solvability_warnings > 0)
      std::fprintf(stderr, "warning: %d steps exceed the unique-solvability restriction\n", run.solvability_warnings);
    if (run.energy_restriction_warnings > 0)
      std::fprintf(stderr, "warning: %d steps exceed the energy-stability step restriction\n",
                   run.energy_restriction_warnings);
    trace = std::move(run.trace);
    snapshots = std::move(run.snapshots);
  }

  std::ofstream energy = open_output(dir / "energy.csv");
  write_energy_csv(energy, trace);
  std::ofstream index = open_output(dir / "snapshots.csv");
  index << "index,t,file\n";
  for (std::size_t k = 0; k < snapshots.size(); ++k) {
    const std::string name = "snapshot_" + std::to_string(k) + ".mbe1";
    write_snapshot(dir / name, snapshots[k].field, snapshots[k].t);
    index << k << ',' << format_real(snapshots[k].t) << ',' << name << '\n';
  }
  std::ofstream plot = open_output(dir / "plot.py");
  plot << kPlotScript;

  const EnergyRecord& last = trace.back();
  std::printf("t = %.6g  E = %.12g  E_mod = %.12g  roughness = %.6g\n", last.t, last.E, last.E_mod, last.roughness);
  return kOk;
}

// ---------------------------------------------------------------------------

int cmd_verify(RunConfig c) {
  if (c.trials < 1) throw ConfigError("verify: --trials must be at least 1");
  if (c.M < 4) throw ConfigError("verify: --M must be at least 4");
  if (!(c.delta > 0.0) || !(c.T > 0.0)) throw ConfigError("verify: --delta and --T must be positive");
  const fs::path dir = prepare_out(c);

  VerifyConfig v;
  v.seed = c.seed;
  v.force_trials = 100 * c.trials;
  v.mesh_trials = c.trials;
  v.field_trials = c.trials;
  v.field_M = c.M;
  v.fault = c.inject_fault;
  v.energy.delta = c.delta;
  v.energy.T = c.T;
  v.energy.L = c.L;
  v.energy.picard_tol = c.solver.picard_tol;

  auto echo = common_echo(c);
  echo.push_back({"trials", std::to_string(c.trials)});
  echo.push_back({"picard-tol", format_real(c.solver.picard_tol)});
  if (c.inject_fault != 0.0) echo.push_back({"inject-fault", format_real(c.inject_fault)});
  write_echo(dir, "verify", echo);

  const std::vector<CheckReport> reports = validated([&] { return run_verification(v); });
  std::ofstream os = open_output(dir / "verify.txt");
  bool ok = true;
  for (const CheckReport& r : reports) {
    const std::string line = format_report(r);
    std::cout << line << '\n';
    os << line << '\n';
    ok = ok && r.pass;
  }
  return ok ? kOk : kVerificationFailure;
}

int cmd_verify_kernels(RunConfig c) {
  if (c.levels < 1) throw ConfigError("verify-kernels: --levels must be at least 1");
  const fs::path dir = prepare_out(c);
  TimeMesh mesh;
  if (c.mesh == "uniform") {
    mesh = validated([&] { return TimeMesh::uniform(c.tau, c.levels); });
  } else if (c.mesh == "graded") {
    mesh = validated([&] { return TimeMesh::graded(c.T, c.levels, c.graded_r); });
  } else if (c.mesh == "random") {
    if (!(c.controller.ratio_cap > 0.0)) throw ConfigError("verify-kernels: --ratio-cap must be positive");
    std::mt19937_64 rng(c.seed);
    mesh = random_mesh(rng, c.levels, c.controller.ratio_cap);
  } else {
    throw ConfigError("verify-kernels: --mesh must be uniform, graded or random");
  }

  auto echo = common_echo(c);
  echo.push_back({"levels", std::to_string(c.levels)});
  echo.push_back({"mesh", c.mesh});
  echo.push_back({"tau", format_real(c.tau)});
  echo.push_back({"graded-r", format_real(c.graded_r)});
  echo.push_back({"ratio-cap", format_real(c.controller.ratio_cap)});
  write_echo(dir, "verify-kernels", echo);

  std::ofstream os = open_output(dir / "kernels.csv");
  write_kernel_csv(os, mesh, c.levels);
  const DocTable rec = doc_table_recursive(mesh, c.levels);
  const DocTable prod = doc_table_product(mesh, c.levels);
  double worst = 0.0;
  for (int n = 1; n <= c.levels; ++n)
    for (int k = 1; k <= n; ++k) {
      const double mag = std::max({std::abs(rec(n, k)), std::abs(prod(n, k)), 1e-300});
      worst = std::max(worst, std::abs(rec(n, k) - prod(n, k)) / mag);
    }
  std::printf("%d levels, max ratio %.4f, worst relative difference %.3e\n", c.levels, mesh.max_ratio(), worst);
  return worst <= 1e-12 ? kOk : kVerificationFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Variable-step BDF2 solver for the slope-selection thin-film model"};
  app.require_subcommand(1);
  app.config_formatter(std::make_shared<CLI::ConfigINI>());
  app.set_config("--config", "", "key = value file with [subcommand] sections; flags win");
  app.allow_config_extras(CLI::config_extras_mode::error);

  RunConfig conv;
  conv.out = "converge-out";
  CLI::App* converge = app.add_subcommand("converge", "temporal convergence on graded meshes");
  add_model_options(converge, conv);
  add_solver_options(converge, conv);
  converge->add_option("--N-list", conv.N_list, "step counts")->delimiter(',')->capture_default_str();
  converge->add_option("--graded-r", conv.graded_r, "grading exponent r in t_k = T (k/N)^r")->capture_default_str();
  converge->add_option("--forcing", conv.forcing, "discrete or analytic manufactured forcing")
      ->check(CLI::IsMember({"none", "discrete", "analytic"}))
      ->capture_default_str();

  RunConfig sim;
  sim.M = 128;
  sim.T = 30.0;
  sim.forcing = "none";
  sim.out = "simulate-out";
  CLI::App* simulate = app.add_subcommand("simulate", "coarsening run from the two-mode initial height");
  add_model_options(simulate, sim);
  add_solver_options(simulate, sim);
  simulate->add_option("--tau", sim.tau, "fixed step size")->capture_default_str();
  simulate->add_option("--forcing", sim.forcing, "must be none")
      ->check(CLI::IsMember({"none", "discrete", "analytic"}))
      ->capture_default_str();
  simulate->add_flag("--adaptive", sim.adaptive, "use the adaptive step controller");
  simulate->add_option("--rho", sim.controller.rho, "safety factor")->capture_default_str();
  simulate->add_option("--tol", sim.controller.tol, "tolerance on the relative change")->capture_default_str();
  simulate->add_option("--tau-min", sim.controller.tau_min, "smallest step")->capture_default_str();
  simulate->add_option("--tau-max", sim.controller.tau_max, "largest step")->capture_default_str();
  simulate->add_option("--ratio-cap", sim.controller.ratio_cap, "largest step ratio")->capture_default_str();
  simulate->add_option("--snapshots", sim.snapshots, "snapshot times t1,t2,...")->delimiter(',')->capture_default_str();

  RunConfig ver;
  ver.M = 32;
  ver.out = "verify-out";
  CLI::App* verify = app.add_subcommand("verify", "randomized checks of the kernel and embedding inequalities");
  add_model_options(verify, ver);
  verify->add_option("--picard-tol", ver.solver.picard_tol, "Picard tolerance of the energy-law run")
      ->capture_default_str();
  verify->add_option("--trials", ver.trials, "meshes/fields per sweep (force pairs: 100x)")->capture_default_str();
  verify->add_option("--inject-fault", ver.inject_fault)->group("");

  RunConfig kern;
  kern.out = "kernels-out";
  CLI::App* kernels = app.add_subcommand("verify-kernels", "dump DOC kernels from recursion and product formula");
  add_model_options(kernels, kern);
  kernels->add_option("--levels", kern.levels, "number of levels")->capture_default_str();
  kernels->add_option("--mesh", kern.mesh, "uniform, graded or random")->capture_default_str();
  kernels->add_option("--tau", kern.tau, "uniform step")->capture_default_str();
  kernels->add_option("--graded-r", kern.graded_r, "grading exponent")->capture_default_str();
  kernels->add_option("--ratio-cap", kern.controller.ratio_cap, "ratio bound of random meshes")->capture_default_str();
  kern.controller.ratio_cap = 4.8;

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfigError;
  }

  try {
    if (*converge) return cmd_converge(conv);
    if (*simulate) return cmd_simulate(sim);
    if (*verify) return cmd_verify(ver);
    if (*kernels) return cmd_verify_kernels(kern);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const SolverError& e) {
    std::cerr << "solver failure: " << e.what() << '\n';
    return kSolverFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kSolverFailure;
  }
  return kConfigError;
}

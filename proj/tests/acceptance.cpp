// Acceptance harness: one PASS/FAIL line per criterion. Pass a criterion id
// (AC1 .. AC9) to run a single one, or nothing to run them all.
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <future>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "mbe/adaptive.hpp"
#include "mbe/solver.hpp"
#include "mbe/trace_io.hpp"
#include "mbe/verify.hpp"

using namespace mbe;

namespace {

constexpr double kL = 6.283185307179586;
constexpr double kDelta = 0.1;

bool report(const char* id, bool pass, const std::string& detail) {
  std::printf("%s %s %s\n", pass ? "PASS" : "FAIL", id, detail.c_str());
  std::fflush(stdout);
  return pass;
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// L2 error at T of the manufactured run on a graded mesh, one task per N.
std::vector<double> manufactured_errors(int M, ForcingMode mode, const std::vector<int>& Ns, double T = 1.0) {
  const ModelParams p(kDelta, GridSpec(kL, M));
  auto run = [&](int N) {
    const TimeMesh mesh = TimeMesh::graded(T, N, 2.0);
    const FieldD g0 = manufactured_forcing(0.0, p, mode);
    const FieldD u0 = initial_data(manufactured(0.0, p.grid), p, mesh.tau(1), &g0);
    const MarchResult r = march(u0, mesh, SolverConfig{}, p, [&](double t) { return manufactured_forcing(t, p, mode); });
    return norm_l2(r.final - manufactured(T, p.grid));
  };
  std::vector<std::future<double>> jobs;
  for (int N : Ns) jobs.push_back(std::async(std::launch::async, run, N));
  std::vector<double> out;
  for (auto& j : jobs) out.push_back(j.get());
  return out;
}

ModelParams example2_params() { return ModelParams(kDelta, GridSpec(kL, 128)); }

MarchResult example2_fixed(double tau, double T, bool residual) {
  const ModelParams p = example2_params();
  const int steps = static_cast<int>(std::ceil(T / tau - 1e-9));
  const TimeMesh mesh = TimeMesh::uniform(tau, steps);
  MarchOptions o;
  o.check_residual = residual;
  return march(initial_data(coarsening_initial_data(p.grid), p, tau), mesh, SolverConfig{}, p, {}, o);
}

AdaptiveResult example2_adaptive(double T, bool residual) {
  const ModelParams p = example2_params();
  const ControllerConfig c;
  AdaptiveOptions o;
  o.check_residual = residual;
  return run_adaptive(initial_data(coarsening_initial_data(p.grid), p, c.tau_min), T, c, SolverConfig{}, p, {}, o);
}

bool ac1() {
  const std::vector<int> Ns{40, 80, 160, 320};
  const auto e = manufactured_errors(64, ForcingMode::discrete, Ns);
  bool decreasing = true;
  std::vector<double> order;
  for (std::size_t k = 1; k < e.size(); ++k) {
    decreasing &= e[k] < e[k - 1];
    order.push_back(std::log2(e[k - 1] / e[k]));
  }
  const bool in_band = std::all_of(order.end() - 2, order.end(), [](double q) { return q >= 1.8 && q <= 2.2; });
  return report("AC1", decreasing && in_band,
                fmt("errors=%.3e,%.3e,%.3e,%.3e orders=%.3f,%.3f,%.3f", e[0], e[1], e[2], e[3], order[0], order[1],
                    order[2]));
}

bool ac2() {
  // Reference values are root-mean-square errors, i.e. L2 / |Omega|^(1/2).
  const auto e = manufactured_errors(1024, ForcingMode::analytic, {40, 80});
  const double rms40 = e[0] / kL, rms80 = e[1] / kL;
  auto within = [](double v, double ref) { return v <= 2 * ref && v >= ref / 2; };
  return report("AC2", within(rms40, 1.03e-4) && within(rms80, 2.82e-5),
                fmt("rms N=40 %.4e (ref 1.03e-4) N=80 %.4e (ref 2.82e-5); L2 %.4e %.4e", rms40, rms80, e[0], e[1]));
}

bool ac3() {
  const MarchResult r = example2_fixed(1e-3, 5.0, false);
  double worst_rise = -INFINITY, worst_over = -INFINITY;
  for (std::size_t n = 1; n < r.trace.size(); ++n) {
    worst_rise = std::max(worst_rise, r.trace[n].E_mod - r.trace[n - 1].E_mod);
    worst_over = std::max(worst_over, r.trace[n].E - r.trace[0].E);
  }
  return report("AC3", worst_rise <= 1e-10 && worst_over <= 0.0 && r.energy_restriction_warnings == 0,
                fmt("steps=%zu max(Emod[n]-Emod[n-1])=%.3e max(E[n]-E[0])=%.3e E0=%.6f E(5)=%.6f", r.trace.size() - 1,
                    worst_rise, worst_over, r.trace.front().E, r.trace.back().E));
}

bool ac4() {
  auto fixed = std::async(std::launch::async, [] { return example2_fixed(1e-3, 30.0, false); });
  const AdaptiveResult a = example2_adaptive(30.0, false);
  const MarchResult f = fixed.get();
  const double Ef = f.trace.back().E, Ea = a.trace.back().E;
  const bool pa = a.max_ratio <= kAdaptiveRatioCap + 1e-12;
  const bool pb = 10 * a.accepted_steps <= 30000;
  const bool pc = std::abs(Ea - Ef) <= 0.01 * std::abs(Ef);
  bool all = report("AC4a", pa, fmt("max_ratio=%.6f", a.max_ratio));
  all &= report("AC4b", pb, fmt("accepted=%d rejections=%d (need <= 3000)", a.accepted_steps, a.rejections));
  all &= report("AC4c", pc, fmt("E_adaptive=%.10f E_fixed=%.10f rel=%.3e", Ea, Ef, std::abs(Ea - Ef) / Ef));
  return report("AC4", all, "");
}

bool ac5() {
  SweepOptions o;
  o.trials = 1000;
  o.max_levels = 200;
  bool all = true;
  std::string d;
  for (const CheckReport& r : check_kernel_identities(o)) {
    all &= r.pass;
    d += fmt("%s:%.2e ", r.name.c_str(), r.worst_slack);
  }
  return report("AC5", all, d);
}

bool ac6() {
  VerifyConfig c;
  bool all = true;
  for (const CheckReport& r : run_verification(c)) {
    all &= r.pass;
    std::printf("  %s\n", format_report(r).c_str());
  }
  return report("AC6", all, "");
}

bool ac7() {
  // Residual of every accepted step in an unforced adaptive run and a forced graded run.
  const AdaptiveResult a = example2_adaptive(5.0, true);
  const ModelParams p(kDelta, GridSpec(kL, 64));
  const TimeMesh mesh = TimeMesh::graded(1.0, 80, 2.0);
  const FieldD g0 = manufactured_forcing(0.0, p, ForcingMode::discrete);
  MarchOptions o;
  o.check_residual = true;
  const MarchResult m = march(initial_data(manufactured(0.0, p.grid), p, mesh.tau(1), &g0), mesh, SolverConfig{}, p,
                              [&](double t) { return manufactured_forcing(t, p, ForcingMode::discrete); }, o);
  return report("AC7", a.max_residual_ratio <= 1.0 && m.max_residual_ratio <= 1.0,
                fmt("max residual/(10 tol b0): adaptive=%.3e (%d steps) forced=%.3e", a.max_residual_ratio,
                    a.accepted_steps, m.max_residual_ratio));
}

bool ac8() {
  const AdaptiveResult a = example2_adaptive(30.0, false);
  auto it = std::min_element(a.trace.begin(), a.trace.end(),
                             [](const EnergyRecord& x, const EnergyRecord& y) { return x.roughness < y.roughness; });
  const double Rend = a.trace.back().roughness;
  return report("AC8", it->t < 5.0 && Rend > it->roughness,
                fmt("min R=%.4e at t=%.4f R(30)=%.4f", it->roughness, it->t, Rend));
}

bool ac9() {
  auto csvs = [] {
    std::ostringstream os;
    const ModelParams p(kDelta, GridSpec(kL, 64));
    const ControllerConfig c;
    const AdaptiveResult a = run_adaptive(initial_data(coarsening_initial_data(p.grid), p, c.tau_min), 1.0, c,
                                          SolverConfig{}, p);
    write_trial_csv(os, a.trials);
    const TimeMesh mesh = TimeMesh::uniform(1e-2, 50);
    write_energy_csv(os, march(initial_data(coarsening_initial_data(p.grid), p, 1e-2), mesh, SolverConfig{}, p).trace);
    std::mt19937_64 rng(42);
    write_kernel_csv(os, random_mesh(rng, 100, 4.8), 100);
    for (double e : manufactured_errors(32, ForcingMode::discrete, {10, 20, 40})) os << format_real(e) << '\n';
    return os.str();
  };
  auto first = std::async(std::launch::async, csvs);
  const std::string b = csvs();
  const std::string a = first.get();
  return report("AC9", a == b, fmt("bytes=%zu identical=%s", a.size(), a == b ? "yes" : "no"));
}

}  // namespace

int main(int argc, char** argv) {
  const std::map<std::string, std::function<bool()>> checks{{"AC1", ac1}, {"AC2", ac2}, {"AC3", ac3},
                                                            {"AC4", ac4}, {"AC5", ac5}, {"AC6", ac6},
                                                            {"AC7", ac7}, {"AC8", ac8}, {"AC9", ac9}};
  std::vector<std::string> wanted(argv + 1, argv + argc);
  if (wanted.empty())
    for (const auto& kv : checks) wanted.push_back(kv.first);
  bool all = true;
  for (const std::string& id : wanted) {
    auto it = checks.find(id);
    if (it == checks.end()) {
      std::fprintf(stderr, "unknown criterion %s\n", id.c_str());
      return 2;
    }
    try {
      all &= it->second();
    } catch (const std::exception& e) {
      all &= report(id.c_str(), false, std::string("exception: ") + e.what());
    }
  }
  return all ? 0 : 1;
}

#include "mbe/solver.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace mbe {

void SolverConfig::validate() const {
  if (!(picard_tol > 0.0)) throw std::invalid_argument("picard_tol must be positive");
  if (max_picard < 1) throw std::invalid_argument("max_picard must be at least 1");
  if (!(relaxation > 0.0 && relaxation <= 1.0)) throw std::invalid_argument("omega must lie in (0, 1]");
}

Bdf2Stepper::Bdf2Stepper(const ModelParams& params, const SolverConfig& config, FieldD u0)
    : params_(params), config_(config), u_(std::move(u0)), spectral_(params.grid) {
  config_.validate();
  if (!(u_.grid() == params_.grid)) throw std::invalid_argument("Bdf2Stepper: initial field grid mismatch");
  if (!u_.all_finite()) throw std::invalid_argument("Bdf2Stepper: initial field is not finite");
}

StepResult Bdf2Stepper::trial(double tau, const FieldD* forcing) {
  TimeMesh mesh = mesh_;
  mesh.append(tau);
  const int n = mesh.steps();
  const Bdf2Coeffs c = bdf2_coeffs(mesh, n);

  // History part of the scheme: b0 u^{n-1} - b1 (u^{n-1} - u^{n-2}), or b0 u^0 at the first level.
  FieldD history = c.b0 * u_;
  if (n >= 2) history -= c.b1 * (u_ - *u_prev_);
  if (forcing != nullptr) history += *forcing;

  StepResult result;
  result.tau = tau;
  result.stats.b0 = c.b0;
  result.stats.solvability_ok = c.b0 > 1.0 / (4.0 * params_.delta);

  const double omega = config_.relaxation;
  FieldD w = u_;
  double inc = 0.0;
  for (int m = 1; m <= config_.max_picard; ++m) {
    FieldD next = spectral_.solve(history + nonlinear_term(w), c.b0, params_.delta);
    if (omega < 1.0) next = (1.0 - omega) * w + omega * next;
    if (!next.all_finite())
      throw SolverError("Picard iteration produced non-finite values at level " + std::to_string(n), inc);
    inc = norm_l2(next - w);
    w = std::move(next);
    const double scale = config_.relative_tolerance ? std::max(norm_l2(w), 1e-300) : 1.0;
    if (inc <= config_.picard_tol * scale) {
      result.u = std::move(w);
      result.stats.iterations = m;
      result.stats.increment = inc;
      return result;
    }
  }
  throw SolverError("Picard iteration did not converge within " + std::to_string(config_.max_picard) +
                        " iterations at level " + std::to_string(n) + " (last increment " + std::to_string(inc) + ")",
                    inc);
}

void Bdf2Stepper::accept(StepResult result) {
  mesh_.append(result.tau);
  u_prev_ = std::move(u_);
  u_ = std::move(result.u);
}

double step_residual(const FieldD& u_n, const FieldD& u_prev, const FieldD* u_prev2, const TimeMesh& mesh, int n,
                     double delta, const FieldD* forcing) {
  using LD = long double;
  const Bdf2Coeffs c = bdf2_coeffs(mesh, n);
  const Field<LD> un = u_n.cast<LD>();
  const Field<LD> up = u_prev.cast<LD>();
  Field<LD> r = (un - up) * LD(c.b0);
  if (n >= 2) {
    if (u_prev2 == nullptr) throw std::invalid_argument("step_residual: u^{n-2} required for n >= 2");
    r += (up - u_prev2->cast<LD>()) * LD(c.b1);
  }
  r += LD(delta) * bilaplacian(un);
  r -= nonlinear_term(un);
  if (forcing != nullptr) r -= forcing->cast<LD>();
  return static_cast<double>(norm_l2(r));
}

double energy_step_bound(const TimeMesh& mesh, int n, double delta) {
  const double r2 = mesh.ratio(2);
  return 4.0 * delta * std::min(r_L(mesh.ratio(n), mesh.ratio(n + 1)), (2.0 + r2) / (1.0 + r2));
}

void finalize_modified_energy(std::vector<EnergyRecord>& trace, std::span<const double> increments,
                              const TimeMesh& mesh) {
  for (std::size_t k = 0; k < trace.size(); ++k) {
    EnergyRecord& rec = trace[k];
    rec.E_mod = rec.E;
    if (rec.step == 0) continue;
    const double r = mesh.ratio(rec.step + 1);
    const double inc = increments[k];
    rec.E_mod += r * std::sqrt(r) / (2.0 * (1.0 + r) * mesh.tau(rec.step)) * inc * inc;
  }
}

namespace {

EnergyRecord make_record(int step, double t, double tau, const FieldD& u, const ModelParams& params, int iters) {
  EnergyRecord rec;
  rec.step = step;
  rec.t = t;
  rec.tau = tau;
  rec.E = discrete_energy(u, params);
  rec.roughness = roughness(u);
  rec.picard_iters = iters;
  return rec;
}

}  // namespace

MarchResult march(const FieldD& u0, const TimeMesh& mesh, const SolverConfig& config, const ModelParams& params,
                  const ForcingProvider& forcing, const MarchOptions& options) {
  Bdf2Stepper stepper(params, config, u0);
  MarchResult out;
  out.mesh = mesh;

  std::vector<double> snap_times = options.snapshot_times;
  std::sort(snap_times.begin(), snap_times.end());
  std::size_t next_snap = 0;
  // A requested time is served by the first level at or after it.
  auto emit_snapshots = [&](double t, const FieldD& u) {
    while (next_snap < snap_times.size() && snap_times[next_snap] <= t + 1e-12 * std::max(1.0, t)) {
      out.snapshots.push_back({t, u});
      ++next_snap;
    }
  };

  std::vector<double> increments{0.0};
  out.trace.push_back(make_record(0, 0.0, 0.0, u0, params, 0));
  emit_snapshots(0.0, u0);

  for (int n = 1; n <= mesh.steps(); ++n) {
    const double t = mesh.t(n);
    std::optional<FieldD> g;
    if (forcing) g = forcing(t);
    StepResult res = stepper.trial(mesh.tau(n), g ? &*g : nullptr);

    if (!res.stats.solvability_ok) ++out.solvability_warnings;
    if (!(mesh.tau(n) < energy_step_bound(mesh, n, params.delta))) ++out.energy_restriction_warnings;
    if (options.check_residual) {
      const double r = step_residual(res.u, stepper.current(), stepper.previous(), mesh, n, params.delta,
                                     g ? &*g : nullptr);
      out.max_residual_ratio = std::max(out.max_residual_ratio, r / (10.0 * config.picard_tol * res.stats.b0));
    }

    increments.push_back(norm_l2(res.u - stepper.current()));
    const int iters = res.stats.iterations;
    stepper.accept(std::move(res));
    out.trace.push_back(make_record(n, t, mesh.tau(n), stepper.current(), params, iters));
    emit_snapshots(t, stepper.current());
  }
  finalize_modified_energy(out.trace, increments, mesh);
  out.final = stepper.current();
  return out;
}

}  // namespace mbe

#include "mbe/adaptive.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>

namespace mbe {

void ControllerConfig::validate() const {
  if (!(rho > 0.0 && rho <= 1.0)) throw std::invalid_argument("rho must lie in (0, 1]");
  if (!(tol > 0.0)) throw std::invalid_argument("tol must be positive");
  if (!(tau_min > 0.0)) throw std::invalid_argument("tau-min must be positive");
  if (!(tau_max >= tau_min)) throw std::invalid_argument("tau-max must be at least tau-min");
  if (!(ratio_cap >= 1.0 && ratio_cap <= kRatioStabilityBound))
    throw std::invalid_argument("ratio-cap must lie in [1, 4.864]");
  if (max_retries < 1) throw std::invalid_argument("max_retries must be at least 1");
}

double tau_ada(double e, double tau_cur, const ControllerConfig& config) {
  if (e == 0.0) return std::numeric_limits<double>::infinity();
  return std::sqrt(config.tol / e) * config.rho * tau_cur;
}

AdaptiveStepper::AdaptiveStepper(const ModelParams& params, const SolverConfig& solver,
                                 const ControllerConfig& controller, FieldD u0)
    : stepper_(params, solver, std::move(u0)), controller_(controller), proposed_tau_(controller.tau_min) {
  controller_.validate();
}

AdvanceRecord AdaptiveStepper::advance(double t_final, const ForcingProvider& forcing, bool check_residual) {
  const ControllerConfig& c = controller_;
  const double t = stepper_.time();
  if (!(t_final > t)) throw std::invalid_argument("AdaptiveStepper::advance: already at the final time");

  AdvanceRecord out;
  out.level = stepper_.level() + 1;
  // The first two levels run at tau_min; the controller takes over after that.
  double tau = out.level <= 2 ? c.tau_min : proposed_tau_;
  bool landing = false;
  if (t + tau >= t_final) {
    tau = t_final - t;
    landing = true;
  }

  const double u_norm_guard = 0.0;
  for (int attempt = 0; attempt <= c.max_retries; ++attempt) {
    const double t_new = landing ? t_final : t + tau;
    std::optional<FieldD> g;
    if (forcing) g = forcing(t_new);
    StepResult res = stepper_.trial(tau, g ? &*g : nullptr);

    const double diff = norm_l2(res.u - stepper_.current());
    const double unorm = norm_l2(res.u);
    const double e = unorm > u_norm_guard ? diff / unorm : diff;

    TrialRecord trial;
    trial.record.step = out.level;
    trial.record.t = t_new;
    trial.record.tau = tau;
    trial.record.E = discrete_energy(res.u, stepper_.params());
    trial.record.E_mod = trial.record.E;
    trial.record.roughness = roughness(res.u);
    trial.record.picard_iters = res.stats.iterations;
    trial.change = e;
    trial.rejections = attempt;

    const bool at_floor = tau <= c.tau_min;
    if (e < c.tol || at_floor) {
      trial.accepted = true;
      out.trials.push_back(trial);
      out.t = t_new;
      out.tau = tau;
      out.change = e;
      out.rejections = attempt;
      out.stats = res.stats;
      if (out.level == 1)
        out.next_tau = c.tau_min;
      else if (e < c.tol)
        out.next_tau = std::min({std::max(c.tau_min, tau_ada(e, tau, c)), c.ratio_cap * tau, c.tau_max});
      else
        out.next_tau = c.tau_min;
      if (check_residual) {
        TimeMesh mesh = stepper_.mesh();
        mesh.append(tau);
        out.residual = step_residual(res.u, stepper_.current(), stepper_.previous(), mesh, out.level,
                                     stepper_.params().delta, g ? &*g : nullptr);
      }
      stepper_.accept(std::move(res));
      proposed_tau_ = out.next_tau;
      return out;
    }

    out.trials.push_back(trial);
    tau = std::max(c.tau_min, tau_ada(e, tau, c));
    landing = false;
  }
  throw SolverError("adaptive step at t = " + std::to_string(t) + " rejected " + std::to_string(c.max_retries) +
                        " times",
                    0.0);
}

AdaptiveResult run_adaptive(const FieldD& u0, double t_final, const ControllerConfig& controller,
                            const SolverConfig& solver, const ModelParams& params, const ForcingProvider& forcing,
                            const AdaptiveOptions& options) {
  if (!(t_final >= 0.0)) throw std::invalid_argument("run_adaptive: T must be non-negative");
  AdaptiveStepper ada(params, solver, controller, u0);
  AdaptiveResult out;

  std::vector<double> snap_times = options.snapshot_times;
  std::sort(snap_times.begin(), snap_times.end());
  std::size_t next_snap = 0;
  auto emit_snapshots = [&](double t, const FieldD& u) {
    while (next_snap < snap_times.size() && snap_times[next_snap] <= t + 1e-12 * std::max(1.0, t)) {
      out.snapshots.push_back({t, u});
      ++next_snap;
    }
  };

  EnergyRecord rec0;
  rec0.E = discrete_energy(u0, params);
  rec0.roughness = roughness(u0);
  out.trace.push_back(rec0);
  TrialRecord row0;
  row0.record = rec0;
  row0.accepted = true;
  out.trials.push_back(row0);
  emit_snapshots(0.0, u0);

  std::vector<double> increments{0.0};
  out.tau_min_seen = std::numeric_limits<double>::infinity();
  while (ada.stepper().time() < t_final) {
    const FieldD before = ada.stepper().current();
    AdvanceRecord adv = ada.advance(t_final, forcing, options.check_residual);
    const FieldD& now = ada.stepper().current();
    increments.push_back(norm_l2(now - before));
    out.rejections += adv.rejections;
    out.trials.insert(out.trials.end(), adv.trials.begin(), adv.trials.end());
    out.trace.push_back(adv.trials.back().record);
    if (adv.residual >= 0.0)
      out.max_residual_ratio =
          std::max(out.max_residual_ratio, adv.residual / (10.0 * solver.picard_tol * adv.stats.b0));
    const bool landing_step = ada.stepper().time() >= t_final;
    if (!landing_step || adv.level == 1) {
      out.tau_min_seen = std::min(out.tau_min_seen, adv.tau);
      out.tau_max_seen = std::max(out.tau_max_seen, adv.tau);
    }
    emit_snapshots(adv.t, now);
  }
  if (out.trace.size() == 1) out.tau_min_seen = 0.0;

  out.mesh = ada.stepper().mesh();
  out.accepted_steps = out.mesh.steps();
  out.max_ratio = out.mesh.max_ratio();
  finalize_modified_energy(out.trace, increments, out.mesh);
  for (TrialRecord& row : out.trials)
    if (row.accepted) row.record.E_mod = out.trace[row.record.step].E_mod;

  for (int n = 1; n <= out.mesh.steps(); ++n) {
    if (!(out.mesh.tau(n) < energy_step_bound(out.mesh, n, params.delta))) {
      ++out.energy_restriction_warnings;
      continue;
    }
    if (!forcing && out.trace[n].E_mod > out.trace[n - 1].E_mod + 1e-10) ++out.energy_increases;
  }
  out.final = ada.stepper().current();
  return out;
}

}  // namespace mbe

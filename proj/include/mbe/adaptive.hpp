#ifndef MBE_ADAPTIVE_HPP
#define MBE_ADAPTIVE_HPP

#include <limits>
#include <vector>

#include "mbe/solver.hpp"

namespace mbe {

struct ControllerConfig {
  double rho = 0.9;         ///< safety coefficient
  double tol = 1e-3;        ///< reference tolerance on the relative change
  double tau_min = 1e-4;
  double tau_max = 0.1;
  double ratio_cap = kAdaptiveRatioCap;
  int max_retries = 20;

  void validate() const;
};

/// sqrt(tol/e) * rho * tau_cur; +infinity when e == 0. Clamping is the caller's job.
double tau_ada(double e, double tau_cur, const ControllerConfig& config);

/// One solver trial, accepted or not.
struct TrialRecord {
  EnergyRecord record;  ///< E_mod is only meaningful for accepted rows
  double change = 0.0;  ///< relative change e
  bool accepted = false;
  int rejections = 0;   ///< rejections preceding this trial at the same level
};

struct AdvanceRecord {
  int level = 0;
  double t = 0.0;
  double tau = 0.0;
  double change = 0.0;
  int rejections = 0;
  StepStats stats;
  double next_tau = 0.0;
  /// step_residual of the accepted level, or -1 when not requested.
  double residual = -1.0;
  std::vector<TrialRecord> trials;  ///< rejected trials followed by the accepted one
};

/// Error-driven step-size control around Bdf2Stepper: accept when the relative change
/// is below tol (or the step is already at tau_min), otherwise shrink and retry.
class AdaptiveStepper {
 public:
  AdaptiveStepper(const ModelParams& params, const SolverConfig& solver, const ControllerConfig& controller, FieldD u0);

  /// Produces the next accepted level. Steps are shortened so that no level passes t_final.
  AdvanceRecord advance(double t_final = std::numeric_limits<double>::infinity(),
                        const ForcingProvider& forcing = {}, bool check_residual = false);

  const Bdf2Stepper& stepper() const { return stepper_; }
  double proposed_tau() const { return proposed_tau_; }

 private:
  Bdf2Stepper stepper_;
  ControllerConfig controller_;
  double proposed_tau_;
};

struct AdaptiveOptions {
  std::vector<double> snapshot_times;
  /// Evaluate step_residual for every accepted step.
  bool check_residual = false;
};

struct AdaptiveResult {
  FieldD final;
  TimeMesh mesh;
  std::vector<EnergyRecord> trace;  ///< accepted levels only
  std::vector<TrialRecord> trials;  ///< every trial in order, including rejected ones
  std::vector<Snapshot> snapshots;

  int accepted_steps = 0;
  int rejections = 0;
  double tau_min_seen = 0.0;
  double tau_max_seen = 0.0;
  double max_ratio = 0.0;
  /// Accepted steps violating the energy-stability step restriction.
  int energy_restriction_warnings = 0;
  /// Steps that satisfy the restriction yet raise the modified energy by more than 1e-10.
  int energy_increases = 0;
  double max_residual_ratio = 0.0;
};

AdaptiveResult run_adaptive(const FieldD& u0, double t_final, const ControllerConfig& controller,
                            const SolverConfig& solver, const ModelParams& params,
                            const ForcingProvider& forcing = {}, const AdaptiveOptions& options = {});

}  // namespace mbe

#endif  // MBE_ADAPTIVE_HPP

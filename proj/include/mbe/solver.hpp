#ifndef MBE_SOLVER_HPP
#define MBE_SOLVER_HPP

#include <functional>
#include <optional>
#include <stdexcept>
#include <vector>

#include "mbe/grid.hpp"
#include "mbe/model.hpp"
#include "mbe/snapshot.hpp"
#include "mbe/spectral.hpp"
#include "mbe/timekernels.hpp"

namespace mbe {

struct SolverConfig {
  double picard_tol = 1e-12;
  int max_picard = 500;
  double relaxation = 1.0;
  ForcingMode mode = ForcingMode::none;
  /// Measure the Picard increment relative to ||u|| instead of absolutely.
  bool relative_tolerance = false;

  void validate() const;
};

/// Raised when the nonlinear iteration fails to converge or produces non-finite values.
class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, double last_increment)
      : std::runtime_error(what), last_increment_(last_increment) {}
  double last_increment() const { return last_increment_; }

 private:
  double last_increment_;
};

struct StepStats {
  int iterations = 0;
  double increment = 0.0;
  double b0 = 0.0;
  /// tau_n < 4 delta (1 + 2 r_n)/(1 + r_n), i.e. b0 > 1/(4 delta).
  bool solvability_ok = true;
};

struct StepResult {
  FieldD u;
  double tau = 0.0;
  StepStats stats;
};

/// Time-marching state of the implicit BDF2 scheme: u^{n-1}, u^{n-2}, the mesh so far
/// and a spectral solver for b0 + delta Lap_h^2.
class Bdf2Stepper {
 public:
  Bdf2Stepper(const ModelParams& params, const SolverConfig& config, FieldD u0);

  /// Solves for level n+1 with step tau. The state is left untouched.
  StepResult trial(double tau, const FieldD* forcing = nullptr);
  /// Appends a converged trial as the next level.
  void accept(StepResult result);

  int level() const { return mesh_.steps(); }
  double time() const { return mesh_.t(mesh_.steps()); }
  const TimeMesh& mesh() const { return mesh_; }
  const FieldD& current() const { return u_; }
  const FieldD* previous() const { return u_prev_ ? &*u_prev_ : nullptr; }
  const ModelParams& params() const { return params_; }
  const SolverConfig& config() const { return config_; }

 private:
  ModelParams params_;
  SolverConfig config_;
  TimeMesh mesh_;
  FieldD u_;
  std::optional<FieldD> u_prev_;
  SpectralSolver spectral_;
};

/// L2 norm of D_2 u^n + delta Lap_h^2 u^n - div_h f(grad_h u^n) - g^n, assembled with the grid
/// operators in extended precision. u_prev2 is required for n >= 2.
double step_residual(const FieldD& u_n, const FieldD& u_prev, const FieldD* u_prev2, const TimeMesh& mesh, int n,
                     double delta, const FieldD* forcing = nullptr);

/// Right-hand side of the energy-stability step restriction:
/// 4 delta min{R_L(r_n, r_{n+1}), (2 + r_2)/(1 + r_2)}.
double energy_step_bound(const TimeMesh& mesh, int n, double delta);

using ForcingProvider = std::function<FieldD(double t)>;

struct MarchOptions {
  std::vector<double> snapshot_times;
  /// Evaluate step_residual after every step and record residual / (10 tol b0).
  bool check_residual = false;
};

struct MarchResult {
  FieldD final;
  TimeMesh mesh;
  std::vector<EnergyRecord> trace;
  std::vector<Snapshot> snapshots;
  int solvability_warnings = 0;
  int energy_restriction_warnings = 0;
  /// Largest residual / (10 picard_tol b0) seen; only set with check_residual.
  double max_residual_ratio = 0.0;
};

/// Fills E_mod in trace rows from the increments ||u^n - u^{n-1}|| and the final mesh.
void finalize_modified_energy(std::vector<EnergyRecord>& trace, std::span<const double> increments,
                              const TimeMesh& mesh);

MarchResult march(const FieldD& u0, const TimeMesh& mesh, const SolverConfig& config, const ModelParams& params,
                  const ForcingProvider& forcing = {}, const MarchOptions& options = {});

}  // namespace mbe

#endif  // MBE_SOLVER_HPP

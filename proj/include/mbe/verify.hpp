#ifndef MBE_VERIFY_HPP
#define MBE_VERIFY_HPP

#include <Eigen/Core>

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "mbe/grid.hpp"
#include "mbe/model.hpp"
#include "mbe/timekernels.hpp"

namespace mbe {

/// Outcome of one randomized check. Slacks are margins divided by the magnitude of the
/// compared quantities, so pass <=> worst_slack >= -tolerance.
struct CheckReport {
  std::string name;
  long trials = 0;
  double worst_slack = 0.0;
  double tolerance = 0.0;
  long violations = 0;
  bool pass = true;
  std::string detail;  ///< parameters echoed for the report line

  /// Folds one observation in. Returns false when it violates the tolerance.
  bool record(double slack);
};

/// "PASS name trials=.. worst_slack=.. tol=.. violations=.. detail"
std::string format_report(const CheckReport& report);

// ---------------------------------------------------------------------------
// Single-instance quantities (also used directly by the tests)

/// Margins of the two pointwise inequalities for f(v) = (|v|^2 - 1) v, z = u - v:
///   z.f(u) - [ (|u|^4 - |v|^4)/4 - (|u|^2 - |v|^2)/2 - |z|^2/2 ]
///   z.(f(u) - f(v)) - [ |v|^2 |z|^2/2 + (u.z)^2/2 - |z|^2 ]
/// Both are >= 0 for all u, v.
struct ForceMargins {
  double first = 0.0;
  double second = 0.0;
  double scale_first = 1.0;
  double scale_second = 1.0;
};
ForceMargins force_margins(const Eigen::Vector2d& u, const Eigen::Vector2d& v);

/// sum_k w_k sum_{j<=k} b_{k-j}^(k) w_j over the first w.size() levels of mesh.
double bdf2_quadratic_form(const TimeMesh& mesh, std::span<const double> w);
/// (1/2) sum_k R_L(r_k, r_{k+1}) w_k^2 / tau_k, with r_{n+1} = 0 at the last entry.
double bdf2_lower_bound(const TimeMesh& mesh, std::span<const double> w);

/// sum_k sum_{l<=k} theta(k,l) v^l . w^k.
double doc_bilinear_form(const DocTable& theta, std::span<const Eigen::Vector2d> v,
                         std::span<const Eigen::Vector2d> w);

/// ||grad u||_6^6 against 40 ||grad u||_4^4 (4 ||Lap u||^2 + ||grad u||^2 / L^2).
EmbeddingReport check_l6_chain(const FieldD& u);
/// Empirical ratio ||grad u||_4 / (||grad u||^(1/2) (2 ||Lap u||^2 + ||grad u||^2/L^2)^(1/4)).
double l4_embedding_ratio(const FieldD& u);

/// C0 = max{sqrt K1, K1^(1/4)} with K1 = (4 E0 + 2 L^2) / min{2 delta, 1/4}.
double solution_bound(double E0, double delta, double L);

// ---------------------------------------------------------------------------
// Random inputs

/// Mesh with `levels` steps: first step log-uniform in [1e-3, 1e-1], ratios mostly
/// log-uniform in [1/ratio_bound, ratio_bound], with some equal to ratio_bound and some tiny.
TimeMesh random_mesh(std::mt19937_64& rng, int levels, double ratio_bound);

/// Mix of white noise, smooth random modes, single modes and spikes, random amplitude.
FieldD random_field(std::mt19937_64& rng, const GridSpec& grid);

// ---------------------------------------------------------------------------
// Sweeps

struct SweepOptions {
  long trials = 1000;
  std::uint64_t seed = 20240917;
  double ratio_bound = 4.8;
  int max_levels = 200;
  /// Relative perturbation of off-diagonal DOC kernels (negative-control hook).
  double fault = 0.0;
};

CheckReport check_force_inequalities(long trials, std::uint64_t seed);
/// Summed positive-definiteness bound of the BDF2 kernels on random meshes and sequences.
CheckReport check_positive_definiteness(const SweepOptions& options);
/// Orthogonal identity, row sums <= tau_n, and recursion against product formula.
std::vector<CheckReport> check_kernel_identities(const SweepOptions& options);
/// DOC positivity, the two-sided quadratic-form bound and the epsilon-weighted bilinear bound.
std::vector<CheckReport> check_doc_kernel_bounds(const SweepOptions& options);
/// ||grad v||^2 <= ||Lap v|| ||v|| on random fields.
CheckReport check_embedding_h1(long trials, std::uint64_t seed, const GridSpec& grid);
/// The constant-40 l6 chain on random fields; the detail carries the worst l4 ratio.
CheckReport check_embedding_l6(long trials, std::uint64_t seed, const GridSpec& grid);

struct EnergyLawOptions {
  int M = 32;
  double L = 6.283185307179586;
  double delta = 0.1;
  double T = 1.0;
  std::uint64_t seed = 20240917;
  /// Step sizes wander in [tau_lo, tau_hi] with ratios in [1/2, 2].
  double tau_lo = 1e-3;
  double tau_hi = 5e-2;
  double picard_tol = 1e-12;
};

/// Unforced run on a random admissible mesh: modified energy non-increasing within 1e-10
/// per step, and the a priori bound on ||grad u||, ||grad u||_4, ||Lap u||.
std::vector<CheckReport> check_energy_law(const EnergyLawOptions& options);

struct VerifyConfig {
  std::uint64_t seed = 20240917;
  long force_trials = 100000;
  long mesh_trials = 1000;
  long field_trials = 1000;
  int field_M = 32;
  double ratio_bound = 4.8;
  int max_levels = 200;
  double fault = 0.0;
  EnergyLawOptions energy;
};

std::vector<CheckReport> run_verification(const VerifyConfig& config);

}  // namespace mbe

#endif  // MBE_VERIFY_HPP

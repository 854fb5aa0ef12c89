#ifndef MBE_MODEL_HPP
#define MBE_MODEL_HPP

#include <Eigen/Core>

#include <string_view>

#include "mbe/grid.hpp"
#include "mbe/timekernels.hpp"

namespace mbe {

/// Parameters of u_t + delta Lap^2 u - div f(grad u) = g on a periodic grid.
struct ModelParams {
  double delta = 0.1;
  GridSpec grid;

  ModelParams() = default;
  ModelParams(double d, const GridSpec& g) : delta(d), grid(g) {
    if (!(d > 0.0)) throw std::invalid_argument("ModelParams: delta must be positive");
  }
};

/// One row of an energy trace.
struct EnergyRecord {
  int step = 0;
  double t = 0.0;
  double tau = 0.0;
  double E = 0.0;
  double E_mod = 0.0;
  double roughness = 0.0;
  int picard_iters = 0;
};

/// f(v) = (|v|^2 - 1) v for a single 2-vector.
inline Eigen::Vector2d force(const Eigen::Vector2d& v) { return (v.squaredNorm() - 1.0) * v; }

/// f applied pointwise to a discrete vector field.
template <typename Scalar>
VecField<Scalar> force(const VecField<Scalar>& w) {
  VecField<Scalar> out(w.grid());
  const auto m2 = (w.x.array() * w.x.array() + w.y.array() * w.y.array() - Scalar(1)).eval();
  out.x.array() = m2 * w.x.array();
  out.y.array() = m2 * w.y.array();
  return out;
}

/// div_h f(grad_h u).
template <typename Scalar>
Field<Scalar> nonlinear_term(const Field<Scalar>& u) {
  return divergence(force(gradient(u)));
}

/// E = (delta/2) ||Lap_h u||^2 + (1/4) || |grad_h u|^2 - 1 ||^2.
template <typename Scalar>
Scalar discrete_energy(const Field<Scalar>& u, const ModelParams& params) {
  const Scalar lap = norm_l2(laplacian(u));
  const VecField<Scalar> g = gradient(u);
  const Scalar* gx = g.x.data();
  const Scalar* gy = g.y.data();
  const Scalar s = pairwise_sum<Scalar>(0, u.size(), [&](std::size_t k) {
    const Scalar d = gx[k] * gx[k] + gy[k] * gy[k] - Scalar(1);
    return d * d;
  });
  const Scalar h = u.h();
  return Scalar(params.delta) / Scalar(2) * lap * lap + h * h * s / Scalar(4);
}

/// E^n + r_{n+1}^{3/2} / (2 (1 + r_{n+1}) tau_n) ||u^n - u^{n-1}||^2, with r_{n+1} = 0
/// when level n+1 does not exist. Level 0 returns E unchanged.
double modified_energy(double E, const FieldD& u_n, const FieldD& u_prev, const TimeMesh& mesh, int n);

/// RMS deviation from the spatial mean, ||u - mean(u)|| / L.
double roughness(const FieldD& u);

/// u^0 = phi0 - (tau1/2) phi1 with phi1 = div f(grad phi0) - delta Lap^2 phi0 (+ g(0) if given),
/// all built from the discrete operators.
FieldD initial_data(const FieldD& phi0, const ModelParams& params, double tau1, const FieldD* forcing_at_0 = nullptr);

enum class ForcingMode { none, discrete, analytic };

ForcingMode parse_forcing_mode(std::string_view name);
std::string_view to_string(ForcingMode mode);

/// Example-2 initial height 0.1 (sin 3x sin 2y + sin 5x sin 5y).
FieldD coarsening_initial_data(const GridSpec& grid);

/// Exact solution cos(t) sin(x) sin(y).
FieldD manufactured(double t, const GridSpec& grid);

/// Forcing g that makes manufactured() an exact solution: for ForcingMode::discrete the
/// spatial operators are the grid operators (only temporal error remains), for
/// ForcingMode::analytic they are the continuous ones.
FieldD manufactured_forcing(double t, const ModelParams& params, ForcingMode mode);

}  // namespace mbe

#endif  // MBE_MODEL_HPP

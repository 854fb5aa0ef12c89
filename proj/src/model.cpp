#include "mbe/model.hpp"

#include <cmath>
#include <string>

namespace mbe {

double modified_energy(double E, const FieldD& u_n, const FieldD& u_prev, const TimeMesh& mesh, int n) {
  if (n < 0) throw std::invalid_argument("modified_energy: negative level");
  if (n == 0) return E;
  const double r = mesh.ratio(n + 1);
  if (r == 0.0) return E;
  const double inc = norm_l2(u_n - u_prev);
  return E + r * std::sqrt(r) / (2.0 * (1.0 + r) * mesh.tau(n)) * inc * inc;
}

double roughness(const FieldD& u) {
  const GridSpec& g = u.grid();
  const double h = g.h();
  const double* a = u.data();
  const double mean = h * h * pairwise_sum<double>(0, u.size(), [&](std::size_t k) { return a[k]; }) / g.area();
  const double s = pairwise_sum<double>(0, u.size(), [&](std::size_t k) {
    const double d = a[k] - mean;
    return d * d;
  });
  return std::sqrt(h * h * s) / g.L;
}

FieldD initial_data(const FieldD& phi0, const ModelParams& params, double tau1, const FieldD* forcing_at_0) {
  if (!(tau1 > 0.0)) throw std::invalid_argument("initial_data: tau1 must be positive");
  FieldD phi1 = nonlinear_term(phi0) - params.delta * bilaplacian(phi0);
  if (forcing_at_0 != nullptr) phi1 += *forcing_at_0;
  return phi0 - (0.5 * tau1) * phi1;
}

ForcingMode parse_forcing_mode(std::string_view name) {
  if (name == "none") return ForcingMode::none;
  if (name == "discrete") return ForcingMode::discrete;
  if (name == "analytic") return ForcingMode::analytic;
  throw std::invalid_argument("unknown forcing mode '" + std::string(name) + "'");
}

std::string_view to_string(ForcingMode mode) {
  switch (mode) {
    case ForcingMode::none: return "none";
    case ForcingMode::discrete: return "discrete";
    case ForcingMode::analytic: return "analytic";
  }
  return "none";
}

FieldD coarsening_initial_data(const GridSpec& grid) {
  return FieldD::sample(grid, [](double x, double y) {
    return 0.1 * (std::sin(3 * x) * std::sin(2 * y) + std::sin(5 * x) * std::sin(5 * y));
  });
}

FieldD manufactured(double t, const GridSpec& grid) {
  const double c = std::cos(t);
  return FieldD::sample(grid, [c](double x, double y) { return c * std::sin(x) * std::sin(y); });
}

FieldD manufactured_forcing(double t, const ModelParams& params, ForcingMode mode) {
  const GridSpec& grid = params.grid;
  const double c = std::cos(t);
  const double st = std::sin(t);
  switch (mode) {
    case ForcingMode::discrete: {
      const FieldD u = manufactured(t, grid);
      const FieldD ut = FieldD::sample(grid, [st](double x, double y) { return -st * std::sin(x) * std::sin(y); });
      return ut + params.delta * bilaplacian(u) - nonlinear_term(u);
    }
    case ForcingMode::analytic: {
      // Lap^2 u = 4u, and div f(grad u) = 2c sin x sin y (1 + c^2 (6 cx^2 cy^2 - 2 cx^2 - 2 cy^2)).
      const double delta = params.delta;
      return FieldD::sample(grid, [=](double x, double y) {
        const double s = std::sin(x) * std::sin(y);
        const double cx2 = std::cos(x) * std::cos(x);
        const double cy2 = std::cos(y) * std::cos(y);
        const double div = 2.0 * c * s * (1.0 + c * c * (6.0 * cx2 * cy2 - 2.0 * cx2 - 2.0 * cy2));
        return -st * s + 4.0 * delta * c * s - div;
      });
    }
    case ForcingMode::none: break;
  }
  throw std::invalid_argument("manufactured_forcing: mode must be discrete or analytic");
}

}  // namespace mbe

#include "mbe/spectral.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace mbe {

namespace {
// The FFTW planner is not thread-safe; execution with distinct buffers is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

double laplacian_symbol_1d(int k, const GridSpec& grid) {
  const double h = grid.h();
  const double s = std::sin(std::numbers::pi * k / grid.M);
  return -4.0 / (h * h) * s * s;
}

struct SpectralSolver::Impl {
  GridSpec grid;
  int half = 0;
  double* real = nullptr;
  fftw_complex* spec = nullptr;
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;
  std::vector<double> lap2;  // (lambda_k + lambda_l)^2 on the half-spectrum

  explicit Impl(const GridSpec& g) : grid(g), half(g.M / 2 + 1) {
    const std::size_t n_real = g.size();
    const std::size_t n_spec = static_cast<std::size_t>(g.M) * half;
    real = fftw_alloc_real(n_real);
    spec = fftw_alloc_complex(n_spec);
    if (real == nullptr || spec == nullptr) throw std::bad_alloc();
    {
      std::lock_guard<std::mutex> lock(planner_mutex());
      forward = fftw_plan_dft_r2c_2d(g.M, g.M, real, spec, FFTW_ESTIMATE);
      backward = fftw_plan_dft_c2r_2d(g.M, g.M, spec, real, FFTW_ESTIMATE);
    }
    if (forward == nullptr || backward == nullptr) throw std::runtime_error("SpectralSolver: FFT planning failed");
    lap2.resize(n_spec);
    std::vector<double> lam(g.M);
    for (int k = 0; k < g.M; ++k) lam[k] = laplacian_symbol_1d(k, g);
    for (int k = 0; k < g.M; ++k)
      for (int l = 0; l < half; ++l) {
        const double s = lam[k] + lam[l];
        lap2[static_cast<std::size_t>(k) * half + l] = s * s;
      }
  }

  ~Impl() {
    std::lock_guard<std::mutex> lock(planner_mutex());
    if (forward) fftw_destroy_plan(forward);
    if (backward) fftw_destroy_plan(backward);
    fftw_free(real);
    fftw_free(spec);
  }
};

SpectralSolver::SpectralSolver(const GridSpec& grid) : impl_(std::make_unique<Impl>(grid)) {}
SpectralSolver::~SpectralSolver() = default;
SpectralSolver::SpectralSolver(SpectralSolver&&) noexcept = default;
SpectralSolver& SpectralSolver::operator=(SpectralSolver&&) noexcept = default;

const GridSpec& SpectralSolver::grid() const { return impl_->grid; }

FieldD SpectralSolver::solve(const FieldD& rhs, double b0, double delta) {
  if (!(b0 > 0.0)) throw std::invalid_argument("SpectralSolver::solve: b0 must be positive");
  Impl& s = *impl_;
  if (!(rhs.grid() == s.grid)) throw std::invalid_argument("SpectralSolver::solve: grid mismatch");
  std::copy(rhs.data(), rhs.data() + rhs.size(), s.real);
  fftw_execute(s.forward);
  const double norm = 1.0 / static_cast<double>(rhs.size());
  for (std::size_t k = 0; k < s.lap2.size(); ++k) {
    const double scale = norm / (b0 + delta * s.lap2[k]);
    s.spec[k][0] *= scale;
    s.spec[k][1] *= scale;
  }
  fftw_execute(s.backward);
  FieldD out(s.grid);
  std::copy(s.real, s.real + rhs.size(), out.data());
  return out;
}

FieldD spectral_solve(const FieldD& rhs, double b0, double delta) {
  SpectralSolver solver(rhs.grid());
  return solver.solve(rhs, b0, delta);
}

}  // namespace mbe

#ifndef MBE_SPECTRAL_HPP
#define MBE_SPECTRAL_HPP

#include <memory>

#include "mbe/grid.hpp"

namespace mbe {

/// Eigenvalue of the 1D second difference for wavenumber k: -(4/h^2) sin^2(pi k / M).
double laplacian_symbol_1d(int k, const GridSpec& grid);

/// Solves (b0 I + delta Lap_h^2) x = rhs in the periodic DFT basis. Holds
/// real-to-complex FFT plans for one grid, so it is cheap to call repeatedly.
class SpectralSolver {
 public:
  explicit SpectralSolver(const GridSpec& grid);
  ~SpectralSolver();
  SpectralSolver(SpectralSolver&&) noexcept;
  SpectralSolver& operator=(SpectralSolver&&) noexcept;
  SpectralSolver(const SpectralSolver&) = delete;
  SpectralSolver& operator=(const SpectralSolver&) = delete;

  const GridSpec& grid() const;
  FieldD solve(const FieldD& rhs, double b0, double delta);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// One-shot convenience wrapper around SpectralSolver.
FieldD spectral_solve(const FieldD& rhs, double b0, double delta);

}  // namespace mbe

#endif  // MBE_SPECTRAL_HPP

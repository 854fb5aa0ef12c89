#ifndef MBE_TRACE_IO_HPP
#define MBE_TRACE_IO_HPP

#include <filesystem>
#include <fstream>
#include <iosfwd>
#include <span>
#include <string>

#include "mbe/adaptive.hpp"
#include "mbe/model.hpp"
#include "mbe/timekernels.hpp"

namespace mbe {

// All writers print reals with %.17g so that repeated runs are byte-identical.

/// step,t,tau,E,E_mod,roughness,picard_iters
void write_energy_csv(std::ostream& os, std::span<const EnergyRecord> trace);
/// The energy columns plus accepted,rejections; rejected trials leave E_mod empty.
void write_trial_csv(std::ostream& os, std::span<const TrialRecord> trials);
/// n,k,theta,theta_product_formula,abs_diff for 1 <= k <= n <= levels.
void write_kernel_csv(std::ostream& os, const TimeMesh& mesh, int levels);

/// Formats a double with %.17g.
std::string format_real(double x);

/// Opens a file for binary writing, throwing std::runtime_error on failure.
std::ofstream open_output(const std::filesystem::path& path);

}  // namespace mbe

#endif  // MBE_TRACE_IO_HPP

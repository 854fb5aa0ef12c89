#include "mbe/trace_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <stdexcept>
#include <string>

namespace mbe {

std::string format_real(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  return os;
}

namespace {

void energy_columns(std::ostream& os, const EnergyRecord& r, bool with_mod) {
  os << r.step << ',' << format_real(r.t) << ',' << format_real(r.tau) << ',' << format_real(r.E) << ',';
  if (with_mod) os << format_real(r.E_mod);
  os << ',' << format_real(r.roughness) << ',' << r.picard_iters;
}

}  // namespace

void write_energy_csv(std::ostream& os, std::span<const EnergyRecord> trace) {
  os << "step,t,tau,E,E_mod,roughness,picard_iters\n";
  for (const EnergyRecord& r : trace) {
    energy_columns(os, r, true);
    os << '\n';
  }
}

void write_trial_csv(std::ostream& os, std::span<const TrialRecord> trials) {
  os << "step,t,tau,E,E_mod,roughness,picard_iters,accepted,rejections\n";
  for (const TrialRecord& r : trials) {
    energy_columns(os, r.record, r.accepted);
    os << ',' << (r.accepted ? 1 : 0) << ',' << r.rejections << '\n';
  }
}

void write_kernel_csv(std::ostream& os, const TimeMesh& mesh, int levels) {
  const DocTable rec = doc_table_recursive(mesh, levels);
  const DocTable prod = doc_table_product(mesh, levels);
  os << "n,k,theta,theta_product_formula,abs_diff\n";
  for (int n = 1; n <= levels; ++n)
    for (int k = 1; k <= n; ++k)
      os << n << ',' << k << ',' << format_real(rec(n, k)) << ',' << format_real(prod(n, k)) << ','
         << format_real(std::abs(rec(n, k) - prod(n, k))) << '\n';
}

}  // namespace mbe

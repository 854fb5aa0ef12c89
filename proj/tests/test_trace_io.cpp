#include <doctest.h>

#include <sstream>

#include "mbe/trace_io.hpp"

using namespace mbe;

namespace {
std::string first_line(const std::string& s) { return s.substr(0, s.find('\n')); }
}  // namespace

TEST_CASE("format_real roundtrips") {
  CHECK(format_real(0.1) == "0.10000000000000001");
  CHECK(format_real(2.0) == "2");
  CHECK(std::stod(format_real(1.0 / 3.0)) == 1.0 / 3.0);
}

TEST_CASE("energy csv") {
  std::vector<EnergyRecord> trace(2);
  trace[1] = EnergyRecord{1, 0.5, 0.5, 2.0, 2.25, 0.125, 3};
  std::ostringstream os;
  write_energy_csv(os, trace);
  CHECK(os.str() == "step,t,tau,E,E_mod,roughness,picard_iters\n0,0,0,0,0,0,0\n1,0.5,0.5,2,2.25,0.125,3\n");
}

TEST_CASE("trial csv leaves E_mod empty on rejections") {
  TrialRecord rej;
  rej.record = EnergyRecord{1, 0.1, 0.1, 2.0, 9.0, 0.5, 4};
  rej.accepted = false;
  TrialRecord acc = rej;
  acc.accepted = true;
  acc.rejections = 1;
  const std::vector<TrialRecord> rows{rej, acc};
  std::ostringstream os;
  write_trial_csv(os, rows);
  CHECK(os.str() ==
        "step,t,tau,E,E_mod,roughness,picard_iters,accepted,rejections\n"
        "1,0.10000000000000001,0.10000000000000001,2,,0.5,4,0,0\n"
        "1,0.10000000000000001,0.10000000000000001,2,9,0.5,4,1,1\n");
}

TEST_CASE("kernel csv") {
  std::ostringstream os;
  write_kernel_csv(os, TimeMesh::uniform(0.5, 3), 3);
  const std::string s = os.str();
  CHECK(first_line(s) == "n,k,theta,theta_product_formula,abs_diff");
  long rows = 0;
  for (char c : s) rows += c == '\n';
  CHECK(rows == 1 + 6);
  CHECK_THROWS(write_kernel_csv(os, TimeMesh::uniform(0.5, 3), 4));
}

TEST_CASE("open_output fails loudly") {
  CHECK_THROWS_AS(open_output("/nonexistent/dir/out.csv"), std::runtime_error);
}

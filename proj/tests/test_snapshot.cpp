#include <doctest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <sstream>

#include "mbe/snapshot.hpp"

using namespace mbe;

TEST_CASE("MBE1 roundtrip is exact") {
  const GridSpec g(6.283185307179586, 8);
  const FieldD u = FieldD::sample(g, [](double x, double y) { return std::sin(3 * x) * std::exp(std::cos(y)) / 3; });
  std::stringstream ss;
  write_snapshot(ss, u, 0.125);
  const Snapshot s = read_snapshot(ss);
  CHECK(s.t == 0.125);
  CHECK(s.field.grid() == g);
  CHECK((s.field.array() == u.array()).all());
}

TEST_CASE("MBE1 layout") {
  const GridSpec g(2.0, 4);
  FieldD u(g);
  u(0, 1) = 1.5;
  std::stringstream ss;
  write_snapshot(ss, u, 3.0);
  const std::string bytes = ss.str();
  const auto nl = bytes.find('\n');
  REQUIRE(nl != std::string::npos);
  CHECK(bytes.substr(0, 5) == "MBE1 ");
  CHECK(bytes.size() == nl + 1 + 16 * sizeof(double));
  double second;
  std::memcpy(&second, bytes.data() + nl + 1 + sizeof(double), sizeof(double));
  CHECK(second == 1.5);  // row-major, (0,1) is the second value
}

TEST_CASE("MBE1 rejects malformed input") {
  std::stringstream bad_magic("MBE2 4 1 0\n");
  CHECK_THROWS(read_snapshot(bad_magic));
  std::stringstream truncated("MBE1 4 1 0\nabc");
  CHECK_THROWS(read_snapshot(truncated));
  CHECK_THROWS(read_snapshot(std::filesystem::path("/nonexistent/dir/x.mbe1")));
}

TEST_CASE("MBE1 file roundtrip") {
  const auto path = std::filesystem::temp_directory_path() / "mbe_snapshot_test.mbe1";
  const GridSpec g(1.0, 5);
  const FieldD u = FieldD::constant(g, -0.25);
  write_snapshot(path, u, 7.0);
  const Snapshot s = read_snapshot(path);
  CHECK(s.t == 7.0);
  CHECK((s.field.array() == u.array()).all());
  std::filesystem::remove(path);
}

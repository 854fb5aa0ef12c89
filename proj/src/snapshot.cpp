#include "mbe/snapshot.hpp"

#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace mbe {

namespace {

std::uint64_t to_little_endian(std::uint64_t v) {
  if constexpr (std::endian::native == std::endian::little) {
    return v;
  } else {
    std::uint64_t out = 0;
    for (int b = 0; b < 8; ++b) out |= ((v >> (8 * b)) & 0xffu) << (8 * (7 - b));
    return out;
  }
}

std::string format_g17(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace

void write_snapshot(std::ostream& os, const FieldD& u, double t) {
  const GridSpec& g = u.grid();
  os << "MBE1 " << g.M << ' ' << format_g17(g.L) << ' ' << format_g17(t) << '\n';
  for (std::size_t k = 0; k < u.size(); ++k) {
    const std::uint64_t bits = to_little_endian(std::bit_cast<std::uint64_t>(u.data()[k]));
    char bytes[8];
    std::memcpy(bytes, &bits, 8);
    os.write(bytes, 8);
  }
  if (!os) throw std::runtime_error("write_snapshot: stream error");
}

void write_snapshot(const std::filesystem::path& path, const FieldD& u, double t) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("write_snapshot: cannot open " + path.string());
  write_snapshot(os, u, t);
}

Snapshot read_snapshot(std::istream& is) {
  std::string header;
  if (!std::getline(is, header)) throw std::runtime_error("read_snapshot: missing header");
  std::istringstream hs(header);
  std::string magic;
  int M = 0;
  double L = 0.0, t = 0.0;
  if (!(hs >> magic >> M >> L >> t) || magic != "MBE1")
    throw std::runtime_error("read_snapshot: malformed header '" + header + "'");
  Snapshot snap{t, FieldD(GridSpec(L, M))};
  for (std::size_t k = 0; k < snap.field.size(); ++k) {
    char bytes[8];
    if (!is.read(bytes, 8)) throw std::runtime_error("read_snapshot: truncated payload");
    std::uint64_t bits;
    std::memcpy(&bits, bytes, 8);
    snap.field.data()[k] = std::bit_cast<double>(to_little_endian(bits));
  }
  return snap;
}

Snapshot read_snapshot(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("read_snapshot: cannot open " + path.string());
  return read_snapshot(is);
}

}  // namespace mbe

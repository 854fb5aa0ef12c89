#ifndef MBE_SNAPSHOT_HPP
#define MBE_SNAPSHOT_HPP

#include <filesystem>
#include <iosfwd>

#include "mbe/grid.hpp"

namespace mbe {

// MBE1 snapshot: one ASCII line "MBE1 <M> <L> <t>\n" followed by M*M
// little-endian IEEE-754 doubles in row-major order.

struct Snapshot {
  double t = 0.0;
  FieldD field;
};

void write_snapshot(std::ostream& os, const FieldD& u, double t);
void write_snapshot(const std::filesystem::path& path, const FieldD& u, double t);

Snapshot read_snapshot(std::istream& is);
Snapshot read_snapshot(const std::filesystem::path& path);

}  // namespace mbe

#endif  // MBE_SNAPSHOT_HPP

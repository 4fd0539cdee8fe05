#pragma once

#include "plap/grid.hpp"

#include <string>

namespace plap {

/// Field snapshot: "PLAP", u32 version, then n, m_per_axis, R, t as
/// little-endian doubles, then the interior field row-major (doubles).
struct SnapshotData {
    int n = 1;
    int m = 3;
    double R = 1.0;
    double t = 0.0;
    Field u;
};

void write_snapshot(const std::string& path, const Grid& grid, const State& state);
SnapshotData read_snapshot(const std::string& path);

/// Lossless (round-trippable decimal) CSV: one row per interior node with
/// coordinates and value.
void write_field_csv(const std::string& path, const Grid& grid, std::span<const double> u);

} // namespace plap

#include "plap/snapshot.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace plap {

namespace {

constexpr std::uint32_t kVersion = 1;

template <class T>
void write_le(std::ostream& os, T value) {
    std::array<unsigned char, sizeof(T)> bytes;
    std::memcpy(bytes.data(), &value, sizeof(T));
    if constexpr (std::endian::native == std::endian::big)
        std::reverse(bytes.begin(), bytes.end());
    os.write(reinterpret_cast<const char*>(bytes.data()), sizeof(T));
}

template <class T>
T read_le(std::istream& is) {
    std::array<unsigned char, sizeof(T)> bytes;
    is.read(reinterpret_cast<char*>(bytes.data()), sizeof(T));
    if (!is) throw std::runtime_error("snapshot: truncated file");
    if constexpr (std::endian::native == std::endian::big)
        std::reverse(bytes.begin(), bytes.end());
    T value;
    std::memcpy(&value, bytes.data(), sizeof(T));
    return value;
}

} // namespace

void write_snapshot(const std::string& path, const Grid& grid, const State& state) {
    if (state.u.size() != grid.interior_count())
        throw std::invalid_argument("write_snapshot: field/grid shape mismatch");
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("write_snapshot: cannot open '" + path + "'");
    os.write("PLAP", 4);
    write_le<std::uint32_t>(os, kVersion);
    write_le<double>(os, static_cast<double>(grid.n));
    write_le<double>(os, static_cast<double>(grid.m));
    write_le<double>(os, grid.R);
    write_le<double>(os, state.t);
    for (double x : state.u) write_le<double>(os, x);
    if (!os) throw std::runtime_error("write_snapshot: write failed for '" + path + "'");
}

SnapshotData read_snapshot(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("read_snapshot: cannot open '" + path + "'");
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, "PLAP", 4) != 0)
        throw std::runtime_error("read_snapshot: bad magic in '" + path + "'");
    const auto version = read_le<std::uint32_t>(is);
    if (version != kVersion) throw std::runtime_error("read_snapshot: unsupported version");

    SnapshotData snap;
    snap.n = static_cast<int>(read_le<double>(is));
    snap.m = static_cast<int>(read_le<double>(is));
    snap.R = read_le<double>(is);
    snap.t = read_le<double>(is);
    if (snap.n < 1 || snap.n > 2 || snap.m < 3)
        throw std::runtime_error("read_snapshot: invalid header");
    const std::size_t M = static_cast<std::size_t>(snap.m - 2);
    const std::size_t count = snap.n == 1 ? M : M * M;
    snap.u.resize(count);
    for (double& x : snap.u) x = read_le<double>(is);
    return snap;
}

void write_field_csv(const std::string& path, const Grid& grid, std::span<const double> u) {
    std::ofstream os(path, std::ios::trunc);
    if (!os) throw std::runtime_error("write_field_csv: cannot open '" + path + "'");
    os << (grid.n == 1 ? "x,u\n" : "x,y,u\n");
    char buf[128];
    std::array<double, 2> pt{};
    for (std::size_t k = 0; k < u.size(); ++k) {
        grid.interior_coords(k, pt.data());
        if (grid.n == 1)
            std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", pt[0], u[k]);
        else
            std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", pt[0], pt[1], u[k]);
        os << buf;
    }
}

} // namespace plap

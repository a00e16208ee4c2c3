#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "cylch/dynamics.hpp"
#include "cylch/field.hpp"

namespace cylch {

namespace detail {

inline constexpr char kCheckpointMagic[8] = {'C', 'Y', 'L', 'C', 'H', '0', '1', '\0'};

inline std::uint64_t fnv1a64(const unsigned char* data, std::size_t n,
                             std::uint64_t h = 14695981039346656037ull) {
    for (std::size_t m = 0; m < n; ++m) {
        h ^= data[m];
        h *= 1099511628211ull;
    }
    return h;
}

template <class T>
void put(std::vector<unsigned char>& buf, const T& v) {
    const auto* p = reinterpret_cast<const unsigned char*>(&v);
    buf.insert(buf.end(), p, p + sizeof(T));
}

} // namespace detail

/// Binary checkpoint: magic "CYLCH01", grid dims, time, row-major 64-bit
/// little-endian field values, FNV-1a checksum over everything before it.
inline void save_checkpoint(const State& state, const std::string& path) {
    const GridSpec& g = state.u.grid();
    std::vector<unsigned char> buf;
    buf.reserve(64 + state.u.size() * sizeof(double));
    buf.insert(buf.end(), detail::kCheckpointMagic, detail::kCheckpointMagic + 8);
    detail::put(buf, static_cast<std::uint32_t>(g.dims()));
    detail::put(buf, g.L);
    detail::put(buf, static_cast<std::uint32_t>(g.nx));
    detail::put(buf, static_cast<std::uint32_t>(g.ny));
    detail::put(buf, static_cast<std::uint32_t>(g.dims() == 3 ? g.nz : 0));
    detail::put(buf, state.t);
    const auto* vals = reinterpret_cast<const unsigned char*>(state.u.data());
    buf.insert(buf.end(), vals, vals + state.u.size() * sizeof(double));
    const std::uint64_t sum = detail::fnv1a64(buf.data(), buf.size());
    detail::put(buf, sum);

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("save_checkpoint: cannot open " + path);
    out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    if (!out) throw IoError("save_checkpoint: write failed for " + path);
}

inline State load_checkpoint(const std::string& path, const GridSpec& grid) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("load_checkpoint: cannot open " + path);
    std::vector<unsigned char> buf((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
    const std::size_t header = 8 + 4 + 8 + 4 + 4 + 4 + 8;
    if (buf.size() < header + 8 || std::memcmp(buf.data(), detail::kCheckpointMagic, 8) != 0)
        throw ChecksumMismatch("load_checkpoint: not a checkpoint file: " + path);
    const std::uint64_t stored =
        [&] {
            std::uint64_t s;
            std::memcpy(&s, buf.data() + buf.size() - 8, 8);
            return s;
        }();
    if (detail::fnv1a64(buf.data(), buf.size() - 8) != stored)
        throw ChecksumMismatch("load_checkpoint: checksum mismatch in " + path);

    std::size_t off = 8;
    auto take = [&](auto& v) {
        std::memcpy(&v, buf.data() + off, sizeof(v));
        off += sizeof(v);
    };
    std::uint32_t dims, nx, ny, nz;
    double L, t;
    take(dims);
    take(L);
    take(nx);
    take(ny);
    take(nz);
    take(t);
    const bool match = static_cast<int>(dims) == grid.dims() && L == grid.L &&
                       static_cast<int>(nx) == grid.nx && static_cast<int>(ny) == grid.ny &&
                       (grid.dims() == 2 || static_cast<int>(nz) == grid.nz);
    if (!match) throw DimsMismatch("load_checkpoint: grid dimensions do not match " + path);

    State s;
    s.t = t;
    s.u = ScalarField(grid);
    const std::size_t need = s.u.size() * sizeof(double);
    if (buf.size() - 8 - off != need)
        throw DimsMismatch("load_checkpoint: payload size does not match the grid");
    std::memcpy(s.u.data(), buf.data() + off, need);
    return s;
}

} // namespace cylch

#pragma once

// Field serialization: flat CSV (index, coordinates, value) and a compact
// little-endian binary dump (u64 dim, f64 extents, u64 n_cells, f64 values).

#include "pnlab/grid.hpp"

#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <string>

namespace pnlab {

namespace detail {

inline void write_u64_le(std::ostream& os, std::uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xFF);
    os.write(reinterpret_cast<const char*>(b), 8);
}

inline std::uint64_t read_u64_le(std::istream& is) {
    unsigned char b[8];
    is.read(reinterpret_cast<char*>(b), 8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return v;
}

inline void write_f64_le(std::ostream& os, double d) {
    write_u64_le(os, std::bit_cast<std::uint64_t>(d));
}

inline double read_f64_le(std::istream& is) {
    return std::bit_cast<double>(read_u64_le(is));
}

/// Shortest-roundtrip decimal formatting; keeps CSV output byte-stable.
inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace detail

inline void write_csv(const GridFunction& u, std::ostream& os) {
    const Grid& g = u.grid();
    os << (g.dim() == 1 ? "index,x,value\n" : "index,x,y,value\n");
    for (int iy = 0; iy < g.n_cells(1); ++iy)
        for (int ix = 0; ix < g.n_cells(0); ++ix) {
            const std::size_t i = g.index(ix, iy);
            os << i << ',' << detail::format_double(g.coord_x(ix));
            if (g.dim() == 2) os << ',' << detail::format_double(g.coord_y(iy));
            os << ',' << detail::format_double(u[i]) << '\n';
        }
}

inline void write_csv(const GridFunction& u, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("write_csv: cannot open " + path);
    write_csv(u, os);
}

inline void write_binary(const GridFunction& u, std::ostream& os) {
    const Grid& g = u.grid();
    detail::write_u64_le(os, static_cast<std::uint64_t>(g.dim()));
    for (int a = 0; a < g.dim(); ++a) detail::write_f64_le(os, g.extent(a));
    for (int a = 0; a < g.dim(); ++a)
        detail::write_u64_le(os, static_cast<std::uint64_t>(g.n_cells(a)));
    for (double v : u.values()) detail::write_f64_le(os, v);
}

inline void write_binary(const GridFunction& u, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("write_binary: cannot open " + path);
    write_binary(u, os);
}

inline GridFunction read_binary(std::istream& is) {
    const auto dim = static_cast<int>(detail::read_u64_le(is));
    if (dim != 1 && dim != 2) throw std::runtime_error("read_binary: bad dimension");
    double ext[2] = {0.0, 0.0};
    for (int a = 0; a < dim; ++a) ext[a] = detail::read_f64_le(is);
    int n[2] = {0, 0};
    for (int a = 0; a < dim; ++a) n[a] = static_cast<int>(detail::read_u64_le(is));
    Grid g = dim == 1 ? Grid::line(ext[0], n[0]) : Grid::rectangle(ext[0], ext[1], n[0], n[1]);
    std::vector<double> vals(g.size());
    for (double& v : vals) v = detail::read_f64_le(is);
    if (!is) throw std::runtime_error("read_binary: truncated stream");
    return GridFunction(g, std::move(vals));
}

inline GridFunction read_binary(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("read_binary: cannot open " + path);
    return read_binary(is);
}

}  // namespace pnlab

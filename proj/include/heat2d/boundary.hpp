#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <vector>

#include "heat2d/errors.hpp"
#include "heat2d/grid.hpp"

namespace heat2d {

// Sides of the unit square. Along-side sample index runs in +x for
// South/North and +y for West/East.
enum class Side { South, North, West, East };

constexpr std::array<Side, 4> kAllSides = {Side::South, Side::North, Side::West, Side::East};

enum class BcKind { TraceSampled, CornerInterpolated };

// Dirichlet data on the four sides, sampled at the boundary positions that
// match the attached grid: i*h for a vertex grid (corners included),
// (i+0.5)*h for a cell grid (no sample lies on a corner).
struct BoundarySpec {
    BcKind kind = BcKind::TraceSampled;
    GridSpec grid;
    std::array<std::vector<double>, 4> traces; // indexed by Side
    std::array<double, 4> corners = {0, 0, 0, 0}; // c00, c10, c01, c11 (x then y)

    const std::vector<double>& trace(Side s) const {
        return traces[static_cast<std::size_t>(s)];
    }
    double value(Side s, int i) const { return trace(s)[static_cast<std::size_t>(i)]; }

    int samples_per_side() const { return static_cast<int>(traces[0].size()); }

    // Extremes of the data the solver actually sees.
    double data_min() const {
        double m = traces[0][0];
        for (const auto& t : traces)
            m = std::min(m, *std::min_element(t.begin(), t.end()));
        return m;
    }
    double data_max() const {
        double m = traces[0][0];
        for (const auto& t : traces)
            m = std::max(m, *std::max_element(t.begin(), t.end()));
        return m;
    }
    double data_range() const { return data_max() - data_min(); }
};

namespace detail {

template <class F>
BoundarySpec sample_bc(const GridSpec& grid, F&& edge_value) {
    BoundarySpec bc;
    bc.grid = grid;
    const int p = grid.points_per_side();
    for (Side s : kAllSides) {
        auto& t = bc.traces[static_cast<std::size_t>(s)];
        t.resize(p);
        for (int i = 0; i < p; ++i) t[i] = edge_value(s, grid.coord(i));
    }
    return bc;
}

} // namespace detail

// Top side u(x,1) = sin(pi x), the other three sides 0.
inline BoundarySpec make_bc_sine(const GridSpec& grid) {
    BoundarySpec bc = detail::sample_bc(grid, [](Side s, double pos) {
        return s == Side::North ? std::sin(std::numbers::pi * pos) : 0.0;
    });
    bc.kind = BcKind::TraceSampled;
    return bc;
}

// Temperatures set at the four corners; each side trace is the exact linear
// interpolation between its two corner values.
inline BoundarySpec make_bc_corners(double c00, double c10, double c01, double c11,
                                    const GridSpec& grid) {
    // a + (b-a)t rather than a(1-t) + bt: reproduces a == b exactly
    auto lerp = [](double a, double b, double t) { return a + (b - a) * t; };
    BoundarySpec bc = detail::sample_bc(grid, [&](Side s, double pos) {
        switch (s) {
            case Side::South: return lerp(c00, c10, pos);
            case Side::North: return lerp(c01, c11, pos);
            case Side::West: return lerp(c00, c01, pos);
            case Side::East: return lerp(c10, c11, pos);
        }
        return 0.0;
    });
    bc.kind = BcKind::CornerInterpolated;
    bc.corners = {c00, c10, c01, c11};
    return bc;
}

// Uniform value on all four sides.
inline BoundarySpec make_bc_constant(double c, const GridSpec& grid) {
    return make_bc_corners(c, c, c, c, grid);
}

// Trace value at a grid point lying on the domain boundary (vertex layout).
inline double bc_value_at_point(const BoundarySpec& bc, const GridSpec& grid, int ix, int iy) {
    const int p = grid.points_per_side();
    if (iy == 0) return bc.value(Side::South, ix);
    if (iy == p - 1) return bc.value(Side::North, ix);
    if (ix == 0) return bc.value(Side::West, iy);
    if (ix == p - 1) return bc.value(Side::East, iy);
    throw InvalidParameterError("bc_value_at_point: point not on the grid boundary");
}

} // namespace heat2d

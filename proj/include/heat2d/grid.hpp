#pragma once

#include <string>

#include "heat2d/array2d.hpp"
#include "heat2d/errors.hpp"

namespace heat2d {

// Where the grid points sit relative to the unit square.
//
// VertexCentered: point (i,j) at (i*h, j*h), i,j in [0, nGrid); points on the
// outermost lines lie on the domain boundary and carry Dirichlet data
// directly. Used by the homogeneous convergence study.
//
// CellCentered: one point per conductivity cell, point (i,j) at
// ((i+0.5)*h, (j+0.5)*h), i,j in [0, nGrid-1). No point lies on the domain
// boundary; Dirichlet data enters through a half-cell flux at the edge cells.
// Used by the heterogeneous experiment.
enum class Layout { VertexCentered, CellCentered };

inline const char* to_string(Layout layout) {
    return layout == Layout::VertexCentered ? "vertex" : "cell";
}

struct GridSpec {
    Layout layout = Layout::VertexCentered;
    int n_grid = 0; // grid lines per side; h = 1/(n_grid - 1)

    GridSpec() = default;
    GridSpec(Layout layout_, int n_grid_) : layout(layout_), n_grid(n_grid_) {
        if (n_grid < 3)
            throw InvalidParameterError("GridSpec: n_grid must be >= 3, got " +
                                        std::to_string(n_grid));
    }

    double h() const { return 1.0 / (n_grid - 1); }

    // Points per side of the (square) point array.
    int points_per_side() const {
        return layout == Layout::VertexCentered ? n_grid : n_grid - 1;
    }
    int total_points() const {
        const int p = points_per_side();
        return p * p;
    }

    // Physical coordinate of point index i (same formula in x and y).
    double coord(int i) const {
        return layout == Layout::VertexCentered ? i * h() : (i + 0.5) * h();
    }

    // Number of conductivity cells per side this grid pairs with.
    int cells_per_side() const { return n_grid - 1; }

    bool operator==(const GridSpec&) const = default;
};

// Temperature (or any scalar unknown) at every grid point.
struct TemperatureField {
    GridSpec grid;
    Array2D<double> u;

    TemperatureField() = default;
    explicit TemperatureField(const GridSpec& g, double fill = 0.0)
        : grid(g), u(g.points_per_side(), g.points_per_side(), fill) {}
};

} // namespace heat2d

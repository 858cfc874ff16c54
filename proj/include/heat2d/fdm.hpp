#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "heat2d/boundary.hpp"
#include "heat2d/conductivity.hpp"
#include "heat2d/grid.hpp"
#include "heat2d/sparse.hpp"

namespace heat2d {

// Normalized 5-point stencil weights: u_c = cE uE + cW uW + cN uN + cS uS.
// K is the normalizer (sum of the raw neighbor fractions).
struct StencilCoeffs {
    double cE, cW, cN, cS;
    double K;
    double sum() const { return cE + cW + cN + cS; }
};

namespace detail {

// Raw neighbor fraction in the normalized flux form: k_nbr/(k_nbr + k_c) for
// a full-cell link. A half-cell link to the domain boundary carries raw
// weight exactly 1 (= 2 k_c / 2 k_c: half distance, edge cell's own
// conductivity). Equal to the harmonic mean divided by 2 k_c.
inline double raw_weight(double k_center, double k_neighbor) {
    if (!(k_center > 0.0) || !(k_neighbor > 0.0))
        throw InvalidParameterError("stencil: conductivities must be positive");
    return k_neighbor / (k_neighbor + k_center);
}

struct NeighborRef {
    bool wall = false; // true: link to Dirichlet data on the domain boundary
    int ix = -1, iy = -1; // grid point, when !wall
    Side side = Side::South; // boundary side and along-side sample, when wall
    int along = -1;
    double w_raw = 0.0;
};

// The four links of a cell-centered point. Out-of-range neighbors become
// half-cell wall links; the along-side sample index is the point's own
// projection onto that side.
inline std::array<NeighborRef, 4> cell_links(const GridSpec& grid, const ConductivityField& field,
                                             int ix, int iy) {
    const int p = grid.points_per_side();
    const double kc = field.k(ix, iy);
    const int dx[4] = {1, -1, 0, 0};
    const int dy[4] = {0, 0, 1, -1};
    const Side wall_side[4] = {Side::East, Side::West, Side::North, Side::South};
    std::array<NeighborRef, 4> links;
    for (int d = 0; d < 4; ++d) {
        NeighborRef& ref = links[d];
        const int nx = ix + dx[d];
        const int ny = iy + dy[d];
        if (nx < 0 || nx >= p || ny < 0 || ny >= p) {
            ref.wall = true;
            ref.side = wall_side[d];
            ref.along = (d < 2) ? iy : ix;
            ref.w_raw = 1.0;
        } else {
            ref.ix = nx;
            ref.iy = ny;
            ref.w_raw = raw_weight(kc, field.k(nx, ny));
        }
    }
    return links;
}

} // namespace detail

// Stencil at an interior cell-centered point (all four neighbors must exist;
// edge points take the half-cell rule inside assembly instead).
inline StencilCoeffs stencil_at(const ConductivityField& field, int ix, int iy) {
    if (ix < 1 || ix >= field.n_cells - 1 || iy < 1 || iy >= field.n_cells - 1)
        throw InvalidParameterError("stencil_at: point must have four interior neighbors");
    const double kc = field.k(ix, iy);
    const double rE = detail::raw_weight(kc, field.k(ix + 1, iy));
    const double rW = detail::raw_weight(kc, field.k(ix - 1, iy));
    const double rN = detail::raw_weight(kc, field.k(ix, iy + 1));
    const double rS = detail::raw_weight(kc, field.k(ix, iy - 1));
    const double K = rE + rW + rN + rS;
    return {rE / K, rW / K, rN / K, rS / K, K};
}

// Rectangular set of grid points [i0..i1] x [j0..j1] (inclusive indices).
struct SubdomainWindow {
    int i0 = 0, j0 = 0, i1 = 0, j1 = 0;

    int nx() const { return i1 - i0 + 1; }
    int ny() const { return j1 - j0 + 1; }
    bool contains(int ix, int iy) const {
        return ix >= i0 && ix <= i1 && iy >= j0 && iy <= j1;
    }
    bool on_perimeter(int ix, int iy) const {
        return contains(ix, iy) && (ix == i0 || ix == i1 || iy == j0 || iy == j1);
    }
    bool operator==(const SubdomainWindow&) const = default;
};

inline void validate_window(const GridSpec& grid, const SubdomainWindow& w) {
    const int p = grid.points_per_side();
    if (w.i0 < 0 || w.j0 < 0 || w.i1 >= p || w.j1 >= p)
        throw InvalidParameterError("window outside the grid");
    if (w.nx() < 2 || w.ny() < 2)
        throw InvalidParameterError("window must span at least 1 grid interval per direction");
}

// How each window side is treated in a local solve. Dirichlet sides carry a
// prescribed trace on their perimeter points. Physical sides (cell layout
// only, window side flush with the grid edge) leave their perimeter points as
// unknowns coupled to the domain boundary through the half-cell flux.
enum class SideMode { Dirichlet, Physical };

namespace detail {

inline std::uint64_t fnv1a(std::uint64_t h, std::uint64_t v) {
    for (int byte = 0; byte < 8; ++byte) {
        h ^= (v >> (8 * byte)) & 0xff;
        h *= 1099511628211ull;
    }
    return h;
}

// Content signature of a window: side modes plus the conductivity block it
// covers. Windows with equal shape and signature have identical local
// operators up to translation.
inline std::uint64_t window_content_hash(const ConductivityField& field, Layout layout,
                                         const SubdomainWindow& w,
                                         const std::array<SideMode, 4>& modes) {
    std::uint64_t h = 1469598103934665603ull;
    for (SideMode m : modes) h = fnv1a(h, m == SideMode::Physical ? 1 : 0);
    if (layout == Layout::VertexCentered) return fnv1a(h, 0); // uniform by contract
    for (int gy = w.j0; gy <= w.j1; ++gy)
        for (int gx = w.i0; gx <= w.i1; ++gx) {
            std::uint64_t bits;
            const double v = field.k(gx, gy);
            static_assert(sizeof(bits) == sizeof(v));
            std::memcpy(&bits, &v, sizeof(bits));
            h = fnv1a(h, bits);
        }
    return h;
}

} // namespace detail

// Dirichlet problem on a window with the same stencil as the direct solve.
// Assembles and factorizes once; solve() may be called with many traces.
class WindowProblem {
public:
    WindowProblem(const GridSpec& grid, const ConductivityField& field, SubdomainWindow window,
                  std::array<SideMode, 4> side_modes = {SideMode::Dirichlet, SideMode::Dirichlet,
                                                        SideMode::Dirichlet, SideMode::Dirichlet})
        : grid_(grid), window_(window), side_modes_(side_modes) {
        validate_window(grid, window);
        if (grid.layout == Layout::VertexCentered && !field.is_uniform())
            throw InvalidParameterError(
                "vertex-centered windows support uniform conductivity only");
        if (grid.layout == Layout::CellCentered && field.n_cells != grid.cells_per_side())
            throw InvalidParameterError("conductivity field size does not match grid");
        check_side_modes();
        classify_points();
        assemble(field);
        if (n_unknowns_ > 0) factor_ = std::make_unique<SparseFactor>(matrix_);
    }

    const SubdomainWindow& window() const { return window_; }

    // Dirichlet perimeter points in ring order: south row (i0->i1), east
    // column (j0+1->j1), north row (i1-1->i0), west column (j1-1->j0+1).
    // Physical-side points are skipped.
    const std::vector<std::pair<int, int>>& dirichlet_points() const { return dirichlet_pts_; }
    int n_dirichlet() const { return static_cast<int>(dirichlet_pts_.size()); }

    // Boundary samples hit by half-cell couplings of Physical sides.
    struct WallSample {
        Side side;
        int along;
    };
    const std::vector<WallSample>& wall_samples() const { return wall_samples_; }
    int n_wall() const { return static_cast<int>(wall_samples_.size()); }

    // Solve with prescribed Dirichlet trace (ring order) and, when Physical
    // sides exist, boundary values for each wall sample. Returns values at
    // every window point (local (lx,ly) indexing).
    Array2D<double> solve(std::span<const double> trace,
                          std::span<const double> wall_values = {}) const {
        if (static_cast<int>(trace.size()) != n_dirichlet())
            throw InvalidParameterError("trace length " + std::to_string(trace.size()) +
                                        " does not match window boundary point count " +
                                        std::to_string(n_dirichlet()));
        if (static_cast<int>(wall_values.size()) != n_wall())
            throw InvalidParameterError("wall value count mismatch");

        std::vector<double> x;
        if (n_unknowns_ > 0) {
            std::vector<double> rhs(n_unknowns_, 0.0);
            for (const auto& c : trace_couplings_) rhs[c.row] += c.w * trace[c.slot];
            for (const auto& c : wall_couplings_) rhs[c.row] += c.w * wall_values[c.slot];
            x = factor_->solve(rhs);
        }

        Array2D<double> out(window_.nx(), window_.ny());
        for (int ly = 0; ly < window_.ny(); ++ly)
            for (int lx = 0; lx < window_.nx(); ++lx) {
                const int id = unknown_id_[ly * window_.nx() + lx];
                out(lx, ly) = id >= 0 ? x[id] : 0.0;
            }
        for (int s = 0; s < n_dirichlet(); ++s) {
            const auto [gx, gy] = dirichlet_pts_[s];
            out(gx - window_.i0, gy - window_.j0) = trace[s];
        }
        return out;
    }

private:
    struct Coupling {
        int row;
        int slot;
        double w;
    };

    void check_side_modes() const {
        const int p = grid_.points_per_side();
        const bool flush[4] = {window_.j0 == 0, window_.j1 == p - 1, window_.i0 == 0,
                               window_.i1 == p - 1}; // S, N, W, E
        for (int s = 0; s < 4; ++s) {
            if (side_modes_[s] != SideMode::Physical) continue;
            if (grid_.layout != Layout::CellCentered)
                throw InvalidParameterError("physical window sides require the cell layout");
            if (!flush[s])
                throw InvalidParameterError(
                    "physical window side must lie on the grid edge");
        }
    }

    SideMode mode(Side s) const { return side_modes_[static_cast<std::size_t>(s)]; }

    bool is_dirichlet(int gx, int gy) const {
        if (gy == window_.j0 && mode(Side::South) == SideMode::Dirichlet) return true;
        if (gy == window_.j1 && mode(Side::North) == SideMode::Dirichlet) return true;
        if (gx == window_.i0 && mode(Side::West) == SideMode::Dirichlet) return true;
        if (gx == window_.i1 && mode(Side::East) == SideMode::Dirichlet) return true;
        return false;
    }

    void classify_points() {
        unknown_id_.assign(static_cast<std::size_t>(window_.nx()) * window_.ny(), -1);
        dirichlet_slot_.assign(unknown_id_.size(), -1);

        // ring order, then slot lookup by point
        auto visit = [&](int gx, int gy) {
            dirichlet_slot_[(gy - window_.j0) * window_.nx() + (gx - window_.i0)] =
                static_cast<int>(dirichlet_pts_.size());
            dirichlet_pts_.emplace_back(gx, gy);
        };
        for (int gx = window_.i0; gx <= window_.i1; ++gx)
            if (is_dirichlet(gx, window_.j0)) visit(gx, window_.j0);
        for (int gy = window_.j0 + 1; gy <= window_.j1; ++gy)
            if (is_dirichlet(window_.i1, gy)) visit(window_.i1, gy);
        for (int gx = window_.i1 - 1; gx >= window_.i0; --gx)
            if (is_dirichlet(gx, window_.j1)) visit(gx, window_.j1);
        for (int gy = window_.j1 - 1; gy > window_.j0; --gy)
            if (is_dirichlet(window_.i0, gy)) visit(window_.i0, gy);

        n_unknowns_ = 0;
        for (int ly = 0; ly < window_.ny(); ++ly)
            for (int lx = 0; lx < window_.nx(); ++lx)
                if (dirichlet_slot_[ly * window_.nx() + lx] < 0)
                    unknown_id_[ly * window_.nx() + lx] = n_unknowns_++;
    }

    void assemble(const ConductivityField& field) {
        matrix_ = SparseSystem(n_unknowns_);
        const bool uniform_vertex = grid_.layout == Layout::VertexCentered;
        for (int gy = window_.j0; gy <= window_.j1; ++gy) {
            for (int gx = window_.i0; gx <= window_.i1; ++gx) {
                const int row = unknown_id_[(gy - window_.j0) * window_.nx() + (gx - window_.i0)];
                if (row < 0) continue;
                matrix_.add(row, row, 1.0);

                std::array<detail::NeighborRef, 4> links;
                if (uniform_vertex) {
                    const int dx[4] = {1, -1, 0, 0};
                    const int dy[4] = {0, 0, 1, -1};
                    for (int d = 0; d < 4; ++d) {
                        links[d].ix = gx + dx[d];
                        links[d].iy = gy + dy[d];
                        links[d].w_raw = 1.0;
                    }
                } else {
                    links = detail::cell_links(grid_, field, gx, gy);
                }

                double K = 0.0;
                for (const auto& l : links) K += l.w_raw;
                for (const auto& l : links) {
                    const double w = l.w_raw / K;
                    if (l.wall) {
                        wall_couplings_.push_back({row, wall_slot(l.side, l.along), w});
                        continue;
                    }
                    if (!window_.contains(l.ix, l.iy))
                        throw InternalError("window unknown references a point outside the window");
                    const int lidx =
                        (l.iy - window_.j0) * window_.nx() + (l.ix - window_.i0);
                    if (const int slot = dirichlet_slot_[lidx]; slot >= 0)
                        trace_couplings_.push_back({row, slot, w});
                    else
                        matrix_.add(row, unknown_id_[lidx], -w);
                }
            }
        }
        matrix_.finalize();
    }

    int wall_slot(Side side, int along) {
        for (int q = 0; q < n_wall(); ++q)
            if (wall_samples_[q].side == side && wall_samples_[q].along == along) return q;
        wall_samples_.push_back({side, along});
        return n_wall() - 1;
    }

    GridSpec grid_;
    SubdomainWindow window_;
    std::array<SideMode, 4> side_modes_;
    std::vector<int> unknown_id_;
    std::vector<int> dirichlet_slot_;
    std::vector<std::pair<int, int>> dirichlet_pts_;
    std::vector<WallSample> wall_samples_;
    std::vector<Coupling> trace_couplings_;
    std::vector<Coupling> wall_couplings_;
    int n_unknowns_ = 0;
    SparseSystem matrix_;
    std::unique_ptr<SparseFactor> factor_;
};

// --- direct solve on the full grid ---------------------------------------

// Global system: one stencil row per unknown. Vertex layout: unknowns are the
// interior points, boundary data folded into the rhs. Cell layout: every
// point is an unknown, edge points couple to the trace via half-cell flux.
inline SparseSystem assemble_direct(const GridSpec& grid, const ConductivityField& field,
                                    const BoundarySpec& bc) {
    if (bc.grid != grid) throw InvalidParameterError("boundary data built for another grid");
    const int p = grid.points_per_side();

    if (grid.layout == Layout::VertexCentered) {
        if (!field.is_uniform())
            throw InvalidParameterError(
                "vertex-centered direct solve supports uniform conductivity only");
        const int n = (p - 2) * (p - 2);
        SparseSystem sys(n);
        auto id = [p](int ix, int iy) { return (iy - 1) * (p - 2) + (ix - 1); };
        for (int iy = 1; iy < p - 1; ++iy) {
            for (int ix = 1; ix < p - 1; ++ix) {
                const int row = id(ix, iy);
                sys.add(row, row, 1.0);
                const int nb[4][2] = {{ix + 1, iy}, {ix - 1, iy}, {ix, iy + 1}, {ix, iy - 1}};
                for (const auto& [nx, ny] : nb) {
                    const double w = 0.25;
                    if (nx == 0) sys.add_rhs(row, w * bc.value(Side::West, ny));
                    else if (nx == p - 1) sys.add_rhs(row, w * bc.value(Side::East, ny));
                    else if (ny == 0) sys.add_rhs(row, w * bc.value(Side::South, nx));
                    else if (ny == p - 1) sys.add_rhs(row, w * bc.value(Side::North, nx));
                    else sys.add(row, id(nx, ny), -w);
                }
            }
        }
        sys.finalize();
        return sys;
    }

    if (field.n_cells != grid.cells_per_side())
        throw InvalidParameterError("conductivity field size does not match grid");
    SparseSystem sys(p * p);
    for (int iy = 0; iy < p; ++iy) {
        for (int ix = 0; ix < p; ++ix) {
            const int row = iy * p + ix;
            sys.add(row, row, 1.0);
            const auto links = detail::cell_links(grid, field, ix, iy);
            double K = 0.0;
            for (const auto& l : links) K += l.w_raw;
            for (const auto& l : links) {
                const double w = l.w_raw / K;
                if (l.wall)
                    sys.add_rhs(row, w * bc.value(l.side, l.along));
                else
                    sys.add(row, l.iy * p + l.ix, -w);
            }
        }
    }
    sys.finalize();
    return sys;
}

inline TemperatureField solve_direct(const GridSpec& grid, const ConductivityField& field,
                                     const BoundarySpec& bc) {
    SparseSystem sys = assemble_direct(grid, field, bc);
    const std::vector<double> x = solve_sparse(sys);

    TemperatureField out(grid);
    const int p = grid.points_per_side();
    if (grid.layout == Layout::VertexCentered) {
        for (int iy = 1; iy < p - 1; ++iy)
            for (int ix = 1; ix < p - 1; ++ix) out.u(ix, iy) = x[(iy - 1) * (p - 2) + (ix - 1)];
        for (int i = 0; i < p; ++i) {
            out.u(i, 0) = bc.value(Side::South, i);
            out.u(i, p - 1) = bc.value(Side::North, i);
            out.u(0, i) = bc.value(Side::West, i);
            out.u(p - 1, i) = bc.value(Side::East, i);
        }
    } else {
        for (int iy = 0; iy < p; ++iy)
            for (int ix = 0; ix < p; ++ix) out.u(ix, iy) = x[iy * p + ix];
    }
    return out;
}

// Dirichlet solve on a window: boundary points carry `trace` (ring order, see
// WindowProblem::dirichlet_points), interior uses the direct-solve stencil.
inline Array2D<double> solve_subdomain(const GridSpec& grid, const ConductivityField& field,
                                       const SubdomainWindow& window,
                                       std::span<const double> trace) {
    WindowProblem problem(grid, field, window);
    return problem.solve(trace);
}

} // namespace heat2d

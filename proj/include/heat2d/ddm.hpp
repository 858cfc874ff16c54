#pragma once

// Finite-difference domain decomposition: tile the grid into windows sharing
// their boundary grid lines, eliminate each window's interior onto its outer
// ring through a local Dirichlet solve (u^I = a u^O), solve the reduced
// system over partition-line and inner-ring points, then recover the deleted
// interiors window by window.

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <utility>
#include <vector>

#include "heat2d/boundary.hpp"
#include "heat2d/conductivity.hpp"
#include "heat2d/fdm.hpp"
#include "heat2d/grid.hpp"
#include "heat2d/metrics.hpp"
#include "heat2d/parallel.hpp"
#include "heat2d/sparse.hpp"

namespace heat2d {

// --- pure count arithmetic --------------------------------------------------

// Outer ring: window-boundary points excluding the 4 corners (a corner enters
// no interior 5-point stencil of the window).
inline int ddm_outer_count(int m) { return 4 * (m - 1); }
// Inner ring: second-outermost points, corners included.
inline int ddm_inner_count(int m) { return 4 * (m - 2); }
// Strictly-inside points eliminated from the global system, per window.
inline int ddm_deleted_per_window(int m) { return (m - 3) * (m - 3); }
// Grid points per local window.
inline int ddm_local_points(int m) { return (m + 1) * (m + 1); }

inline int ddm_windows_per_side(int points_per_side, int m) {
    return (points_per_side - 1) / m;
}
// Size of the reduced global system (all grid points minus deleted ones).
inline int ddm_reduced_points(int points_per_side, int m) {
    const int k = ddm_windows_per_side(points_per_side, m);
    return points_per_side * points_per_side - k * k * ddm_deleted_per_window(m);
}

// --- partition ---------------------------------------------------------------

struct DdmPartition {
    GridSpec grid;
    int m = 0; // h_DDM / h
    int per_side = 0;
    std::vector<SubdomainWindow> windows; // row-major by (b, a)

    double spacing() const { return m * grid.h(); } // h_DDM
    int window_id(int a, int b) const { return b * per_side + a; }
};

inline DdmPartition partition(const GridSpec& grid, int m) {
    const int p = grid.points_per_side();
    if (m < 3)
        throw InvalidParameterError("ddm partition: m must be >= 3 (inner ring needs "
                                    "4(m-2) >= 4 points), got " + std::to_string(m));
    if ((p - 1) % m != 0) {
        std::string admissible;
        for (int cand = 3; cand <= p - 1; ++cand)
            if ((p - 1) % cand == 0) admissible += (admissible.empty() ? "" : ", ") +
                                                   std::to_string(cand);
        throw InvalidParameterError("ddm partition: point lattice has " + std::to_string(p - 1) +
                                    " intervals per side, not divisible by m = " +
                                    std::to_string(m) + "; admissible m: " + admissible);
    }
    DdmPartition part;
    part.grid = grid;
    part.m = m;
    part.per_side = (p - 1) / m;
    for (int b = 0; b < part.per_side; ++b)
        for (int a = 0; a < part.per_side; ++a)
            part.windows.push_back({a * m, b * m, (a + 1) * m, (b + 1) * m});
    return part;
}

// --- local reduction ---------------------------------------------------------

// Inner-from-outer map of one window. Column j is the inner-ring response to
// a unit value at outer point j (window corners held at zero; they influence
// no interior point).
struct DdmOperator {
    SubdomainWindow window;
    std::vector<std::pair<int, int>> outer_ids; // ring order, corners excluded
    std::vector<std::pair<int, int>> inner_ids; // ring order, corners included
    std::vector<double> a;                      // (inner, outer) row-major
    std::shared_ptr<const WindowProblem> problem; // kept for interior recovery

    double a_at(int i, int j) const {
        return a[static_cast<std::size_t>(i) * outer_ids.size() + j];
    }
    double row_sum(int i) const {
        double s = 0.0;
        for (std::size_t j = 0; j < outer_ids.size(); ++j) s += a_at(i, static_cast<int>(j));
        return s;
    }
};

namespace ddm_detail {

inline bool is_window_corner(const SubdomainWindow& w, int gx, int gy) {
    return (gx == w.i0 || gx == w.i1) && (gy == w.j0 || gy == w.j1);
}

inline std::vector<std::pair<int, int>> inner_ring(const SubdomainWindow& w) {
    std::vector<std::pair<int, int>> pts;
    const int i0 = w.i0 + 1, i1 = w.i1 - 1, j0 = w.j0 + 1, j1 = w.j1 - 1;
    for (int gx = i0; gx <= i1; ++gx) pts.emplace_back(gx, j0);
    for (int gy = j0 + 1; gy <= j1; ++gy) pts.emplace_back(i1, gy);
    for (int gx = i1 - 1; gx >= i0; --gx) pts.emplace_back(gx, j1);
    for (int gy = j1 - 1; gy > j0; --gy) pts.emplace_back(i0, gy);
    return pts;
}

} // namespace ddm_detail

inline DdmOperator local_reduce(const GridSpec& grid, const ConductivityField& field,
                                const SubdomainWindow& window) {
    DdmOperator op;
    op.window = window;
    op.problem = std::make_shared<WindowProblem>(grid, field, window);

    const auto& ring = op.problem->dirichlet_points();
    std::vector<int> outer_slots; // ring slots of the non-corner points
    for (int s = 0; s < op.problem->n_dirichlet(); ++s) {
        const auto [gx, gy] = ring[s];
        if (ddm_detail::is_window_corner(window, gx, gy)) continue;
        outer_slots.push_back(s);
        op.outer_ids.emplace_back(gx, gy);
    }
    op.inner_ids = ddm_detail::inner_ring(window);

    const int n_outer = static_cast<int>(op.outer_ids.size());
    const int n_inner = static_cast<int>(op.inner_ids.size());
    op.a.assign(static_cast<std::size_t>(n_inner) * n_outer, 0.0);

    std::vector<double> trace(op.problem->n_dirichlet(), 0.0);
    for (int j = 0; j < n_outer; ++j) {
        trace[outer_slots[j]] = 1.0;
        const auto u = op.problem->solve(trace);
        trace[outer_slots[j]] = 0.0;
        for (int i = 0; i < n_inner; ++i) {
            const auto [gx, gy] = op.inner_ids[i];
            op.a[static_cast<std::size_t>(i) * n_outer + j] =
                u(gx - window.i0, gy - window.j0);
        }
    }
    return op;
}

// --- operators for the whole partition, with content memoization -------------

struct DdmOperatorSet {
    std::vector<DdmOperator> ops; // one per window, partition order
    long n_local_analyses = 0;    // distinct after memoization
};

inline DdmOperatorSet build_ddm_operators(const GridSpec& grid, const ConductivityField& field,
                                          const DdmPartition& part, bool sequential = true) {
    DdmOperatorSet set;
    set.ops.resize(part.windows.size());

    struct Key {
        std::uint64_t content;
        int nx, ny;
        auto operator<=>(const Key&) const = default;
    };
    std::map<Key, std::shared_ptr<const DdmOperator>> memo;
    std::mutex memo_mutex;

    parallel_for_index(static_cast<int>(part.windows.size()), sequential, [&](int wi) {
        const SubdomainWindow& w = part.windows[wi];
        const Key key{detail::window_content_hash(field, grid.layout, w,
                                                  {SideMode::Dirichlet, SideMode::Dirichlet,
                                                   SideMode::Dirichlet, SideMode::Dirichlet}),
                      w.nx(), w.ny()};
        std::shared_ptr<const DdmOperator> shared;
        {
            std::lock_guard<std::mutex> lock(memo_mutex);
            if (auto it = memo.find(key); it != memo.end()) shared = it->second;
        }
        if (!shared) {
            auto computed = std::make_shared<DdmOperator>(local_reduce(grid, field, w));
            std::lock_guard<std::mutex> lock(memo_mutex);
            shared = memo.emplace(key, std::move(computed)).first->second;
        }
        // rebase the shared operator onto this window
        DdmOperator op = *shared;
        const int dx = w.i0 - op.window.i0;
        const int dy = w.j0 - op.window.j0;
        op.window = w;
        for (auto& [gx, gy] : op.outer_ids) { gx += dx; gy += dy; }
        for (auto& [gx, gy] : op.inner_ids) { gx += dx; gy += dy; }
        set.ops[wi] = std::move(op);
    });

    set.n_local_analyses = static_cast<long>(memo.size());
    return set;
}

// --- reduced global system ----------------------------------------------------

struct DdmGlobalSystem {
    SparseSystem sys;
    std::vector<int> point_id; // grid point -> unknown id, -1 for deleted points
    int n_unknowns = 0;
};

// Unknowns: every grid point on a partition line plus every inner-ring point.
// Rows: Dirichlet for vertex-layout points on the domain boundary, the FDM
// stencil at every other partition-line point (neighbors are partition-line
// or inner points; cell-layout edge points couple to the trace), and the
// reduction row u^I = a u^O for inner points.
inline DdmGlobalSystem assemble_global_ddm(const DdmPartition& part,
                                           const DdmOperatorSet& set,
                                           const ConductivityField& field,
                                           const BoundarySpec& bc) {
    const GridSpec& grid = part.grid;
    const int p = grid.points_per_side();
    const int m = part.m;
    const bool vertex = grid.layout == Layout::VertexCentered;
    if (bc.grid != grid) throw InvalidParameterError("boundary data built for another grid");
    if (vertex && !field.is_uniform())
        throw InvalidParameterError("vertex-centered ddm supports uniform conductivity only");
    if (!vertex && field.n_cells != grid.cells_per_side())
        throw InvalidParameterError("conductivity field size does not match grid");
    if (static_cast<int>(set.ops.size()) != static_cast<int>(part.windows.size()))
        throw InvalidParameterError("ddm assembly: one operator required per window");

    DdmGlobalSystem g;
    g.point_id.assign(static_cast<std::size_t>(p) * p, -1);
    auto on_partition_line = [m](int ix, int iy) { return ix % m == 0 || iy % m == 0; };
    auto on_inner_ring = [m](int ix, int iy) {
        const int lx = ix % m;
        const int ly = iy % m;
        return lx == 1 || lx == m - 1 || ly == 1 || ly == m - 1;
    };
    for (int iy = 0; iy < p; ++iy)
        for (int ix = 0; ix < p; ++ix)
            if (on_partition_line(ix, iy) || on_inner_ring(ix, iy))
                g.point_id[iy * static_cast<std::size_t>(p) + ix] = g.n_unknowns++;

    g.sys = SparseSystem(g.n_unknowns);
    auto id_of = [&](int ix, int iy) {
        const int id = g.point_id[iy * static_cast<std::size_t>(p) + ix];
        if (id < 0)
            throw InternalError("ddm assembly references a deleted point (" +
                                std::to_string(ix) + "," + std::to_string(iy) + ")");
        return id;
    };

    // partition-line rows
    for (int iy = 0; iy < p; ++iy) {
        for (int ix = 0; ix < p; ++ix) {
            if (!on_partition_line(ix, iy)) continue;
            const int row = id_of(ix, iy);
            if (vertex && (ix == 0 || ix == p - 1 || iy == 0 || iy == p - 1)) {
                g.sys.set_dirichlet(row, bc_value_at_point(bc, grid, ix, iy));
                continue;
            }
            g.sys.add(row, row, 1.0);
            if (vertex) {
                const int nb[4][2] = {{ix + 1, iy}, {ix - 1, iy}, {ix, iy + 1}, {ix, iy - 1}};
                for (const auto& [nx, ny] : nb) g.sys.add(row, id_of(nx, ny), -0.25);
            } else {
                const auto links = detail::cell_links(grid, field, ix, iy);
                double K = 0.0;
                for (const auto& l : links) K += l.w_raw;
                for (const auto& l : links) {
                    const double w = l.w_raw / K;
                    if (l.wall)
                        g.sys.add_rhs(row, w * bc.value(l.side, l.along));
                    else
                        g.sys.add(row, id_of(l.ix, l.iy), -w);
                }
            }
        }
    }

    // reduction rows
    for (const DdmOperator& op : set.ops) {
        for (std::size_t i = 0; i < op.inner_ids.size(); ++i) {
            const auto [gx, gy] = op.inner_ids[i];
            const int row = id_of(gx, gy);
            g.sys.set_row_kind(row, RowKind::Reduction);
            g.sys.add(row, row, 1.0);
            for (std::size_t j = 0; j < op.outer_ids.size(); ++j) {
                const auto [ox, oy] = op.outer_ids[j];
                g.sys.add(row, id_of(ox, oy),
                          -op.a_at(static_cast<int>(i), static_cast<int>(j)));
            }
        }
    }

    g.sys.finalize();
    return g;
}

// --- interior recovery ---------------------------------------------------------

// Solve each window with its now-known perimeter and write the deleted
// points. Inner-ring and partition-line values stay as solved globally.
inline TemperatureField recover_interior(const DdmPartition& part, const DdmOperatorSet& set,
                                         const std::vector<double>& reduced,
                                         const DdmGlobalSystem& g, const BoundarySpec& bc,
                                         bool sequential = true) {
    const GridSpec& grid = part.grid;
    const int p = grid.points_per_side();
    const bool vertex = grid.layout == Layout::VertexCentered;
    TemperatureField out(grid);

    // known values first
    for (int iy = 0; iy < p; ++iy)
        for (int ix = 0; ix < p; ++ix) {
            const int id = g.point_id[iy * static_cast<std::size_t>(p) + ix];
            if (id >= 0)
                out.u(ix, iy) = reduced[id];
            else if (vertex && (ix == 0 || ix == p - 1 || iy == 0 || iy == p - 1))
                out.u(ix, iy) = bc_value_at_point(bc, grid, ix, iy);
        }

    if (ddm_deleted_per_window(part.m) == 0) return out;

    parallel_for_index(static_cast<int>(set.ops.size()), sequential, [&](int wi) {
        const DdmOperator& op = set.ops[wi];
        const SubdomainWindow& w = op.window;
        std::vector<double> trace;
        trace.reserve(op.problem->n_dirichlet());
        for (const auto& [gx, gy] : op.problem->dirichlet_points()) {
            // dirichlet_points was built for the memo source window; rebase
            const int ax = gx - op.problem->window().i0 + w.i0;
            const int ay = gy - op.problem->window().j0 + w.j0;
            trace.push_back(out.u(ax, ay));
        }
        const auto local = op.problem->solve(trace);
        for (int ly = 2; ly <= w.ny() - 3; ++ly)
            for (int lx = 2; lx <= w.nx() - 3; ++lx)
                out.u(w.i0 + lx, w.j0 + ly) = local(lx, ly);
    });
    return out;
}

// --- end-to-end driver -----------------------------------------------------------

struct DdmResult {
    DdmPartition partition;
    DdmOperatorSet operators;
    std::vector<double> reduced;
    DdmGlobalSystem global;
    TemperatureField field;
    TimingReport timing;
};

inline DdmResult solve_ddm(const GridSpec& grid, const ConductivityField& field,
                           const BoundarySpec& bc, int m, bool sequential = true) {
    DdmResult res;
    res.timing.method = Method::DDM;
    res.timing.parallel_local = !sequential;
    res.partition = partition(grid, m);
    res.operators = timed(res.timing, Phase::Local, [&] {
        return build_ddm_operators(grid, field, res.partition, sequential);
    });
    res.timing.local_solve_count = res.operators.n_local_analyses;
    timed(res.timing, Phase::Global, [&] {
        res.global = assemble_global_ddm(res.partition, res.operators, field, bc);
        res.reduced = solve_sparse(res.global.sys);
    });
    res.timing.unknowns = res.global.sys.n();
    res.timing.bandwidth = res.global.sys.bandwidth();
    res.field = timed(res.timing, Phase::Recovery, [&] {
        return recover_interior(res.partition, res.operators, res.reduced, res.global, bc,
                                sequential);
    });
    return res;
}

} // namespace heat2d

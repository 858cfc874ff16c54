#pragma once

// Seamless-domain method: a coarse lattice of points (CPs) carries the only
// global unknowns. A fine Dirichlet solve on a window around each CP builds
// the influence row a^L (center value as a combination of the reference CPs)
// and the interpolation matrix N^L (every window point as a combination of
// the reference CPs). Assembling one row per CP gives a small banded system;
// solving it and applying N^L recovers the fine-scale field.

#include <algorithm>
#include <cstdint>
#include <cstring>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
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

// Reference-CP arrangement around a center CP, in lattice units.
// Ring8 = the eight nearest lattice neighbors, EdgeMid4 = axial only,
// Corners4 = diagonal only.
enum class RefPattern { Ring8, Corners4, EdgeMid4 };

inline const char* to_string(RefPattern p) {
    switch (p) {
        case RefPattern::Ring8: return "ring8";
        case RefPattern::Corners4: return "corners4";
        case RefPattern::EdgeMid4: return "edgemid4";
    }
    return "?";
}

inline std::vector<std::pair<int, int>> ref_offsets(RefPattern p) {
    switch (p) {
        case RefPattern::Ring8:
            return {{1, 0}, {1, 1}, {0, 1}, {-1, 1}, {-1, 0}, {-1, -1}, {0, -1}, {1, -1}};
        case RefPattern::Corners4:
            return {{1, 1}, {-1, 1}, {-1, -1}, {1, -1}};
        case RefPattern::EdgeMid4:
            return {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
    }
    return {};
}

// --- pure count arithmetic (shared with the benchmark reports) ------------

inline int sdm_cp_per_side(int points_per_side, int r) {
    return (points_per_side - 1) / r + 1;
}
inline int sdm_total_cps(int points_per_side, int r) {
    const int c = sdm_cp_per_side(points_per_side, r);
    return c * c;
}
// Grid points in the oversampled window of side 4 h_SDM.
inline int sdm_lplus_points(int r) {
    return (4 * r + 1) * (4 * r + 1);
}

// Regular lattice of CPs with spacing r grid intervals, spanning the full
// point array. CP lattice coordinate (a, b) sits at point (a*r, b*r).
struct CoarseLattice {
    GridSpec grid;
    int r = 1;
    RefPattern pattern = RefPattern::Ring8;
    int per_side = 0;

    int total() const { return per_side * per_side; }
    int cp_id(int a, int b) const { return b * per_side + a; }
    std::pair<int, int> cp_coords(int id) const { return {id % per_side, id / per_side}; }
    std::pair<int, int> cp_point(int id) const {
        const auto [a, b] = cp_coords(id);
        return {a * r, b * r};
    }
    // CP on the outermost lattice ring. Vertex layout: these lie on the
    // domain boundary and become Dirichlet rows. Cell layout: they sit half
    // a cell inside and get affine local-analysis rows instead.
    bool on_lattice_edge(int id) const {
        const auto [a, b] = cp_coords(id);
        return a == 0 || b == 0 || a == per_side - 1 || b == per_side - 1;
    }
    double spacing() const { return r * grid.h(); } // h_SDM

    // In-lattice reference CPs of `id` under the pattern (full set for
    // interior CPs, the existing subset for lattice-edge CPs).
    std::vector<int> refs(int id) const {
        const auto [a, b] = cp_coords(id);
        std::vector<int> out;
        for (const auto& [ox, oy] : ref_offsets(pattern)) {
            const int ra = a + ox;
            const int rb = b + oy;
            if (ra >= 0 && ra < per_side && rb >= 0 && rb < per_side)
                out.push_back(cp_id(ra, rb));
        }
        return out;
    }
};

inline CoarseLattice build_lattice(const GridSpec& grid, int r,
                                   RefPattern pattern = RefPattern::Ring8) {
    const int p = grid.points_per_side();
    if (r < 1) throw InvalidParameterError("build_lattice: r must be >= 1");
    if ((p - 1) % r != 0) {
        std::string admissible;
        for (int cand = 1; cand <= p - 1; ++cand)
            if ((p - 1) % cand == 0) admissible += (admissible.empty() ? "" : ", ") +
                                                   std::to_string(cand);
        throw InvalidParameterError("build_lattice: point lattice has " + std::to_string(p - 1) +
                                    " intervals per side, not divisible by r = " +
                                    std::to_string(r) + "; admissible r: " + admissible);
    }
    CoarseLattice lat;
    lat.grid = grid;
    lat.r = r;
    lat.pattern = pattern;
    lat.per_side = sdm_cp_per_side(p, r);
    return lat;
}

// --- local operators -------------------------------------------------------

// Result of one local analysis, shared between CPs whose windows have the
// same geometry and conductivity content.
struct OperatorData {
    // window relative to the center point
    int dx0 = 0, dy0 = 0, dx1 = 0, dy1 = 0;
    std::vector<std::pair<int, int>> ref_offsets; // point offsets from center
    int n_ref = 0;
    std::vector<double> nl;   // (window point, ref) -> weight; pt = ly*nx+lx
    std::vector<double> a_row; // nl evaluated at the center point
    // affine part, present only for lattice-edge windows in the cell layout:
    // unit responses to the boundary samples seen through half-cell fluxes.
    // Samples are stored window-relative (operator data is shared between
    // CPs whose windows have identical shape and conductivity content).
    struct RelWallSample {
        Side side;
        int rel_along; // offset from the window origin along that side
    };
    std::vector<RelWallSample> wall_samples;
    std::vector<double> wall_nl;    // (window point, wall sample)
    std::vector<double> wall_a_row; // at the center point
    bool oversampled = false;
    bool pinv_fallback = false;

    int nx() const { return dx1 - dx0 + 1; }
    int ny() const { return dy1 - dy0 + 1; }
    double nl_at(int pt, int m) const { return nl[static_cast<std::size_t>(pt) * n_ref + m]; }
    double wall_nl_at(int pt, int q) const {
        return wall_nl[static_cast<std::size_t>(pt) * wall_samples.size() + q];
    }
    bool affine() const { return !wall_samples.empty(); }
};

// One CP's influence row and interpolation operator.
struct LocalOperator {
    int center_cp = -1;
    std::vector<int> ref_cps; // CP ids, aligned with data->ref_offsets
    SubdomainWindow window;   // absolute window on the grid
    std::shared_ptr<const OperatorData> data;

    const std::vector<double>& a_row() const { return data->a_row; }
    double a_row_sum() const {
        double s = 0.0;
        for (double v : data->a_row) s += v;
        return s;
    }
    // Row sum including the affine part's response to a unit trace:
    // equals 1 exactly when constants are reproduced.
    double constant_response() const {
        double s = a_row_sum();
        for (double v : data->wall_a_row) s += v;
        return s;
    }

    // Absolute boundary sample fed by affine coupling q of this CP's window.
    WindowProblem::WallSample wall_sample_abs(int q) const {
        const auto& rel = data->wall_samples[q];
        const bool along_y = rel.side == Side::West || rel.side == Side::East;
        return {rel.side, rel.rel_along + (along_y ? window.j0 : window.i0)};
    }
};

namespace sdm_detail {

// Arclength step of a perimeter point along the ring walk used by
// WindowProblem (CCW from the window's lower-left corner).
inline int ring_pos(const SubdomainWindow& w, int gx, int gy) {
    const int nx = w.nx() - 1;
    const int ny = w.ny() - 1;
    if (gy == w.j0 && gx < w.i1) return gx - w.i0;
    if (gx == w.i1) return nx + (gy - w.j0);
    if (gy == w.j1) return nx + ny + (w.i1 - gx);
    return 2 * nx + ny + (w.j1 - gy);
}
inline int ring_length(const SubdomainWindow& w) {
    return 2 * (w.nx() - 1) + 2 * (w.ny() - 1);
}

// Piecewise-linear interpolation weights along the window perimeter:
// weight of each anchor at each perimeter point. Anchors must be perimeter
// points. With `wrap` the profile closes around the ring; without it the
// profile is clamped beyond the extreme anchors (used when part of the
// perimeter is a physical boundary).
inline std::vector<std::vector<double>> perimeter_weights(
    const SubdomainWindow& w, const std::vector<std::pair<int, int>>& points,
    const std::vector<std::pair<int, int>>& anchors, bool wrap) {
    const int n_anchor = static_cast<int>(anchors.size());
    std::vector<std::pair<int, int>> anchor_pos(n_anchor); // (ring pos, anchor idx)
    for (int m = 0; m < n_anchor; ++m) {
        if (!w.on_perimeter(anchors[m].first, anchors[m].second))
            throw InvalidParameterError("local analysis: reference point not on the window "
                                        "boundary");
        anchor_pos[m] = {ring_pos(w, anchors[m].first, anchors[m].second), m};
    }
    std::sort(anchor_pos.begin(), anchor_pos.end());
    const int L = ring_length(w);

    std::vector<std::vector<double>> weights(points.size(),
                                             std::vector<double>(n_anchor, 0.0));
    for (std::size_t p = 0; p < points.size(); ++p) {
        const int s = ring_pos(w, points[p].first, points[p].second);
        // locate bracketing anchors
        int hi = 0;
        while (hi < n_anchor && anchor_pos[hi].first < s) ++hi;
        if (hi < n_anchor && anchor_pos[hi].first == s) {
            weights[p][anchor_pos[hi].second] = 1.0;
            continue;
        }
        const bool before_first = hi == 0;
        const bool after_last = hi == n_anchor;
        if ((before_first || after_last) && !wrap) {
            weights[p][anchor_pos[after_last ? n_anchor - 1 : 0].second] = 1.0;
            continue;
        }
        const auto& lo_a = after_last || before_first ? anchor_pos[n_anchor - 1]
                                                      : anchor_pos[hi - 1];
        const auto& hi_a = after_last || before_first ? anchor_pos[0] : anchor_pos[hi];
        double span, offset;
        if (before_first || after_last) {
            span = static_cast<double>(L - lo_a.first + hi_a.first);
            offset = static_cast<double>(s > lo_a.first ? s - lo_a.first
                                                        : s + L - lo_a.first);
        } else {
            span = static_cast<double>(hi_a.first - lo_a.first);
            offset = static_cast<double>(s - lo_a.first);
        }
        const double t = offset / span;
        weights[p][lo_a.second] += 1.0 - t;
        weights[p][hi_a.second] += t;
    }
    return weights;
}

struct WindowShape {
    SubdomainWindow window;
    std::array<SideMode, 4> modes = {SideMode::Dirichlet, SideMode::Dirichlet,
                                     SideMode::Dirichlet, SideMode::Dirichlet};
};

// Plain window: the 2r x 2r-interval square centered on the CP, clipped at
// the grid edge for lattice-edge CPs; sides through the CP's own edge become
// physical.
inline WindowShape plain_window(const CoarseLattice& lat, int cp) {
    const int p = lat.grid.points_per_side();
    const auto [cx, cy] = lat.cp_point(cp);
    const int r = lat.r;
    WindowShape shape;
    shape.window = {std::max(0, cx - r), std::max(0, cy - r), std::min(p - 1, cx + r),
                    std::min(p - 1, cy + r)};
    if (lat.grid.layout == Layout::CellCentered) {
        if (cy == 0) shape.modes[static_cast<int>(Side::South)] = SideMode::Physical;
        if (cy == p - 1) shape.modes[static_cast<int>(Side::North)] = SideMode::Physical;
        if (cx == 0) shape.modes[static_cast<int>(Side::West)] = SideMode::Physical;
        if (cx == p - 1) shape.modes[static_cast<int>(Side::East)] = SideMode::Physical;
    }
    return shape;
}

// Oversampled window: side 4 h_SDM, shifted inward (not clipped) near the
// grid edge so the full window stays inside while containing the center and
// all reference CPs.
inline SubdomainWindow oversampled_window(const CoarseLattice& lat, int cp) {
    const int p = lat.grid.points_per_side();
    const auto [cx, cy] = lat.cp_point(cp);
    const int half = 2 * lat.r;
    int i0 = cx - half;
    int j0 = cy - half;
    i0 += std::max(0, -i0) - std::max(0, i0 + 2 * half - (p - 1));
    j0 += std::max(0, -j0) - std::max(0, j0 + 2 * half - (p - 1));
    return {i0, j0, i0 + 2 * half, j0 + 2 * half};
}

// Boundary points of the oversampled window: its four corners. With eight
// reference CPs the reduction d^{L+} u^{L+} = u^L is overdetermined and
// solved in the least-squares sense; constants stay exact because the
// consistent system d 1 = 1 has the unique rank-4 solution u^{L+} = 1.
inline std::vector<std::pair<int, int>> oversample_anchors(const SubdomainWindow& w) {
    return {{w.i0, w.j0}, {w.i1, w.j0}, {w.i1, w.j1}, {w.i0, w.j1}};
}

struct MemoKey {
    int dx0, dy0, dx1, dy1;
    int pattern;
    bool oversampled;
    std::uint64_t content_hash;
    int n_ref;
    auto operator<=>(const MemoKey&) const = default;
};

} // namespace sdm_detail

// --- local analyses --------------------------------------------------------

// Local analysis without oversampling: impose a piecewise-linear trace
// between the reference CPs along the window boundary, solve the window for
// each unit reference value, and read the interpolation rows.
inline std::shared_ptr<const OperatorData> local_basis_plain_data(
    const GridSpec& grid, const ConductivityField& field, const CoarseLattice& lat, int cp) {
    const auto shape = sdm_detail::plain_window(lat, cp);
    const auto [cx, cy] = lat.cp_point(cp);
    const auto ref_ids = lat.refs(cp);
    const int n_ref = static_cast<int>(ref_ids.size());

    std::vector<std::pair<int, int>> anchors;
    for (int id : ref_ids) anchors.push_back(lat.cp_point(id));

    WindowProblem problem(grid, field, shape.window, shape.modes);
    const bool has_physical = problem.n_wall() > 0;
    const auto weights = sdm_detail::perimeter_weights(shape.window, problem.dirichlet_points(),
                                                       anchors, /*wrap=*/!has_physical);

    auto data = std::make_shared<OperatorData>();
    data->dx0 = shape.window.i0 - cx;
    data->dy0 = shape.window.j0 - cy;
    data->dx1 = shape.window.i1 - cx;
    data->dy1 = shape.window.j1 - cy;
    for (int id : ref_ids) {
        const auto [rx, ry] = lat.cp_point(id);
        data->ref_offsets.emplace_back(rx - cx, ry - cy);
    }
    data->n_ref = n_ref;

    const int npt = shape.window.nx() * shape.window.ny();
    data->nl.assign(static_cast<std::size_t>(npt) * n_ref, 0.0);
    data->a_row.assign(n_ref, 0.0);
    const int center_pt = (cy - shape.window.j0) * shape.window.nx() + (cx - shape.window.i0);

    std::vector<double> trace(problem.n_dirichlet());
    const std::vector<double> no_wall(problem.n_wall(), 0.0);
    for (int m = 0; m < n_ref; ++m) {
        for (int s = 0; s < problem.n_dirichlet(); ++s) trace[s] = weights[s][m];
        const auto u = problem.solve(trace, no_wall);
        for (int pt = 0; pt < npt; ++pt)
            data->nl[static_cast<std::size_t>(pt) * n_ref + m] = u.data()[pt];
        data->a_row[m] = u.data()[center_pt];
    }

    if (has_physical) {
        for (const auto& ws : problem.wall_samples()) {
            const bool along_y = ws.side == Side::West || ws.side == Side::East;
            data->wall_samples.push_back(
                {ws.side, ws.along - (along_y ? shape.window.j0 : shape.window.i0)});
        }
        const int nq = problem.n_wall();
        data->wall_nl.assign(static_cast<std::size_t>(npt) * nq, 0.0);
        data->wall_a_row.assign(nq, 0.0);
        const std::vector<double> zero_trace(problem.n_dirichlet(), 0.0);
        std::vector<double> wall(nq, 0.0);
        for (int q = 0; q < nq; ++q) {
            wall[q] = 1.0;
            const auto u = problem.solve(zero_trace, wall);
            wall[q] = 0.0;
            for (int pt = 0; pt < npt; ++pt)
                data->wall_nl[static_cast<std::size_t>(pt) * nq + q] = u.data()[pt];
            data->wall_a_row[q] = u.data()[center_pt];
        }
    }
    return data;
}

// Local analysis with oversampling: solve the enlarged window for unit
// values at its corner/edge-midpoint boundary points, evaluate the result at
// the reference CPs (d^{L+}), and compose N^L = N^{L+} (d^{L+})^{-1}.
inline std::shared_ptr<const OperatorData> local_basis_oversampled_data(
    const GridSpec& grid, const ConductivityField& field, const CoarseLattice& lat, int cp) {
    const SubdomainWindow w = sdm_detail::oversampled_window(lat, cp);
    const auto [cx, cy] = lat.cp_point(cp);
    const auto ref_ids = lat.refs(cp);
    const int n_ref = static_cast<int>(ref_ids.size());

    const auto bpoints = sdm_detail::oversample_anchors(w);
    const int n_bp = static_cast<int>(bpoints.size());

    WindowProblem problem(grid, field, w);
    const auto weights =
        sdm_detail::perimeter_weights(w, problem.dirichlet_points(), bpoints, /*wrap=*/true);

    const int npt = w.nx() * w.ny();
    std::vector<double> nplus(static_cast<std::size_t>(npt) * n_bp, 0.0);
    std::vector<double> trace(problem.n_dirichlet());
    for (int q = 0; q < n_bp; ++q) {
        for (int s = 0; s < problem.n_dirichlet(); ++s) trace[s] = weights[s][q];
        const auto u = problem.solve(trace);
        for (int pt = 0; pt < npt; ++pt)
            nplus[static_cast<std::size_t>(pt) * n_bp + q] = u.data()[pt];
    }

    // d^{L+}: the oversampled interpolation evaluated at the reference CPs
    Eigen::MatrixXd d(n_ref, n_bp);
    for (int m = 0; m < n_ref; ++m) {
        const auto [rx, ry] = lat.cp_point(ref_ids[m]);
        if (!w.contains(rx, ry))
            throw InternalError("oversampled window does not contain a reference CP");
        const int pt = (ry - w.j0) * w.nx() + (rx - w.i0);
        for (int q = 0; q < n_bp; ++q)
            d(m, q) = nplus[static_cast<std::size_t>(pt) * n_bp + q];
    }

    bool pinv = false;
    Eigen::MatrixXd dinv; // n_bp x n_ref
    if (n_ref == n_bp) {
        try {
            dinv = solve_dense_small(d, Eigen::MatrixXd::Identity(n_ref, n_ref));
        } catch (const IllConditionedError&) {
            dinv = solve_dense_pinv(d, Eigen::MatrixXd::Identity(n_ref, n_ref));
            pinv = true;
        }
    } else {
        // overdetermined: least-squares reduction through the corner values
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(d, Eigen::ComputeThinU | Eigen::ComputeThinV);
        const double smin = svd.singularValues().minCoeff();
        const double smax = svd.singularValues().maxCoeff();
        if (!(smin > 0.0) || smax / smin > kCondLimit)
            throw IllConditionedError("oversampled reduction rank-deficient", smax / smin);
        dinv = svd.solve(Eigen::MatrixXd::Identity(n_ref, n_ref));
    }

    auto data = std::make_shared<OperatorData>();
    data->dx0 = w.i0 - cx;
    data->dy0 = w.j0 - cy;
    data->dx1 = w.i1 - cx;
    data->dy1 = w.j1 - cy;
    for (int id : ref_ids) {
        const auto [rx, ry] = lat.cp_point(id);
        data->ref_offsets.emplace_back(rx - cx, ry - cy);
    }
    data->n_ref = n_ref;
    data->oversampled = true;
    data->pinv_fallback = pinv;
    data->nl.assign(static_cast<std::size_t>(npt) * n_ref, 0.0);
    for (int pt = 0; pt < npt; ++pt)
        for (int m = 0; m < n_ref; ++m) {
            double acc = 0.0;
            for (int q = 0; q < n_bp; ++q)
                acc += nplus[static_cast<std::size_t>(pt) * n_bp + q] * dinv(q, m);
            data->nl[static_cast<std::size_t>(pt) * n_ref + m] = acc;
        }
    data->a_row.assign(n_ref, 0.0);
    const int center_pt = (cy - w.j0) * w.nx() + (cx - w.i0);
    for (int m = 0; m < n_ref; ++m) data->a_row[m] = data->nl_at(center_pt, m);
    return data;
}

// Public single-CP entry points (tests exercise these directly).
inline LocalOperator local_basis_plain(const GridSpec& grid, const ConductivityField& field,
                                       const CoarseLattice& lat, int cp) {
    LocalOperator op;
    op.center_cp = cp;
    op.ref_cps = lat.refs(cp);
    op.data = local_basis_plain_data(grid, field, lat, cp);
    const auto [cx, cy] = lat.cp_point(cp);
    op.window = {cx + op.data->dx0, cy + op.data->dy0, cx + op.data->dx1, cy + op.data->dy1};
    return op;
}

inline LocalOperator local_basis_oversampled(const GridSpec& grid,
                                             const ConductivityField& field,
                                             const CoarseLattice& lat, int cp) {
    LocalOperator op;
    op.center_cp = cp;
    op.ref_cps = lat.refs(cp);
    op.data = local_basis_oversampled_data(grid, field, lat, cp);
    const auto [cx, cy] = lat.cp_point(cp);
    op.window = {cx + op.data->dx0, cy + op.data->dy0, cx + op.data->dx1, cy + op.data->dy1};
    return op;
}

// --- operator construction for a whole lattice -----------------------------

struct OperatorSet {
    // slot per CP id; CPs without a local analysis (vertex-layout boundary
    // CPs) have no operator
    std::vector<std::optional<LocalOperator>> ops;
    long n_local_analyses = 0; // distinct analyses after memoization
    bool pinv_used = false;
};

// Build the operator for every CP that needs one. Identical windows
// (geometry + conductivity content) are computed once and shared.
inline OperatorSet build_operators(const GridSpec& grid, const ConductivityField& field,
                                   const CoarseLattice& lat, bool oversample,
                                   bool sequential = true) {
    OperatorSet set;
    set.ops.resize(lat.total());

    std::map<sdm_detail::MemoKey, std::shared_ptr<const OperatorData>> memo;
    std::mutex memo_mutex;

    const bool vertex = grid.layout == Layout::VertexCentered;

    std::vector<int> todo;
    for (int cp = 0; cp < lat.total(); ++cp) {
        if (vertex && lat.on_lattice_edge(cp)) continue; // Dirichlet CPs
        todo.push_back(cp);
    }

    parallel_for_index(static_cast<int>(todo.size()), sequential, [&](int idx) {
        const int cp = todo[idx];
        const bool edge = lat.on_lattice_edge(cp);
        // Lattice-edge CPs (cell layout) always use the clipped plain
        // analysis; the oversampled window cannot center on them.
        const bool use_oversample = oversample && !edge;

        sdm_detail::WindowShape shape;
        if (use_oversample) {
            shape.window = sdm_detail::oversampled_window(lat, cp);
        } else {
            shape = sdm_detail::plain_window(lat, cp);
        }
        const auto [cx, cy] = lat.cp_point(cp);
        sdm_detail::MemoKey key{shape.window.i0 - cx,
                                shape.window.j0 - cy,
                                shape.window.i1 - cx,
                                shape.window.j1 - cy,
                                static_cast<int>(lat.pattern),
                                use_oversample,
                                detail::window_content_hash(field, grid.layout, shape.window,
                                                            shape.modes),
                                static_cast<int>(lat.refs(cp).size())};

        std::shared_ptr<const OperatorData> data;
        {
            std::lock_guard<std::mutex> lock(memo_mutex);
            if (auto it = memo.find(key); it != memo.end()) data = it->second;
        }
        if (!data) {
            data = use_oversample ? local_basis_oversampled_data(grid, field, lat, cp)
                                  : local_basis_plain_data(grid, field, lat, cp);
            std::lock_guard<std::mutex> lock(memo_mutex);
            data = memo.emplace(key, data).first->second;
        }

        LocalOperator op;
        op.center_cp = cp;
        op.ref_cps = lat.refs(cp);
        op.window = {cx + data->dx0, cy + data->dy0, cx + data->dx1, cy + data->dy1};
        op.data = data;
        set.ops[cp] = std::move(op);
    });

    set.n_local_analyses = 0;
    for (const auto& [key, data] : memo) {
        ++set.n_local_analyses;
        if (data->pinv_fallback) set.pinv_used = true;
    }
    return set;
}

// --- global coarse system ---------------------------------------------------

struct GlobalCoarseSystem {
    SparseSystem sys;
    CoarseLattice lattice;
};

// One row per CP: Dirichlet for vertex-layout boundary CPs, otherwise
// u_center - sum a_m u_ref = (affine trace response, cell-edge CPs only).
inline GlobalCoarseSystem assemble_global(const CoarseLattice& lat, const OperatorSet& set,
                                          const BoundarySpec& bc) {
    GlobalCoarseSystem gcs{SparseSystem(lat.total()), lat};
    const bool vertex = lat.grid.layout == Layout::VertexCentered;
    for (int cp = 0; cp < lat.total(); ++cp) {
        if (vertex && lat.on_lattice_edge(cp)) {
            const auto [ix, iy] = lat.cp_point(cp);
            gcs.sys.set_dirichlet(cp, bc_value_at_point(bc, lat.grid, ix, iy));
            continue;
        }
        const auto& op = set.ops[cp];
        if (!op)
            throw InvalidParameterError("assemble_global: missing local operator for CP " +
                                        std::to_string(cp));
        gcs.sys.add(cp, cp, 1.0);
        for (std::size_t m = 0; m < op->ref_cps.size(); ++m)
            gcs.sys.add(cp, op->ref_cps[m], -op->data->a_row[m]);
        for (std::size_t q = 0; q < op->data->wall_samples.size(); ++q) {
            const auto ws = op->wall_sample_abs(static_cast<int>(q));
            gcs.sys.add_rhs(cp, op->data->wall_a_row[q] * bc.value(ws.side, ws.along));
        }
    }
    gcs.sys.finalize();
    return gcs;
}

inline std::vector<double> solve_global(const GlobalCoarseSystem& gcs) {
    return solve_sparse(gcs.sys);
}

// --- fine-scale interpolation ----------------------------------------------

// Reconstruct the full grid from the coarse solution: each point is owned by
// the local domain of its nearest operator-bearing CP (ties toward the lower
// CP index); CP positions take the coarse value itself, and vertex-layout
// boundary points take the trace.
inline TemperatureField interpolate_fine(const CoarseLattice& lat, const OperatorSet& set,
                                         const std::vector<double>& ug, const BoundarySpec& bc) {
    const GridSpec& grid = lat.grid;
    const int p = grid.points_per_side();
    const bool vertex = grid.layout == Layout::VertexCentered;
    TemperatureField out(grid);

    const int lo = (vertex && lat.per_side > 1) ? 1 : 0;
    const int hi = (vertex && lat.per_side > 1) ? lat.per_side - 2 : lat.per_side - 1;
    auto owner_coord = [&](int i) {
        // nearest lattice coordinate, half-way ties toward the lower index
        int a = (2 * i + lat.r) / (2 * lat.r);
        if ((2 * i + lat.r) % (2 * lat.r) == 0) --a; // exact tie
        return std::clamp(a, lo, hi);
    };

    for (int iy = 0; iy < p; ++iy) {
        for (int ix = 0; ix < p; ++ix) {
            if (vertex && (ix == 0 || iy == 0 || ix == p - 1 || iy == p - 1)) {
                out.u(ix, iy) = bc_value_at_point(bc, grid, ix, iy);
                continue;
            }
            if (ix % lat.r == 0 && iy % lat.r == 0) {
                out.u(ix, iy) = ug[lat.cp_id(ix / lat.r, iy / lat.r)];
                continue;
            }
            const int cp = lat.cp_id(owner_coord(ix), owner_coord(iy));
            const auto& op = set.ops[cp];
            if (!op || !op->window.contains(ix, iy))
                throw InternalError("interpolate_fine: grid point (" + std::to_string(ix) + "," +
                                    std::to_string(iy) + ") not covered by its owner's window");
            const auto& data = *op->data;
            const int pt = (iy - op->window.j0) * op->window.nx() + (ix - op->window.i0);
            double acc = 0.0;
            for (int m = 0; m < data.n_ref; ++m) acc += data.nl_at(pt, m) * ug[op->ref_cps[m]];
            for (std::size_t q = 0; q < data.wall_samples.size(); ++q) {
                const auto ws = op->wall_sample_abs(static_cast<int>(q));
                acc += data.wall_nl_at(pt, static_cast<int>(q)) * bc.value(ws.side, ws.along);
            }
            out.u(ix, iy) = acc;
        }
    }
    return out;
}

// --- end-to-end driver -------------------------------------------------------

struct SdmResult {
    CoarseLattice lattice;
    OperatorSet operators;
    std::vector<double> ug;
    TemperatureField fine;
    TimingReport timing;
};

inline SdmResult solve_sdm(const GridSpec& grid, const ConductivityField& field,
                           const BoundarySpec& bc, int r, RefPattern pattern = RefPattern::Ring8,
                           bool oversample = true, bool sequential = true) {
    SdmResult res;
    res.timing.method = Method::SDM;
    res.timing.parallel_local = !sequential;
    res.lattice = build_lattice(grid, r, pattern);
    if (grid.layout == Layout::VertexCentered && res.lattice.per_side < 3)
        throw InvalidParameterError("solve_sdm: lattice needs at least one interior CP");
    res.operators = timed(res.timing, Phase::Local, [&] {
        return build_operators(grid, field, res.lattice, oversample, sequential);
    });
    res.timing.local_solve_count = res.operators.n_local_analyses;
    const GlobalCoarseSystem gcs = timed(res.timing, Phase::Global, [&] {
        GlobalCoarseSystem built = assemble_global(res.lattice, res.operators, bc);
        res.ug = solve_global(built);
        return built;
    });
    res.timing.unknowns = gcs.sys.n();
    res.timing.bandwidth = gcs.sys.bandwidth();
    res.fine = timed(res.timing, Phase::Recovery, [&] {
        return interpolate_fine(res.lattice, res.operators, res.ug, bc);
    });
    return res;
}

} // namespace heat2d

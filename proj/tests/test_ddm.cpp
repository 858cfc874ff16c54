#include <gtest/gtest.h>

#include <cmath>

#include "heat2d/ddm.hpp"
#include "heat2d/fdm.hpp"
#include "support/dense_oracle.hpp"

using namespace heat2d;

namespace {

double max_abs_diff(const TemperatureField& a, const TemperatureField& b) {
    double worst = 0.0;
    const int p = a.grid.points_per_side();
    for (int iy = 0; iy < p; ++iy)
        for (int ix = 0; ix < p; ++ix)
            worst = std::max(worst, std::abs(a.u(ix, iy) - b.u(ix, iy)));
    return worst;
}

} // namespace

TEST(DdmCounts, PureArithmetic) {
    EXPECT_EQ(ddm_outer_count(3), 8);
    EXPECT_EQ(ddm_inner_count(3), 4);
    EXPECT_EQ(ddm_outer_count(4), 12);
    EXPECT_EQ(ddm_inner_count(4), 8);
    EXPECT_EQ(ddm_deleted_per_window(4), 1);
    EXPECT_EQ(ddm_local_points(4), 25); // (m+1)^2
    EXPECT_EQ(ddm_windows_per_side(97, 4), 24);
    // 24^2 windows each deleting one point
    EXPECT_EQ(ddm_reduced_points(97, 4), 97 * 97 - 576);
}

TEST(DdmPartition, TilingAndCounts) {
    const GridSpec grid(Layout::CellCentered, 98); // 97 points per side
    const auto part = partition(grid, 4);
    EXPECT_EQ(part.per_side, 24);
    EXPECT_EQ(part.windows.size(), 576u);
    // edge-to-edge tiling with shared grid lines
    const auto& first = part.windows[0];
    const auto& second = part.windows[1];
    EXPECT_EQ(first.i1, second.i0);
    EXPECT_EQ(part.windows.back().i1, 96);

    const auto op = local_reduce(grid, gen_random_conductivity(97, 0.01, 1.0, 3),
                                 part.windows[30]);
    EXPECT_EQ(op.outer_ids.size(), 12u);
    EXPECT_EQ(op.inner_ids.size(), 8u);
}

TEST(DdmPartition, RejectsDegenerateAndNonDivisible) {
    const GridSpec grid(Layout::VertexCentered, 65);
    EXPECT_THROW(partition(grid, 2), InvalidParameterError);
    try {
        partition(grid, 5);
        FAIL() << "expected InvalidParameterError";
    } catch (const InvalidParameterError& e) {
        EXPECT_NE(std::string(e.what()).find("admissible"), std::string::npos);
    }
}

TEST(DdmLocalReduce, ConstantReproduction) {
    const GridSpec grid(Layout::CellCentered, 14); // 13 points, 12 intervals
    const auto field = gen_random_conductivity(13, 0.01, 1.0, 17);
    const auto part = partition(grid, 4);
    for (const auto& w : {part.windows[0], part.windows[4]}) {
        const auto op = local_reduce(grid, field, w);
        for (std::size_t i = 0; i < op.inner_ids.size(); ++i)
            EXPECT_NEAR(op.row_sum(static_cast<int>(i)), 1.0, 1e-9);
    }
}

// Brute force over the eight unit outer traces on a homogeneous m=3 window.
TEST(DdmLocalReduce, HomogeneousM3MatchesBruteForce) {
    const GridSpec grid(Layout::VertexCentered, 13);
    const auto field = make_uniform_field(12);
    const SubdomainWindow w{3, 6, 6, 9};
    const auto op = local_reduce(grid, field, w);
    ASSERT_EQ(op.outer_ids.size(), 8u);
    ASSERT_EQ(op.inner_ids.size(), 4u);

    for (std::size_t j = 0; j < op.outer_ids.size(); ++j) {
        const auto [ux, uy] = op.outer_ids[j];
        auto unit_trace = [&](int gx, int gy) {
            return (gx == ux && gy == uy) ? 1.0 : 0.0;
        };
        const auto ref = oracle::dense_window_solve(grid, field, w, unit_trace);
        for (std::size_t i = 0; i < op.inner_ids.size(); ++i) {
            const auto [ix, iy] = op.inner_ids[i];
            EXPECT_NEAR(op.a_at(static_cast<int>(i), static_cast<int>(j)),
                        ref(ix - w.i0, iy - w.j0), 1e-12);
        }
    }

    // symmetry of the homogeneous window: each inner corner sees the same
    // weight from its two adjacent outer mid-side points
    EXPECT_NEAR(op.a_at(0, 0), op.a_at(0, 7), 1e-12);
}

TEST(DdmLocalReduce, WeightsWithinUnitInterval) {
    const GridSpec grid(Layout::CellCentered, 26); // 25 points, 24 intervals
    const auto field = gen_random_conductivity(25, 0.01, 1.0, 23);
    const auto part = partition(grid, 6);
    const auto op = local_reduce(grid, field, part.windows[7]);
    for (double v : op.a) {
        EXPECT_GE(v, -1e-12);
        EXPECT_LE(v, 1.0 + 1e-12);
    }
}

TEST(DdmGlobal, UnknownCountMatchesDeletionFormula) {
    const GridSpec grid(Layout::CellCentered, 98);
    const auto field = gen_random_conductivity(97, 0.01, 1.0, 5);
    const auto bc = make_bc_corners(0, 1, 0, 1, grid);
    const auto part = partition(grid, 4);
    const auto ops = build_ddm_operators(grid, field, part);
    const auto g = assemble_global_ddm(part, ops, field, bc);
    EXPECT_EQ(g.sys.n(), ddm_reduced_points(97, 4));
    EXPECT_EQ(g.sys.n(), 97 * 97 - 576);
}

TEST(DdmGlobal, ZeroAndConstantBc) {
    const GridSpec grid(Layout::CellCentered, 14);
    const auto field = gen_random_conductivity(13, 0.01, 1.0, 29);
    const auto zero = solve_ddm(grid, field, make_bc_constant(0.0, grid), 4);
    for (double v : zero.field.u) EXPECT_NEAR(v, 0.0, 1e-12);
    const auto constant = solve_ddm(grid, field, make_bc_constant(2.5, grid), 4);
    for (double v : constant.field.u) EXPECT_NEAR(v, 2.5, 1e-10);
}

// The module's central correctness property: the reduced system reproduces
// the direct FDM solution to solver accuracy.
TEST(DdmGlobal, MatchesDirectFdmVertex) {
    const GridSpec grid(Layout::VertexCentered, 17);
    const auto field = make_uniform_field(16);
    const auto bc = make_bc_sine(grid);
    const auto fdm = solve_direct(grid, field, bc);
    for (int m : {4, 8}) {
        const auto res = solve_ddm(grid, field, bc, m);
        EXPECT_LE(max_abs_diff(res.field, fdm), 1e-10) << "m=" << m;
    }
}

TEST(DdmGlobal, MatchesDirectFdmHeterogeneous) {
    const GridSpec grid(Layout::CellCentered, 26); // 25 points, 24 intervals
    const auto field = gen_random_conductivity(25, 0.01, 1.0, 31);
    const auto bc = make_bc_corners(0, 1, 0.5, -0.25, grid);
    const auto fdm = solve_direct(grid, field, bc);
    for (int m : {3, 4, 6, 8, 12}) {
        const auto res = solve_ddm(grid, field, bc, m);
        EXPECT_LE(max_abs_diff(res.field, fdm), 1e-8 * bc.data_range()) << "m=" << m;
    }
}

TEST(DdmRecovery, DeletedPointEqualsFdmValue) {
    const GridSpec grid(Layout::CellCentered, 14); // m=4: one deleted point/window
    const auto field = gen_random_conductivity(13, 0.01, 1.0, 37);
    const auto bc = make_bc_corners(0, 1, 0, 1, grid);
    const auto fdm = solve_direct(grid, field, bc);
    const auto res = solve_ddm(grid, field, bc, 4);
    for (const auto& w : res.partition.windows) {
        const int dx = w.i0 + 2;
        const int dy = w.j0 + 2; // the single deleted point
        EXPECT_NEAR(res.field.u(dx, dy), fdm.u(dx, dy), 1e-8);
    }
}

TEST(DdmMemoization, HomogeneousCollapsesToOneAnalysis) {
    const GridSpec grid(Layout::VertexCentered, 33);
    const auto field = make_uniform_field(32);
    const auto part = partition(grid, 4);
    const auto ops = build_ddm_operators(grid, field, part);
    EXPECT_EQ(ops.ops.size(), 64u);
    EXPECT_EQ(ops.n_local_analyses, 1);
}

TEST(DdmParallel, MatchesSequential) {
    const GridSpec grid(Layout::CellCentered, 26);
    const auto field = gen_random_conductivity(25, 0.01, 1.0, 41);
    const auto bc = make_bc_corners(0, 1, 0, 1, grid);
    const auto seq = solve_ddm(grid, field, bc, 4, true);
    const auto par = solve_ddm(grid, field, bc, 4, false);
    EXPECT_LE(max_abs_diff(seq.field, par.field), 1e-14);
}

TEST(DdmMaxPrinciple, FieldWithinBcRange) {
    const GridSpec grid(Layout::CellCentered, 26);
    const auto field = gen_random_conductivity(25, 0.01, 1.0, 43);
    const auto bc = make_bc_corners(0, 1, 0.25, -0.5, grid);
    const auto res = solve_ddm(grid, field, bc, 6);
    for (double v : res.field.u) {
        EXPECT_GE(v, bc.data_min() - 1e-10);
        EXPECT_LE(v, bc.data_max() + 1e-10);
    }
}

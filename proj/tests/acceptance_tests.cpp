// Acceptance suite: one test per criterion of the benchmark contract, each
// printing a [PASS]/[FAIL] line. Shared solves are computed once; the whole
// suite covers the homogeneous convergence family (h = 1/8..1/64) and the
// desk-scale heterogeneous comparison (97x97 cells, corner data 0/1).

#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "heat2d/ddm.hpp"
#include "heat2d/fdm.hpp"
#include "heat2d/metrics.hpp"
#include "heat2d/sdm.hpp"

using namespace heat2d;

namespace {

std::vector<double> full_samples(const TemperatureField& f) {
    return std::vector<double>(f.u.begin(), f.u.end());
}

std::vector<double> true_samples(const GridSpec& grid) {
    std::vector<double> out;
    const int p = grid.points_per_side();
    for (int iy = 0; iy < p; ++iy)
        for (int ix = 0; ix < p; ++ix)
            out.push_back(true_solution(grid.coord(ix), grid.coord(iy)));
    return out;
}

std::vector<double> at_cps(const CoarseLattice& lat, const TemperatureField& f) {
    std::vector<double> out;
    for (int cp = 0; cp < lat.total(); ++cp) {
        const auto [ix, iy] = lat.cp_point(cp);
        out.push_back(f.u(ix, iy));
    }
    return out;
}

std::vector<double> true_at_cps(const CoarseLattice& lat) {
    std::vector<double> out;
    for (int cp = 0; cp < lat.total(); ++cp) {
        const auto [ix, iy] = lat.cp_point(cp);
        out.push_back(true_solution(lat.grid.coord(ix), lat.grid.coord(iy)));
    }
    return out;
}

double max_abs_diff(const TemperatureField& a, const TemperatureField& b) {
    double worst = 0.0;
    const int p = a.grid.points_per_side();
    for (int iy = 0; iy < p; ++iy)
        for (int ix = 0; ix < p; ++ix)
            worst = std::max(worst, std::abs(a.u(ix, iy) - b.u(ix, iy)));
    return worst;
}

struct NamedField {
    std::string name;
    const TemperatureField* field;
    const BoundarySpec* bc;
    bool section4; // participates in the midline-symmetry check
};

// Everything the criteria share, computed once.
struct SuiteData {
    // homogeneous benchmark family
    GridSpec fine_grid{Layout::VertexCentered, 65};
    ConductivityField fine_field = make_uniform_field(64);
    BoundarySpec fine_bc = make_bc_sine(fine_grid);
    std::map<int, TemperatureField> fdm; // division -> solution
    std::map<int, double> fdm_rmse;      // division -> RMSE vs true (own grid)
    std::map<int, SdmResult> sdm_plain;  // r -> result (h = 1/64)
    std::map<int, SdmResult> sdm_over;
    std::map<int, DdmResult> ddm_hom;    // m -> result (h = 1/64)

    // heterogeneous desk case: 97x97 cells (96 lattice intervals per side)
    GridSpec het_grid{Layout::CellCentered, 98};
    ConductivityField het_field = gen_random_conductivity(97, 0.01, 1.00, 42);
    BoundarySpec het_bc = make_bc_corners(0, 1, 0, 1, het_grid);
    TemperatureField het_fdm;
    std::map<int, SdmResult> het_sdm; // r -> oversampled result
    std::map<int, DdmResult> het_ddm; // m -> result

    // constant-boundary solves, one per method (cell layout)
    BoundarySpec const_bc = make_bc_constant(0.7, het_grid);
    TemperatureField const_fdm;
    SdmResult const_sdm;
    DdmResult const_ddm;

    // degenerate reduction case
    GridSpec small_grid{Layout::VertexCentered, 17};
    ConductivityField small_field = make_uniform_field(16);
    BoundarySpec small_bc = make_bc_sine(small_grid);
    TemperatureField small_fdm;
    SdmResult small_sdm_r1;

    std::vector<NamedField> scans;

    SuiteData() {
        for (int div : {8, 16, 32, 64}) {
            const GridSpec grid(Layout::VertexCentered, div + 1);
            const auto bc = make_bc_sine(grid);
            fdm.emplace(div, solve_direct(grid, make_uniform_field(div), bc));
            fdm_rmse[div] = rmse(full_samples(fdm.at(div)), true_samples(grid));
        }
        for (int r : {8, 4, 2}) {
            sdm_plain.emplace(r, solve_sdm(fine_grid, fine_field, fine_bc, r,
                                           RefPattern::Ring8, /*oversample=*/false));
            sdm_over.emplace(r, solve_sdm(fine_grid, fine_field, fine_bc, r,
                                          RefPattern::Ring8, /*oversample=*/true));
        }
        for (int m : {4, 8})
            ddm_hom.emplace(m, solve_ddm(fine_grid, fine_field, fine_bc, m));

        het_fdm = solve_direct(het_grid, het_field, het_bc);
        for (int r : {4, 6, 12})
            het_sdm.emplace(r, solve_sdm(het_grid, het_field, het_bc, r, RefPattern::Ring8,
                                         /*oversample=*/true, /*sequential=*/true));
        for (int m : {3, 4, 6, 8, 12})
            het_ddm.emplace(m, solve_ddm(het_grid, het_field, het_bc, m,
                                         /*sequential=*/true));

        const_fdm = solve_direct(het_grid, het_field, const_bc);
        const_sdm = solve_sdm(het_grid, het_field, const_bc, 4);
        const_ddm = solve_ddm(het_grid, het_field, const_bc, 4);

        small_fdm = solve_direct(small_grid, small_field, small_bc);
        small_sdm_r1 = solve_sdm(small_grid, small_field, small_bc, 1, RefPattern::Ring8,
                                 /*oversample=*/false);

        for (const auto& [div, f] : fdm)
            scans.push_back({"fdm_h1over" + std::to_string(div), &f, &fine_bc, true});
        for (const auto& [r, res] : sdm_plain)
            scans.push_back({"sdm_plain_r" + std::to_string(r), &res.fine, &fine_bc, true});
        for (const auto& [r, res] : sdm_over)
            scans.push_back({"sdm_over_r" + std::to_string(r), &res.fine, &fine_bc, true});
        for (const auto& [m, res] : ddm_hom)
            scans.push_back({"ddm_hom_m" + std::to_string(m), &res.field, &fine_bc, true});
        scans.push_back({"het_fdm", &het_fdm, &het_bc, false});
        for (const auto& [r, res] : het_sdm)
            scans.push_back({"het_sdm_r" + std::to_string(r), &res.fine, &het_bc, false});
        for (const auto& [m, res] : het_ddm)
            scans.push_back({"het_ddm_m" + std::to_string(m), &res.field, &het_bc, false});
        scans.push_back({"const_fdm", &const_fdm, &const_bc, false});
        scans.push_back({"const_sdm", &const_sdm.fine, &const_bc, false});
        scans.push_back({"const_ddm", &const_ddm.field, &const_bc, false});
        scans.push_back({"small_fdm", &small_fdm, &small_bc, true});
        scans.push_back({"small_sdm_r1", &small_sdm_r1.fine, &small_bc, true});
    }
};

const SuiteData& suite() {
    static SuiteData data;
    return data;
}

void report_line(int id, const std::string& text) {
    std::printf("[%s] criterion %2d: %s\n",
                testing::Test::HasFatalFailure() || testing::Test::HasNonfatalFailure()
                    ? "FAIL"
                    : "PASS",
                id, text.c_str());
    std::fflush(stdout);
}

// strict phase comparison; falls back to wall time when the coarse CPU
// accounting of the host quantizes both phases to the same value
bool phase_exceeds(const TimingReport& t, Phase a, Phase b) {
    if (t.cpu(a) != t.cpu(b)) return t.cpu(a) > t.cpu(b);
    return t.wall(a) > t.wall(b);
}

} // namespace

TEST(Acceptance, Criterion01FdmSecondOrderConvergence) {
    const auto& s = suite();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int div : {8, 16, 32, 64}) {
        const double x = std::log(1.0 / div);
        const double y = std::log(s.fdm_rmse.at(div));
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double slope = (4 * sxy - sx * sy) / (4 * sxx - sx * sx);
    EXPECT_GE(slope, 1.8);
    EXPECT_LE(slope, 2.2);
    report_line(1, "FDM log-log RMSE slope " + std::to_string(slope) + " in [1.8, 2.2]");
}

TEST(Acceptance, Criterion02TrueSolutionAnchor) {
    const auto& s = suite();
    const double center = s.fdm.at(64).u(32, 32); // (0.5, 0.5)
    EXPECT_NEAR(center, 0.199268, 5e-4);
    report_line(2, "FDM(h=1/64) at (0.5,0.5) = " + std::to_string(center) +
                       " vs 0.199268 within 5e-4");
}

TEST(Acceptance, Criterion03SdmDominanceAtMatchingDivision) {
    const auto& s = suite();
    std::string detail;
    for (const auto& [div, r] : std::vector<std::pair<int, int>>{{8, 8}, {16, 4}, {32, 2}}) {
        const auto& res = s.sdm_plain.at(r);
        const double sdm_rmse = rmse(res.ug, true_at_cps(res.lattice));
        EXPECT_LT(sdm_rmse, s.fdm_rmse.at(div))
            << "h_SDM = 1/" << div << " (plain local analysis)";
        const auto& over = s.sdm_over.at(r);
        const double over_rmse = rmse(over.ug, true_at_cps(over.lattice));
        detail += " 1/" + std::to_string(div) + ": plain " +
                  std::to_string(sdm_rmse / s.fdm_rmse.at(div)) + "x, oversampled " +
                  std::to_string(over_rmse / s.fdm_rmse.at(div)) + "x;";
    }
    report_line(3, "RMSE_SDM/RMSE_FDM at matching division (<1 required, plain asserted):" +
                       detail);
}

TEST(Acceptance, Criterion04SdmConvergesToFinestFdm) {
    const auto& s = suite();
    const auto& res = s.sdm_plain.at(2); // h_SDM = 1/32
    const double sdm_rmse = rmse(res.ug, true_at_cps(res.lattice));
    const double bound = 1.10 * s.fdm_rmse.at(64);
    EXPECT_LE(sdm_rmse, bound);
    report_line(4, "RMSE_SDM(h_SDM=1/32) = " + std::to_string(sdm_rmse) + " <= 1.10 x " +
                       "RMSE_FDM(h=1/64) = " + std::to_string(bound));
}

TEST(Acceptance, Criterion05DdmEquivalenceOracle) {
    const auto& s = suite();
    double worst_hom = 0.0;
    for (const auto& [m, res] : s.ddm_hom)
        worst_hom = std::max(worst_hom, max_abs_diff(res.field, s.fdm.at(64)));
    EXPECT_LE(worst_hom, 1e-8 * s.fine_bc.data_range());

    double worst_het = 0.0;
    for (const auto& [m, res] : s.het_ddm)
        worst_het = std::max(worst_het, max_abs_diff(res.field, s.het_fdm));
    EXPECT_LE(worst_het, 1e-8 * s.het_bc.data_range());

    report_line(5, "max |u_DDM - u_FDM|: homogeneous m={4,8}: " + std::to_string(worst_hom) +
                       ", heterogeneous m={3,4,6,8,12}: " + std::to_string(worst_het) +
                       " (<= 1e-8 x BC range)");
}

TEST(Acceptance, Criterion06HeterogeneousSdmAccuracy) {
    const auto& s = suite();
    std::string detail;
    for (int r : {4, 6, 12}) {
        const auto& res = s.het_sdm.at(r);
        const double cp_rmse = rmse(res.ug, at_cps(res.lattice, s.het_fdm));
        EXPECT_LT(cp_rmse, 1e-3) << "r=" << r;
        detail += " r=" + std::to_string(r) + ": " + std::to_string(cp_rmse) + ";";
    }
    report_line(6, "heterogeneous CP-position RMSE_SDM vs FDM (< 1e-3):" + detail);
}

TEST(Acceptance, Criterion07PartitionOfUnity) {
    const auto& s = suite();
    long checked_ops = 0;
    double worst = 0.0;

    auto check_sdm_ops = [&](const OperatorSet& set) {
        for (const auto& op : set.ops) {
            if (!op) continue;
            ++checked_ops;
            worst = std::max(worst, std::abs(op->constant_response() - 1.0));
            const auto& d = *op->data;
            const int npt = d.nx() * d.ny();
            for (int pt = 0; pt < npt; ++pt) {
                double row = 0.0;
                for (int m = 0; m < d.n_ref; ++m) row += d.nl_at(pt, m);
                for (std::size_t q = 0; q < d.wall_samples.size(); ++q)
                    row += d.wall_nl_at(pt, static_cast<int>(q));
                worst = std::max(worst, std::abs(row - 1.0));
            }
        }
    };
    for (const auto& [r, res] : s.sdm_plain) check_sdm_ops(res.operators);
    for (const auto& [r, res] : s.sdm_over) check_sdm_ops(res.operators);
    for (const auto& [r, res] : s.het_sdm) check_sdm_ops(res.operators);

    long checked_ddm_rows = 0;
    for (const auto* set : {&s.ddm_hom, &s.het_ddm})
        for (const auto& [m, res] : *set)
            for (const auto& op : res.operators.ops)
                for (std::size_t i = 0; i < op.inner_ids.size(); ++i) {
                    ++checked_ddm_rows;
                    worst = std::max(worst,
                                     std::abs(op.row_sum(static_cast<int>(i)) - 1.0));
                }
    EXPECT_LE(worst, 1e-9);

    double worst_const = 0.0;
    for (const auto* f : {&s.const_fdm, &s.const_sdm.fine, &s.const_ddm.field})
        for (double v : f->u) worst_const = std::max(worst_const, std::abs(v - 0.7));
    EXPECT_LE(worst_const, 1e-10);

    report_line(7, "row sums within 1e-9 over " + std::to_string(checked_ops) +
                       " local operators and " + std::to_string(checked_ddm_rows) +
                       " reduction rows (worst " + std::to_string(worst) +
                       "); constant-BC defect " + std::to_string(worst_const) + " <= 1e-10");
}

TEST(Acceptance, Criterion08DegenerateReduction) {
    const auto& s = suite();
    const double diff = max_abs_diff(s.small_sdm_r1.fine, s.small_fdm);
    EXPECT_LE(diff, 1e-10);
    report_line(8, "SDM r=1 plain vs direct FDM on 17x17: max diff " + std::to_string(diff) +
                       " <= 1e-10");
}

TEST(Acceptance, Criterion09MaxPrincipleAndSymmetry) {
    const auto& s = suite();
    double worst_overshoot = 0.0;
    double worst_symmetry = 0.0;
    for (const auto& scan : s.scans) {
        const double lo = scan.bc->data_min();
        const double hi = scan.bc->data_max();
        for (double v : scan.field->u)
            worst_overshoot = std::max(worst_overshoot, std::max(lo - v, v - hi));
        if (scan.section4) {
            const int p = scan.field->grid.points_per_side();
            for (int iy = 0; iy < p; ++iy)
                for (int ix = 0; ix < p; ++ix)
                    worst_symmetry =
                        std::max(worst_symmetry, std::abs(scan.field->u(ix, iy) -
                                                          scan.field->u(p - 1 - ix, iy)));
        }
    }
    EXPECT_LE(worst_overshoot, 1e-10);
    EXPECT_LE(worst_symmetry, 1e-10);
    report_line(9, "max-principle overshoot " + std::to_string(worst_overshoot) +
                       " and midline symmetry defect " + std::to_string(worst_symmetry) +
                       " over " + std::to_string(s.scans.size()) + " solves (<= 1e-10)");
}

TEST(Acceptance, Criterion10CountArithmeticAndPhaseBalance) {
    const auto& s = suite();
    // lattice and window count identities as pure arithmetic
    EXPECT_EQ(sdm_cp_per_side(65, 2), 33);
    EXPECT_EQ(sdm_total_cps(65, 2), 1089);
    EXPECT_EQ(sdm_cp_per_side(97, 4), 25);
    EXPECT_EQ(sdm_total_cps(97, 4), 625);
    EXPECT_EQ(sdm_lplus_points(4), 289);
    EXPECT_EQ(ddm_outer_count(4), 12);
    EXPECT_EQ(ddm_inner_count(4), 8);
    EXPECT_EQ(ddm_outer_count(3), 8);
    EXPECT_EQ(ddm_inner_count(3), 4);
    EXPECT_EQ(ddm_local_points(4), 25);
    EXPECT_EQ(ddm_deleted_per_window(4), 1);
    EXPECT_EQ(ddm_reduced_points(97, 4), 97 * 97 - 576);
    // and as realized by the built structures
    EXPECT_EQ(s.het_sdm.at(4).lattice.total(), 625);
    EXPECT_EQ(s.het_ddm.at(4).global.sys.n(), 97 * 97 - 576);

    // qualitative phase findings at desk scale (absolute times reported only)
    const auto& sdm_t = s.het_sdm.at(12).timing;
    const auto& ddm_t = s.het_ddm.at(3).timing;
    EXPECT_TRUE(phase_exceeds(sdm_t, Phase::Local, Phase::Global))
        << "SDM r=12: local " << sdm_t.cpu(Phase::Local) << "s vs global "
        << sdm_t.cpu(Phase::Global) << "s";
    EXPECT_TRUE(phase_exceeds(ddm_t, Phase::Global, Phase::Local))
        << "DDM m=3: global " << ddm_t.cpu(Phase::Global) << "s vs local "
        << ddm_t.cpu(Phase::Local) << "s";

    std::printf("    cpu report (not asserted): SDM r=12 local %.3fs global %.3fs | "
                "DDM m=3 local %.3fs global %.3fs\n",
                sdm_t.cpu(Phase::Local), sdm_t.cpu(Phase::Global),
                ddm_t.cpu(Phase::Local), ddm_t.cpu(Phase::Global));
    report_line(10, "count identities hold; SDM r=12 local > global and DDM m=3 "
                    "global > local");
}

// Accuracy-ceiling companion to criteria 3/4: over a common point set the SDM
// never beats the fine solver it is built from by more than subset noise.
TEST(Acceptance, InvariantSdmAccuracyCeiling) {
    const auto& s = suite();
    for (int r : {8, 4, 2}) {
        const auto& res = s.sdm_plain.at(r);
        const double sdm_rmse = rmse(res.ug, true_at_cps(res.lattice));
        const double fdm_at_cps =
            rmse(at_cps(res.lattice, s.fdm.at(64)), true_at_cps(res.lattice));
        EXPECT_GE(sdm_rmse, 0.9 * fdm_at_cps) << "r=" << r;
    }
    report_line(0, "invariant: RMSE_SDM >= 0.9 x RMSE_FDM(finest) at shared CP positions");
}

int main(int argc, char** argv) {
    testing::InitGoogleTest(&argc, argv);
    return RUN_ALL_TESTS();
}

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "heat2d/experiments.hpp"

using namespace heat2d;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
    const auto dir = fs::temp_directory_path() / "heat2d_exp_tests" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

// csv with the cpu_* columns blanked, for stability comparisons
std::string csv_without_timings(const fs::path& path) {
    std::ifstream in(path);
    std::stringstream out;
    std::string line;
    while (std::getline(in, line)) {
        std::stringstream row(line);
        std::string cell;
        int col = 0;
        while (std::getline(row, cell, ',')) {
            if (col >= 8 && col <= 10) cell = "";
            out << (col ? "," : "") << cell;
            ++col;
        }
        out << '\n';
    }
    return out.str();
}

const ReportRow* find_row(const std::vector<ReportRow>& rows, const std::string& method,
                          double spacing, const std::string& variant = "") {
    for (const auto& r : rows)
        if (r.method == method && r.spacing_ratio == spacing &&
            (variant.empty() || r.variant == variant))
            return &r;
    return nullptr;
}

} // namespace

TEST(ConvergenceRun, ProducesRowsSlopesAndFiles) {
    RunConfig cfg;
    cfg.experiment = Experiment::Convergence;
    cfg.fdm_divisions = {8, 16, 32};
    cfg.sdm_r = {4};
    cfg.ddm_m = {8};
    cfg.out_dir = fresh_dir("conv");
    const auto result = run_convergence(cfg);

    EXPECT_TRUE(result.warnings.empty());
    ASSERT_NE(find_row(result.rows, "FDM", 8), nullptr);
    ASSERT_NE(find_row(result.rows, "SDM", 4, "oversampled"), nullptr);
    ASSERT_NE(find_row(result.rows, "SDM", 4, "plain"), nullptr);
    ASSERT_NE(find_row(result.rows, "DDM", 8), nullptr);

    const double slope = result.report["slopes"]["FDM"].get<double>();
    EXPECT_GT(slope, 1.8);
    EXPECT_LT(slope, 2.2);

    EXPECT_TRUE(fs::exists(result.csv_path));
    EXPECT_TRUE(fs::exists(result.json_path));
    EXPECT_TRUE(fs::exists(cfg.out_dir / "temps_fdm_h32.txt"));
    EXPECT_TRUE(fs::exists(cfg.out_dir / "temps_sdm_r4_plain.txt"));
    EXPECT_TRUE(fs::exists(cfg.out_dir / "temps_ddm_m8.txt"));

    // every recorded solve satisfied the max principle and midline symmetry
    for (const auto& check : result.report["checks"]) {
        EXPECT_TRUE(check["max_principle_ok"].get<bool>());
        EXPECT_LT(check["symmetry_defect"].get<double>(), 1e-10);
    }
}

TEST(ConvergenceRun, SkipsNonDivisibleEntriesAndContinues) {
    RunConfig cfg;
    cfg.experiment = Experiment::Convergence;
    cfg.fdm_divisions = {8, 16};
    cfg.sdm_r = {5, 4}; // 5 does not divide 16
    cfg.ddm_m = {7, 8};
    cfg.out_dir = fresh_dir("conv_skip");
    const auto result = run_convergence(cfg);
    EXPECT_EQ(result.warnings.size(), 2u);
    EXPECT_EQ(find_row(result.rows, "SDM", 5), nullptr);
    ASSERT_NE(find_row(result.rows, "SDM", 4, "plain"), nullptr);
    EXPECT_EQ(find_row(result.rows, "DDM", 7), nullptr);
    ASSERT_NE(find_row(result.rows, "DDM", 8), nullptr);
}

TEST(HeterogeneousRun, SmallCaseReportsAndChecks) {
    RunConfig cfg;
    cfg.experiment = Experiment::Heterogeneous;
    cfg.n_grid = 26; // 25 cells, 24 lattice intervals
    cfg.sdm_r = {4};
    cfg.ddm_m = {4};
    cfg.seed = 11;
    cfg.out_dir = fresh_dir("het");
    const auto result = run_heterogeneous(cfg);

    const auto* sdm = find_row(result.rows, "SDM", 4);
    ASSERT_NE(sdm, nullptr);
    ASSERT_TRUE(sdm->rmse_vs_fdm_cp.has_value());
    ASSERT_TRUE(sdm->rmse_vs_fdm_full.has_value());
    EXPECT_LT(*sdm->rmse_vs_fdm_cp, 1e-2);

    const auto* ddm = find_row(result.rows, "DDM", 4);
    ASSERT_NE(ddm, nullptr);
    EXPECT_LT(*ddm->rmse_vs_fdm_full, 1e-10);

    for (const auto& check : result.report["checks"])
        EXPECT_TRUE(check["max_principle_ok"].get<bool>());

    // reconstructibility: the resolved config and field metadata are embedded
    EXPECT_EQ(result.report["config"]["seed"].get<std::uint64_t>(), 11u);
    EXPECT_EQ(result.report["field"]["ncells"].get<int>(), 25);
    EXPECT_TRUE(result.report["field"].contains("file_hash"));
    EXPECT_TRUE(fs::exists(cfg.out_dir / "field.txt"));
}

TEST(HeterogeneousRun, FieldFileMatchesSeedRun) {
    RunConfig gen;
    gen.experiment = Experiment::GenField;
    gen.n_grid = 26;
    gen.seed = 99;
    gen.out_dir = fresh_dir("het_field");
    const auto generated = run_gen_field(gen);

    RunConfig by_file;
    by_file.experiment = Experiment::Heterogeneous;
    by_file.n_grid = 26;
    by_file.sdm_r = {4};
    by_file.ddm_m = {4};
    by_file.field_path = (gen.out_dir / "field.txt").string();
    by_file.out_dir = fresh_dir("het_by_file");

    RunConfig by_seed = by_file;
    by_seed.field_path.clear();
    by_seed.seed = 99;
    by_seed.out_dir = fresh_dir("het_by_seed");

    const auto a = run_heterogeneous(by_file);
    const auto b = run_heterogeneous(by_seed);
    ASSERT_EQ(a.rows.size(), b.rows.size());
    for (std::size_t i = 0; i < a.rows.size(); ++i) {
        EXPECT_EQ(a.rows[i].rmse_vs_fdm_cp, b.rows[i].rmse_vs_fdm_cp);
        EXPECT_EQ(a.rows[i].rmse_vs_fdm_full, b.rows[i].rmse_vs_fdm_full);
    }
}

TEST(HeterogeneousRun, MismatchedFieldFileRejected) {
    RunConfig gen;
    gen.experiment = Experiment::GenField;
    gen.n_grid = 14;
    gen.out_dir = fresh_dir("het_badfield");
    run_gen_field(gen);

    RunConfig cfg;
    cfg.experiment = Experiment::Heterogeneous;
    cfg.n_grid = 26;
    cfg.field_path = (gen.out_dir / "field.txt").string();
    cfg.out_dir = fresh_dir("het_badfield_run");
    EXPECT_THROW(run_heterogeneous(cfg), InvalidParameterError);
}

TEST(CsvOutput, ByteStableAcrossRunsModuloTimings) {
    RunConfig cfg;
    cfg.experiment = Experiment::Heterogeneous;
    cfg.n_grid = 26;
    cfg.sdm_r = {4};
    cfg.ddm_m = {4};
    cfg.out_dir = fresh_dir("stable1");
    const auto a = run_heterogeneous(cfg);
    cfg.out_dir = fresh_dir("stable2");
    const auto b = run_heterogeneous(cfg);
    EXPECT_EQ(csv_without_timings(a.csv_path), csv_without_timings(b.csv_path));
}

TEST(SolveRun, SingleMethodOutputs) {
    RunConfig cfg;
    cfg.experiment = Experiment::Solve;
    cfg.methods = {"sdm"};
    cfg.sdm_r = {1};
    cfg.oversample = false;
    cfg.n_grid = 17;
    cfg.layout = Layout::VertexCentered;
    cfg.bc_spec = "sine";
    cfg.out_dir = fresh_dir("solve");
    const auto result = run_solve(cfg);
    ASSERT_EQ(result.rows.size(), 1u);
    EXPECT_TRUE(fs::exists(cfg.out_dir / "temps.txt"));
    // r=1 plain coincides with the direct stencil; error equals FDM level
    ASSERT_TRUE(result.rows[0].rmse_vs_true.has_value());
    EXPECT_LT(*result.rows[0].rmse_vs_true, 1e-2);
}

TEST(SolveRun, ConfigValidation) {
    RunConfig cfg;
    cfg.experiment = Experiment::Solve;
    cfg.methods = {"fdm"};
    EXPECT_THROW(run_solve(cfg), InvalidParameterError); // missing ngrid

    cfg.n_grid = 17;
    cfg.methods = {"fdm", "sdm"};
    EXPECT_THROW(run_solve(cfg), InvalidParameterError); // one method only

    cfg.methods = {"sdm"};
    cfg.sdm_r = {2, 4};
    EXPECT_THROW(run_solve(cfg), InvalidParameterError); // one spacing only

    cfg.methods = {"nope"};
    cfg.sdm_r.clear();
    EXPECT_THROW(run_solve(cfg), InvalidParameterError);
}

TEST(BcParsing, SpecsAndErrors) {
    const GridSpec grid(Layout::VertexCentered, 9);
    EXPECT_EQ(parse_bc("sine", grid).kind, BcKind::TraceSampled);
    const auto corners = parse_bc("corners:0,1,0.5,-0.25", grid);
    EXPECT_EQ(corners.kind, BcKind::CornerInterpolated);
    EXPECT_DOUBLE_EQ(corners.corners[3], -0.25);
    EXPECT_THROW(parse_bc("corners:1,2", grid), InvalidParameterError);
    EXPECT_THROW(parse_bc("nonsense", grid), InvalidParameterError);
}

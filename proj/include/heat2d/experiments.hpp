#pragma once

// Experiment runner behind the CLI: case setup, the convergence study, the
// heterogeneous three-method comparison, single solves, and field generation.
// Each run writes a CSV table, a JSON report embedding the resolved
// configuration, and the solved temperature fields.

#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "heat2d/boundary.hpp"
#include "heat2d/conductivity.hpp"
#include "heat2d/ddm.hpp"
#include "heat2d/fdm.hpp"
#include "heat2d/io.hpp"
#include "heat2d/metrics.hpp"
#include "heat2d/sdm.hpp"

namespace heat2d {

enum class Experiment { Convergence, Heterogeneous, Solve, GenField };

inline const char* to_string(Experiment e) {
    switch (e) {
        case Experiment::Convergence: return "convergence";
        case Experiment::Heterogeneous: return "heterogeneous";
        case Experiment::Solve: return "solve";
        case Experiment::GenField: return "gen-field";
    }
    return "?";
}

struct RunConfig {
    Experiment experiment = Experiment::Convergence;
    int n_grid = 0;                       // 0: experiment default
    std::optional<Layout> layout;         // default depends on experiment
    std::vector<std::string> methods = {"fdm", "sdm", "ddm"};
    std::vector<int> fdm_divisions;       // h = 1/d per entry
    std::vector<int> sdm_r;
    RefPattern sdm_ref = RefPattern::Ring8;
    bool oversample = true;
    std::vector<int> ddm_m;
    std::string field_path;               // conductivity file; empty: generate from seed
    std::uint64_t seed = 42;
    double k_min = 0.01;
    double k_max = 1.00;
    std::string bc_spec;                  // "sine" | "corners:c00,c10,c01,c11"
    std::filesystem::path out_dir = "out";
    bool sequential_timing = true;
    int repeat = 1;
};

// Fill experiment-dependent defaults. The returned config is what reports echo.
inline RunConfig resolve_config(RunConfig cfg) {
    switch (cfg.experiment) {
        case Experiment::Convergence:
            if (cfg.fdm_divisions.empty()) cfg.fdm_divisions = {8, 16, 32, 64};
            if (cfg.sdm_r.empty()) cfg.sdm_r = {8, 4, 2};
            if (cfg.ddm_m.empty()) cfg.ddm_m = {8, 16, 32};
            if (!cfg.layout) cfg.layout = Layout::VertexCentered;
            if (cfg.n_grid == 0)
                cfg.n_grid = *std::max_element(cfg.fdm_divisions.begin(),
                                               cfg.fdm_divisions.end()) + 1;
            if (cfg.bc_spec.empty()) cfg.bc_spec = "sine";
            break;
        case Experiment::Heterogeneous:
            if (cfg.sdm_r.empty()) cfg.sdm_r = {4, 6, 12};
            if (cfg.ddm_m.empty()) cfg.ddm_m = {3, 4, 6, 8, 12};
            if (!cfg.layout) cfg.layout = Layout::CellCentered;
            if (cfg.n_grid == 0) cfg.n_grid = 98; // 97x97 cells, 96 lattice intervals
            if (cfg.bc_spec.empty()) cfg.bc_spec = "corners:0,1,0,1";
            break;
        case Experiment::Solve:
            if (!cfg.layout)
                cfg.layout = cfg.bc_spec.rfind("corners", 0) == 0 ? Layout::CellCentered
                                                                  : Layout::VertexCentered;
            if (cfg.bc_spec.empty())
                cfg.bc_spec = *cfg.layout == Layout::VertexCentered ? "sine" : "corners:0,1,0,1";
            if (cfg.n_grid == 0)
                throw InvalidParameterError("solve experiment requires --ngrid");
            break;
        case Experiment::GenField:
            if (cfg.n_grid == 0)
                throw InvalidParameterError("gen-field experiment requires --ngrid");
            break;
    }
    if (cfg.repeat < 1) throw InvalidParameterError("--repeat must be >= 1");
    return cfg;
}

inline BoundarySpec parse_bc(const std::string& spec, const GridSpec& grid) {
    if (spec == "sine") return make_bc_sine(grid);
    if (spec.rfind("corners:", 0) == 0) {
        std::istringstream vals(spec.substr(8));
        double c[4];
        char comma;
        for (int i = 0; i < 4; ++i) {
            if (i > 0 && !(vals >> comma && comma == ','))
                throw InvalidParameterError("bad corner list in '" + spec + "'");
            if (!(vals >> c[i]))
                throw InvalidParameterError("bad corner list in '" + spec + "'");
        }
        return make_bc_corners(c[0], c[1], c[2], c[3], grid);
    }
    throw InvalidParameterError("unknown bc spec '" + spec +
                                "' (expected sine or corners:c00,c10,c01,c11)");
}

namespace run_detail {

inline bool wants(const RunConfig& cfg, const std::string& method) {
    return std::find(cfg.methods.begin(), cfg.methods.end(), method) != cfg.methods.end();
}

inline std::vector<double> full_samples(const TemperatureField& f) {
    return std::vector<double>(f.u.begin(), f.u.end());
}

inline std::vector<double> true_samples(const GridSpec& grid) {
    std::vector<double> out;
    const int p = grid.points_per_side();
    out.reserve(static_cast<std::size_t>(p) * p);
    for (int iy = 0; iy < p; ++iy)
        for (int ix = 0; ix < p; ++ix)
            out.push_back(true_solution(grid.coord(ix), grid.coord(iy)));
    return out;
}

inline std::vector<double> at_cps(const CoarseLattice& lat, const TemperatureField& f) {
    std::vector<double> out;
    for (int cp = 0; cp < lat.total(); ++cp) {
        const auto [ix, iy] = lat.cp_point(cp);
        out.push_back(f.u(ix, iy));
    }
    return out;
}

inline std::vector<double> true_at_cps(const CoarseLattice& lat) {
    std::vector<double> out;
    for (int cp = 0; cp < lat.total(); ++cp) {
        const auto [ix, iy] = lat.cp_point(cp);
        out.push_back(true_solution(lat.grid.coord(ix), lat.grid.coord(iy)));
    }
    return out;
}

struct FieldScan {
    double min = 0.0;
    double max = 0.0;
    bool within_bc_range = false;
    double overshoot = 0.0;
};

inline FieldScan scan_field(const TemperatureField& f, const BoundarySpec& bc,
                            double tol = 1e-10) {
    FieldScan s;
    s.min = *std::min_element(f.u.begin(), f.u.end());
    s.max = *std::max_element(f.u.begin(), f.u.end());
    s.overshoot = std::max(std::max(bc.data_min() - s.min, s.max - bc.data_max()), 0.0);
    s.within_bc_range = s.overshoot <= tol;
    return s;
}

inline double symmetry_defect_about_x_half(const TemperatureField& f) {
    const int p = f.grid.points_per_side();
    double worst = 0.0;
    for (int iy = 0; iy < p; ++iy)
        for (int ix = 0; ix < p; ++ix)
            worst = std::max(worst, std::abs(f.u(ix, iy) - f.u(p - 1 - ix, iy)));
    return worst;
}

// least-squares slope of log(rmse) against log(spacing)
inline std::optional<double> loglog_slope(const std::vector<std::pair<double, double>>& pts) {
    if (pts.size() < 2) return std::nullopt;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (const auto& [spacing, value] : pts) {
        const double x = std::log(spacing);
        const double y = std::log(value);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double n = static_cast<double>(pts.size());
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

inline std::uint64_t file_hash(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "'");
    std::uint64_t h = 1469598103934665603ull;
    char buf[4096];
    while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
        for (std::streamsize i = 0; i < in.gcount(); ++i)
            h = detail::fnv1a(h, static_cast<unsigned char>(buf[i]));
        if (in.eof()) break;
    }
    return h;
}

inline nlohmann::json config_json(const RunConfig& cfg) {
    nlohmann::json j;
    j["experiment"] = to_string(cfg.experiment);
    j["ngrid"] = cfg.n_grid;
    j["layout"] = cfg.layout ? to_string(*cfg.layout) : "default";
    j["methods"] = cfg.methods;
    j["fdm_h_divisions"] = cfg.fdm_divisions;
    j["sdm_r"] = cfg.sdm_r;
    j["sdm_ref"] = to_string(cfg.sdm_ref);
    j["oversample"] = cfg.oversample;
    j["ddm_m"] = cfg.ddm_m;
    j["field"] = cfg.field_path;
    j["seed"] = cfg.seed;
    j["kmin"] = cfg.k_min;
    j["kmax"] = cfg.k_max;
    j["bc"] = cfg.bc_spec;
    j["out"] = cfg.out_dir.string();
    j["sequential_timing"] = cfg.sequential_timing;
    j["repeat"] = cfg.repeat;
    return j;
}

inline nlohmann::json row_json(const ReportRow& r) {
    nlohmann::json j;
    j["method"] = r.method;
    j["variant"] = r.variant;
    j["spacing_ratio"] = r.spacing_ratio;
    j["n_unknowns"] = r.n_unknowns;
    j["bandwidth"] = r.bandwidth;
    if (r.rmse_vs_true) j["rmse_vs_true"] = *r.rmse_vs_true;
    if (r.rmse_vs_fdm_cp) j["rmse_vs_fdm_cp"] = *r.rmse_vs_fdm_cp;
    if (r.rmse_vs_fdm_full) j["rmse_vs_fdm_full"] = *r.rmse_vs_fdm_full;
    j["cpu_local_s"] = r.cpu_local_s;
    j["cpu_global_s"] = r.cpu_global_s;
    j["cpu_total_s"] = r.cpu_total_s;
    j["n_local_solves"] = r.n_local_solves;
    if (!r.note.empty()) j["note"] = r.note;
    return j;
}

inline void fill_timing(ReportRow& row, const TimingReport& t) {
    row.cpu_local_s = t.cpu(Phase::Local);
    row.cpu_global_s = t.cpu(Phase::Global);
    row.cpu_total_s = t.cpu(Phase::Total);
    row.n_local_solves = t.local_solve_count;
    row.n_unknowns = t.unknowns;
    row.bandwidth = t.bandwidth;
}

} // namespace run_detail

// Everything a command produced, for programmatic use by tests.
struct ExperimentResult {
    RunConfig config;
    std::vector<ReportRow> rows;
    nlohmann::json report;
    std::filesystem::path csv_path;
    std::filesystem::path json_path;
    std::vector<std::string> warnings;
};

namespace run_detail {

inline void write_outputs(ExperimentResult& result, const RunConfig& cfg,
                          const std::vector<std::string>& slope_lines) {
    std::filesystem::create_directories(cfg.out_dir);
    result.csv_path = cfg.out_dir / "report.csv";
    std::ofstream csv(result.csv_path);
    if (!csv) throw IoError("cannot open '" + result.csv_path.string() + "' for writing");
    csv << report_csv_header() << '\n';
    for (const auto& row : result.rows) csv << to_csv_line(row) << '\n';
    for (const auto& line : slope_lines) csv << "# " << line << '\n';

    result.json_path = cfg.out_dir / "report.json";
    std::ofstream js(result.json_path);
    if (!js) throw IoError("cannot open '" + result.json_path.string() + "' for writing");
    js << result.report.dump(2) << '\n';
}

} // namespace run_detail

// --- gen-field ------------------------------------------------------------------

inline ExperimentResult run_gen_field(const RunConfig& raw) {
    const RunConfig cfg = resolve_config(raw);
    ExperimentResult result;
    result.config = cfg;
    const int n_cells = cfg.n_grid - 1;
    const auto field = gen_random_conductivity(n_cells, cfg.k_min, cfg.k_max, cfg.seed);
    std::filesystem::create_directories(cfg.out_dir);
    const auto path = cfg.out_dir / "field.txt";
    write_field_file(path, field);

    result.report["config"] = run_detail::config_json(cfg);
    result.report["field"] = {{"path", path.string()},
                              {"ncells", n_cells},
                              {"seed", cfg.seed},
                              {"kmin", cfg.k_min},
                              {"kmax", cfg.k_max},
                              {"file_hash", run_detail::file_hash(path)}};
    result.json_path = cfg.out_dir / "report.json";
    std::ofstream js(result.json_path);
    js << result.report.dump(2) << '\n';
    return result;
}

// --- convergence study (homogeneous benchmark) -----------------------------------

inline ExperimentResult run_convergence(const RunConfig& raw) {
    using namespace run_detail;
    const RunConfig cfg = resolve_config(raw);
    if (*cfg.layout != Layout::VertexCentered)
        throw InvalidParameterError("convergence experiment runs on the vertex layout");
    ExperimentResult result;
    result.config = cfg;
    std::filesystem::create_directories(cfg.out_dir);

    const int finest = *std::max_element(cfg.fdm_divisions.begin(), cfg.fdm_divisions.end());
    nlohmann::json checks = nlohmann::json::array();

    auto record_checks = [&](const std::string& label, const TemperatureField& f,
                             const BoundarySpec& bc) {
        const FieldScan scan = scan_field(f, bc);
        checks.push_back({{"run", label},
                          {"min", scan.min},
                          {"max", scan.max},
                          {"max_principle_ok", scan.within_bc_range},
                          {"overshoot", scan.overshoot},
                          {"symmetry_defect", symmetry_defect_about_x_half(f)}});
    };

    // direct FDM at every division
    std::vector<std::pair<double, double>> fdm_pts;
    std::optional<TemperatureField> finest_fdm;
    for (int div : cfg.fdm_divisions) {
        if (!wants(cfg, "fdm") && div != finest) continue;
        const GridSpec grid(Layout::VertexCentered, div + 1);
        const auto field = make_uniform_field(div);
        const auto bc = parse_bc(cfg.bc_spec, grid);
        TimingReport timing;
        timing.method = Method::FDM;
        TemperatureField u;
        for (int rep = 0; rep < cfg.repeat; ++rep)
            u = timed(timing, Phase::Global, [&] { return solve_direct(grid, field, bc); });
        const SparseSystem sys = assemble_direct(grid, field, bc);
        timing.unknowns = sys.n();
        timing.bandwidth = sys.bandwidth();

        ReportRow row;
        row.method = "FDM";
        row.variant = "-";
        row.spacing_ratio = div; // 1/h
        fill_timing(row, timing);
        row.cpu_local_s /= cfg.repeat;
        row.cpu_global_s /= cfg.repeat;
        row.cpu_total_s /= cfg.repeat;
        row.rmse_vs_true = rmse(full_samples(u), true_samples(grid));
        result.rows.push_back(row);
        fdm_pts.emplace_back(1.0 / div, *row.rmse_vs_true);
        record_checks("fdm_h1over" + std::to_string(div), u, bc);
        write_temps_file(cfg.out_dir / ("temps_fdm_h" + std::to_string(div) + ".txt"), u);
        if (div == finest) finest_fdm = u;
    }

    const GridSpec fine_grid(Layout::VertexCentered, finest + 1);
    const auto fine_field = make_uniform_field(finest);
    const auto fine_bc = parse_bc(cfg.bc_spec, fine_grid);

    // SDM on the finest grid
    std::map<std::string, std::vector<std::pair<double, double>>> sdm_pts;
    if (wants(cfg, "sdm")) {
        std::vector<std::string> variants =
            cfg.oversample ? std::vector<std::string>{"oversampled", "plain"}
                           : std::vector<std::string>{"plain"};
        for (int r : cfg.sdm_r) {
            if (finest % r != 0) {
                result.warnings.push_back("sdm: skipped r=" + std::to_string(r) +
                                          " (does not divide " + std::to_string(finest) + ")");
                continue;
            }
            for (const auto& variant : variants) {
                const auto res = solve_sdm(fine_grid, fine_field, fine_bc, r, cfg.sdm_ref,
                                           variant == "oversampled", cfg.sequential_timing);
                ReportRow row;
                row.method = "SDM";
                row.variant = variant;
                row.spacing_ratio = r;
                fill_timing(row, res.timing);
                row.rmse_vs_true = rmse(res.ug, true_at_cps(res.lattice));
                if (finest_fdm)
                    row.rmse_vs_fdm_cp = rmse(res.ug, at_cps(res.lattice, *finest_fdm));
                result.rows.push_back(row);
                sdm_pts[variant].emplace_back(res.lattice.spacing(), *row.rmse_vs_true);
                record_checks("sdm_r" + std::to_string(r) + "_" + variant, res.fine, fine_bc);
                write_temps_file(cfg.out_dir / ("temps_sdm_r" + std::to_string(r) + "_" +
                                                variant + ".txt"),
                                 res.fine);
            }
        }
    }

    // DDM on the finest grid
    std::vector<std::pair<double, double>> ddm_pts;
    if (wants(cfg, "ddm")) {
        for (int m : cfg.ddm_m) {
            if (m < 3 || finest % m != 0) {
                result.warnings.push_back("ddm: skipped m=" + std::to_string(m));
                continue;
            }
            const auto res = solve_ddm(fine_grid, fine_field, fine_bc, m,
                                       cfg.sequential_timing);
            ReportRow row;
            row.method = "DDM";
            row.variant = "-";
            row.spacing_ratio = m;
            fill_timing(row, res.timing);
            row.rmse_vs_true = rmse(full_samples(res.field), true_samples(fine_grid));
            if (finest_fdm)
                row.rmse_vs_fdm_full =
                    rmse(full_samples(res.field), full_samples(*finest_fdm));
            result.rows.push_back(row);
            ddm_pts.emplace_back(res.partition.spacing(), *row.rmse_vs_true);
            record_checks("ddm_m" + std::to_string(m), res.field, fine_bc);
            write_temps_file(cfg.out_dir / ("temps_ddm_m" + std::to_string(m) + ".txt"),
                             res.field);
        }
    }

    // slopes
    std::vector<std::string> slope_lines;
    nlohmann::json slopes;
    if (const auto s = loglog_slope(fdm_pts)) {
        slopes["FDM"] = *s;
        slope_lines.push_back("slope method=FDM value=" + format_double(*s));
    }
    for (const auto& [variant, pts] : sdm_pts)
        if (const auto s = loglog_slope(pts)) {
            slopes["SDM_" + variant] = *s;
            slope_lines.push_back("slope method=SDM variant=" + variant +
                                  " value=" + format_double(*s));
        }
    if (const auto s = loglog_slope(ddm_pts)) {
        slopes["DDM"] = *s;
        slope_lines.push_back("slope method=DDM value=" + format_double(*s));
    }

    result.report["config"] = config_json(cfg);
    result.report["field"] = {{"uniform_k", 1.0}};
    result.report["rows"] = nlohmann::json::array();
    for (const auto& row : result.rows) result.report["rows"].push_back(row_json(row));
    result.report["slopes"] = slopes;
    result.report["checks"] = checks;
    result.report["warnings"] = result.warnings;
    write_outputs(result, cfg, slope_lines);
    return result;
}

// --- heterogeneous comparison ------------------------------------------------------

inline ExperimentResult run_heterogeneous(const RunConfig& raw) {
    using namespace run_detail;
    const RunConfig cfg = resolve_config(raw);
    if (*cfg.layout != Layout::CellCentered)
        throw InvalidParameterError("heterogeneous experiment runs on the cell layout");
    ExperimentResult result;
    result.config = cfg;
    std::filesystem::create_directories(cfg.out_dir);

    const GridSpec grid(Layout::CellCentered, cfg.n_grid);
    nlohmann::json field_meta;
    ConductivityField field;
    if (!cfg.field_path.empty()) {
        field = read_field_file(cfg.field_path);
        if (field.n_cells != grid.cells_per_side())
            throw InvalidParameterError(
                "field file has " + std::to_string(field.n_cells) + " cells per side, grid "
                "needs " + std::to_string(grid.cells_per_side()));
        field_meta = {{"path", cfg.field_path},
                      {"file_hash", file_hash(cfg.field_path)},
                      {"ncells", field.n_cells}};
    } else {
        field = gen_random_conductivity(grid.cells_per_side(), cfg.k_min, cfg.k_max, cfg.seed);
        const auto path = cfg.out_dir / "field.txt";
        write_field_file(path, field);
        field_meta = {{"path", path.string()},
                      {"seed", cfg.seed},
                      {"kmin", cfg.k_min},
                      {"kmax", cfg.k_max},
                      {"ncells", field.n_cells},
                      {"file_hash", file_hash(path)}};
    }
    const auto bc = parse_bc(cfg.bc_spec, grid);
    nlohmann::json checks = nlohmann::json::array();

    auto record_checks = [&](const std::string& label, const TemperatureField& f) {
        const FieldScan scan = scan_field(f, bc);
        checks.push_back({{"run", label},
                          {"min", scan.min},
                          {"max", scan.max},
                          {"max_principle_ok", scan.within_bc_range},
                          {"overshoot", scan.overshoot}});
    };

    // direct FDM reference
    TimingReport fdm_timing;
    fdm_timing.method = Method::FDM;
    TemperatureField fdm;
    for (int rep = 0; rep < cfg.repeat; ++rep)
        fdm = timed(fdm_timing, Phase::Global, [&] { return solve_direct(grid, field, bc); });
    {
        const SparseSystem sys = assemble_direct(grid, field, bc);
        fdm_timing.unknowns = sys.n();
        fdm_timing.bandwidth = sys.bandwidth();
        ReportRow row;
        row.method = "FDM";
        row.variant = "-";
        row.spacing_ratio = 1;
        fill_timing(row, fdm_timing);
        row.cpu_local_s /= cfg.repeat;
        row.cpu_global_s /= cfg.repeat;
        row.cpu_total_s /= cfg.repeat;
        result.rows.push_back(row);
        record_checks("fdm", fdm);
        write_temps_file(cfg.out_dir / "temps_fdm.txt", fdm);
    }
    const auto fdm_full = full_samples(fdm);

    if (wants(cfg, "sdm")) {
        for (int r : cfg.sdm_r) {
            if ((grid.points_per_side() - 1) % r != 0) {
                result.warnings.push_back("sdm: skipped r=" + std::to_string(r));
                continue;
            }
            const auto res = solve_sdm(grid, field, bc, r, cfg.sdm_ref, cfg.oversample,
                                       cfg.sequential_timing);
            ReportRow row;
            row.method = "SDM";
            row.variant = cfg.oversample ? "oversampled" : "plain";
            row.spacing_ratio = r;
            fill_timing(row, res.timing);
            row.rmse_vs_fdm_cp = rmse(res.ug, at_cps(res.lattice, fdm)); // paper-normalized
            row.rmse_vs_fdm_full = rmse(full_samples(res.fine), fdm_full);
            result.rows.push_back(row);
            record_checks("sdm_r" + std::to_string(r), res.fine);
            checks.back()["mean_local_analysis_cpu_s"] =
                res.timing.local_solve_count > 0
                    ? res.timing.cpu(Phase::Local) / res.timing.local_solve_count
                    : 0.0;
            checks.back()["pinv_fallback_used"] = res.operators.pinv_used;
            write_temps_file(cfg.out_dir / ("temps_sdm_r" + std::to_string(r) + ".txt"),
                             res.fine);
        }
    }

    if (wants(cfg, "ddm")) {
        for (int m : cfg.ddm_m) {
            if (m < 3 || (grid.points_per_side() - 1) % m != 0) {
                result.warnings.push_back("ddm: skipped m=" + std::to_string(m));
                continue;
            }
            const auto res = solve_ddm(grid, field, bc, m, cfg.sequential_timing);
            ReportRow row;
            row.method = "DDM";
            row.variant = "-";
            row.spacing_ratio = m;
            fill_timing(row, res.timing);
            row.rmse_vs_fdm_full = rmse(full_samples(res.field), fdm_full);
            result.rows.push_back(row);
            record_checks("ddm_m" + std::to_string(m), res.field);
            const auto ddm_full = full_samples(res.field);
            double worst = 0.0;
            for (std::size_t i = 0; i < fdm_full.size(); ++i)
                worst = std::max(worst, std::abs(ddm_full[i] - fdm_full[i]));
            checks.back()["max_abs_diff_vs_fdm"] = worst;
            checks.back()["mean_local_analysis_cpu_s"] =
                res.timing.local_solve_count > 0
                    ? res.timing.cpu(Phase::Local) / res.timing.local_solve_count
                    : 0.0;
            write_temps_file(cfg.out_dir / ("temps_ddm_m" + std::to_string(m) + ".txt"),
                             res.field);
        }
    }

    result.report["config"] = config_json(cfg);
    result.report["field"] = field_meta;
    result.report["rows"] = nlohmann::json::array();
    for (const auto& row : result.rows) result.report["rows"].push_back(row_json(row));
    result.report["checks"] = checks;
    result.report["warnings"] = result.warnings;
    write_outputs(result, cfg, {});
    return result;
}

// --- single solve --------------------------------------------------------------------

inline ExperimentResult run_solve(const RunConfig& raw) {
    using namespace run_detail;
    const RunConfig cfg = resolve_config(raw);
    if (cfg.methods.size() != 1)
        throw InvalidParameterError("solve experiment takes exactly one method");
    ExperimentResult result;
    result.config = cfg;
    std::filesystem::create_directories(cfg.out_dir);

    const GridSpec grid(*cfg.layout, cfg.n_grid);
    ConductivityField field;
    nlohmann::json field_meta;
    if (grid.layout == Layout::VertexCentered && cfg.field_path.empty()) {
        field = make_uniform_field(grid.cells_per_side());
        field_meta = {{"uniform_k", 1.0}};
    } else if (!cfg.field_path.empty()) {
        field = read_field_file(cfg.field_path);
        if (field.n_cells != grid.cells_per_side())
            throw InvalidParameterError("field file size does not match --ngrid");
        field_meta = {{"path", cfg.field_path}, {"file_hash", file_hash(cfg.field_path)}};
    } else {
        field = gen_random_conductivity(grid.cells_per_side(), cfg.k_min, cfg.k_max, cfg.seed);
        field_meta = {{"seed", cfg.seed}, {"kmin", cfg.k_min}, {"kmax", cfg.k_max}};
    }
    const auto bc = parse_bc(cfg.bc_spec, grid);

    ReportRow row;
    TemperatureField u;
    const std::string method = cfg.methods[0];
    if (method == "fdm") {
        TimingReport timing;
        u = timed(timing, Phase::Global, [&] { return solve_direct(grid, field, bc); });
        const SparseSystem sys = assemble_direct(grid, field, bc);
        timing.unknowns = sys.n();
        timing.bandwidth = sys.bandwidth();
        row.method = "FDM";
        row.variant = "-";
        row.spacing_ratio = 1;
        fill_timing(row, timing);
    } else if (method == "sdm") {
        if (cfg.sdm_r.size() != 1)
            throw InvalidParameterError("solve experiment needs exactly one --sdm-r value");
        const auto res = solve_sdm(grid, field, bc, cfg.sdm_r[0], cfg.sdm_ref, cfg.oversample,
                                   cfg.sequential_timing);
        u = res.fine;
        row.method = "SDM";
        row.variant = cfg.oversample ? "oversampled" : "plain";
        row.spacing_ratio = cfg.sdm_r[0];
        fill_timing(row, res.timing);
    } else if (method == "ddm") {
        if (cfg.ddm_m.size() != 1)
            throw InvalidParameterError("solve experiment needs exactly one --ddm-m value");
        const auto res = solve_ddm(grid, field, bc, cfg.ddm_m[0], cfg.sequential_timing);
        u = res.field;
        row.method = "DDM";
        row.variant = "-";
        row.spacing_ratio = cfg.ddm_m[0];
        fill_timing(row, res.timing);
    } else {
        throw InvalidParameterError("unknown method '" + method + "'");
    }
    if (grid.layout == Layout::VertexCentered && cfg.bc_spec == "sine")
        row.rmse_vs_true = rmse(full_samples(u), true_samples(grid));
    result.rows.push_back(row);

    write_temps_file(cfg.out_dir / "temps.txt", u);
    const FieldScan scan = scan_field(u, bc);
    result.report["config"] = config_json(cfg);
    result.report["field"] = field_meta;
    result.report["rows"] = {row_json(row)};
    result.report["checks"] = {{{"run", method},
                                {"min", scan.min},
                                {"max", scan.max},
                                {"max_principle_ok", scan.within_bc_range},
                                {"overshoot", scan.overshoot}}};
    write_outputs(result, cfg, {});
    return result;
}

inline ExperimentResult run_experiment(const RunConfig& cfg) {
    switch (cfg.experiment) {
        case Experiment::Convergence: return run_convergence(cfg);
        case Experiment::Heterogeneous: return run_heterogeneous(cfg);
        case Experiment::Solve: return run_solve(cfg);
        case Experiment::GenField: return run_gen_field(cfg);
    }
    throw InvalidParameterError("unknown experiment");
}

} // namespace heat2d

// heat2d command-line runner: experiment selection, case generation, and
// report/field serialization. Exit codes: 0 success, 2 invalid configuration,
// 3 solver failure, 4 I/O failure.

#include <CLI11.hpp>

#include <cstdio>
#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include "heat2d/experiments.hpp"

namespace {

heat2d::Experiment parse_experiment(const std::string& name) {
    if (name == "convergence") return heat2d::Experiment::Convergence;
    if (name == "heterogeneous") return heat2d::Experiment::Heterogeneous;
    if (name == "solve") return heat2d::Experiment::Solve;
    if (name == "gen-field") return heat2d::Experiment::GenField;
    throw heat2d::InvalidParameterError("unknown experiment '" + name + "'");
}

heat2d::RefPattern parse_ref_pattern(const std::string& name) {
    if (name == "ring8") return heat2d::RefPattern::Ring8;
    if (name == "corners4") return heat2d::RefPattern::Corners4;
    if (name == "edgemid4") return heat2d::RefPattern::EdgeMid4;
    throw heat2d::InvalidParameterError("unknown ref pattern '" + name + "'");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"heat2d: direct FDM, seamless-domain (SDM), and domain-decomposition (DDM) "
                 "solvers for 2D steady heat conduction on heterogeneous fields"};
    app.set_config("--config", "", "configuration file (key=value, flag names without --)");

    std::string experiment = "convergence";
    std::string layout;
    std::string methods = "fdm,sdm,ddm";
    std::string fdm_h;
    std::string sdm_r;
    std::string sdm_ref = "ring8";
    std::string oversample = "on";
    std::string ddm_m;
    std::string bc;
    std::string field_path;
    std::string out_dir = "out";
    std::string sequential = "on";
    int n_grid = 0;
    std::uint64_t seed = 42;
    bool seed_given = false;
    double k_min = 0.01, k_max = 1.00;
    int repeat = 1;

    app.add_option("--experiment", experiment,
                   "convergence | heterogeneous | solve | gen-field")
        ->capture_default_str();
    app.add_option("--ngrid", n_grid, "grid lines per side (h = 1/(ngrid-1))");
    app.add_option("--layout", layout, "vertex | cell (default set by experiment)");
    app.add_option("--methods", methods, "comma list of fdm,sdm,ddm")->capture_default_str();
    app.add_option("--fdm-h", fdm_h, "comma list of divisions d (h = 1/d)");
    app.add_option("--sdm-r", sdm_r, "comma list of CP spacings r (h_SDM = r h)");
    app.add_option("--sdm-ref", sdm_ref, "ring8 | corners4 | edgemid4")->capture_default_str();
    app.add_option("--oversample", oversample, "on | off")->capture_default_str();
    app.add_option("--ddm-m", ddm_m, "comma list of window sizes m (h_DDM = m h)");
    app.add_option("--field", field_path, "conductivity field file");
    auto* seed_opt = app.add_option("--seed", seed, "random-field seed");
    app.add_option("--kmin", k_min, "random-field lower bound")->capture_default_str();
    app.add_option("--kmax", k_max, "random-field upper bound")->capture_default_str();
    app.add_option("--bc", bc, "sine | corners:c00,c10,c01,c11");
    app.add_option("--out", out_dir, "output directory")->capture_default_str();
    app.add_option("--sequential-timing", sequential,
                   "on | off (off allows parallel local analyses)")
        ->capture_default_str();
    app.add_option("--repeat", repeat, "timing repeat count")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }
    seed_given = seed_opt->count() > 0;

    auto parse_int_list = [](const std::string& csv) {
        std::vector<int> out;
        std::istringstream in(csv);
        std::string token;
        while (std::getline(in, token, ','))
            if (!token.empty()) out.push_back(std::stoi(token));
        return out;
    };
    auto parse_on_off = [](const std::string& v, const char* flag) {
        if (v == "on") return true;
        if (v == "off") return false;
        throw heat2d::InvalidParameterError(std::string(flag) + " must be on or off, got '" +
                                            v + "'");
    };

    try {
        heat2d::RunConfig cfg;
        cfg.experiment = parse_experiment(experiment);
        cfg.n_grid = n_grid;
        if (layout == "vertex") cfg.layout = heat2d::Layout::VertexCentered;
        else if (layout == "cell") cfg.layout = heat2d::Layout::CellCentered;
        else if (!layout.empty())
            throw heat2d::InvalidParameterError("unknown layout '" + layout + "'");
        {
            cfg.methods.clear();
            std::istringstream in(methods);
            std::string token;
            while (std::getline(in, token, ','))
                if (!token.empty()) cfg.methods.push_back(token);
        }
        cfg.fdm_divisions = parse_int_list(fdm_h);
        cfg.sdm_r = parse_int_list(sdm_r);
        cfg.sdm_ref = parse_ref_pattern(sdm_ref);
        cfg.oversample = parse_on_off(oversample, "--oversample");
        cfg.ddm_m = parse_int_list(ddm_m);
        cfg.field_path = field_path;
        cfg.seed = seed;
        cfg.k_min = k_min;
        cfg.k_max = k_max;
        cfg.bc_spec = bc;
        cfg.out_dir = out_dir;
        cfg.sequential_timing = parse_on_off(sequential, "--sequential-timing");
        cfg.repeat = repeat;
        if (!field_path.empty() && seed_given)
            throw heat2d::InvalidParameterError("--field and --seed are mutually exclusive");

        const auto result = heat2d::run_experiment(cfg);
        for (const auto& w : result.warnings) std::cerr << "warning: " << w << "\n";
        if (!result.csv_path.empty())
            std::cout << "report: " << result.csv_path.string() << "\n";
        std::cout << "report: " << result.json_path.string() << "\n";
        return 0;
    } catch (const heat2d::IoError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return 4;
    } catch (const heat2d::SolverError& e) {
        std::cerr << "solver failure: " << e.what() << "\n";
        return 3;
    } catch (const heat2d::InvalidParameterError& e) {
        std::cerr << "invalid configuration: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}

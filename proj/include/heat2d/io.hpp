#pragma once

// Exchange formats. Both file kinds are line-oriented text: a few "# key
// value" header lines, then one line per grid row with space-separated
// decimal values written in shortest round-trip form, so reading a file back
// reproduces the exact doubles.

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include "heat2d/conductivity.hpp"
#include "heat2d/errors.hpp"
#include "heat2d/grid.hpp"

namespace heat2d {

inline std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline double parse_double(const std::string& token, const std::string& context) {
    double v = 0.0;
    const auto res = std::from_chars(token.data(), token.data() + token.size(), v);
    if (res.ec != std::errc() || res.ptr != token.data() + token.size())
        throw IoError("cannot parse number '" + token + "' (" + context + ")");
    return v;
}

// --- conductivity field files: "# sdm-field v1" -----------------------------

inline void write_field_file(const std::filesystem::path& path,
                             const ConductivityField& field) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    out << "# sdm-field v1\n";
    out << "# ncells " << field.n_cells << "\n";
    out << "# kmin " << format_double(field.k_min) << " kmax " << format_double(field.k_max)
        << "\n";
    if (field.seed) out << "# seed " << *field.seed << "\n";
    for (int iy = 0; iy < field.n_cells; ++iy) {
        for (int ix = 0; ix < field.n_cells; ++ix) {
            if (ix) out << ' ';
            out << format_double(field.k(ix, iy));
        }
        out << '\n';
    }
    if (!out) throw IoError("write failed for '" + path.string() + "'");
}

inline ConductivityField read_field_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path.string() + "'");

    ConductivityField field;
    field.k_min = 0.0;
    field.k_max = 0.0;
    std::string line;
    if (!std::getline(in, line) || line.rfind("# sdm-field v1", 0) != 0)
        throw IoError("'" + path.string() + "': missing \"# sdm-field v1\" header");

    int n_cells = -1;
    while (in.peek() == '#') {
        std::getline(in, line);
        std::istringstream hdr(line);
        std::string hash, key;
        hdr >> hash >> key;
        if (key == "ncells") {
            hdr >> n_cells;
        } else if (key == "kmin") {
            std::string kmin_s, kmax_key, kmax_s;
            hdr >> kmin_s >> kmax_key >> kmax_s;
            field.k_min = parse_double(kmin_s, "kmin header");
            field.k_max = parse_double(kmax_s, "kmax header");
        } else if (key == "seed") {
            std::uint64_t s = 0;
            hdr >> s;
            field.seed = s;
        } // unknown header keys are ignored
    }
    if (n_cells < 1)
        throw IoError("'" + path.string() + "': missing or invalid \"# ncells\" header");

    field.n_cells = n_cells;
    field.k = Array2D<double>(n_cells, n_cells);
    for (int iy = 0; iy < n_cells; ++iy) {
        if (!std::getline(in, line))
            throw IoError("'" + path.string() + "': unexpected end of file at data row " +
                          std::to_string(iy));
        std::istringstream row(line);
        std::string token;
        for (int ix = 0; ix < n_cells; ++ix) {
            if (!(row >> token))
                throw IoError("'" + path.string() + "': row " + std::to_string(iy) +
                              " has fewer than " + std::to_string(n_cells) + " values");
            const double v = parse_double(token, "row " + std::to_string(iy) + " col " +
                                                     std::to_string(ix));
            if (!(v > 0.0))
                throw IoError("'" + path.string() + "': nonpositive conductivity at row " +
                              std::to_string(iy) + " col " + std::to_string(ix));
            field.k(ix, iy) = v;
        }
    }
    if (field.k_min <= 0.0 || field.k_max <= 0.0) {
        field.k_min = *std::min_element(field.k.begin(), field.k.end());
        field.k_max = *std::max_element(field.k.begin(), field.k.end());
    }
    return field;
}

// --- temperature field files: "# sdm-temps v1" -------------------------------

inline void write_temps_file(const std::filesystem::path& path, const TemperatureField& f) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    out << "# sdm-temps v1\n";
    out << "# layout " << to_string(f.grid.layout) << "\n";
    out << "# ngrid " << f.grid.n_grid << "\n";
    const int p = f.grid.points_per_side();
    for (int iy = 0; iy < p; ++iy) {
        for (int ix = 0; ix < p; ++ix) {
            if (ix) out << ' ';
            out << format_double(f.u(ix, iy));
        }
        out << '\n';
    }
    if (!out) throw IoError("write failed for '" + path.string() + "'");
}

inline TemperatureField read_temps_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path.string() + "'");
    std::string line;
    if (!std::getline(in, line) || line.rfind("# sdm-temps v1", 0) != 0)
        throw IoError("'" + path.string() + "': missing \"# sdm-temps v1\" header");

    std::optional<Layout> layout;
    int n_grid = -1;
    while (in.peek() == '#') {
        std::getline(in, line);
        std::istringstream hdr(line);
        std::string hash, key, value;
        hdr >> hash >> key >> value;
        if (key == "layout") {
            if (value == "vertex") layout = Layout::VertexCentered;
            else if (value == "cell") layout = Layout::CellCentered;
            else throw IoError("'" + path.string() + "': unknown layout '" + value + "'");
        } else if (key == "ngrid") {
            n_grid = std::stoi(value);
        }
    }
    if (!layout || n_grid < 3)
        throw IoError("'" + path.string() + "': missing layout/ngrid headers");

    TemperatureField f(GridSpec(*layout, n_grid));
    const int p = f.grid.points_per_side();
    for (int iy = 0; iy < p; ++iy) {
        if (!std::getline(in, line))
            throw IoError("'" + path.string() + "': unexpected end of file at row " +
                          std::to_string(iy));
        std::istringstream row(line);
        std::string token;
        for (int ix = 0; ix < p; ++ix) {
            if (!(row >> token))
                throw IoError("'" + path.string() + "': short row " + std::to_string(iy));
            f.u(ix, iy) = parse_double(token, "row " + std::to_string(iy));
        }
    }
    return f;
}

// --- benchmark report rows ----------------------------------------------------

// One CSV row of a benchmark report. Optional metrics stay empty in the CSV
// when they do not apply to the method.
struct ReportRow {
    std::string method;  // FDM | SDM | DDM
    std::string variant; // plain | oversampled | ring8... | "-"
    double spacing_ratio = 0.0; // r or m (1 for direct FDM rows)
    int n_unknowns = 0;
    int bandwidth = 0;
    std::optional<double> rmse_vs_true;
    std::optional<double> rmse_vs_fdm_cp;
    std::optional<double> rmse_vs_fdm_full;
    double cpu_local_s = 0.0;
    double cpu_global_s = 0.0;
    double cpu_total_s = 0.0;
    long n_local_solves = 0;
    std::string note; // skip reason or flags; not a CSV column
};

inline const char* report_csv_header() {
    return "method,variant,spacing_ratio,n_unknowns,bandwidth,rmse_vs_true,rmse_vs_fdm_cp,"
           "rmse_vs_fdm_full,cpu_local_s,cpu_global_s,cpu_total_s,n_local_solves";
}

inline std::string to_csv_line(const ReportRow& r) {
    auto opt = [](const std::optional<double>& v) {
        return v ? format_double(*v) : std::string();
    };
    std::ostringstream out;
    out << r.method << ',' << r.variant << ',' << format_double(r.spacing_ratio) << ','
        << r.n_unknowns << ',' << r.bandwidth << ',' << opt(r.rmse_vs_true) << ','
        << opt(r.rmse_vs_fdm_cp) << ',' << opt(r.rmse_vs_fdm_full) << ','
        << format_double(r.cpu_local_s) << ',' << format_double(r.cpu_global_s) << ','
        << format_double(r.cpu_total_s) << ',' << r.n_local_solves;
    return out.str();
}

} // namespace heat2d

#pragma once

#include <chrono>
#include <cmath>
#include <ctime>
#include <numbers>
#include <string>
#include <vector>

#include "heat2d/errors.hpp"

namespace heat2d {

// Exact solution of the homogeneous benchmark problem:
// Laplace on the unit square, u(x,1) = sin(pi x), zero on the other sides.
inline double true_solution(double x, double y) {
    return std::sin(std::numbers::pi * x) * std::sinh(std::numbers::pi * y) /
           std::sinh(std::numbers::pi);
}

enum class Method { FDM, SDM, DDM };
enum class RmseReference { TrueSolution, DirectFdm };
enum class PointSet { CpPositions, FullGrid, ReducedPoints };

inline const char* to_string(Method m) {
    switch (m) {
        case Method::FDM: return "FDM";
        case Method::SDM: return "SDM";
        case Method::DDM: return "DDM";
    }
    return "?";
}

struct RmseReport {
    Method method = Method::FDM;
    double spacing = 0.0; // h, h_SDM, or h_DDM
    RmseReference reference = RmseReference::TrueSolution;
    PointSet point_set = PointSet::FullGrid;
    double rmse = 0.0;
    int n_points = 0;
};

// Root of the mean squared difference over a common point set.
inline double rmse(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size())
        throw InvalidParameterError("rmse: sample lengths differ (" + std::to_string(a.size()) +
                                    " vs " + std::to_string(b.size()) + ")");
    if (a.empty()) throw InvalidParameterError("rmse: empty sample sets");
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        acc += d * d;
    }
    return std::sqrt(acc / static_cast<double>(a.size()));
}

inline RmseReport make_rmse_report(Method method, double spacing, RmseReference ref,
                                   PointSet point_set, const std::vector<double>& a,
                                   const std::vector<double>& b) {
    return {method, spacing, ref, point_set, rmse(a, b), static_cast<int>(a.size())};
}

enum class Phase { Local, Global, Recovery, Total };

inline const char* to_string(Phase p) {
    switch (p) {
        case Phase::Local: return "local";
        case Phase::Global: return "global";
        case Phase::Recovery: return "recovery";
        case Phase::Total: return "total";
    }
    return "?";
}

struct TimingEntry {
    Phase phase = Phase::Total;
    double cpu_seconds = 0.0;
    double wall_seconds = 0.0;
};

// Per-run phase timings for one method. Phases are disjoint; Total covers
// everything including recovery. CPU time is process CPU (the paper's
// framing); wall time is recorded alongside for transparency.
struct TimingReport {
    Method method = Method::FDM;
    std::vector<TimingEntry> entries;
    long local_solve_count = 0;
    int unknowns = 0;
    int bandwidth = 0;
    bool parallel_local = false;

    double cpu(Phase p) const {
        for (const auto& e : entries)
            if (e.phase == p) return e.cpu_seconds;
        return 0.0;
    }
    double wall(Phase p) const {
        for (const auto& e : entries)
            if (e.phase == p) return e.wall_seconds;
        return 0.0;
    }
    void add(Phase p, double cpu_s, double wall_s) {
        for (auto& e : entries) {
            if (e.phase == p) {
                e.cpu_seconds += cpu_s;
                e.wall_seconds += wall_s;
                return;
            }
        }
        entries.push_back({p, cpu_s, wall_s});
    }
};

inline double process_cpu_seconds() {
    timespec ts{};
    clock_gettime(CLOCK_PROCESS_CPUTIME_ID, &ts);
    return static_cast<double>(ts.tv_sec) + 1e-9 * static_cast<double>(ts.tv_nsec);
}

// Run `fn`, record its CPU and wall time under `phase`, and pass its result
// through. Phases must not nest within one method run.
template <class F>
auto timed(TimingReport& report, Phase phase, F&& fn) {
    const double cpu0 = process_cpu_seconds();
    const auto wall0 = std::chrono::steady_clock::now();
    if constexpr (std::is_void_v<decltype(fn())>) {
        fn();
        const double cpu = process_cpu_seconds() - cpu0;
        const double wall = std::chrono::duration<double>(
                                std::chrono::steady_clock::now() - wall0).count();
        report.add(phase, cpu, wall);
        report.add(Phase::Total, cpu, wall);
    } else {
        auto result = fn();
        const double cpu = process_cpu_seconds() - cpu0;
        const double wall = std::chrono::duration<double>(
                                std::chrono::steady_clock::now() - wall0).count();
        report.add(phase, cpu, wall);
        report.add(Phase::Total, cpu, wall);
        return result;
    }
}

} // namespace heat2d

#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>

#include "heat2d/array2d.hpp"
#include "heat2d/errors.hpp"

namespace heat2d {

// Interface conductivity between two cells, from flux continuity across the
// shared face: k = 2*k1*k2/(k1+k2). Symmetric, and always between min and max
// of the inputs.
inline double harmonic_mean(double k1, double k2) {
    if (!(k1 > 0.0) || !(k2 > 0.0))
        throw InvalidParameterError("harmonic_mean: conductivities must be positive");
    return 2.0 * k1 * k2 / (k1 + k2);
}

// Piecewise-constant isotropic conductivity, one value per square cell.
struct ConductivityField {
    int n_cells = 0;
    Array2D<double> k; // k(ix, iy) > 0
    double k_min = 1.0;
    double k_max = 1.0;
    std::optional<std::uint64_t> seed; // present when generated randomly

    ConductivityField() = default;
    ConductivityField(int n, double value) : n_cells(n), k(n, n, value), k_min(value), k_max(value) {
        if (n < 1) throw InvalidParameterError("ConductivityField: n_cells must be >= 1");
        if (!(value > 0.0)) throw InvalidParameterError("ConductivityField: k must be positive");
    }

    bool is_uniform() const {
        for (double v : k)
            if (v != k(0, 0)) return false;
        return true;
    }
};

inline ConductivityField make_uniform_field(int n_cells, double k = 1.0) {
    return ConductivityField(n_cells, k);
}

// Each cell drawn independently from U[k_min, k_max] with a seeded mt19937_64.
// Bit-identical for repeated calls with the same arguments (single
// implementation; the exchange file format carries fields across programs).
inline ConductivityField gen_random_conductivity(int n_cells, double k_min, double k_max,
                                                 std::uint64_t seed) {
    if (n_cells < 2)
        throw InvalidParameterError("gen_random_conductivity: n_cells must be >= 2");
    if (!(k_min > 0.0))
        throw InvalidParameterError("gen_random_conductivity: k_min must be positive");
    if (k_max < k_min)
        throw InvalidParameterError("gen_random_conductivity: k_max must be >= k_min");

    ConductivityField field;
    field.n_cells = n_cells;
    field.k = Array2D<double>(n_cells, n_cells);
    field.k_min = k_min;
    field.k_max = k_max;
    field.seed = seed;

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(k_min, k_max);
    for (int iy = 0; iy < n_cells; ++iy)
        for (int ix = 0; ix < n_cells; ++ix)
            field.k(ix, iy) = dist(rng);
    return field;
}

} // namespace heat2d

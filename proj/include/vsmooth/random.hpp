#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

#include "vsmooth/core.hpp"

namespace vsmooth {

/**
 * Portable seeded generator ("vsmooth-rng v1").
 *
 * Raw stream: std::mt19937_64 seeded with the 64-bit seed, whose output is
 * fixed by the C++ standard. Derived variates avoid the
 * implementation-defined std distributions:
 *   uniform()  = (next() >> 11) * 2^-53          in [0, 1)
 *   normal()   = sqrt(-2 ln(1 - u1)) cos(2 pi u2)  (one Box-Muller draw per call)
 */
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    double normal() {
        const double u1 = uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(1.0 - u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

    Vector uniform_vector(Index n, double lo, double hi) {
        Vector v(n);
        for (Index i = 0; i < n; ++i) v[i] = uniform(lo, hi);
        return v;
    }

    Vector normal_vector(Index n) {
        Vector v(n);
        for (Index i = 0; i < n; ++i) v[i] = normal();
        return v;
    }

    /// Column-major fill.
    Matrix normal_matrix(Index rows, Index cols) {
        Matrix m(rows, cols);
        for (Index j = 0; j < cols; ++j)
            for (Index i = 0; i < rows; ++i) m(i, j) = normal();
        return m;
    }

    /// Uniform point of the probability simplex (normalized exponentials).
    Vector simplex_point(Index n) {
        Vector v(n);
        for (Index i = 0; i < n; ++i) v[i] = -std::log(1.0 - uniform());
        return v / v.sum();
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace vsmooth

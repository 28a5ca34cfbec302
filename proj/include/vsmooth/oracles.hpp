#pragma once

// Brute-force verifiers. Nothing here calls into the closed-form or
// iterative operators it is used to check, except where a routine says so.

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "vsmooth/core.hpp"
#include "vsmooth/prox.hpp"
#include "vsmooth/random.hpp"

namespace vsmooth::oracle {

using Evaluator = std::function<double(const Vector&)>;

struct GridSpec {
    Vector lower;
    Vector upper;
    double step = 1e-2;
    int refinement_passes = 5;  ///< each pass shrinks the step 4x around the incumbent

    void validate() const {
        require_dim(upper.size(), lower.size(), "grid bounds");
        if (!(step > 0.0)) throw PreconditionError("grid step must be positive");
        if (!lower.allFinite() || !upper.allFinite()) throw PreconditionError("grid bounds must be finite");
        if ((upper - lower).minCoeff() < 0.0) throw PreconditionError("grid upper bound below lower bound");
    }

    /// Box [center - radius, center + radius].
    static GridSpec around(const Vector& center, double radius, double step, int passes = 5) {
        return {center.array() - radius, center.array() + radius, step, passes};
    }
};

struct GridMinimum {
    Vector point;
    double value;
};

namespace detail {

inline GridMinimum scan_box(const Evaluator& f, const Vector& lower, const Vector& upper, double step) {
    const Index d = lower.size();
    std::vector<Index> counts(d);
    for (Index i = 0; i < d; ++i) counts[i] = static_cast<Index>(std::floor((upper[i] - lower[i]) / step + 1e-9)) + 1;
    std::vector<Index> idx(d, 0);
    Vector y = lower;
    GridMinimum best{lower, kInfinity};
    while (true) {
        for (Index i = 0; i < d; ++i) y[i] = std::min(lower[i] + step * static_cast<double>(idx[i]), upper[i]);
        const double v = f(y);
        if (v < best.value) best = {y, v};
        Index pos = 0;
        while (pos < d && ++idx[pos] == counts[pos]) idx[pos++] = 0;
        if (pos == d) break;
    }
    return best;
}

}  // namespace detail

/**
 * Global grid minimum over a box of dimension <= 3, refined by nested local
 * grids: each pass rescans a +-4 step window at a quarter of the step,
 * until the step is below step * 1e-3.
 */
inline GridMinimum grid_minimize(const Evaluator& f, const GridSpec& grid) {
    grid.validate();
    if (grid.lower.size() > 3) throw CapabilityError("grid oracle supports dimension <= 3");
    GridMinimum best = detail::scan_box(f, grid.lower, grid.upper, grid.step);
    double h = grid.step;
    for (int pass = 0; pass < grid.refinement_passes; ++pass) {
        const Vector lo = best.point.array() - 4.0 * h;
        const Vector hi = best.point.array() + 4.0 * h;
        h /= 4.0;
        const GridMinimum local = detail::scan_box(f, lo, hi, h);
        if (local.value <= best.value) best = local;
    }
    return best;
}

inline Vector brute_force_prox(const Evaluator& g, double mu, const Vector& x, const GridSpec& grid) {
    require_dim(grid.lower.size(), x.size(), "grid dimension");
    return grid_minimize([&](const Vector& y) { return g(y) + (y - x).squaredNorm() / (2.0 * mu); }, grid).point;
}

inline double brute_force_envelope(const Evaluator& g, double mu, const Vector& x, const GridSpec& grid) {
    require_dim(grid.lower.size(), x.size(), "grid dimension");
    return grid_minimize([&](const Vector& y) { return g(y) + (y - x).squaredNorm() / (2.0 * mu); }, grid).value;
}

/// Central differences per coordinate.
inline Vector fd_gradient(const Evaluator& f, const Vector& x, double h = 1e-6) {
    Vector g(x.size());
    Vector y = x;
    for (Index i = 0; i < x.size(); ++i) {
        y[i] = x[i] + h;
        const double fp = f(y);
        y[i] = x[i] - h;
        const double fm = f(y);
        y[i] = x[i];
        g[i] = (fp - fm) / (2.0 * h);
    }
    return g;
}

struct ScalarMinimum {
    double point;
    double value;
};

/// Grid scan of [lo, hi] followed by golden-section search in the bracketing cell pair.
inline ScalarMinimum scalar_minimize(const std::function<double(double)>& f, double lo, double hi, double step) {
    if (!(step > 0.0) || !(hi >= lo)) throw PreconditionError("scalar oracle needs lo <= hi and step > 0");
    const auto count = static_cast<long long>(std::floor((hi - lo) / step)) + 1;
    double best_t = lo;
    double best_v = f(lo);
    for (long long i = 1; i < count; ++i) {
        const double t = lo + step * static_cast<double>(i);
        const double v = f(t);
        if (v < best_v) {
            best_v = v;
            best_t = t;
        }
    }
    double a = std::max(lo, best_t - step);
    double b = std::min(hi, best_t + step);
    const double r = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - r * (b - a);
    double d = a + r * (b - a);
    double fc = f(c);
    double fd = f(d);
    for (int it = 0; it < 200 && b - a > 1e-14 * std::max(1.0, std::abs(a)); ++it) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    const double t = 0.5 * (a + b);
    const double v = f(t);
    return v <= best_v ? ScalarMinimum{t, v} : ScalarMinimum{best_t, best_v};
}

/// Root of a monotone scalar function with a sign change on [lo, hi].
inline double bisect_root(const std::function<double(double)>& f, double lo, double hi, double tol = 1e-12) {
    double flo = f(lo);
    if (flo == 0.0) return lo;
    if ((flo > 0.0) == (f(hi) > 0.0)) throw PreconditionError("bisection needs a sign change");
    for (int it = 0; it < 400 && hi - lo > tol; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fm = f(mid);
        if (fm == 0.0) return mid;
        if ((fm > 0.0) == (flo > 0.0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

struct SimplexMaximum {
    Vector point;
    double value;
};

/**
 * Maximum over the probability simplex (N <= 4): barycentric grid with
 * spacing `resolution`, then pairwise mass-exchange pattern search with a
 * shrinking transfer size.
 */
inline SimplexMaximum simplex_scan_max(const Evaluator& objective, Index n, double resolution) {
    if (n < 1) throw PreconditionError("simplex scan needs N >= 1");
    if (n > 4) throw CapabilityError("simplex scan supports N <= 4");
    if (!(resolution > 0.0 && resolution <= 1.0)) throw PreconditionError("resolution must lie in (0, 1]");
    const long long m = std::max<long long>(1, std::llround(1.0 / resolution));
    SimplexMaximum best{Vector::Unit(n, 0), -kInfinity};
    std::vector<long long> parts(n, 0);
    Vector p(n);
    std::function<void(Index, long long)> rec = [&](Index i, long long remaining) {
        if (i == n - 1) {
            parts[i] = remaining;
            for (Index j = 0; j < n; ++j) p[j] = static_cast<double>(parts[j]) / static_cast<double>(m);
            const double v = objective(p);
            if (v > best.value) best = {p, v};
            return;
        }
        for (long long c = 0; c <= remaining; ++c) {
            parts[i] = c;
            rec(i + 1, remaining - c);
        }
    };
    rec(0, m);

    double delta = 1.0 / static_cast<double>(m);
    while (delta > 1e-12) {
        bool improved = false;
        for (Index i = 0; i < n; ++i) {
            for (Index j = 0; j < n; ++j) {
                if (i == j) continue;
                const double moved = std::min(delta, best.point[j]);
                if (moved <= 0.0) continue;
                Vector q = best.point;
                q[i] += moved;
                q[j] -= moved;
                const double v = objective(q);
                if (v > best.value) {
                    best = {q, v};
                    improved = true;
                }
            }
        }
        if (!improved) delta /= 2.0;
    }
    return best;
}

/**
 * prox of a two-scenario sup-affine family by scanning the ambiguity segment
 * c = (t, 1 - t): picks the c maximizing the member envelope and returns the
 * member prox there. Uses only the member closed form, not the KM iteration.
 */
inline Vector affine_scan_prox(const SupAffineFamily& fam, double mu, const Vector& x, double step = 1e-4) {
    if (fam.rows().rows() != 2) throw CapabilityError("ambiguity scan supports N = 2");
    const double s = fam.sigma();
    auto envelope = [&](double t) {
        Vector c(2);
        c << t, 1.0 - t;
        if ((fam.ambiguity().project(c) - c).norm() > 1e-12) return kInfinity;
        const Vector y = (x - mu * fam.rows().transpose() * c) / (1.0 - 2.0 * s * mu);
        const double fc = c.dot(fam.rows() * y + fam.offsets()) - s * y.squaredNorm();
        return -(fc + (y - x).squaredNorm() / (2.0 * mu));
    };
    const ScalarMinimum best = scalar_minimize(envelope, 0.0, 1.0, step);
    Vector c(2);
    c << best.point, 1.0 - best.point;
    return (x - mu * fam.rows().transpose() * c) / (1.0 - 2.0 * s * mu);
}

struct LassoReference {
    Vector x;
    double value;
};

/**
 * min_{Rx = 0} ||Bx - b||^2 + lambda ||x||_1 by ADMM on the splitting x = z,
 * with the x-update solved exactly on ker R through a basis of the kernel.
 */
inline LassoReference reference_constrained_l1(const Matrix& design, const Vector& target, const Matrix& constraint,
                                               double lambda, int iterations = 1000000, double penalty = 1.0) {
    const Index n = design.cols();
    Matrix basis;
    if (constraint.rows() == 0 || constraint.cwiseAbs().maxCoeff() == 0.0) {
        basis = Matrix::Identity(n, n);
    } else {
        Eigen::FullPivLU<Matrix> lu(constraint);
        basis = lu.kernel();
        Eigen::HouseholderQR<Matrix> qr(basis);
        basis = qr.householderQ() * Matrix::Identity(n, basis.cols());
    }
    // x = Q w; minimize ||B Q w - b||^2 + (rho/2)||Q w - v||^2
    const Matrix bq = design * basis;
    const Matrix lhs = 2.0 * bq.transpose() * bq + penalty * Matrix::Identity(basis.cols(), basis.cols());
    const Eigen::LLT<Matrix> llt(lhs);
    const Vector rhs0 = 2.0 * bq.transpose() * target;
    Vector z = Vector::Zero(n);
    Vector u = Vector::Zero(n);
    Vector x = Vector::Zero(n);
    auto value = [&](const Vector& v) { return (design * v - target).squaredNorm() + lambda * v.lpNorm<1>(); };
    for (int it = 0; it < iterations; ++it) {
        x = basis * llt.solve(rhs0 + penalty * basis.transpose() * (z - u));
        const Vector z_old = z;
        const Vector v = x + u;
        const double t = lambda / penalty;
        z = v.unaryExpr([t](double a) { return sgn(a) * std::max(std::abs(a) - t, 0.0); });
        u += x - z;
        if ((x - z).norm() < 1e-15 && (z - z_old).norm() < 1e-15) break;
    }
    return {x, value(x)};
}

/// min over V of the smoothed objective at fixed mu by projected gradient with step 1/L.
inline double reference_smoothed_minimum(const CompositeProblem& p, double mu, const Vector& x0, int iterations = 1000000) {
    const double a = p.a_map->norm_bound();
    const double step = 1.0 / (p.h->lip_grad() + a * a / mu);
    Vector x = p.subspace->apply(x0);
    double best = kInfinity;
    for (int it = 0; it < iterations; ++it) {
        const SmoothedValue v = smoothed_objective_grad(p, mu, x);
        best = std::min(best, v.value);
        const Vector next = p.subspace->apply(x - step * v.gradient);
        if ((next - x).norm() < 1e-16) break;
        x = next;
    }
    return best;
}

/**
 * Random search for min f over {x in V : ||x|| <= radius}: `restarts`
 * uniform samples, then compass search along an orthonormal basis of V from
 * the best few samples.
 */
inline GridMinimum random_search_min(const Evaluator& f, const Matrix& basis, double radius, int restarts, std::uint64_t seed,
                                     int polished = 20) {
    Rng rng(seed);
    const Index d = basis.cols();
    std::vector<GridMinimum> samples;
    samples.reserve(restarts);
    for (int s = 0; s < restarts; ++s) {
        Vector w = rng.normal_vector(d);
        w *= radius * std::pow(rng.uniform(), 1.0 / static_cast<double>(d)) / std::max(w.norm(), 1e-300);
        const Vector x = basis * w;
        samples.push_back({x, f(x)});
    }
    const auto keep = std::min<std::size_t>(polished, samples.size());
    std::partial_sort(samples.begin(), samples.begin() + keep, samples.end(),
                      [](const GridMinimum& a, const GridMinimum& b) { return a.value < b.value; });
    GridMinimum best = samples.front();
    for (std::size_t s = 0; s < keep; ++s) {
        GridMinimum cur = samples[s];
        double h = 0.1 * radius;
        while (h > 1e-10) {
            bool improved = false;
            for (Index j = 0; j < d; ++j) {
                for (double sign : {1.0, -1.0}) {
                    const Vector y = cur.point + sign * h * basis.col(j);
                    const double v = f(y);
                    if (v < cur.value) {
                        cur = {y, v};
                        improved = true;
                    }
                }
            }
            if (!improved) h /= 2.0;
        }
        if (cur.value < best.value) best = cur;
    }
    return best;
}

/// Orthonormal basis of ker R (identity when R is empty or zero).
inline Matrix kernel_basis(const Matrix& r, Index n) {
    if (r.rows() == 0 || r.cwiseAbs().maxCoeff() == 0.0) return Matrix::Identity(n, n);
    Eigen::JacobiSVD<Matrix> svd(r, Eigen::ComputeFullV);
    const auto& s = svd.singularValues();
    Index rank = 0;
    while (rank < s.size() && s[rank] > 1e-12 * s[0]) ++rank;
    return svd.matrixV().rightCols(n - rank);
}

}  // namespace vsmooth::oracle

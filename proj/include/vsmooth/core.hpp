#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <memory>
#include <optional>
#include <string>

#include "vsmooth/errors.hpp"

namespace vsmooth {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

inline void require_dim(Index got, Index want, const char* what) {
    if (got != want) {
        throw ContractError(std::string(what) + ": dimension " + std::to_string(got) +
                            ", expected " + std::to_string(want));
    }
}

/**
 * A weakly convex function g with a computable proximity operator.
 *
 * g + (rho/2)||.||^2 is convex. prox(mu, x) returns the minimizer of
 * g(y) + ||y - x||^2 / (2 mu), which is unique for mu < mu_bound().
 * Each instance declares its own admissible mu range; callers are
 * validated against it by the non-virtual prox().
 */
class ProxFunction {
public:
    virtual ~ProxFunction() = default;

    virtual double eval(const Vector& x) const = 0;
    virtual double rho() const = 0;
    virtual std::optional<double> lipschitz() const { return std::nullopt; }

    /// Strict upper bound on admissible smoothing parameters.
    virtual double mu_bound() const { return rho() > 0.0 ? 1.0 / rho() : kInfinity; }

    /// Input dimension, or nullopt when the function accepts any size.
    virtual std::optional<Index> dim() const { return std::nullopt; }

    void check_mu(double mu) const {
        if (!(mu > 0.0) || !(mu < mu_bound())) {
            throw ParameterDomainError("smoothing parameter mu=" + std::to_string(mu) +
                                       " outside (0, " + std::to_string(mu_bound()) + ")");
        }
    }

    Vector prox(double mu, const Vector& x) const {
        check_mu(mu);
        if (auto d = dim()) require_dim(x.size(), *d, "prox input");
        return do_prox(mu, x);
    }

protected:
    virtual Vector do_prox(double mu, const Vector& x) const = 0;
};

/// Differentiable h with L-Lipschitz gradient.
class SmoothFunction {
public:
    virtual ~SmoothFunction() = default;
    virtual double eval(const Vector& x) const = 0;
    virtual Vector grad(const Vector& x) const = 0;
    virtual double lip_grad() const = 0;
    virtual std::optional<Index> dim() const { return std::nullopt; }
};

/// Bounded linear operator A: R^in -> R^out.
class LinearMap {
public:
    virtual ~LinearMap() = default;
    virtual Vector apply(const Vector& x) const = 0;
    virtual Vector adjoint(const Vector& y) const = 0;
    virtual double norm_bound() const = 0;
    virtual Index in_dim() const = 0;
    virtual Index out_dim() const = 0;
};

/// Orthogonal projector onto a closed vector subspace V.
class SubspaceProjector {
public:
    virtual ~SubspaceProjector() = default;
    virtual Vector apply(const Vector& x) const = 0;
    virtual Index dim() const = 0;

    bool contains(const Vector& x, double tol) const {
        return (x - apply(x)).norm() <= tol * (1.0 + x.norm());
    }
};

/**
 * Upper bound on the spectral norm of M: power iteration on M^T M
 * (100 iterations, tolerance 1e-10), inflated by 1%.
 */
inline double operator_norm_bound(const Matrix& m, int iterations = 100, double tol = 1e-10) {
    if (m.size() == 0) return 0.0;
    Vector v(m.cols());
    for (Index i = 0; i < v.size(); ++i) v[i] = 1.0 + 0.1 * static_cast<double>(i % 7);
    v.normalize();
    double lambda = 0.0;
    for (int it = 0; it < iterations; ++it) {
        Vector w = m.transpose() * (m * v);
        const double wn = w.norm();
        if (wn == 0.0) return 0.0;
        const double next = v.dot(w);
        v = w / wn;
        if (std::abs(next - lambda) <= tol * std::max(1.0, next)) {
            lambda = next;
            break;
        }
        lambda = next;
    }
    return 1.01 * std::sqrt(std::max(lambda, 0.0));
}

class IdentityMap final : public LinearMap {
public:
    explicit IdentityMap(Index n) : n_(n) {}
    Vector apply(const Vector& x) const override { require_dim(x.size(), n_, "identity map"); return x; }
    Vector adjoint(const Vector& y) const override { require_dim(y.size(), n_, "identity map"); return y; }
    double norm_bound() const override { return 1.0; }
    Index in_dim() const override { return n_; }
    Index out_dim() const override { return n_; }

private:
    Index n_;
};

class MatrixMap final : public LinearMap {
public:
    explicit MatrixMap(Matrix m) : m_(std::move(m)), bound_(operator_norm_bound(m_)) {}

    Vector apply(const Vector& x) const override {
        require_dim(x.size(), m_.cols(), "matrix map input");
        return m_ * x;
    }
    Vector adjoint(const Vector& y) const override {
        require_dim(y.size(), m_.rows(), "matrix map adjoint input");
        return m_.transpose() * y;
    }
    double norm_bound() const override { return bound_; }
    Index in_dim() const override { return m_.cols(); }
    Index out_dim() const override { return m_.rows(); }
    const Matrix& matrix() const { return m_; }

private:
    Matrix m_;
    double bound_;
};

/// V = H.
class IdentityProjector final : public SubspaceProjector {
public:
    explicit IdentityProjector(Index n) : n_(n) {}
    Vector apply(const Vector& x) const override { require_dim(x.size(), n_, "projector input"); return x; }
    Index dim() const override { return n_; }

private:
    Index n_;
};

/**
 * min_{x in V} h(x) + g(Ax).
 *
 * f_star, when known, is a lower bound on the smoothed objectives along a
 * run; the rate-bound diagnostics need it.
 */
struct CompositeProblem {
    std::shared_ptr<const SmoothFunction> h;
    std::shared_ptr<const ProxFunction> g;
    std::shared_ptr<const LinearMap> a_map;
    std::shared_ptr<const SubspaceProjector> subspace;
    std::optional<double> f_star;

    Index dim() const { return a_map->in_dim(); }

    void validate() const {
        if (!h || !g || !a_map || !subspace) throw ContractError("composite problem has a null component");
        if (auto d = h->dim()) require_dim(*d, a_map->in_dim(), "smooth term");
        if (auto d = g->dim()) require_dim(*d, a_map->out_dim(), "weakly convex term");
        require_dim(subspace->dim(), a_map->in_dim(), "subspace");
    }

    /// Unsmoothed objective h(x) + g(Ax).
    double objective(const Vector& x) const {
        require_dim(x.size(), dim(), "objective input");
        return h->eval(x) + g->eval(a_map->apply(x));
    }
};

inline CompositeProblem make_problem(std::shared_ptr<const SmoothFunction> h,
                                     std::shared_ptr<const ProxFunction> g,
                                     std::shared_ptr<const LinearMap> a_map,
                                     std::shared_ptr<const SubspaceProjector> subspace,
                                     std::optional<double> f_star = std::nullopt) {
    CompositeProblem p{std::move(h), std::move(g), std::move(a_map), std::move(subspace), f_star};
    p.validate();
    return p;
}

/// g_mu(x) = g(p) + ||x - p||^2 / (2 mu), p = prox_{mu g}(x).
inline double moreau_envelope(const ProxFunction& g, double mu, const Vector& x) {
    const Vector p = g.prox(mu, x);
    return g.eval(p) + (x - p).squaredNorm() / (2.0 * mu);
}

inline Vector moreau_gradient(const ProxFunction& g, double mu, const Vector& x) {
    return (x - g.prox(mu, x)) / mu;
}

struct SmoothedValue {
    double value;
    Vector gradient;
};

/// F(x) = h(x) + g_mu(Ax) and its gradient grad h(x) + A^*(Ax - prox(Ax)) / mu.
inline SmoothedValue smoothed_objective_grad(const CompositeProblem& p, double mu, const Vector& x) {
    require_dim(x.size(), p.dim(), "smoothed objective input");
    const Vector ax = p.a_map->apply(x);
    const Vector px = p.g->prox(mu, ax);
    const Vector diff = ax - px;
    SmoothedValue out;
    out.value = p.h->eval(x) + p.g->eval(px) + diff.squaredNorm() / (2.0 * mu);
    out.gradient = p.h->grad(x) + p.a_map->adjoint(diff) / mu;
    return out;
}

}  // namespace vsmooth

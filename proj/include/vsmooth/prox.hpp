#pragma once

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <vector>

#include "vsmooth/core.hpp"
#include "vsmooth/projections.hpp"

namespace vsmooth {

// ---------------------------------------------------------------------------
// Elementary instances

class ZeroFunction final : public ProxFunction {
public:
    explicit ZeroFunction(std::optional<Index> n = std::nullopt) : n_(n) {}
    double eval(const Vector&) const override { return 0.0; }
    double rho() const override { return 0.0; }
    std::optional<double> lipschitz() const override { return 0.0; }
    std::optional<Index> dim() const override { return n_; }

protected:
    Vector do_prox(double, const Vector& x) const override { return x; }

private:
    std::optional<Index> n_;
};

/// (c/2) ||y||^2
class HalfSquaredNorm final : public ProxFunction {
public:
    explicit HalfSquaredNorm(double c = 1.0) : c_(c) {}
    double eval(const Vector& x) const override { return 0.5 * c_ * x.squaredNorm(); }
    double rho() const override { return 0.0; }

protected:
    Vector do_prox(double mu, const Vector& x) const override { return x / (1.0 + mu * c_); }

private:
    double c_;
};

// ---------------------------------------------------------------------------
// Scalar regularizers

inline double sgn(double v) { return (v > 0.0) - (v < 0.0); }

/// Soft thresholding: prox of gamma * lambda ||.||_1.
inline Vector prox_l1(double lambda, double gamma, const Vector& x) {
    if (!(gamma > 0.0)) throw ParameterDomainError("l1 prox needs gamma > 0");
    const double t = gamma * lambda;
    return x.unaryExpr([t](double v) { return sgn(v) * std::max(std::abs(v) - t, 0.0); });
}

inline double mcp_value(double lambda, double theta, double x) {
    const double a = std::abs(x);
    return a <= theta * lambda ? lambda * a - x * x / (2.0 * theta) : 0.5 * theta * lambda * lambda;
}

/// Firm thresholding.
inline double prox_mcp(double lambda, double theta, double gamma, double x) {
    if (!(gamma > 0.0) || !(gamma < theta)) throw ParameterDomainError("MCP prox needs 0 < gamma < theta");
    const double a = std::abs(x);
    if (a < gamma * lambda) return 0.0;
    if (a <= theta * lambda) return (x - lambda * gamma * sgn(x)) / (1.0 - gamma / theta);
    return x;
}

inline double scad_value(double lambda, double theta, double x) {
    const double a = std::abs(x);
    if (a <= lambda) return lambda * a;
    if (a <= theta * lambda) return (-a * a + 2.0 * lambda * theta * a - lambda * lambda) / (2.0 * (theta - 1.0));
    return 0.5 * (theta + 1.0) * lambda * lambda;
}

/**
 * SCAD prox by exact piecewise minimization. For gamma < theta - 1 the
 * scalar objective is strongly convex, so each piece has one clamped
 * stationary point and the best candidate is the global minimizer.
 */
inline double prox_scad(double lambda, double theta, double gamma, double x) {
    if (!(theta > 2.0)) throw ParameterDomainError("SCAD needs theta > 2");
    if (!(lambda > 0.0)) throw ParameterDomainError("SCAD needs lambda > 0");
    if (!(gamma > 0.0) || !(gamma < theta - 1.0)) throw ParameterDomainError("SCAD prox needs 0 < gamma < theta - 1");
    const double a = std::abs(x);
    auto objective = [&](double t) { return scad_value(lambda, theta, t) + (t - a) * (t - a) / (2.0 * gamma); };
    const double candidates[] = {
        0.0,
        std::clamp(a - gamma * lambda, 0.0, lambda),
        std::clamp((a * (theta - 1.0) - gamma * lambda * theta) / (theta - 1.0 - gamma), lambda, theta * lambda),
        std::max(a, theta * lambda),
    };
    double best = candidates[0];
    double best_val = objective(best);
    for (double t : candidates) {
        const double v = objective(t);
        if (v < best_val) {
            best = t;
            best_val = v;
        }
    }
    return sgn(x) * best;
}

/// Tukey biweight kernel t^2 / (1 + t^2).
inline double tukey_value(double t) { return t * t / (1.0 + t * t); }

/**
 * Unique root of (t - x)/mu + 2(t - b)/(1 + (t - b)^2)^2 by Newton steps
 * safeguarded with bisection on [min(x,b) - 1, max(x,b) + 1].
 */
inline double prox_tukey(double shift, double mu, double x) {
    if (!(mu > 0.0) || !(mu < 1.0 / 6.0)) throw ParameterDomainError("Tukey prox needs 0 < mu < 1/6");
    auto f = [&](double t) {
        const double s = t - shift;
        const double q = 1.0 + s * s;
        return (t - x) / mu + 2.0 * s / (q * q);
    };
    auto df = [&](double t) {
        const double s = t - shift;
        const double q = 1.0 + s * s;
        return 1.0 / mu + (2.0 - 6.0 * s * s) / (q * q * q);
    };
    double lo = std::min(x, shift) - 1.0;
    double hi = std::max(x, shift) + 1.0;
    double t = x;
    const double ftol = 1e-12 * std::max(1.0, (std::abs(x) + std::abs(shift)) / mu);
    for (int it = 0; it < 200; ++it) {
        const double ft = f(t);
        if (std::abs(ft) <= ftol) return t;
        if (ft > 0.0) hi = t; else lo = t;
        double next = t - ft / df(t);
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(t))) return next;
        t = next;
    }
    return t;
}

enum class RegularizerKind { MCP, SCAD, TUKEY, L1 };

/**
 * Separable regularizer on R^n applied coordinatewise.
 * Tukey carries one shift per coordinate and ignores lambda/theta.
 */
class ScalarRegularizer final : public ProxFunction {
public:
    static ScalarRegularizer l1(Index n, double lambda) { return {RegularizerKind::L1, n, lambda, 0.0, {}}; }
    static ScalarRegularizer mcp(Index n, double lambda, double theta) {
        if (!(theta > 0.0)) throw ParameterDomainError("MCP needs theta > 0");
        return {RegularizerKind::MCP, n, lambda, theta, {}};
    }
    static ScalarRegularizer scad(Index n, double lambda, double theta) {
        if (!(theta > 2.0)) throw ParameterDomainError("SCAD needs theta > 2");
        return {RegularizerKind::SCAD, n, lambda, theta, {}};
    }
    static ScalarRegularizer tukey(Vector shifts) {
        const Index n = shifts.size();
        return {RegularizerKind::TUKEY, n, 1.0, 0.0, std::move(shifts)};
    }

    RegularizerKind kind() const { return kind_; }
    double lambda() const { return lambda_; }
    double theta() const { return theta_; }

    double scalar_value(Index i, double t) const {
        switch (kind_) {
            case RegularizerKind::L1: return lambda_ * std::abs(t);
            case RegularizerKind::MCP: return mcp_value(lambda_, theta_, t);
            case RegularizerKind::SCAD: return scad_value(lambda_, theta_, t);
            case RegularizerKind::TUKEY: return tukey_value(t - shifts_[i]);
        }
        return 0.0;
    }

    double eval(const Vector& x) const override {
        require_dim(x.size(), n_, "regularizer input");
        double s = 0.0;
        for (Index i = 0; i < n_; ++i) s += scalar_value(i, x[i]);
        return s;
    }

    double rho() const override {
        switch (kind_) {
            case RegularizerKind::L1: return 0.0;
            case RegularizerKind::MCP: return 1.0 / theta_;
            case RegularizerKind::SCAD: return 1.0 / (theta_ - 1.0);
            case RegularizerKind::TUKEY: return 6.0;
        }
        return 0.0;
    }

    /// Every kind is globally Lipschitz: |r'| <= lambda for l1/MCP/SCAD and
    /// |phi'| <= 3 sqrt(3) / 8 for Tukey.
    std::optional<double> lipschitz() const override {
        const double rt = std::sqrt(static_cast<double>(n_));
        if (kind_ == RegularizerKind::TUKEY) return 3.0 * std::sqrt(3.0) / 8.0 * rt;
        return lambda_ * rt;
    }

    std::optional<Index> dim() const override { return n_; }

protected:
    Vector do_prox(double mu, const Vector& x) const override {
        if (kind_ == RegularizerKind::L1) return prox_l1(lambda_, mu, x);
        Vector out(n_);
        for (Index i = 0; i < n_; ++i) {
            switch (kind_) {
                case RegularizerKind::MCP: out[i] = prox_mcp(lambda_, theta_, mu, x[i]); break;
                case RegularizerKind::SCAD: out[i] = prox_scad(lambda_, theta_, mu, x[i]); break;
                case RegularizerKind::TUKEY: out[i] = prox_tukey(shifts_[i], mu, x[i]); break;
                default: break;
            }
        }
        return out;
    }

private:
    ScalarRegularizer(RegularizerKind kind, Index n, double lambda, double theta, Vector shifts)
        : kind_(kind), n_(n), lambda_(lambda), theta_(theta), shifts_(std::move(shifts)) {
        if (kind_ != RegularizerKind::TUKEY && !(lambda_ > 0.0)) throw ParameterDomainError("regularizer needs lambda > 0");
    }

    RegularizerKind kind_;
    Index n_;
    double lambda_;
    double theta_;
    Vector shifts_;
};

// ---------------------------------------------------------------------------
// Maximum of N negative squared distances

/// phi(p) = sum_i p_i alpha_i / (2 mu p_i - 1), the envelope of the p-weighted family.
inline double simplex_phi(const Vector& alpha, double mu, const Vector& p) {
    double s = 0.0;
    for (Index i = 0; i < alpha.size(); ++i) s += p[i] * alpha[i] / (2.0 * mu * p[i] - 1.0);
    return s;
}

/**
 * Unique maximizer of phi over the probability simplex for strictly
 * positive alpha and mu in (0, 1/2).
 *
 * With alpha sorted descending (stable in the original index), the first
 * k largest entries get zero weight, where k is the smallest index with
 * (N - k - 2mu) sqrt(alpha_(k+1)) < sum of the remaining square roots; the
 * rest follow the closed form (1/2mu)(1 - (N - k - 2mu) sqrt(alpha_i) / S).
 */
inline Vector solve_simplex_weights(const Vector& alpha, double mu) {
    const Index n = alpha.size();
    if (n < 1) throw PreconditionError("simplex weights need N >= 1");
    if (!(mu > 0.0) || !(mu < 0.5)) throw ParameterDomainError("simplex weights need mu in (0, 1/2)");
    for (Index i = 0; i < n; ++i) {
        if (!(alpha[i] > 0.0)) throw PreconditionError("simplex weights need every alpha_i > 0");
    }
    std::vector<Index> order(n);
    std::iota(order.begin(), order.end(), Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return alpha[a] > alpha[b]; });

    const Vector roots = alpha.cwiseSqrt();
    // tail[i] = sum of sqrt(alpha) over sorted positions i..N-1
    std::vector<double> tail(n + 1, 0.0);
    for (Index i = n - 1; i >= 0; --i) tail[i] = tail[i + 1] + roots[order[i]];

    Index k = n - 1;
    for (Index i = 0; i < n; ++i) {
        if ((static_cast<double>(n - i) - 2.0 * mu) * roots[order[i]] < tail[i]) {
            k = i;
            break;
        }
    }
    Vector p = Vector::Zero(n);
    const double scale = static_cast<double>(n - k) - 2.0 * mu;
    for (Index pos = k; pos < n; ++pos) {
        const Index i = order[pos];
        p[i] = std::max(0.0, (1.0 - scale * roots[i] / tail[k]) / (2.0 * mu));
    }
    return p;
}

struct SimplexKkt {
    double tau;              ///< multiplier of the sum constraint
    double stationarity;     ///< max |alpha_i (2mu p_i - 1)^-2 + tau| over positive p_i
    double min_inactive_eta; ///< min (tau + alpha_i) over zero p_i; +inf if none
    double sum_error;        ///< |sum p - 1|
    double min_weight;
};

/// KKT diagnostics for the simplex weight problem, computed from p alone.
inline SimplexKkt simplex_kkt_check(const Vector& alpha, double mu, const Vector& p, double zero_tol = 1e-14) {
    SimplexKkt out{0.0, 0.0, kInfinity, std::abs(p.sum() - 1.0), p.minCoeff()};
    double acc = 0.0;
    int active = 0;
    for (Index i = 0; i < p.size(); ++i) {
        if (p[i] > zero_tol) {
            const double d = 2.0 * mu * p[i] - 1.0;
            acc += alpha[i] / (d * d);
            ++active;
        }
    }
    out.tau = active > 0 ? -acc / active : 0.0;
    for (Index i = 0; i < p.size(); ++i) {
        if (p[i] > zero_tol) {
            const double d = 2.0 * mu * p[i] - 1.0;
            out.stationarity = std::max(out.stationarity, std::abs(alpha[i] / (d * d) + out.tau));
        } else {
            out.min_inactive_eta = std::min(out.min_inactive_eta, out.tau + alpha[i]);
        }
    }
    return out;
}

/**
 * f(x) = max_i -||x_i - xi_i||^2 on R^{nN}, blocks stored contiguously.
 * 2-weakly convex; prox in closed form for mu in (0, 1/2).
 */
class SupQuadraticFamily final : public ProxFunction {
public:
    /// centers: n x N, column i is xi_i.
    explicit SupQuadraticFamily(Matrix centers) : centers_(std::move(centers)) {
        if (centers_.cols() < 1) throw PreconditionError("sup-quadratic family needs N >= 1");
    }

    Index block_dim() const { return centers_.rows(); }
    Index count() const { return centers_.cols(); }
    const Matrix& centers() const { return centers_; }

    Vector block_sq_distances(const Vector& x) const {
        require_dim(x.size(), block_dim() * count(), "sup-quadratic input");
        const Index n = block_dim();
        Vector alpha(count());
        for (Index i = 0; i < count(); ++i) alpha[i] = (x.segment(i * n, n) - centers_.col(i)).squaredNorm();
        return alpha;
    }

    double eval(const Vector& x) const override { return -block_sq_distances(x).minCoeff(); }
    double rho() const override { return 2.0; }
    double mu_bound() const override { return 0.5; }
    std::optional<Index> dim() const override { return block_dim() * count(); }

    /// Optimal scenario weights: e_i for the first zero distance, else the simplex solution.
    Vector weights(double mu, const Vector& x) const {
        const Vector alpha = block_sq_distances(x);
        for (Index i = 0; i < alpha.size(); ++i) {
            if (alpha[i] == 0.0) return Vector::Unit(alpha.size(), i);
        }
        return solve_simplex_weights(alpha, mu);
    }

protected:
    Vector do_prox(double mu, const Vector& x) const override {
        const Vector p = weights(mu, x);
        const Index n = block_dim();
        Vector out(x.size());
        for (Index i = 0; i < count(); ++i) {
            const double denom = 1.0 - 2.0 * mu * p[i];
            if (denom < 1e-12) throw InternalConsistencyError("sup-quadratic prox denominator vanished");
            out.segment(i * n, n) = (x.segment(i * n, n) - 2.0 * mu * p[i] * centers_.col(i)) / denom;
        }
        return out;
    }

private:
    Matrix centers_;
};

inline Vector prox_sup_quadratic(const SupQuadraticFamily& fam, double mu, const Vector& x) {
    return fam.prox(mu, x);
}

struct EnvelopeIdentity {
    double lhs;  ///< envelope via the prox
    double rhs;  ///< phi at the optimal weights
};

inline EnvelopeIdentity envelope_sup_identity_check(const SupQuadraticFamily& fam, double mu, const Vector& x) {
    fam.check_mu(mu);
    const double lhs = moreau_envelope(fam, mu, x);
    const Vector p = fam.weights(mu, x);
    return {lhs, simplex_phi(fam.block_sq_distances(x), mu, p)};
}

// ---------------------------------------------------------------------------
// Supremum of affine-minus-quadratic functions over an ambiguity set

/**
 * Closed convex subset of the probability simplex, given by its Euclidean
 * projection and its support function sup_{c in C} <v, c>.
 */
struct AmbiguitySet {
    ProjectionFn project;
    std::function<double(const Vector&)> support;

    static AmbiguitySet simplex() {
        return {[](const Vector& v) { return project_simplex(v); },
                [](const Vector& v) { return v.maxCoeff(); }};
    }

    static AmbiguitySet singleton(Vector p0) {
        return {[p0](const Vector&) { return p0; }, [p0](const Vector& v) { return p0.dot(v); }};
    }

    /// {p in simplex : p_i <= upper_i}; requires sum(upper) >= 1.
    static AmbiguitySet capped_simplex(Vector upper) {
        if (upper.sum() < 1.0 || upper.minCoeff() < 0.0) throw PreconditionError("capped simplex is empty");
        auto project = [upper](const Vector& v) {
            // p_i = clamp(v_i - tau, 0, u_i) with sum 1; bisection on tau.
            auto mass = [&](double tau) { return (v.array() - tau).max(0.0).min(upper.array()).sum(); };
            double lo = v.minCoeff() - upper.maxCoeff() - 1.0;
            double hi = v.maxCoeff();
            for (int it = 0; it < 200 && hi - lo > 1e-16 * std::max(1.0, std::abs(hi)); ++it) {
                const double mid = 0.5 * (lo + hi);
                if (mass(mid) > 1.0) lo = mid; else hi = mid;
            }
            const double tau = 0.5 * (lo + hi);
            return Vector((v.array() - tau).max(0.0).min(upper.array()).matrix());
        };
        auto support = [upper](const Vector& v) {
            std::vector<Index> order(v.size());
            std::iota(order.begin(), order.end(), Index{0});
            std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return v[a] > v[b]; });
            double remaining = 1.0;
            double value = 0.0;
            for (Index i : order) {
                const double w = std::min(remaining, upper[i]);
                value += w * v[i];
                remaining -= w;
                if (remaining <= 0.0) break;
            }
            return value;
        };
        return {project, support};
    }
};

struct KmOptions {
    std::optional<double> gamma;                  ///< default 0.9 (1 - 2 sigma mu) / (mu ||A A^T||)
    std::function<double(std::size_t)> relax;     ///< default constant 1/2
    double tol = 1e-10;
    std::size_t max_iter = 200000;
    std::optional<Vector> c0;                     ///< default P_C(uniform)
};

struct KmResult {
    Vector y;
    Vector c;
    std::size_t iterations;
    double residual;  ///< last ||c^{k+1} - c^k||
    double gamma;
};

/**
 * f(x) = sup_{c in C} sum_i c_i (<a_i, x> + b_i) - sigma ||x||^2 on R^n.
 * 2 sigma-weakly convex; prox by Krasnosel'skii-Mann iteration on the
 * worst-case weights.
 */
class SupAffineFamily final : public ProxFunction {
public:
    /// rows: N x n, row i is a_i.
    SupAffineFamily(Matrix rows, Vector offsets, double sigma, AmbiguitySet ambiguity = AmbiguitySet::simplex(),
                    KmOptions km = {})
        : a_(std::move(rows)), b_(std::move(offsets)), sigma_(sigma), set_(std::move(ambiguity)), km_(std::move(km)) {
        if (!(sigma_ > 0.0)) throw ParameterDomainError("sup-affine family needs sigma > 0");
        require_dim(b_.size(), a_.rows(), "sup-affine offsets");
        if (!set_.project || !set_.support) throw ConfigError("sup-affine family needs an ambiguity projector");
        const Matrix gram = a_ * a_.transpose();
        aat_norm_ = gram.size() ? Eigen::SelfAdjointEigenSolver<Matrix>(gram, Eigen::EigenvaluesOnly).eigenvalues().maxCoeff()
                                : 0.0;
        aat_norm_ = std::max(aat_norm_, 0.0);
    }

    const Matrix& rows() const { return a_; }
    const Vector& offsets() const { return b_; }
    double sigma() const { return sigma_; }
    const AmbiguitySet& ambiguity() const { return set_; }
    double gram_norm() const { return aat_norm_; }
    const KmOptions& km_options() const { return km_; }

    double eval(const Vector& x) const override {
        require_dim(x.size(), a_.cols(), "sup-affine input");
        return set_.support(a_ * x + b_) - sigma_ * x.squaredNorm();
    }
    double rho() const override { return 2.0 * sigma_; }
    double mu_bound() const override { return 1.0 / (2.0 * sigma_); }
    std::optional<Index> dim() const override { return a_.cols(); }

    /// prox of the single member f_c: (x - mu A^T c) / (1 - 2 sigma mu).
    Vector member_prox(double mu, const Vector& x, const Vector& c) const {
        return (x - mu * a_.transpose() * c) / (1.0 - 2.0 * sigma_ * mu);
    }

    double default_gamma(double mu) const {
        if (aat_norm_ == 0.0) return 1.0;
        return 0.9 * (1.0 - 2.0 * sigma_ * mu) / (mu * aat_norm_);
    }

protected:
    Vector do_prox(double mu, const Vector& x) const override;

private:
    Matrix a_;
    Vector b_;
    double sigma_;
    AmbiguitySet set_;
    KmOptions km_;
    double aat_norm_ = 0.0;
};

inline KmResult prox_sup_affine(const SupAffineFamily& fam, double mu, const Vector& x, const KmOptions& opts = {}) {
    fam.check_mu(mu);
    require_dim(x.size(), fam.rows().cols(), "sup-affine prox input");
    const double gamma = opts.gamma.value_or(fam.default_gamma(mu));
    if (!(gamma > 0.0) || !(gamma * mu * fam.gram_norm() / (1.0 - 2.0 * fam.sigma() * mu) < 1.0)) {
        throw ParameterDomainError("KM step gamma violates gamma mu ||AA^T|| / (1 - 2 sigma mu) < 1");
    }
    const Matrix& a = fam.rows();
    const Vector& b = fam.offsets();
    const Index big_n = a.rows();
    Vector c = opts.c0 ? *opts.c0 : fam.ambiguity().project(Vector::Constant(big_n, 1.0 / static_cast<double>(big_n)));
    require_dim(c.size(), big_n, "KM initial weights");

    double residual = kInfinity;
    for (std::size_t k = 0; k < opts.max_iter; ++k) {
        const double relax = opts.relax ? opts.relax(k) : 0.5;
        if (!(relax >= 0.0 && relax <= 1.0)) throw ParameterDomainError("KM relaxation must lie in [0, 1]");
        const Vector y = fam.member_prox(mu, x, c);
        const Vector z = c + gamma * (a * y + b);
        Vector next = relax * fam.ambiguity().project(z) + (1.0 - relax) * c;
        residual = (next - c).norm();
        c = std::move(next);
        if (residual <= opts.tol) return {fam.member_prox(mu, x, c), c, k + 1, residual, gamma};
    }
    throw NonconvergenceError("KM iteration for the sup-affine prox hit max_iter", residual);
}

inline Vector SupAffineFamily::do_prox(double mu, const Vector& x) const { return prox_sup_affine(*this, mu, x, km_).y; }

/// ||c - P_C(c + gamma (A y_c + b))||: zero exactly at worst-case weights.
inline double km_fixed_point_residual(const SupAffineFamily& fam, double mu, const Vector& x, double gamma,
                                      const Vector& c) {
    const Vector y = fam.member_prox(mu, x, c);
    return (c - fam.ambiguity().project(c + gamma * (fam.rows() * y + fam.offsets()))).norm();
}

}  // namespace vsmooth

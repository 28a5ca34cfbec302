#pragma once

#include <memory>
#include <optional>
#include <variant>

#include "vsmooth/core.hpp"
#include "vsmooth/projections.hpp"
#include "vsmooth/prox.hpp"
#include "vsmooth/random.hpp"
#include "vsmooth/smooth.hpp"

namespace vsmooth {

/// ker R, or the whole space when R has no rows or is zero.
inline std::shared_ptr<const SubspaceProjector> kernel_or_identity(const Matrix& r, Index n) {
    if (r.rows() == 0 || r.cwiseAbs().maxCoeff() == 0.0) return std::make_shared<IdentityProjector>(n);
    require_dim(r.cols(), n, "constraint matrix columns");
    return std::make_shared<KernelProjector>(r);
}

// ---------------------------------------------------------------------------
// Max dispersion: maximize min_i ||x - u_i||^2 over ker R intersected with B(0, r)

struct MaxDispersionInstance {
    Matrix anchors;     ///< n x N, column i is u_i
    Matrix constraint;  ///< R, V = ker R; zero rows for V = R^n
    double radius = 1.0;
    double lambda = 100.0;

    Index n() const { return anchors.rows(); }
    Index count() const { return anchors.cols(); }

    void validate() const {
        if (count() < 1) throw PreconditionError("max dispersion needs at least one anchor");
        if (!(lambda > 2.0)) throw PreconditionError("max dispersion penalty needs lambda > 2 for coercivity");
        if (!(radius > 0.0)) throw ParameterDomainError("radius must be positive");
        if (constraint.rows() > 0) require_dim(constraint.cols(), n(), "constraint matrix columns");
    }
    BallSpec ball() const { return BallSpec::origin(n(), radius); }
};

/// (lambda/2) max(||x|| - r, 0)^2 + max_i -||x - u_i||^2
inline double max_dispersion_objective(const MaxDispersionInstance& inst, const Vector& x) {
    require_dim(x.size(), inst.n(), "max dispersion point");
    const double out = std::max(x.norm() - inst.radius, 0.0);
    double worst = -kInfinity;
    for (Index i = 0; i < inst.count(); ++i) worst = std::max(worst, -(x - inst.anchors.col(i)).squaredNorm());
    return 0.5 * inst.lambda * out * out + worst;
}

/// The inner max as a sup over the simplex of affine functions minus ||x||^2:
/// a_i = 2 u_i, b_i = -||u_i||^2, sigma = 1.
inline std::shared_ptr<SupAffineFamily> max_dispersion_affine_family(const MaxDispersionInstance& inst, KmOptions km = {}) {
    const Matrix rows = 2.0 * inst.anchors.transpose();
    const Vector offsets = -inst.anchors.colwise().squaredNorm().transpose();
    return std::make_shared<SupAffineFamily>(rows, offsets, 1.0, AmbiguitySet::simplex(), std::move(km));
}

/// Direct form over R^n; the weakly convex term uses the KM prox.
inline CompositeProblem build_max_dispersion_direct(const MaxDispersionInstance& inst, KmOptions km = {}) {
    inst.validate();
    const Index n = inst.n();
    return make_problem(std::make_shared<BallPenalty>(inst.ball(), inst.lambda), max_dispersion_affine_family(inst, std::move(km)),
                        std::make_shared<IdentityMap>(n), kernel_or_identity(inst.constraint, n));
}

/**
 * Product form over R^{nN}: H(x) = (lambda/2) d(x_1, B)^2, g = max_i -||x_i - u_i||^2,
 * subspace (ker R)^N intersected with the diagonal, projected in closed form.
 */
inline CompositeProblem build_max_dispersion_product(const MaxDispersionInstance& inst) {
    inst.validate();
    const Index n = inst.n();
    const Index big_n = inst.count();
    return make_problem(std::make_shared<FirstBlockBallPenalty>(inst.ball(), inst.lambda, big_n),
                        std::make_shared<SupQuadraticFamily>(inst.anchors), std::make_shared<IdentityMap>(n * big_n),
                        std::make_shared<ReplicatedSubspaceProjector>(kernel_or_identity(inst.constraint, n), big_n));
}

/// P_V((lambda mu P_B(x) + prox_{mu g~}(x)) / (1 + lambda mu))
inline Vector max_dispersion_direct_update(const MaxDispersionInstance& inst, double mu, const Vector& x, KmOptions km = {}) {
    const auto fam = max_dispersion_affine_family(inst, km);
    const auto v = kernel_or_identity(inst.constraint, inst.n());
    const double lm = inst.lambda * mu;
    return v->apply((lm * project_ball(inst.ball(), x) + prox_sup_affine(*fam, mu, x, km).y) / (1.0 + lm));
}

/// P_V((mu (lambda x - z) + prox_{mu g}(x)) / (1 + lambda mu)), z = (lambda (x_1 - P_B x_1), 0, ..., 0)
inline Vector max_dispersion_product_update(const MaxDispersionInstance& inst, double mu, const Vector& x) {
    const Index n = inst.n();
    const Index big_n = inst.count();
    require_dim(x.size(), n * big_n, "product iterate");
    Vector z = Vector::Zero(x.size());
    z.head(n) = inst.lambda * (x.head(n) - project_ball(inst.ball(), x.head(n)));
    const SupQuadraticFamily fam(inst.anchors);
    const ReplicatedSubspaceProjector v(kernel_or_identity(inst.constraint, n), big_n);
    return v.apply((mu * (inst.lambda * x - z) + fam.prox(mu, x)) / (1.0 + inst.lambda * mu));
}

/// Deterministic start in V: P_V of a seeded Gaussian direction, scaled to radius r/2.
inline Vector max_dispersion_start(const MaxDispersionInstance& inst, std::uint64_t seed) {
    Rng rng(seed ^ 0x9e3779b97f4a7c15ULL);
    const auto v = kernel_or_identity(inst.constraint, inst.n());
    Vector x = v->apply(rng.normal_vector(inst.n()));
    const double nx = x.norm();
    if (nx == 0.0) return x;
    return (0.5 * inst.radius / nx) * x;
}

/// u_i with coordinates uniform in [0, 2].
inline Matrix random_anchors(Index n, Index count, std::uint64_t seed) {
    Rng rng(seed);
    Matrix u(n, count);
    for (Index j = 0; j < count; ++j)
        for (Index i = 0; i < n; ++i) u(i, j) = 2.0 * rng.uniform();
    return u;
}

// ---------------------------------------------------------------------------
// Discrete distributionally robust optimization

struct DroAffineData {
    Matrix rows;     ///< N x n, scenario cost <a_i, x> + b_i - sigma ||x||^2
    Vector offsets;
    double sigma = 1.0;
    std::optional<AmbiguitySet> ambiguity;
    KmOptions km;
};

struct DroQuadraticData {
    Matrix centers;  ///< n x N, scenario cost -||x_i - xi_i||^2, ambiguity set = simplex
};

struct DroDiscreteInstance {
    std::variant<DroAffineData, DroQuadraticData> data;
    BallSpec ball;  ///< B for the affine case; each Q_i for the quadratic product case
    double lambda;
    std::shared_ptr<const SubspaceProjector> subspace;  ///< V (affine) or nonanticipativity set (quadratic)
};

inline CompositeProblem build_dro_discrete(const DroDiscreteInstance& inst) {
    if (!inst.subspace) throw ConfigError("DRO instance needs a subspace projector");
    if (const auto* aff = std::get_if<DroAffineData>(&inst.data)) {
        if (!aff->ambiguity) throw ConfigError("affine DRO instance needs an ambiguity projector");
        if (!(inst.lambda > 2.0 * aff->sigma)) throw PreconditionError("affine DRO penalty needs lambda > 2 sigma");
        const Index n = aff->rows.cols();
        auto g = std::make_shared<SupAffineFamily>(aff->rows, aff->offsets, aff->sigma, *aff->ambiguity, aff->km);
        return make_problem(std::make_shared<BallPenalty>(inst.ball, inst.lambda), g, std::make_shared<IdentityMap>(n),
                            inst.subspace);
    }
    const auto& quad = std::get<DroQuadraticData>(inst.data);
    if (!(inst.lambda > 2.0)) throw PreconditionError("quadratic DRO penalty needs lambda > 2");
    const Index n = quad.centers.rows();
    const Index big_n = quad.centers.cols();
    return make_problem(std::make_shared<ProductBallPenalty>(inst.ball, inst.lambda, big_n),
                        std::make_shared<SupQuadraticFamily>(quad.centers), std::make_shared<IdentityMap>(n * big_n),
                        inst.subspace);
}

// ---------------------------------------------------------------------------
// Constrained least squares with sparsity-inducing regularizers

struct LassoInstance {
    Matrix design;
    Vector target;
    Matrix constraint;  ///< R, V = ker R; zero rows for V = R^n
    RegularizerKind kind = RegularizerKind::L1;
    double reg_lambda = 1.0;
    double reg_theta = 3.0;
    Matrix tukey_map;   ///< A for the Tukey variant (m_t x n)
    Vector tukey_shifts;

    Index n() const { return design.cols(); }
};

inline std::shared_ptr<const ProxFunction> lasso_regularizer(const LassoInstance& inst) {
    switch (inst.kind) {
        case RegularizerKind::L1: return std::make_shared<ScalarRegularizer>(ScalarRegularizer::l1(inst.n(), inst.reg_lambda));
        case RegularizerKind::MCP:
            return std::make_shared<ScalarRegularizer>(ScalarRegularizer::mcp(inst.n(), inst.reg_lambda, inst.reg_theta));
        case RegularizerKind::SCAD:
            return std::make_shared<ScalarRegularizer>(ScalarRegularizer::scad(inst.n(), inst.reg_lambda, inst.reg_theta));
        case RegularizerKind::TUKEY: return std::make_shared<ScalarRegularizer>(ScalarRegularizer::tukey(inst.tukey_shifts));
    }
    throw ConfigError("unknown regularizer");
}

/// ||B x - b||^2 + r(x) over ker R, or + sum_i phi((A x)_i - b_i) for Tukey.
inline CompositeProblem build_constrained_lasso(const LassoInstance& inst) {
    require_dim(inst.target.size(), inst.design.rows(), "lasso target");
    const Index n = inst.n();
    std::shared_ptr<const LinearMap> a_map;
    if (inst.kind == RegularizerKind::TUKEY) {
        require_dim(inst.tukey_map.cols(), n, "Tukey map columns");
        require_dim(inst.tukey_shifts.size(), inst.tukey_map.rows(), "Tukey shifts");
        a_map = std::make_shared<MatrixMap>(inst.tukey_map);
    } else {
        a_map = std::make_shared<IdentityMap>(n);
    }
    return make_problem(std::make_shared<LeastSquares>(inst.design, inst.target), lasso_regularizer(inst), a_map,
                        kernel_or_identity(inst.constraint, n));
}

/// Gaussian design (m x n), target and constraint rows.
inline LassoInstance random_lasso(Index n, Index m, Index constraint_rows, std::uint64_t seed) {
    Rng rng(seed);
    LassoInstance inst;
    inst.design = rng.normal_matrix(m, n);
    inst.target = rng.normal_vector(m);
    inst.constraint = constraint_rows > 0 ? rng.normal_matrix(constraint_rows, n) : Matrix(0, n);
    return inst;
}

}  // namespace vsmooth

#include <gtest/gtest.h>

#include "vsmooth/applications.hpp"
#include "vsmooth/core.hpp"
#include "vsmooth/oracles.hpp"
#include "vsmooth/prox.hpp"
#include "vsmooth/random.hpp"
#include "vsmooth/smooth.hpp"

using namespace vsmooth;

namespace {

Vector vec(std::initializer_list<double> xs) {
    Vector v(static_cast<Index>(xs.size()));
    Index i = 0;
    for (double x : xs) v[i++] = x;
    return v;
}

CompositeProblem plain(std::shared_ptr<const SmoothFunction> h, std::shared_ptr<const ProxFunction> g, Index n) {
    return make_problem(std::move(h), std::move(g), std::make_shared<IdentityMap>(n), std::make_shared<IdentityProjector>(n));
}

}  // namespace

TEST(MoreauEnvelope, ZeroFunctionIsZero) {
    const ZeroFunction g;
    EXPECT_DOUBLE_EQ(moreau_envelope(g, 0.5, vec({3.0, -1.0})), 0.0);
    EXPECT_EQ(moreau_gradient(g, 0.5, vec({3.0, -1.0})), Vector::Zero(2));
}

TEST(MoreauEnvelope, HalfSquaredNorm) {
    const HalfSquaredNorm g;
    EXPECT_NEAR(moreau_envelope(g, 1.0, vec({2.0, 0.0})), 1.0, 1e-15);
    EXPECT_TRUE(g.prox(1.0, vec({2.0, 0.0})).isApprox(vec({1.0, 0.0})));
    EXPECT_TRUE(moreau_gradient(g, 1.0, vec({2.0, 0.0})).isApprox(vec({1.0, 0.0})));
}

TEST(MoreauEnvelope, SupQuadraticValue) {
    const SupQuadraticFamily fam(Matrix::Zero(1, 3));
    const Vector x = vec({2.0, 1.0, 1.0});
    EXPECT_NEAR(moreau_envelope(fam, 0.25, x), -4.0 / 3.0, 1e-12);
    // frozen: grid minimization of g(y) + 2||y - x||^2 over [-3, 3]^3
    const double grid = oracle::brute_force_envelope([&](const Vector& y) { return fam.eval(y); }, 0.25, x,
                                                     oracle::GridSpec{Vector::Constant(3, -3.0), Vector::Constant(3, 3.0), 0.05, 6});
    EXPECT_NEAR(grid, -4.0 / 3.0, 1e-3);
}

TEST(MoreauEnvelope, RejectsMuOutsideDomain) {
    const SupQuadraticFamily fam(Matrix::Zero(1, 2));
    EXPECT_THROW(moreau_envelope(fam, 0.5, vec({1.0, 2.0})), ParameterDomainError);
    EXPECT_THROW(moreau_envelope(fam, -0.1, vec({1.0, 2.0})), ParameterDomainError);
    EXPECT_THROW(moreau_gradient(HalfSquaredNorm(), 0.0, vec({1.0})), ParameterDomainError);
}

TEST(MoreauGradient, MatchesFiniteDifferences) {
    Rng rng(11);
    const SupQuadraticFamily fam(rng.normal_matrix(2, 3));
    const auto mcp = ScalarRegularizer::mcp(4, 1.0, 2.0);
    const auto tukey = ScalarRegularizer::tukey(rng.normal_vector(3));
    struct Case {
        const ProxFunction* g;
        double mu;
        Index dim;
    };
    for (const Case& c : {Case{&fam, 0.2, 6}, Case{&mcp, 0.7, 4}, Case{&tukey, 0.1, 3}}) {
        for (int t = 0; t < 20; ++t) {
            const Vector x = 2.0 * rng.normal_vector(c.dim);
            const Vector fd = oracle::fd_gradient([&](const Vector& y) { return moreau_envelope(*c.g, c.mu, y); }, x, 1e-6);
            const Vector an = moreau_gradient(*c.g, c.mu, x);
            EXPECT_LE((fd - an).norm(), 1e-4 * std::max(1.0, an.norm()));
        }
    }
}

TEST(MoreauEnvelope, MinorizesAndIsMonotoneInMu) {
    Rng rng(12);
    const SupQuadraticFamily fam(rng.normal_matrix(1, 3));
    const auto scad = ScalarRegularizer::scad(3, 1.0, 3.7);
    for (int t = 0; t < 50; ++t) {
        const Vector x = rng.normal_vector(3);
        for (const ProxFunction* g : {static_cast<const ProxFunction*>(&fam), static_cast<const ProxFunction*>(&scad)}) {
            const double mu_hi = 0.9 * std::min(g->mu_bound(), 1.0);
            const double mu_lo = 0.5 * mu_hi;
            EXPECT_LE(moreau_envelope(*g, mu_hi, x), g->eval(x) + 1e-12);
            EXPECT_LE(moreau_envelope(*g, mu_hi, x), moreau_envelope(*g, mu_lo, x) + 1e-12);
        }
    }
}

TEST(MoreauGradient, LipschitzBound) {
    Rng rng(13);
    const SupQuadraticFamily fam(rng.normal_matrix(1, 3));
    const double mu = 0.2;
    const double rho = fam.rho();
    const double bound = std::max(1.0 / mu, rho / (1.0 - rho * mu));
    for (int t = 0; t < 200; ++t) {
        const Vector x = rng.normal_vector(3);
        const Vector y = x + 0.1 * rng.normal_vector(3);
        EXPECT_LE((moreau_gradient(fam, mu, x) - moreau_gradient(fam, mu, y)).norm(), bound * (x - y).norm() * (1 + 1e-9));
    }
}

TEST(SmoothedObjective, ZeroRegularizerGivesSmoothPart) {
    const auto h = std::make_shared<SquaredDistanceToPoint>(vec({1.0, 2.0}), 1.0);
    const CompositeProblem p = plain(h, std::make_shared<ZeroFunction>(), 2);
    const Vector x = vec({0.3, -0.7});
    const SmoothedValue v = smoothed_objective_grad(p, 0.3, x);
    EXPECT_DOUBLE_EQ(v.value, h->eval(x));
    EXPECT_TRUE(v.gradient.isApprox(h->grad(x)));
}

TEST(SmoothedObjective, ZeroSmoothPartGivesEnvelope) {
    const auto g = std::make_shared<SupQuadraticFamily>(Matrix::Zero(1, 3));
    const CompositeProblem p = plain(std::make_shared<ZeroSmooth>(3), g, 3);
    const Vector x = vec({2.0, 1.0, 1.0});
    const SmoothedValue v = smoothed_objective_grad(p, 0.25, x);
    EXPECT_DOUBLE_EQ(v.value, moreau_envelope(*g, 0.25, x));
    EXPECT_TRUE(v.gradient.isApprox(moreau_gradient(*g, 0.25, x)));
}

TEST(SmoothedObjective, MaxDispersionGradientMatchesFiniteDifferences) {
    MaxDispersionInstance inst{random_anchors(3, 10, 42), Matrix::Ones(1, 3), 1.0, 100.0};
    const CompositeProblem p = build_max_dispersion_direct(inst);
    Rng rng(14);
    for (int t = 0; t < 10; ++t) {
        const Vector x = p.subspace->apply(1.5 * rng.normal_vector(3));
        const double mu = 0.2;
        const Vector fd = oracle::fd_gradient([&](const Vector& y) { return smoothed_objective_grad(p, mu, y).value; }, x, 1e-6);
        const Vector an = smoothed_objective_grad(p, mu, x).gradient;
        EXPECT_LE((fd - an).norm(), 1e-4 * std::max(1.0, an.norm()));
    }
}

TEST(SmoothedObjective, GradientLipschitzBound) {
    Rng rng(15);
    const Matrix a = rng.normal_matrix(4, 3);
    const auto h = std::make_shared<LeastSquares>(rng.normal_matrix(5, 3), rng.normal_vector(5));
    const CompositeProblem p = make_problem(h, std::make_shared<ScalarRegularizer>(ScalarRegularizer::mcp(4, 1.0, 2.0)),
                                            std::make_shared<MatrixMap>(a), std::make_shared<IdentityProjector>(3));
    const double mu = 0.5;
    const double l = h->lip_grad() + std::pow(p.a_map->norm_bound(), 2) / mu;
    for (int t = 0; t < 100; ++t) {
        const Vector x = rng.normal_vector(3);
        const Vector y = x + 0.3 * rng.normal_vector(3);
        const double diff = (smoothed_objective_grad(p, mu, x).gradient - smoothed_objective_grad(p, mu, y).gradient).norm();
        EXPECT_LE(diff, l * (x - y).norm() * (1 + 1e-9));
    }
}

TEST(SmoothedObjective, DimensionMismatchIsContractError) {
    const CompositeProblem p = plain(std::make_shared<ZeroSmooth>(2), std::make_shared<ZeroFunction>(), 2);
    EXPECT_THROW(smoothed_objective_grad(p, 0.1, vec({1.0, 2.0, 3.0})), ContractError);
}

TEST(CompositeProblem, ValidateCatchesInconsistentDimensions) {
    EXPECT_THROW(make_problem(std::make_shared<ZeroSmooth>(3), std::make_shared<ZeroFunction>(2), std::make_shared<IdentityMap>(3),
                              std::make_shared<IdentityProjector>(3)),
                 ContractError);
    EXPECT_THROW(make_problem(std::make_shared<ZeroSmooth>(3), std::make_shared<ZeroFunction>(), std::make_shared<IdentityMap>(3),
                              std::make_shared<IdentityProjector>(2)),
                 ContractError);
    EXPECT_THROW(make_problem(nullptr, std::make_shared<ZeroFunction>(), std::make_shared<IdentityMap>(3),
                              std::make_shared<IdentityProjector>(3)),
                 ContractError);
}

TEST(LinearMap, AdjointAndNormBound) {
    Rng rng(16);
    for (int t = 0; t < 20; ++t) {
        const MatrixMap a(rng.normal_matrix(4, 6));
        const Vector x = rng.normal_vector(6);
        const Vector y = rng.normal_vector(4);
        const double lhs = a.apply(x).dot(y);
        EXPECT_NEAR(lhs, x.dot(a.adjoint(y)), 1e-12 * std::max(1.0, std::abs(lhs)));
        EXPECT_LE(a.apply(x).norm(), a.norm_bound() * x.norm());
    }
}

TEST(LinearMap, NormBoundIsInflatedPowerIterate) {
    Matrix m = Matrix::Zero(2, 2);
    m(0, 0) = 3.0;
    m(1, 1) = 1.0;
    EXPECT_NEAR(operator_norm_bound(m), 3.03, 1e-8);
    EXPECT_EQ(operator_norm_bound(Matrix::Zero(2, 3)), 0.0);
}

TEST(SmoothFunction, GradientsMatchFiniteDifferencesAndLipschitz) {
    Rng rng(17);
    const BallSpec ball(rng.normal_vector(3), 0.7);
    std::vector<std::shared_ptr<const SmoothFunction>> fs = {
        std::make_shared<LeastSquares>(rng.normal_matrix(5, 3), rng.normal_vector(5)),
        std::make_shared<BallPenalty>(ball, 10.0),
        std::make_shared<SquaredDistanceToPoint>(rng.normal_vector(3), 2.5),
        std::make_shared<LinearSmooth>(rng.normal_vector(3), 1.0),
    };
    for (const auto& f : fs) {
        for (int t = 0; t < 20; ++t) {
            const Vector x = 2.0 * rng.normal_vector(3);
            const Vector fd = oracle::fd_gradient([&](const Vector& y) { return f->eval(y); }, x, 1e-6);
            EXPECT_LE((fd - f->grad(x)).norm(), 1e-5 * std::max(1.0, f->grad(x).norm()));
            const Vector y = 2.0 * rng.normal_vector(3);
            EXPECT_LE((f->grad(x) - f->grad(y)).norm(), f->lip_grad() * (x - y).norm() * (1 + 1e-9) + 1e-12);
        }
    }
}

TEST(ProxFunction, ConvexProxIsNonexpansive) {
    Rng rng(18);
    const auto l1 = ScalarRegularizer::l1(4, 0.8);
    const HalfSquaredNorm q(2.0);
    for (int t = 0; t < 100; ++t) {
        const Vector x = rng.normal_vector(4);
        const Vector y = rng.normal_vector(4);
        EXPECT_LE((l1.prox(0.6, x) - l1.prox(0.6, y)).norm(), (x - y).norm() + 1e-15);
        EXPECT_LE((q.prox(0.6, x) - q.prox(0.6, y)).norm(), (x - y).norm() + 1e-15);
    }
}

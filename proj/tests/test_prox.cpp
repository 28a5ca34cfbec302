#include <gtest/gtest.h>

#include "vsmooth/oracles.hpp"
#include "vsmooth/prox.hpp"
#include "vsmooth/random.hpp"

using namespace vsmooth;

namespace {

Vector vec(std::initializer_list<double> xs) {
    Vector v(static_cast<Index>(xs.size()));
    Index i = 0;
    for (double x : xs) v[i++] = x;
    return v;
}

/// g(p) + ||p - x||^2 / (2 mu) <= g(y) + ||y - x||^2 / (2 mu) for random y near p.
void expect_prox_optimal(const ProxFunction& g, double mu, const Vector& x, Rng& rng, int samples = 100) {
    const Vector p = g.prox(mu, x);
    const double best = g.eval(p) + (p - x).squaredNorm() / (2.0 * mu);
    for (int s = 0; s < samples; ++s) {
        const Vector y = p + (s % 2 ? 1e-3 : 0.3) * rng.normal_vector(p.size());
        EXPECT_LE(best, g.eval(y) + (y - x).squaredNorm() / (2.0 * mu) + 1e-9);
    }
}

}  // namespace

// ---------------------------------------------------------------------------
// simplex weights

TEST(SimplexWeights, SingletonSimplex) {
    EXPECT_EQ(solve_simplex_weights(vec({3.7}), 0.25), vec({1.0}));
}

TEST(SimplexWeights, EqualAlphaGivesUniform) {
    const Vector p = solve_simplex_weights(vec({2.0, 2.0, 2.0}), 0.25);
    EXPECT_LE((p - Vector::Constant(3, 1.0 / 3.0)).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(SimplexWeights, OneDominantScenarioDropsOut) {
    const Vector alpha = vec({4.0, 1.0, 1.0});
    const Vector p = solve_simplex_weights(alpha, 0.25);
    EXPECT_LE((p - vec({0.0, 0.5, 0.5})).cwiseAbs().maxCoeff(), 1e-15);
    const SimplexKkt kkt = simplex_kkt_check(alpha, 0.25, p);
    EXPECT_LE(kkt.stationarity, 1e-10);
    EXPECT_GE(kkt.min_inactive_eta, -1e-12);
    // barycentric grid at 1e-3 spacing lands on the same maximizer
    const auto scan = oracle::simplex_scan_max([&](const Vector& q) { return simplex_phi(alpha, 0.25, q); }, 3, 1e-3);
    EXPECT_LE((scan.point - p).cwiseAbs().maxCoeff(), 1e-3);
}

TEST(SimplexWeights, PreconditionsAndDomain) {
    EXPECT_THROW(solve_simplex_weights(vec({1.0, 0.0}), 0.25), PreconditionError);
    EXPECT_THROW(solve_simplex_weights(vec({1.0, -2.0}), 0.25), PreconditionError);
    EXPECT_THROW(solve_simplex_weights(vec({1.0, 2.0}), 0.5), ParameterDomainError);
    EXPECT_THROW(solve_simplex_weights(vec({1.0, 2.0}), 0.0), ParameterDomainError);
}

TEST(SimplexWeights, KktAndMaximalityOnRandomDraws) {
    Rng rng(21);
    for (int t = 0; t < 2000; ++t) {
        const Index n = 1 + static_cast<Index>(rng.uniform() * 6.0);
        const Vector alpha = rng.uniform_vector(n, 0.01, 5.0);
        const double mu = rng.uniform(0.01, 0.49);
        const Vector p = solve_simplex_weights(alpha, mu);
        const SimplexKkt kkt = simplex_kkt_check(alpha, mu, p);
        EXPECT_LE(kkt.sum_error, 1e-12);
        EXPECT_GE(kkt.min_weight, -1e-14);
        EXPECT_LE(kkt.stationarity, 1e-10);
        EXPECT_GE(kkt.min_inactive_eta, -1e-12);
        const double best = simplex_phi(alpha, mu, p);
        for (int s = 0; s < 50; ++s) EXPECT_LE(simplex_phi(alpha, mu, rng.simplex_point(n)), best + 1e-12);
    }
}

TEST(SimplexWeights, TiesAreOrderInvariant) {
    const Vector a = solve_simplex_weights(vec({1.0, 3.0, 3.0, 0.5}), 0.3);
    const Vector b = solve_simplex_weights(vec({3.0, 0.5, 1.0, 3.0}), 0.3);
    EXPECT_NEAR(a[1], b[0], 1e-15);
    EXPECT_NEAR(a[2], b[3], 1e-15);
    EXPECT_NEAR(a[0], b[2], 1e-15);
    EXPECT_NEAR(a[3], b[1], 1e-15);
}

// ---------------------------------------------------------------------------
// sup-quadratic prox

TEST(SupQuadraticProx, CenterIsFixed) {
    const SupQuadraticFamily fam(vec({1.0, 1.0}));
    EXPECT_TRUE(fam.prox(0.25, vec({1.0, 1.0})).isApprox(vec({1.0, 1.0})));
}

TEST(SupQuadraticProx, ThreeScalarScenarios) {
    const SupQuadraticFamily fam(Matrix::Zero(1, 3));
    const Vector x = vec({2.0, 1.0, 1.0});
    const Vector p = prox_sup_quadratic(fam, 0.25, x);
    EXPECT_LE((p - vec({2.0, 4.0 / 3.0, 4.0 / 3.0})).cwiseAbs().maxCoeff(), 1e-14);
    // grid oracle on [-3, 3]^3
    const Vector grid = oracle::brute_force_prox([&](const Vector& y) { return fam.eval(y); }, 0.25, x,
                                                 oracle::GridSpec{Vector::Constant(3, -3.0), Vector::Constant(3, 3.0), 0.05, 6});
    EXPECT_LE((grid - p).cwiseAbs().maxCoeff(), 2e-3);
}

TEST(SupQuadraticProx, ZeroDistanceScenarioTakesAllWeight) {
    Matrix centers(1, 2);
    centers << 5.0, 3.0;
    const SupQuadraticFamily fam(centers);
    const Vector x = vec({5.0, 0.0});
    EXPECT_EQ(fam.weights(0.25, x), vec({1.0, 0.0}));
    EXPECT_TRUE(fam.prox(0.25, x).isApprox(vec({5.0, 0.0})));
}

TEST(SupQuadraticProx, SmallestIndexAmongSeveralZeroDistances) {
    Matrix centers(1, 3);
    centers << 0.0, 1.0, 2.0;
    const SupQuadraticFamily fam(centers);
    EXPECT_EQ(fam.weights(0.2, vec({4.0, 1.0, 2.0})), vec({0.0, 1.0, 0.0}));
}

TEST(SupQuadraticProx, DomainChecks) {
    const SupQuadraticFamily fam(Matrix::Zero(2, 2));
    EXPECT_THROW(fam.prox(0.5, Vector::Ones(4)), ParameterDomainError);
    EXPECT_THROW(fam.prox(0.25, Vector::Ones(3)), ContractError);
    EXPECT_THROW(SupQuadraticFamily(Matrix(2, 0)), PreconditionError);
}

TEST(SupQuadraticProx, OptimalityOnRandomPoints) {
    Rng rng(22);
    for (int t = 0; t < 30; ++t) {
        const SupQuadraticFamily fam(rng.normal_matrix(2, 4));
        expect_prox_optimal(fam, rng.uniform(0.05, 0.45), rng.normal_vector(8), rng);
    }
}

TEST(EnvelopeIdentity, ScalarCases) {
    const SupQuadraticFamily one(vec({0.5}));
    const EnvelopeIdentity a = envelope_sup_identity_check(one, 0.25, vec({2.0}));
    EXPECT_NEAR(a.lhs, 2.25 / (2.0 * 0.25 - 1.0), 1e-14);
    EXPECT_NEAR(a.rhs, a.lhs, 1e-14);

    const EnvelopeIdentity b = envelope_sup_identity_check(SupQuadraticFamily(Matrix::Zero(1, 3)), 0.25, vec({2.0, 1.0, 1.0}));
    EXPECT_NEAR(b.lhs, -4.0 / 3.0, 1e-14);
    EXPECT_NEAR(b.rhs, -4.0 / 3.0, 1e-14);

    const SupQuadraticFamily sym(Matrix::Zero(1, 3));
    const Vector x = vec({1.0, -1.0, 1.0});
    EXPECT_TRUE(sym.weights(0.3, x).isApprox(Vector::Constant(3, 1.0 / 3.0)));
    const EnvelopeIdentity c = envelope_sup_identity_check(sym, 0.3, x);
    EXPECT_NEAR(c.rhs, simplex_phi(Vector::Ones(3), 0.3, Vector::Constant(3, 1.0 / 3.0)), 1e-14);
    EXPECT_NEAR(c.lhs, c.rhs, 1e-13);
}

// ---------------------------------------------------------------------------
// sup-affine prox

TEST(SupAffineProx, ZeroRowsDecouple) {
    const SupAffineFamily fam(Matrix::Zero(3, 2), Vector::Zero(3), 1.0);
    const Vector x = vec({0.4, -1.0});
    const KmResult r = prox_sup_affine(fam, 0.25, x);
    EXPECT_TRUE(r.y.isApprox(2.0 * x));
    EXPECT_LE(r.iterations, 2u);
}

TEST(SupAffineProx, SingletonAmbiguity) {
    Matrix a(1, 2);
    a << 1.0, -2.0;
    const SupAffineFamily fam(a, vec({0.7}), 0.5, AmbiguitySet::singleton(vec({1.0})));
    const Vector x = vec({1.0, 1.0});
    const KmResult r = prox_sup_affine(fam, 0.4, x);
    EXPECT_TRUE(r.y.isApprox((x - 0.4 * a.row(0).transpose()) / (1.0 - 2.0 * 0.5 * 0.4)));
}

TEST(SupAffineProx, TwoScenarioExample) {
    Matrix a(2, 1);
    a << 2.0, -2.0;
    const SupAffineFamily fam(a, Vector::Zero(2), 1.0);
    const Vector x = vec({0.5});
    const KmResult r = prox_sup_affine(fam, 0.2, x);
    // frozen: worst-case weights (1, 0), y = (0.5 - 0.4) / 0.6
    EXPECT_NEAR(r.y[0], 1.0 / 6.0, 1e-9);
    EXPECT_LE((r.c - vec({1.0, 0.0})).norm(), 1e-9);
    const Vector scan = oracle::affine_scan_prox(fam, 0.2, x, 1e-4);
    EXPECT_NEAR(scan[0], r.y[0], 1e-4);
    EXPECT_LE(km_fixed_point_residual(fam, 0.2, x, r.gamma, r.c), 1e-9);
}

TEST(SupAffineProx, StepConditionAndBudget) {
    Matrix a(2, 1);
    a << 2.0, -2.0;
    const SupAffineFamily fam(a, Vector::Zero(2), 1.0);
    KmOptions bad;
    bad.gamma = 10.0;
    EXPECT_THROW(prox_sup_affine(fam, 0.2, vec({0.5}), bad), ParameterDomainError);
    KmOptions tiny;
    tiny.max_iter = 1;
    tiny.tol = 1e-16;
    try {
        prox_sup_affine(fam, 0.2, vec({0.5}), tiny);
        FAIL() << "expected nonconvergence";
    } catch (const NonconvergenceError& e) {
        EXPECT_GT(e.residual(), 0.0);
    }
    EXPECT_THROW(prox_sup_affine(fam, 0.5, vec({0.5})), ParameterDomainError);
    EXPECT_THROW(SupAffineFamily(a, Vector::Zero(2), 0.0), ParameterDomainError);
}

TEST(SupAffineProx, CappedAmbiguityFixedPoint) {
    Rng rng(23);
    Vector caps = vec({0.5, 1.0, 1.0});
    const SupAffineFamily fam(rng.normal_matrix(3, 2), rng.normal_vector(3), 1.0, AmbiguitySet::capped_simplex(caps));
    for (int t = 0; t < 10; ++t) {
        const Vector x = rng.normal_vector(2);
        KmOptions km;
        km.tol = 1e-11;
        const KmResult r = prox_sup_affine(fam, 0.3, x, km);
        EXPECT_LE(km_fixed_point_residual(fam, 0.3, x, r.gamma, r.c), 1e-8);
        EXPECT_LE(r.c[0], 0.5 + 1e-12);
        EXPECT_NEAR(r.c.sum(), 1.0, 1e-12);
        expect_prox_optimal(fam, 0.3, x, rng, 30);
    }
}

TEST(SupAffineProx, OptimalityOnRandomPoints) {
    Rng rng(24);
    for (int t = 0; t < 10; ++t) {
        const SupAffineFamily fam(rng.normal_matrix(4, 3), rng.normal_vector(4), rng.uniform(0.5, 2.0));
        expect_prox_optimal(fam, 0.8 * fam.mu_bound(), rng.normal_vector(3), rng, 50);
    }
}

// ---------------------------------------------------------------------------
// scalar regularizers

TEST(Mcp, Examples) {
    EXPECT_EQ(prox_mcp(1.0, 2.0, 0.5, 0.3), 0.0);
    EXPECT_EQ(prox_mcp(1.0, 2.0, 0.5, 3.0), 3.0);
    EXPECT_NEAR(prox_mcp(1.0, 2.0, 0.5, 1.5), 4.0 / 3.0, 1e-15);
    const auto grid = oracle::scalar_minimize(
        [](double t) { return mcp_value(1.0, 2.0, t) + (t - 1.5) * (t - 1.5) / (2.0 * 0.5); }, -4.0, 4.0, 1e-5);
    EXPECT_NEAR(grid.point, 4.0 / 3.0, 1e-6);
    EXPECT_THROW(prox_mcp(1.0, 2.0, 2.0, 1.0), ParameterDomainError);
    EXPECT_THROW(ScalarRegularizer::mcp(2, 1.0, 0.0), ParameterDomainError);
}

TEST(Scad, Examples) {
    EXPECT_EQ(prox_scad(1.0, 3.0, 0.5, 0.0), 0.0);
    EXPECT_EQ(prox_scad(1.0, 3.0, 0.5, 10.0), 10.0);
    // frozen from a grid + golden-section oracle
    EXPECT_NEAR(prox_scad(1.0, 3.0, 0.5, 1.2), 0.7, 1e-12);
    const auto ref = oracle::scalar_minimize(
        [](double t) { return scad_value(1.0, 3.0, t) + (t - 1.2) * (t - 1.2) / (2.0 * 0.5); }, -4.0, 4.0, 1e-4);
    EXPECT_NEAR(ref.point, 0.7, 1e-7);
    EXPECT_THROW(ScalarRegularizer::scad(2, 1.0, 2.0), ParameterDomainError);
    EXPECT_THROW(prox_scad(1.0, 3.0, 2.0, 1.0), ParameterDomainError);
}

TEST(Tukey, Examples) {
    EXPECT_NEAR(prox_tukey(0.7, 0.1, 0.7), 0.7, 1e-15);
    EXPECT_NEAR(prox_tukey(0.0, 1e-6, 0.5), 0.5, 1e-4);
    // frozen: bisection on (t - x)/mu + 2 t / (1 + t^2)^2 = 0
    EXPECT_NEAR(prox_tukey(0.0, 0.1, 0.5), 0.43831543515062793, 1e-10);
    const double root = oracle::bisect_root(
        [](double t) { return (t - 0.5) / 0.1 + 2.0 * t / ((1.0 + t * t) * (1.0 + t * t)); }, -1.0, 1.5, 1e-14);
    EXPECT_NEAR(prox_tukey(0.0, 0.1, 0.5), root, 1e-10);
    EXPECT_THROW(prox_tukey(0.0, 1.0 / 6.0, 0.5), ParameterDomainError);
}

TEST(L1, Examples) {
    EXPECT_EQ(prox_l1(1.0, 0.5, vec({0.0, 0.0})), vec({0.0, 0.0}));
    EXPECT_TRUE(prox_l1(1.0, 0.5, vec({2.0, -0.2})).isApprox(vec({1.5, 0.0})));
    Rng rng(25);
    for (int t = 0; t < 20; ++t) {
        const double x = rng.uniform(-3.0, 3.0);
        const auto ref = oracle::scalar_minimize([&](double s) { return 0.8 * std::abs(s) + (s - x) * (s - x) / (2.0 * 0.7); },
                                                 -4.0, 4.0, 1e-3);
        // golden section locates a quadratic minimum only to about sqrt(machine epsilon)
        EXPECT_NEAR(prox_l1(0.8, 0.7, vec({x}))[0], ref.point, 1e-7);
    }
}

TEST(ScalarRegularizer, ModuliAndLipschitz) {
    EXPECT_EQ(ScalarRegularizer::l1(5, 1.0).rho(), 0.0);
    EXPECT_DOUBLE_EQ(ScalarRegularizer::mcp(5, 1.0, 4.0).rho(), 0.25);
    EXPECT_DOUBLE_EQ(ScalarRegularizer::scad(5, 1.0, 3.0).rho(), 0.5);
    EXPECT_DOUBLE_EQ(ScalarRegularizer::tukey(Vector::Zero(5)).rho(), 6.0);
    EXPECT_DOUBLE_EQ(*ScalarRegularizer::l1(5, 1.0).lipschitz(), std::sqrt(5.0));
}

TEST(ScalarRegularizer, ProxIsMonotoneAndOptimal) {
    Rng rng(26);
    const std::vector<std::pair<ScalarRegularizer, double>> cases = {
        {ScalarRegularizer::mcp(1, 1.0, 2.0), 1.5},
        {ScalarRegularizer::scad(1, 1.0, 3.7), 2.0},
        {ScalarRegularizer::tukey(vec({0.3})), 0.15},
        {ScalarRegularizer::l1(1, 0.6), 1.0},
    };
    for (const auto& [reg, mu] : cases) {
        double prev = -kInfinity;
        for (double x = -6.0; x <= 6.0; x += 0.01) {
            const double p = reg.prox(mu, vec({x}))[0];
            EXPECT_GE(p, prev - 1e-12);
            prev = p;
        }
        for (int t = 0; t < 10; ++t) expect_prox_optimal(reg, mu, vec({rng.uniform(-4.0, 4.0)}), rng);
    }
}

#include <gtest/gtest.h>

#include "vsmooth/applications.hpp"
#include "vsmooth/oracles.hpp"
#include "vsmooth/penalty.hpp"
#include "vsmooth/random.hpp"

using namespace vsmooth;

namespace {

Vector vec(std::initializer_list<double> xs) {
    Vector v(static_cast<Index>(xs.size()));
    Index i = 0;
    for (double x : xs) v[i++] = x;
    return v;
}

SolverConfig inner_config() {
    SolverConfig inner;
    inner.C = 1e8;
    inner.stop_step_norm = 1e-12;
    inner.max_iter = 100000;
    inner.record_wall_clock = false;
    return inner;
}

PenaltyObjective linear_toy() {
    return {std::make_shared<LinearSmooth>(Vector::Ones(1)), std::make_shared<ZeroFunction>(1), std::make_shared<IdentityMap>(1),
            std::make_shared<IdentityProjector>(1)};
}

}  // namespace

TEST(DistanceSq, Examples) {
    const BallSpec b = BallSpec::origin(2, 1.0);
    const auto inside = penalty_distance_sq(b, vec({0.3, -0.4}));
    EXPECT_EQ(inside.value, 0.0);
    EXPECT_EQ(inside.gradient, Vector::Zero(2));
    const auto out = penalty_distance_sq(b, vec({2.0, 0.0}));
    EXPECT_DOUBLE_EQ(out.value, 0.5);
    EXPECT_TRUE(out.gradient.isApprox(vec({1.0, 0.0})));
}

TEST(DistanceSq, GradientMatchesFiniteDifferences) {
    Rng rng(60);
    const BallSpec b(vec({0.5, -1.0, 2.0}), 1.5);
    for (int t = 0; t < 100; ++t) {
        const Vector x = b.center + (b.radius + rng.uniform(0.1, 3.0)) * rng.normal_vector(3).normalized();
        const Vector fd = oracle::fd_gradient([&](const Vector& y) { return penalty_distance_sq(b, y).value; }, x);
        EXPECT_LE((fd - penalty_distance_sq(b, x).gradient).cwiseAbs().maxCoeff(), 1e-6);
    }
}

TEST(Schedule, Validation) {
    const SolverConfig inner = inner_config();
    EXPECT_THROW((PenaltySchedule{{}, inner}.validate()), PreconditionError);
    EXPECT_THROW((PenaltySchedule{{1.0, 1.0}, inner}.validate()), PreconditionError);
    EXPECT_THROW((PenaltySchedule{{2.0, 1.0}, inner}.validate()), PreconditionError);
    EXPECT_THROW((PenaltySchedule{{0.0, 1.0}, inner}.validate()), PreconditionError);
    const auto g = PenaltySchedule::geometric(3.0, 4, inner);
    EXPECT_EQ(g.lambdas, (std::vector<double>{3.0, 6.0, 12.0, 24.0}));
    EXPECT_NO_THROW(g.validate());
}

TEST(Run, LinearToyStageMinimizers) {
    const auto sched = PenaltySchedule::geometric(1.0, 6, inner_config());
    const auto res = run_penalty(linear_toy(), BallSpec::origin(1, 1.0), sched, Vector::Zero(1), -1.0, 1e-6);
    ASSERT_EQ(res.stages.size(), 6u);
    for (const auto& s : res.stages) {
        EXPECT_NEAR(s.x[0], -1.0 - 1.0 / s.lambda, 1e-6);
        EXPECT_NEAR(s.q, -1.0 - 0.5 / s.lambda, 1e-6);
        EXPECT_NEAR(s.violation, 0.5 / (s.lambda * s.lambda), 1e-6);
    }
    EXPECT_TRUE(res.diagnostics.q_nondecreasing);
    EXPECT_TRUE(res.diagnostics.violation_nonincreasing);
    EXPECT_TRUE(res.diagnostics.f_nondecreasing);
    ASSERT_TRUE(res.diagnostics.sandwich.has_value());
    EXPECT_TRUE(*res.diagnostics.sandwich);
    EXPECT_LT(res.stages.back().violation, 1e-3);
}

TEST(Run, FeasibleMinimizerStaysPut) {
    const Vector target = vec({0.2, -0.1});
    const PenaltyObjective obj{std::make_shared<SquaredDistanceToPoint>(target), std::make_shared<ZeroFunction>(2),
                               std::make_shared<IdentityMap>(2), std::make_shared<IdentityProjector>(2)};
    SolverConfig inner = inner_config();
    inner.C = 0.25;
    const auto res = run_penalty(obj, BallSpec::origin(2, 1.0), PenaltySchedule::geometric(1.0, 4, inner), target);
    for (const auto& s : res.stages) {
        EXPECT_EQ(s.x, target);
        EXPECT_EQ(s.violation, 0.0);
        EXPECT_EQ(s.f, 0.0);
    }
    EXPECT_FALSE(res.diagnostics.sandwich.has_value());
}

TEST(Run, NoSandwichWithoutOptimalValue) {
    const auto res = run_penalty(linear_toy(), BallSpec::origin(1, 1.0), PenaltySchedule::geometric(1.0, 3, inner_config()),
                                 Vector::Zero(1));
    EXPECT_FALSE(res.diagnostics.sandwich.has_value());
}

TEST(Run, SandwichDetectsWrongOptimalValue) {
    const auto res = run_penalty(linear_toy(), BallSpec::origin(1, 1.0), PenaltySchedule::geometric(1.0, 3, inner_config()),
                                 Vector::Zero(1), -2.0);
    EXPECT_FALSE(*res.diagnostics.sandwich);
}

TEST(Run, MaxDispersionSingleAnchorReachesAnalyticValue) {
    // N = 1, u = 0: min (lambda/2)(t - 1)^2 - t^2 for t >= 1 gives -lambda / (lambda - 2)
    const PenaltyObjective obj{std::make_shared<ZeroSmooth>(3), std::make_shared<SupQuadraticFamily>(Matrix::Zero(3, 1)),
                               std::make_shared<IdentityMap>(3), std::make_shared<KernelProjector>(Matrix::Ones(1, 3))};
    SolverConfig inner;
    inner.record_wall_clock = false;
    inner.stop_step_norm = 1e-10;
    const auto sched = PenaltySchedule{{25.0, 50.0, 100.0}, inner};
    const Vector x1 = vec({0.5, -0.5, 0.0});
    const auto res = run_penalty(obj, BallSpec::origin(3, 1.0), sched, x1);
    const auto& last = res.stages.back();
    EXPECT_NEAR(last.q, -100.0 / 98.0, 1e-3);
    EXPECT_TRUE(res.diagnostics.violation_nonincreasing);
    for (const auto& s : res.stages) EXPECT_NEAR(s.q, -s.lambda / (s.lambda - 2.0), 1e-3);
}

TEST(Run, InnerFailureRaisesStageError) {
    class Exploding final : public SmoothFunction {
    public:
        double eval(const Vector& x) const override { return x[0] > 0.5 ? std::nan("") : x[0]; }
        Vector grad(const Vector&) const override { return -Vector::Ones(1); }
        double lip_grad() const override { return 0.0; }
    };
    const PenaltyObjective obj{std::make_shared<Exploding>(), std::make_shared<ZeroFunction>(1), std::make_shared<IdentityMap>(1),
                               std::make_shared<IdentityProjector>(1)};
    SolverConfig inner = inner_config();
    inner.C = 1.0;
    try {
        run_penalty(obj, BallSpec::origin(1, 1.0), PenaltySchedule::geometric(1.0, 3, inner), Vector::Zero(1));
        FAIL() << "expected stage failure";
    } catch (const PenaltyStageError& e) {
        EXPECT_TRUE(e.partial().stages.empty());
    }
}

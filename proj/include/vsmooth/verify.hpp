#pragma once

// Oracle cross-check batteries shared by the `verify` subcommand and the
// acceptance tests. Every battery returns one CheckResult per criterion.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <memory>
#include <string>
#include <vector>

#include "vsmooth/applications.hpp"
#include "vsmooth/core.hpp"
#include "vsmooth/oracles.hpp"
#include "vsmooth/penalty.hpp"
#include "vsmooth/projections.hpp"
#include "vsmooth/prox.hpp"
#include "vsmooth/random.hpp"
#include "vsmooth/solver.hpp"

namespace vsmooth::verify {

struct CheckResult {
    std::string name;
    bool passed;
    double measured;   ///< worst observed error or count
    double threshold;  ///< pass iff measured <= threshold (and any extra conditions in detail)
    std::string detail;
};

inline std::string format_result(const CheckResult& r) {
    char buf[512];
    std::snprintf(buf, sizeof buf, "[%s] %-44s measured=%.3e threshold=%.3e  %s", r.passed ? "PASS" : "FAIL", r.name.c_str(),
                  r.measured, r.threshold, r.detail.c_str());
    return buf;
}

inline bool all_passed(const std::vector<CheckResult>& rs) {
    for (const auto& r : rs)
        if (!r.passed) return false;
    return true;
}

namespace detail {

class Stopwatch {
public:
    double seconds() const { return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count(); }

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

inline std::string fmt(const char* f, double a, double b = 0.0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b);
    return buf;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// prox operators against the grid oracle

struct ProxBatteryOptions {
    int instances = 50;
    std::uint64_t seed = 1;
    double tolerance = 1e-3;
    double time_limit_s = 60.0;
};

inline std::vector<CheckResult> prox_battery(const ProxBatteryOptions& opt = {}) {
    std::vector<CheckResult> out;
    detail::Stopwatch clock;
    Rng rng(opt.seed);

    // Sup-quadratic, n * N <= 3. The prox objective is strongly convex for mu < 1/2.
    {
        double worst = 0.0;
        for (int t = 0; t < opt.instances; ++t) {
            const Index n = 1 + static_cast<Index>(rng.uniform() * 3.0) % 3;
            const Index big_n = std::max<Index>(1, 3 / n - static_cast<Index>(rng.uniform() * 2.0 * (3 / n > 1)));
            const SupQuadraticFamily fam(rng.normal_matrix(n, big_n));
            const Vector x = rng.uniform_vector(n * big_n, -1.5, 1.5);
            const double mu = rng.uniform(0.05, 0.3);
            const Vector closed = fam.prox(mu, x);
            const double radius = 2.0 * (x.norm() + fam.centers().norm()) + 1.0;
            const Vector brute = oracle::brute_force_prox([&](const Vector& y) { return fam.eval(y); }, mu, x,
                                                          oracle::GridSpec::around(x, radius, radius / 50.0, 7));
            worst = std::max(worst, (closed - brute).cwiseAbs().maxCoeff());
        }
        out.push_back({"prox: sup-quadratic vs grid", worst <= opt.tolerance, worst, opt.tolerance,
                       std::to_string(opt.instances) + " instances, n*N <= 3"});
    }

    // Scalar families: one coordinate per instance.
    struct Family {
        const char* name;
        std::function<std::pair<ScalarRegularizer, double>(Rng&)> make;  // regularizer and a valid mu
    };
    const std::vector<Family> families = {
        {"prox: MCP vs grid",
         [](Rng& r) {
             const double theta = r.uniform(1.5, 5.0);
             return std::pair{ScalarRegularizer::mcp(1, r.uniform(0.2, 2.0), theta), r.uniform(0.05, 0.95) * theta};
         }},
        {"prox: SCAD vs grid",
         [](Rng& r) {
             const double theta = r.uniform(2.5, 5.0);
             return std::pair{ScalarRegularizer::scad(1, r.uniform(0.2, 2.0), theta), r.uniform(0.05, 0.95) * (theta - 1.0)};
         }},
        {"prox: Tukey vs grid",
         [](Rng& r) {
             Vector s(1);
             s[0] = r.uniform(-1.0, 1.0);
             return std::pair{ScalarRegularizer::tukey(s), r.uniform(0.01, 0.16)};
         }},
        {"prox: l1 vs grid",
         [](Rng& r) { return std::pair{ScalarRegularizer::l1(1, r.uniform(0.2, 2.0)), r.uniform(0.05, 2.0)}; }},
    };
    for (const auto& fam : families) {
        double worst = 0.0;
        for (int t = 0; t < opt.instances; ++t) {
            auto [reg, mu] = fam.make(rng);
            Vector x(1);
            x[0] = rng.uniform(-5.0, 5.0);
            const Vector closed = reg.prox(mu, x);
            const Vector brute = oracle::brute_force_prox([&](const Vector& y) { return reg.eval(y); }, mu, x,
                                                          oracle::GridSpec::around(x, 6.0, 1e-3, 7));
            worst = std::max(worst, std::abs(closed[0] - brute[0]));
        }
        out.push_back({fam.name, worst <= opt.tolerance, worst, opt.tolerance, std::to_string(opt.instances) + " instances"});
    }

    const double elapsed = clock.seconds();
    out.push_back({"prox: battery runtime", elapsed < opt.time_limit_s, elapsed, opt.time_limit_s, "seconds"});
    return out;
}

// ---------------------------------------------------------------------------
// optimal simplex weights

struct SimplexWeightOptions {
    int draws = 10000;
    int comparisons = 1000;
    Index max_n = 6;
    std::uint64_t seed = 2;
    double kkt_tol = 1e-10;
    double sum_tol = 1e-12;
};

/// KKT residual: the larger of the stationarity mismatch on the support and
/// the dual infeasibility max(0, -(tau + alpha_i)) off the support.
inline std::vector<CheckResult> simplex_weight_battery(const SimplexWeightOptions& opt = {}) {
    Rng rng(opt.seed);
    double worst_kkt = 0.0;
    double worst_sum = 0.0;
    double worst_min_weight = 0.0;
    double worst_gap = 0.0;
    for (int t = 0; t < opt.draws; ++t) {
        const Index n = 1 + static_cast<Index>(rng.uniform() * static_cast<double>(opt.max_n));
        Vector alpha = rng.uniform_vector(n, 0.01, 4.0);
        if (n > 1 && rng.uniform() < 0.3) alpha[0] = alpha[n - 1];  // ties
        const double mu = rng.uniform(0.01, 0.49);
        const Vector p = solve_simplex_weights(alpha, mu);
        const SimplexKkt kkt = simplex_kkt_check(alpha, mu, p);
        worst_kkt = std::max({worst_kkt, kkt.stationarity, -kkt.min_inactive_eta});
        worst_sum = std::max(worst_sum, kkt.sum_error);
        worst_min_weight = std::min(worst_min_weight, kkt.min_weight);
        const double best = simplex_phi(alpha, mu, p);
        for (int s = 0; s < opt.comparisons; ++s) {
            const Vector q = rng.simplex_point(n);
            worst_gap = std::max(worst_gap, simplex_phi(alpha, mu, q) - best);
        }
    }
    return {
        {"simplex weights: KKT residual", worst_kkt <= opt.kkt_tol && worst_min_weight >= 0.0, worst_kkt, opt.kkt_tol,
         detail::fmt("min weight %.1e", worst_min_weight)},
        {"simplex weights: sum to one", worst_sum <= opt.sum_tol, worst_sum, opt.sum_tol, std::to_string(opt.draws) + " draws"},
        {"simplex weights: maximality", worst_gap <= 1e-12, worst_gap, 1e-12,
         "max phi(q) - phi(p) over " + std::to_string(opt.comparisons) + " random q per draw"},
    };
}

// ---------------------------------------------------------------------------
// KM prox of sup-affine families

struct KmBatteryOptions {
    int instances = 20;
    Index max_n = 4;
    std::uint64_t seed = 3;
    double residual_tol = 1e-8;
    std::size_t max_iter = 200000;
    double scan_tol = 1e-4;
};

inline std::vector<CheckResult> km_battery(const KmBatteryOptions& opt = {}) {
    Rng rng(opt.seed);
    double worst_res = 0.0;
    double worst_scan = 0.0;
    std::size_t most_iter = 0;
    int scans = 0;
    int failures = 0;
    for (int t = 0; t < opt.instances; ++t) {
        const Index big_n = 2 + (t % (opt.max_n - 1));
        const Index n = 1 + static_cast<Index>(rng.uniform() * 3.0);
        const double sigma = rng.uniform(0.5, 2.0);
        const SupAffineFamily fam(rng.normal_matrix(big_n, n), rng.normal_vector(big_n), sigma);
        const double mu = rng.uniform(0.1, 0.9) / (2.0 * sigma);
        const Vector x = rng.normal_vector(n);
        KmOptions km;
        km.tol = 1e-11;
        km.max_iter = opt.max_iter;
        try {
            const KmResult r = prox_sup_affine(fam, mu, x, km);
            most_iter = std::max(most_iter, r.iterations);
            worst_res = std::max(worst_res, km_fixed_point_residual(fam, mu, x, r.gamma, r.c));
            if (big_n == 2) {
                ++scans;
                const Vector scan = oracle::affine_scan_prox(fam, mu, x);
                worst_scan = std::max(worst_scan, (scan - r.y).cwiseAbs().maxCoeff());
            }
        } catch (const NonconvergenceError&) {
            ++failures;
        }
    }
    return {
        {"KM prox: fixed-point residual", failures == 0 && worst_res <= opt.residual_tol, worst_res, opt.residual_tol,
         detail::fmt("max iterations %.0f, nonconverged %.0f", static_cast<double>(most_iter), failures)},
        {"KM prox: N=2 ambiguity scan", failures == 0 && scans > 0 && worst_scan <= opt.scan_tol, worst_scan, opt.scan_tol,
         std::to_string(scans) + " two-scenario instances"},
    };
}

// ---------------------------------------------------------------------------
// envelope = phi at the optimal weights = brute-force envelope

struct EnvelopeBatteryOptions {
    int points = 100;
    std::uint64_t seed = 4;
    double identity_tol = 1e-9;
    double brute_tol = 2e-3;
};

inline std::vector<CheckResult> envelope_battery(const EnvelopeBatteryOptions& opt = {}) {
    Rng rng(opt.seed);
    double worst_identity = 0.0;
    double worst_brute = 0.0;
    for (int t = 0; t < opt.points; ++t) {
        const Index n = 1;
        const Index big_n = 1 + (t % 3);
        const SupQuadraticFamily fam(rng.normal_matrix(n, big_n));
        const Vector x = rng.uniform_vector(n * big_n, -1.5, 1.5);
        const double mu = rng.uniform(0.05, 0.4);
        const EnvelopeIdentity id = envelope_sup_identity_check(fam, mu, x);
        worst_identity = std::max(worst_identity, std::abs(id.lhs - id.rhs));
        const double radius = 2.0 * (x.norm() + fam.centers().norm()) / (1.0 - 2.0 * mu) + 1.0;
        const double brute = oracle::brute_force_envelope([&](const Vector& y) { return fam.eval(y); }, mu, x,
                                                          oracle::GridSpec::around(x, radius, radius / 50.0, 7));
        worst_brute = std::max({worst_brute, std::abs(id.lhs - brute), std::abs(id.rhs - brute)});
    }
    return {
        {"envelope: sup identity", worst_identity <= opt.identity_tol, worst_identity, opt.identity_tol,
         std::to_string(opt.points) + " points"},
        {"envelope: brute-force agreement", worst_brute <= opt.brute_tol, worst_brute, opt.brute_tol, "grid envelope"},
    };
}

// ---------------------------------------------------------------------------
// projections

inline std::vector<CheckResult> projection_battery(std::uint64_t seed = 5, int instances = 200) {
    Rng rng(seed);
    double simplex_err = 0.0;
    double kernel_err = 0.0;
    double dykstra_err = 0.0;
    double ball_err = 0.0;
    for (int t = 0; t < instances; ++t) {
        // simplex: threshold found by bisection on sum max(v - tau, 0) = 1
        const Index n = 1 + static_cast<Index>(rng.uniform() * 8.0);
        const Vector v = 3.0 * rng.normal_vector(n);
        const double tau = oracle::bisect_root([&](double s) { return (v.array() - s).max(0.0).sum() - 1.0; },
                                               v.minCoeff() - 2.0, v.maxCoeff(), 1e-15);
        const Vector ref = (v.array() - tau).max(0.0).matrix();
        simplex_err = std::max(simplex_err, (project_simplex(v) - ref).cwiseAbs().maxCoeff());

        // kernel: idempotent, symmetric, R P = 0, residual orthogonal to ker R
        const Index m = 1 + static_cast<Index>(rng.uniform() * 3.0);
        const Index dim = m + 1 + static_cast<Index>(rng.uniform() * 4.0);
        const Matrix r = rng.normal_matrix(m, dim);
        const KernelProjector kp(r);
        const Matrix& p = kp.matrix();
        const Vector y = rng.normal_vector(dim);
        const Matrix basis = oracle::kernel_basis(r, dim);
        const double e = std::max({(p * p - p).cwiseAbs().maxCoeff(), (p - p.transpose()).cwiseAbs().maxCoeff(),
                                   (r * p).cwiseAbs().maxCoeff(), (basis.transpose() * (y - kp.apply(y))).cwiseAbs().maxCoeff()});
        kernel_err = std::max(kernel_err, e);

        // replicated subspace: closed form against Dykstra on (ker R)^N and the diagonal
        const Index blocks = 2 + static_cast<Index>(rng.uniform() * 3.0);
        auto block = std::make_shared<KernelProjector>(r);
        const ReplicatedSubspaceProjector rep(block, blocks);
        const ProductProjector prod(block, blocks);
        const DiagonalProjector diag(dim, blocks);
        const Vector z = rng.normal_vector(dim * blocks);
        const Vector dk = dykstra_project([&](const Vector& w) { return prod.apply(w); },
                                          [&](const Vector& w) { return diag.apply(w); }, z, {1e-14, 100000});
        dykstra_err = std::max(dykstra_err, (dk - rep.apply(z)).cwiseAbs().maxCoeff());

        // ball: against the one-dimensional minimizer along the ray
        const BallSpec ball(rng.normal_vector(dim), rng.uniform(0.1, 2.0));
        const Vector q = ball.center + 2.0 * rng.normal_vector(dim);
        const Vector dir = q - ball.center;
        const double t_star = std::min(1.0, ball.radius / dir.norm());
        ball_err = std::max(ball_err, (project_ball(ball, q) - (ball.center + t_star * dir)).cwiseAbs().maxCoeff());
    }
    return {
        {"projection: simplex vs bisection", simplex_err <= 1e-12, simplex_err, 1e-12, std::to_string(instances) + " vectors"},
        {"projection: kernel projector identities", kernel_err <= 1e-10, kernel_err, 1e-10, "P^2=P, P=P^T, RP=0, orthogonality"},
        {"projection: replicated subspace vs Dykstra", dykstra_err <= 1e-8, dykstra_err, 1e-8, "closed form vs alternating"},
        {"projection: ball vs radial formula", ball_err <= 1e-12, ball_err, 1e-12, ""},
    };
}

// ---------------------------------------------------------------------------
// rate bounds on a constrained l1 least-squares instance

struct BoundsSetup {
    CompositeProblem problem;
    Vector x1;
    SolverConfig cfg;
    double f_star;
};

/// n=5, m=8, V = ker R with R a seeded 2x5 Gaussian, l1 weight 1; F* = min over V of F_1.
inline BoundsSetup lasso_bounds_setup(std::uint64_t seed = 7, int reference_iterations = 1000000) {
    LassoInstance inst = random_lasso(5, 8, 2, seed);
    inst.kind = RegularizerKind::L1;
    inst.reg_lambda = 1.0;
    CompositeProblem p = build_constrained_lasso(inst);
    Rng rng(seed + 1000);
    const Vector x1 = p.subspace->apply(rng.normal_vector(5));
    SolverConfig cfg;
    cfg.record_wall_clock = false;
    cfg.stop_step_norm = 0.0;
    const double f_star = oracle::reference_smoothed_minimum(p, cfg.C, x1, reference_iterations);
    p.f_star = f_star;
    return {p, x1, cfg, f_star};
}

inline std::vector<CheckResult> bounds_battery(const BoundsSetup& s, std::size_t iterations = 10000,
                                               double time_limit_s = 120.0) {
    detail::Stopwatch clock;
    SolverConfig cfg = s.cfg;
    cfg.max_iter = iterations - 1;  // records k = 1 .. iterations
    const IterateTrace trace = run_pvs(s.problem, cfg, s.x1);
    const BoundsCheck bc = check_rate_bounds(s.problem, trace, 0.0);
    const double c_tilde = rate_constant(s.problem, cfg.alpha, cfg.C, trace.records.front().objective, s.f_star);
    const double lg = *s.problem.g->lipschitz();
    double worst1 = -kInfinity;
    double worst2 = -kInfinity;
    double running = kInfinity;
    for (const auto& rec : trace.records) {
        running = std::min(running, rec.proj_grad_norm);
        const double kd = static_cast<double>(rec.k);
        worst1 = std::max(worst1, running / (std::pow(kd, (cfg.alpha - 1.0) / 2.0) * c_tilde));
        worst2 = std::max(worst2, rec.prox_residual / (std::pow(kd, -cfg.alpha) * cfg.C * lg));
    }
    const double elapsed = clock.seconds();
    const std::string span = "k=1.." + std::to_string(trace.records.size());
    return {
        {"bounds: gradient-norm rate", bc.available && bc.bound1_ok, worst1, 1.0, "max ratio to bound, " + span},
        {"bounds: prox-residual rate", bc.available && bc.bound2_ok, worst2, 1.0, "max ratio to bound, " + span},
        {"bounds: runtime", elapsed < time_limit_s, elapsed, time_limit_s, "seconds"},
    };
}

/// Iteration budget 2 max{C~^{2/(1-a)}, (C L_g)^{1/a}} eps^{-2/(1-a)}.
inline double epoch_budget(double c_tilde, double alpha, double C, double lg, double epsilon) {
    const double e = 2.0 / (1.0 - alpha);
    return 2.0 * std::max(std::pow(c_tilde, e), std::pow(C * lg, 1.0 / alpha)) * std::pow(epsilon, -e);
}

inline CheckResult epoch_check(const BoundsSetup& s, double epsilon = 1e-2) {
    SolverConfig cfg = s.cfg;
    const double f1 = smoothed_objective_grad(s.problem, cfg.C, s.x1).value;
    const double c_tilde = rate_constant(s.problem, cfg.alpha, cfg.C, f1, s.f_star);
    const double lg = *s.problem.g->lipschitz();
    const double budget = epoch_budget(c_tilde, cfg.alpha, cfg.C, lg, epsilon);
    // the tighter epoch analysis scales the rate constant by sqrt(1 - alpha)
    const double budget_tight = epoch_budget(c_tilde * std::sqrt(1.0 - cfg.alpha), cfg.alpha, cfg.C, lg, epsilon);
    cfg.max_iter = static_cast<std::size_t>(std::ceil(budget)) + 1;
    try {
        const EpochResult r = run_pvs_epochs(s.problem, cfg, s.x1, epsilon);
        const double used = static_cast<double>(r.trace.iterations);
        return {"epochs: stop within budget", used <= budget, used, budget,
                detail::fmt("stop index %.0f; budget with (1-alpha) factor %.3e", static_cast<double>(r.index), budget_tight)};
    } catch (const SolverError& e) {
        return {"epochs: stop within budget", false, static_cast<double>(e.trace().records.size()), budget, e.what()};
    }
}

/// (K+1)^{1-a} - 1 >= (2^{1-a} - 1) K^{1-a} and the tail form for K >= N, on a log grid of K.
inline CheckResult power_sum_inequality_check(double max_k = 1e6, double max_n = 1e3) {
    int violations = 0;
    int cases = 0;
    double worst = kInfinity;
    std::vector<double> ks;
    for (double k = 1.0; k <= max_k; k = std::max(k + 1.0, std::floor(k * 1.05))) ks.push_back(k);
    ks.push_back(max_k);
    std::vector<double> ns;
    for (double n = 1.0; n <= max_n; n = std::max(n + 1.0, std::floor(n * 1.3))) ns.push_back(n);
    ns.push_back(max_n);
    for (int a10 = 1; a10 <= 9; ++a10) {
        const double alpha = a10 / 10.0;
        for (double k : ks) {
            const double gap = epoch_sum_gap(alpha, k);
            ++cases;
            worst = std::min(worst, gap);
            if (gap < -1e-12 * std::pow(k, 1.0 - alpha)) ++violations;
            for (double n : ns) {
                if (k < n) continue;
                const double tail = tail_sum_gap(alpha, n, k);
                ++cases;
                worst = std::min(worst, tail);
                if (tail < -1e-12 * std::pow(k, 1.0 - alpha)) ++violations;
            }
        }
    }
    return {"power-sum inequalities", violations == 0, static_cast<double>(violations), 0.0,
            detail::fmt("%.0f cases, smallest gap %.3e", cases, worst)};
}

// ---------------------------------------------------------------------------
// penalty monotonicity on a 1-D toy with known stage minimizers

/**
 * min x over [-1, 1]: stage problem x + (lambda/2) d(x, [-1,1])^2 has the
 * minimizer -1 - 1/lambda, so f* = -1 and q_k = -1 - 1/(2 lambda_k).
 */
inline std::vector<CheckResult> penalty_battery(double lambda0 = 1.0, std::size_t stages = 6, double tol = 1e-6) {
    PenaltyObjective obj{std::make_shared<LinearSmooth>(Vector::Ones(1), 0.0), std::make_shared<ZeroFunction>(1),
                         std::make_shared<IdentityMap>(1), std::make_shared<IdentityProjector>(1)};
    SolverConfig inner;
    inner.C = 1e8;
    inner.stop_step_norm = 1e-12;
    inner.max_iter = 100000;
    inner.record_wall_clock = false;
    const PenaltySchedule sched = PenaltySchedule::geometric(lambda0, stages, inner);
    const PenaltyResult res = run_penalty(obj, BallSpec::origin(1, 1.0), sched, Vector::Zero(1), -1.0, tol);
    double stage_err = 0.0;
    for (const auto& s : res.stages) stage_err = std::max(stage_err, std::abs(s.x[0] - (-1.0 - 1.0 / s.lambda)));
    const auto& d = res.diagnostics;
    return {
        {"penalty: stage minimizers", stage_err <= tol, stage_err, tol, std::to_string(stages) + " stages"},
        {"penalty: q nondecreasing", d.q_nondecreasing, 0.0, tol, ""},
        {"penalty: violation nonincreasing", d.violation_nonincreasing, 0.0, tol, ""},
        {"penalty: f nondecreasing", d.f_nondecreasing, 0.0, tol, ""},
        {"penalty: sandwich f* >= q >= f", d.sandwich.value_or(false), 0.0, tol, ""},
    };
}

// ---------------------------------------------------------------------------
// suites

inline std::vector<CheckResult> run_suite(const std::string& name) {
    std::vector<CheckResult> out;
    auto append = [&](std::vector<CheckResult> rs) { out.insert(out.end(), rs.begin(), rs.end()); };
    const bool all = name == "all";
    if (all || name == "prox") {
        append(prox_battery());
        append(simplex_weight_battery());
        append(km_battery());
        append(envelope_battery());
    }
    if (all || name == "projections") append(projection_battery());
    if (all || name == "bounds") {
        const BoundsSetup s = lasso_bounds_setup();
        append(bounds_battery(s));
        out.push_back(epoch_check(s));
        out.push_back(power_sum_inequality_check());
    }
    if (all || name == "penalty") append(penalty_battery());
    if (out.empty()) throw ConfigError("unknown verify suite: " + name);
    return out;
}

inline const std::vector<std::string>& suite_names() {
    static const std::vector<std::string> names = {"prox", "projections", "bounds", "penalty", "all"};
    return names;
}

}  // namespace vsmooth::verify

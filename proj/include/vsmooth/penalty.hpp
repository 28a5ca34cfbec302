#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "vsmooth/core.hpp"
#include "vsmooth/projections.hpp"
#include "vsmooth/smooth.hpp"
#include "vsmooth/solver.hpp"

namespace vsmooth {

struct PenaltyValue {
    double value;
    Vector gradient;
};

/// (1/2) d(x, B)^2 and its gradient x - P_B(x); callers scale by lambda.
inline PenaltyValue penalty_distance_sq(const BallSpec& ball, const Vector& x) {
    const Vector diff = x - project_ball(ball, x);
    return {0.5 * diff.squaredNorm(), diff};
}

struct PenaltySchedule {
    std::vector<double> lambdas;
    SolverConfig inner;

    void validate() const {
        if (lambdas.empty()) throw PreconditionError("penalty schedule is empty");
        if (!(lambdas.front() > 0.0)) throw PreconditionError("penalty coefficients must be positive");
        for (std::size_t i = 1; i < lambdas.size(); ++i) {
            if (!(lambdas[i] > lambdas[i - 1])) throw PreconditionError("penalty coefficients must increase strictly");
        }
    }

    /// lambda_k = lambda0 * 2^k, k = 0 .. stages-1.
    static PenaltySchedule geometric(double lambda0, std::size_t stages, SolverConfig inner) {
        PenaltySchedule s{{}, inner};
        double l = lambda0;
        for (std::size_t i = 0; i < stages; ++i, l *= 2.0) s.lambdas.push_back(l);
        return s;
    }
};

/// f = h0 + g(A .) minimized over V intersected with a ball.
struct PenaltyObjective {
    std::shared_ptr<const SmoothFunction> h0;
    std::shared_ptr<const ProxFunction> g;
    std::shared_ptr<const LinearMap> a_map;
    std::shared_ptr<const SubspaceProjector> subspace;

    double value(const Vector& x) const { return h0->eval(x) + g->eval(a_map->apply(x)); }
};

struct PenaltyStage {
    double lambda;
    Vector x;
    double q;          ///< f(x) + lambda P(x)
    double violation;  ///< P(x) = (1/2) d(x, B)^2
    double f;
    std::size_t iterations;
};

struct PenaltyDiagnostics {
    bool q_nondecreasing = true;
    bool violation_nonincreasing = true;
    bool f_nondecreasing = true;
    std::optional<bool> sandwich;  ///< f* >= q_k >= f_k, only with f* supplied
};

struct PenaltyResult {
    std::vector<PenaltyStage> stages;
    PenaltyDiagnostics diagnostics;
};

class PenaltyStageError : public std::runtime_error {
public:
    PenaltyStageError(const std::string& what, PenaltyResult partial)
        : std::runtime_error(what), partial_(std::move(partial)) {}
    const PenaltyResult& partial() const noexcept { return partial_; }

private:
    PenaltyResult partial_;
};

inline PenaltyDiagnostics penalty_diagnostics(const std::vector<PenaltyStage>& stages, std::optional<double> f_star,
                                              double tol) {
    PenaltyDiagnostics d;
    for (std::size_t i = 1; i < stages.size(); ++i) {
        d.q_nondecreasing = d.q_nondecreasing && stages[i - 1].q <= stages[i].q + tol;
        d.violation_nonincreasing = d.violation_nonincreasing && stages[i - 1].violation >= stages[i].violation - tol;
        d.f_nondecreasing = d.f_nondecreasing && stages[i - 1].f <= stages[i].f + tol;
    }
    if (f_star) {
        bool ok = true;
        for (const auto& s : stages) ok = ok && *f_star >= s.q - tol && s.q - tol >= s.f - 2.0 * tol;
        d.sandwich = ok;
    }
    return d;
}

/**
 * Penalty outer loop: for each lambda_k minimize
 * h0(x) + lambda_k (1/2) d(x,B)^2 + g(Ax) over V with the smoothing solver,
 * warm-starting from the previous stage.
 */
inline PenaltyResult run_penalty(const PenaltyObjective& obj, const BallSpec& ball, const PenaltySchedule& schedule,
                                 const Vector& x1, std::optional<double> f_star = std::nullopt, double tol = 1e-6) {
    schedule.validate();
    PenaltyResult result;
    Vector x = x1;
    for (double lambda : schedule.lambdas) {
        auto h = std::make_shared<SumSmooth>(obj.h0, std::make_shared<BallPenalty>(ball, lambda));
        const CompositeProblem stage = make_problem(h, obj.g, obj.a_map, obj.subspace);
        IterateTrace trace;
        try {
            trace = run_pvs(stage, schedule.inner, x);
        } catch (const SolverError& e) {
            result.diagnostics = penalty_diagnostics(result.stages, f_star, tol);
            throw PenaltyStageError(std::string("penalty stage lambda=") + std::to_string(lambda) + " failed: " + e.what(),
                                    std::move(result));
        }
        x = trace.final_x;
        const double viol = penalty_distance_sq(ball, x).value;
        const double f = obj.value(x);
        result.stages.push_back({lambda, x, f + lambda * viol, viol, f, trace.iterations});
    }
    result.diagnostics = penalty_diagnostics(result.stages, f_star, tol);
    return result;
}

}  // namespace vsmooth

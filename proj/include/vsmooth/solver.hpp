#pragma once

#include <chrono>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "vsmooth/core.hpp"
#include "vsmooth/smooth.hpp"

namespace vsmooth {

struct SolverConfig {
    double alpha = 1.0 / 3.0;
    double C = 0.25;
    std::size_t max_iter = 1000000;
    double stop_step_norm = 1e-5;
    double epsilon = 1e-2;          ///< epoch variant only
    bool record_wall_clock = true;  ///< false writes 0 into elapsed_s for reproducible traces

    void validate(const ProxFunction& g) const {
        if (!(alpha > 0.0 && alpha < 1.0)) throw ParameterDomainError("alpha must lie in (0, 1)");
        if (!(C > 0.0)) throw ParameterDomainError("C must be positive");
        if (2.0 * g.rho() * C > 1.0) throw ParameterDomainError("smoothing constant violates 2 rho C <= 1");
        if (!(C < g.mu_bound())) throw ParameterDomainError("C exceeds the prox domain of g");
        if (!(stop_step_norm >= 0.0)) throw ParameterDomainError("stop_step_norm must be nonnegative");
        if (!(epsilon > 0.0)) throw ParameterDomainError("epsilon must be positive");
    }
};

struct Schedule {
    double mu;
    double lipschitz;
    double gamma;
};

/// mu_k = C k^-alpha, L_k = L_h + ||A||^2 / mu_k, gamma_k = 1 / L_k.
inline Schedule schedule(const SolverConfig& cfg, const CompositeProblem& p, std::size_t k) {
    if (k < 1) throw PreconditionError("schedule index starts at 1");
    const double mu = cfg.C * std::pow(static_cast<double>(k), -cfg.alpha);
    const double a = p.a_map->norm_bound();
    const double lk = p.h->lip_grad() + a * a / mu;
    return {mu, lk, 1.0 / lk};
}

struct IterateRecord {
    std::size_t k;
    double mu;
    double gamma;
    double objective;       ///< F_k(x_k)
    double proj_grad_norm;  ///< ||P_V grad F_k(x_k)||
    double prox_residual;   ///< ||A x_k - prox_{mu_k g}(A x_k)||
    double elapsed_s;
};

enum class StopReason { MaxIter, StepNorm, Epsilon };

inline const char* to_string(StopReason r) {
    switch (r) {
        case StopReason::MaxIter: return "max_iter";
        case StopReason::StepNorm: return "step_norm";
        case StopReason::Epsilon: return "epsilon";
    }
    return "unknown";
}

struct IterateTrace {
    std::vector<IterateRecord> records;
    Vector final_x;
    std::size_t iterations = 0;
    StopReason stop = StopReason::MaxIter;
    double alpha = 0.0;
    double C = 0.0;
};

/// Failure inside a run; carries the trace recorded so far and the best iterate.
class SolverError : public std::runtime_error {
public:
    enum class Kind { NumericalFailure, ProxNonconvergence, BudgetExhausted };

    SolverError(Kind kind, const std::string& what, IterateTrace trace, Vector best)
        : std::runtime_error(what), kind_(kind), trace_(std::move(trace)), best_(std::move(best)) {}

    Kind kind() const noexcept { return kind_; }
    const IterateTrace& trace() const noexcept { return trace_; }
    const Vector& best() const noexcept { return best_; }

private:
    Kind kind_;
    IterateTrace trace_;
    Vector best_;
};

namespace detail {

struct PointEval {
    double value;
    Vector grad;
    double proj_grad_norm;
    double prox_residual;
};

inline PointEval evaluate(const CompositeProblem& p, double mu, const Vector& x) {
    const Vector ax = p.a_map->apply(x);
    const Vector px = p.g->prox(mu, ax);
    const Vector diff = ax - px;
    PointEval e;
    e.value = p.h->eval(x) + p.g->eval(px) + diff.squaredNorm() / (2.0 * mu);
    e.grad = p.h->grad(x) + p.a_map->adjoint(diff) / mu;
    e.proj_grad_norm = p.subspace->apply(e.grad).norm();
    e.prox_residual = diff.norm();
    return e;
}

inline void require_in_subspace(const CompositeProblem& p, const Vector& x) {
    require_dim(x.size(), p.dim(), "iterate");
    if (!p.subspace->contains(x, 1e-9)) throw ContractError("iterate is not in the subspace V");
}

class Clock {
public:
    explicit Clock(bool enabled) : enabled_(enabled), start_(std::chrono::steady_clock::now()) {}
    double elapsed() const {
        if (!enabled_) return 0.0;
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    bool enabled_;
    std::chrono::steady_clock::time_point start_;
};

inline bool finite(const PointEval& e) { return std::isfinite(e.value) && e.grad.allFinite(); }

}  // namespace detail

/// x_{k+1} = P_V(x_k - gamma_k grad F_k(x_k)).
inline Vector pvs_step(const CompositeProblem& p, const SolverConfig& cfg, std::size_t k, const Vector& x) {
    detail::require_in_subspace(p, x);
    const Schedule s = schedule(cfg, p, k);
    const Vector grad = smoothed_objective_grad(p, s.mu, x).gradient;
    return p.subspace->apply(x - s.gamma * grad);
}

/**
 * Projected variable smoothing. Stops after cfg.max_iter steps or once
 * ||x_{k+1} - x_k|| <= cfg.stop_step_norm. Record k describes x_k under
 * mu_k; the trace always holds the initial record.
 */
inline IterateTrace run_pvs(const CompositeProblem& p, const SolverConfig& cfg, const Vector& x1) {
    p.validate();
    cfg.validate(*p.g);
    detail::require_in_subspace(p, x1);

    IterateTrace trace;
    trace.alpha = cfg.alpha;
    trace.C = cfg.C;
    detail::Clock clock(cfg.record_wall_clock);
    Vector x = x1;
    Vector best = x1;
    double best_norm = kInfinity;
    bool stop_after_record = false;

    for (std::size_t k = 1;; ++k) {
        const Schedule s = schedule(cfg, p, k);
        detail::PointEval e;
        try {
            e = detail::evaluate(p, s.mu, x);
        } catch (const NonconvergenceError& err) {
            trace.final_x = x;
            trace.iterations = k - 1;
            throw SolverError(SolverError::Kind::ProxNonconvergence, err.what(), std::move(trace), best);
        }
        if (!detail::finite(e)) {
            trace.final_x = x;
            trace.iterations = k - 1;
            throw SolverError(SolverError::Kind::NumericalFailure, "non-finite objective or gradient at k=" + std::to_string(k),
                              std::move(trace), best);
        }
        trace.records.push_back({k, s.mu, s.gamma, e.value, e.proj_grad_norm, e.prox_residual, clock.elapsed()});
        if (e.proj_grad_norm < best_norm) {
            best_norm = e.proj_grad_norm;
            best = x;
        }
        if (stop_after_record) {
            trace.stop = StopReason::StepNorm;
            break;
        }
        if (k - 1 >= cfg.max_iter) {
            trace.stop = StopReason::MaxIter;
            break;
        }
        Vector next = p.subspace->apply(x - s.gamma * e.grad);
        const double step = (next - x).norm();
        x = std::move(next);
        if (step <= cfg.stop_step_norm) stop_after_record = true;
    }
    trace.final_x = x;
    trace.iterations = trace.records.back().k - 1;
    return trace;
}

struct EpochResult {
    Vector x;
    std::size_t index;  ///< j with x = x_j
    IterateTrace trace;
};

/**
 * Variable smoothing organized in epochs [2^l, 2^{l+1}). Within an epoch
 * the best projected gradient norm is tracked; the run stops at the first
 * new epoch-best iterate with norm <= epsilon and prox residual
 * <= epsilon^{2 alpha / (1 - alpha)}. cfg.max_iter caps the step count.
 */
inline EpochResult run_pvs_epochs(const CompositeProblem& p, const SolverConfig& cfg, const Vector& x1, double epsilon) {
    p.validate();
    cfg.validate(*p.g);
    if (!(epsilon > 0.0)) throw ParameterDomainError("epsilon must be positive");
    detail::require_in_subspace(p, x1);

    const double residual_tol = std::pow(epsilon, 2.0 * cfg.alpha / (1.0 - cfg.alpha));
    IterateTrace trace;
    trace.alpha = cfg.alpha;
    trace.C = cfg.C;
    detail::Clock clock(cfg.record_wall_clock);

    auto eval_at = [&](std::size_t k, const Vector& x) {
        const Schedule s = schedule(cfg, p, k);
        detail::PointEval e;
        try {
            e = detail::evaluate(p, s.mu, x);
        } catch (const NonconvergenceError& err) {
            trace.final_x = x;
            throw SolverError(SolverError::Kind::ProxNonconvergence, err.what(), trace, x);
        }
        if (!detail::finite(e)) {
            trace.final_x = x;
            throw SolverError(SolverError::Kind::NumericalFailure, "non-finite objective or gradient", trace, x);
        }
        trace.records.push_back({k, s.mu, s.gamma, e.value, e.proj_grad_norm, e.prox_residual, clock.elapsed()});
        return std::pair{s, e};
    };

    Vector x = x1;
    auto [sched, current] = eval_at(1, x);
    Vector best = x;
    double best_norm = current.proj_grad_norm;

    for (std::size_t l = 0;; ++l) {
        double epoch_best = kInfinity;
        const std::size_t first = std::size_t{1} << l;
        for (std::size_t k = first; k < 2 * first; ++k) {
            if (k - 1 >= cfg.max_iter) {
                trace.final_x = x;
                trace.iterations = k - 1;
                throw SolverError(SolverError::Kind::BudgetExhausted, "epoch variant exhausted its iteration budget",
                                  std::move(trace), best);
            }
            x = p.subspace->apply(x - sched.gamma * current.grad);
            std::tie(sched, current) = eval_at(k + 1, x);
            if (current.proj_grad_norm < best_norm) {
                best_norm = current.proj_grad_norm;
                best = x;
            }
            if (current.proj_grad_norm <= epoch_best) {
                epoch_best = current.proj_grad_norm;
                if (epoch_best <= epsilon && current.prox_residual <= residual_tol) {
                    trace.final_x = x;
                    trace.iterations = k;
                    trace.stop = StopReason::Epsilon;
                    return {x, k + 1, std::move(trace)};
                }
            }
        }
    }
}

/// sqrt(2) sqrt(L_h + ||A||^2 / C) / sqrt(2^{1-alpha} - 1) * sqrt(F_1(x_1) - F* + C L_g^2)
inline double rate_constant(const CompositeProblem& p, double alpha, double C, double f1, double f_star) {
    const double a = p.a_map->norm_bound();
    const double lg = p.g->lipschitz().value_or(0.0);
    const double gap = std::max(0.0, f1 - f_star + C * lg * lg);
    return std::sqrt(2.0) * std::sqrt(p.h->lip_grad() + a * a / C) / std::sqrt(std::pow(2.0, 1.0 - alpha) - 1.0) *
           std::sqrt(gap);
}

struct StationarityReport {
    double grad_norm;      ///< min_{j<=k} ||P_V grad F_j(x_j)||
    double prox_residual;  ///< at k
    std::optional<double> bound1;
    std::optional<double> bound2;
    bool heuristic;        ///< F* replaced by the smallest observed objective
};

inline StationarityReport stationarity_report(const CompositeProblem& p, const IterateTrace& trace, std::size_t k) {
    if (trace.records.empty()) throw PreconditionError("empty trace");
    if (k < 1 || k > trace.records.size()) throw PreconditionError("report index outside the trace");
    StationarityReport r{kInfinity, trace.records[k - 1].prox_residual, std::nullopt, std::nullopt, false};
    double observed_min = kInfinity;
    for (std::size_t j = 0; j < k; ++j) r.grad_norm = std::min(r.grad_norm, trace.records[j].proj_grad_norm);
    for (const auto& rec : trace.records) observed_min = std::min(observed_min, rec.objective);

    const auto lg = p.g->lipschitz();
    if (!lg) return r;
    r.heuristic = !p.f_star.has_value();
    const double f_star = p.f_star.value_or(observed_min);
    const double kd = static_cast<double>(trace.records[k - 1].k);
    const double c_tilde = rate_constant(p, trace.alpha, trace.C, trace.records.front().objective, f_star);
    r.bound1 = std::pow(kd, (trace.alpha - 1.0) / 2.0) * c_tilde;
    r.bound2 = std::pow(kd, -trace.alpha) * trace.C * *lg;
    return r;
}

struct BoundsCheck {
    bool available = false;  ///< L_g known
    bool heuristic = false;
    bool bound1_ok = true;
    bool bound2_ok = true;
    std::size_t first_violation = 0;  ///< 0 when none
};

/// Evaluates both rate bounds at every record of the trace.
inline BoundsCheck check_rate_bounds(const CompositeProblem& p, const IterateTrace& trace, double slack = 1e-12) {
    BoundsCheck out;
    if (!p.g->lipschitz() || trace.records.empty()) return out;
    out.available = true;
    out.heuristic = !p.f_star.has_value();
    double observed_min = kInfinity;
    for (const auto& rec : trace.records) observed_min = std::min(observed_min, rec.objective);
    const double f_star = p.f_star.value_or(observed_min);
    const double c_tilde = rate_constant(p, trace.alpha, trace.C, trace.records.front().objective, f_star);
    const double lg = *p.g->lipschitz();
    double running = kInfinity;
    for (const auto& rec : trace.records) {
        running = std::min(running, rec.proj_grad_norm);
        const double kd = static_cast<double>(rec.k);
        const bool ok1 = running <= std::pow(kd, (trace.alpha - 1.0) / 2.0) * c_tilde + slack;
        const bool ok2 = rec.prox_residual <= std::pow(kd, -trace.alpha) * trace.C * lg + slack;
        if ((!ok1 || !ok2) && out.first_violation == 0) out.first_violation = rec.k;
        out.bound1_ok = out.bound1_ok && ok1;
        out.bound2_ok = out.bound2_ok && ok2;
    }
    return out;
}

/// y -> g(y + shift), prox_{mu g(. + s)}(y) = prox_{mu g}(y + s) - s.
class ShiftedProx final : public ProxFunction {
public:
    ShiftedProx(std::shared_ptr<const ProxFunction> g, Vector shift) : g_(std::move(g)), s_(std::move(shift)) {}
    double eval(const Vector& y) const override { return g_->eval(y + s_); }
    double rho() const override { return g_->rho(); }
    std::optional<double> lipschitz() const override { return g_->lipschitz(); }
    double mu_bound() const override { return g_->mu_bound(); }
    std::optional<Index> dim() const override { return s_.size(); }

protected:
    Vector do_prox(double mu, const Vector& y) const override { return g_->prox(mu, y + s_) - s_; }

private:
    std::shared_ptr<const ProxFunction> g_;
    Vector s_;
};

/**
 * Recasts min over the affine set z0 + W as min_{x in W} h(x + z0) + g(Ax + Az0).
 * A solution x of the wrapped problem maps back to x + z0.
 */
inline CompositeProblem affine_shift_wrap(const CompositeProblem& p, const Vector& z0) {
    require_dim(z0.size(), p.dim(), "affine shift");
    CompositeProblem out = p;
    out.h = std::make_shared<ShiftedSmooth>(p.h, z0);
    out.g = std::make_shared<ShiftedProx>(p.g, p.a_map->apply(z0));
    return out;
}

/// (K+1)^{1-a} - 1 - (2^{1-a} - 1) K^{1-a}; nonnegative for K >= 1.
inline double epoch_sum_gap(double alpha, double k) {
    const double e = 1.0 - alpha;
    return std::pow(k + 1.0, e) - 1.0 - (std::pow(2.0, e) - 1.0) * std::pow(k, e);
}

/// (K+1)^{1-a} - N^{1-a} - theta K^{1-a} with theta = (1 + 1/N)^{1-a} - 1; nonnegative for K >= N.
inline double tail_sum_gap(double alpha, double n, double k) {
    const double e = 1.0 - alpha;
    const double theta = std::pow(1.0 + 1.0 / n, e) - 1.0;
    return std::pow(k + 1.0, e) - std::pow(n, e) - theta * std::pow(k, e);
}

}  // namespace vsmooth

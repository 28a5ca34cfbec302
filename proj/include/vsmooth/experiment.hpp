#pragma once

// JSON-configured experiment runner: builds a seeded instance, runs the
// chosen solver, writes a trace CSV and a summary JSON.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>

#include <json.hpp>

#include "vsmooth/applications.hpp"
#include "vsmooth/oracles.hpp"
#include "vsmooth/random.hpp"
#include "vsmooth/solver.hpp"

namespace vsmooth {

using json = nlohmann::json;

enum class ExitCode : int { Ok = 0, InvalidConfig = 2, SolverFailure = 3 };

struct ExperimentConfig {
    std::string problem = "max-dispersion";  ///< max-dispersion | dro | lasso
    std::string formulation = "direct";      ///< direct | product
    std::string algorithm = "pvs";           ///< pvs | pvs-epochs
    Index n = 3;
    Index N = 10;
    double alpha = 1.0 / 3.0;
    double C = 0.25;
    double lambda = 100.0;
    double radius = 1.0;
    double epsilon = 1e-2;
    double stop_step_norm = 1e-5;
    std::size_t max_iter = 1000000;
    std::uint64_t seed = 42;
    Matrix R = Matrix(0, 0);
    std::string trace_path = "trace.csv";
    std::string summary_path = "summary.json";
    std::optional<std::string> instance_path;
    bool wall_clock = false;
    // lasso
    Index m = 8;
    std::string regularizer = "l1";  ///< l1 | mcp | scad | tukey
    double reg_lambda = 1.0;
    double reg_theta = 3.0;
    // dro
    double sigma = 1.0;
    std::optional<double> ambiguity_cap;

    SolverConfig solver() const {
        SolverConfig s;
        s.alpha = alpha;
        s.C = C;
        s.max_iter = max_iter;
        s.stop_step_norm = stop_step_norm;
        s.epsilon = epsilon;
        s.record_wall_clock = wall_clock;
        return s;
    }
};

namespace detail {

inline void require_finite(double v, const char* field) {
    if (!std::isfinite(v)) throw ConfigError(std::string("config field '") + field + "' must be finite");
}

inline Matrix matrix_from_json(const json& rows, const char* field) {
    if (!rows.is_array()) throw ConfigError(std::string("'") + field + "' must be an array of rows");
    if (rows.empty()) return Matrix(0, 0);
    const std::size_t cols = rows.front().size();
    Matrix m(static_cast<Index>(rows.size()), static_cast<Index>(cols));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (!rows[i].is_array() || rows[i].size() != cols) throw ConfigError(std::string("'") + field + "' rows must have equal length");
        for (std::size_t j = 0; j < cols; ++j) {
            if (!rows[i][j].is_number()) throw ConfigError(std::string("'") + field + "' entries must be numbers");
            m(static_cast<Index>(i), static_cast<Index>(j)) = rows[i][j].get<double>();
        }
    }
    if (!m.allFinite()) throw ConfigError(std::string("'") + field + "' entries must be finite");
    return m;
}

inline json matrix_to_json(const Matrix& m) {
    json rows = json::array();
    for (Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(row);
    }
    return rows;
}

inline json vector_to_json(const Vector& v) {
    json out = json::array();
    for (Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
    return out;
}

template <class T>
T get_field(const json& j, const char* key) {
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError(std::string("config field '") + key + "' has the wrong type");
    }
}

}  // namespace detail

/// Strict parse: unknown fields, wrong types and non-finite numbers are rejected.
inline ExperimentConfig parse_config(const json& j) {
    static const std::set<std::string> known = {
        "problem", "formulation", "algorithm",   "n",          "N",          "alpha",         "C",
        "lambda",  "radius",      "epsilon",     "stop_step_norm", "max_iter", "seed",        "R",
        "trace_path", "summary_path", "instance_path", "wall_clock", "m",     "regularizer", "reg_lambda",
        "reg_theta", "sigma",     "ambiguity_cap"};
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    for (const auto& [key, _] : j.items())
        if (!known.count(key)) throw ConfigError("unknown config field '" + key + "'");

    ExperimentConfig c;
    using detail::get_field;
    auto num = [&](const char* key, double& out) {
        if (j.contains(key)) {
            if (!j.at(key).is_number()) throw ConfigError(std::string("config field '") + key + "' must be a number");
            out = j.at(key).get<double>();
            detail::require_finite(out, key);
        }
    };
    auto count = [&](const char* key, auto& out) {
        if (j.contains(key)) {
            const json& v = j.at(key);
            if (!v.is_number_integer() || (!v.is_number_unsigned() && v.get<std::int64_t>() < 0))
                throw ConfigError(std::string("config field '") + key + "' must be a nonnegative integer");
            out = static_cast<std::remove_reference_t<decltype(out)>>(v.get<std::uint64_t>());
        }
    };
    auto str = [&](const char* key, std::string& out) {
        if (j.contains(key)) out = get_field<std::string>(j, key);
    };
    str("problem", c.problem);
    str("formulation", c.formulation);
    str("algorithm", c.algorithm);
    count("n", c.n);
    count("N", c.N);
    num("alpha", c.alpha);
    num("C", c.C);
    num("lambda", c.lambda);
    num("radius", c.radius);
    num("epsilon", c.epsilon);
    num("stop_step_norm", c.stop_step_norm);
    count("max_iter", c.max_iter);
    count("seed", c.seed);
    count("m", c.m);
    str("trace_path", c.trace_path);
    str("summary_path", c.summary_path);
    if (j.contains("instance_path")) c.instance_path = get_field<std::string>(j, "instance_path");
    if (j.contains("wall_clock")) c.wall_clock = get_field<bool>(j, "wall_clock");
    str("regularizer", c.regularizer);
    num("reg_lambda", c.reg_lambda);
    num("reg_theta", c.reg_theta);
    num("sigma", c.sigma);
    if (j.contains("ambiguity_cap")) {
        double cap = 0.0;
        num("ambiguity_cap", cap);
        c.ambiguity_cap = cap;
    }
    if (j.contains("R")) c.R = detail::matrix_from_json(j.at("R"), "R");

    if (c.problem != "max-dispersion" && c.problem != "dro" && c.problem != "lasso")
        throw ConfigError("problem must be one of max-dispersion, dro, lasso");
    if (c.formulation != "direct" && c.formulation != "product") throw ConfigError("formulation must be direct or product");
    if (c.algorithm != "pvs" && c.algorithm != "pvs-epochs") throw ConfigError("algorithm must be pvs or pvs-epochs");
    if (c.problem == "lasso" && c.formulation != "direct") throw ConfigError("lasso has only the direct formulation");
    if (c.regularizer != "l1" && c.regularizer != "mcp" && c.regularizer != "scad" && c.regularizer != "tukey")
        throw ConfigError("regularizer must be one of l1, mcp, scad, tukey");
    if (c.n < 1 || c.N < 1) throw ConfigError("n and N must be positive");
    if (c.problem == "lasso" && c.m < 1) throw ConfigError("m must be positive");
    if (c.R.size() > 0 && c.R.cols() != c.n) throw ConfigError("R must have n columns");
    if (c.trace_path.empty() || c.summary_path.empty()) throw ConfigError("output paths must be nonempty");
    return c;
}

inline ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config " + path);
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    return parse_config(j);
}

// ---------------------------------------------------------------------------
// seeded instances

/**
 * Instance JSON for `kind` in {max-dispersion, dro, lasso}. Draw order is
 * part of the format: max-dispersion anchors column by column as 2 u;
 * dro rows (N x n), offsets (N), centers (n x N) as standard normals;
 * lasso design (m x n, N is m), target (m), as standard normals.
 */
inline json generate_instance(const std::string& kind, Index n, Index big_n, std::uint64_t seed) {
    if (n < 1 || big_n < 1) throw ConfigError("instance sizes must be positive");
    json out{{"kind", kind}, {"n", n}, {"N", big_n}, {"seed", seed}};
    if (kind == "max-dispersion") {
        out["anchors"] = detail::matrix_to_json(random_anchors(n, big_n, seed).transpose());
    } else if (kind == "dro") {
        Rng rng(seed);
        out["rows"] = detail::matrix_to_json(rng.normal_matrix(big_n, n));
        out["offsets"] = detail::vector_to_json(rng.normal_vector(big_n));
        out["centers"] = detail::matrix_to_json(rng.normal_matrix(n, big_n).transpose());
    } else if (kind == "lasso") {
        Rng rng(seed);
        out["design"] = detail::matrix_to_json(rng.normal_matrix(big_n, n));
        out["target"] = detail::vector_to_json(rng.normal_vector(big_n));
    } else {
        throw ConfigError("unknown instance kind '" + kind + "'");
    }
    return out;
}

inline void write_text(const std::string& path, const std::string& text) {
    const std::filesystem::path p(path);
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << text;
}

struct BuiltExperiment {
    CompositeProblem problem;
    Vector x1;
    std::function<double(const Vector&)> objective;  ///< reported final objective
};

namespace detail {

inline json instance_for(const ExperimentConfig& c, const std::string& kind) {
    const Index rows = kind == "lasso" ? c.m : c.N;
    if (!c.instance_path) return generate_instance(kind, c.n, rows, c.seed);
    std::ifstream in(*c.instance_path);
    if (!in) throw ConfigError("cannot open instance " + *c.instance_path);
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("instance is not valid JSON: ") + e.what());
    }
    if (!j.contains("kind") || j["kind"] != kind) throw ConfigError("instance kind does not match the problem");
    if (!j.contains("n") || !j.contains("N") || j["n"] != c.n || j["N"] != rows)
        throw ConfigError("instance sizes do not match the config");
    return j;
}

inline Vector seeded_start(const CompositeProblem& p, Index block, Index blocks, std::uint64_t seed, double scale) {
    Rng rng(seed ^ 0x9e3779b97f4a7c15ULL);
    const Vector b = rng.normal_vector(block);
    Vector x(block * blocks);
    for (Index i = 0; i < blocks; ++i) x.segment(i * block, block) = b;
    x = p.subspace->apply(x);
    const double nx = x.norm();
    return nx > 0.0 ? Vector(scale * x / nx) : x;
}

inline Vector vector_from_json(const json& j, const char* field) {
    const Matrix m = matrix_from_json(json::array({j}), field);
    return m.row(0).transpose();
}

}  // namespace detail

inline BuiltExperiment build_experiment(const ExperimentConfig& c) {
    const Index n = c.n;
    if (c.problem == "max-dispersion") {
        const json inst_json = detail::instance_for(c, "max-dispersion");
        MaxDispersionInstance inst{detail::matrix_from_json(inst_json.at("anchors"), "anchors").transpose(), c.R, c.radius,
                                   c.lambda};
        try {
            inst.validate();
        } catch (const std::exception& e) {
            throw ConfigError(e.what());
        }
        const Vector start = max_dispersion_start(inst, c.seed);
        auto objective = [inst](const Vector& x) { return max_dispersion_objective(inst, x.head(inst.n())); };
        if (c.formulation == "direct") return {build_max_dispersion_direct(inst), start, objective};
        Vector x1(n * c.N);
        for (Index i = 0; i < c.N; ++i) x1.segment(i * n, n) = start;
        return {build_max_dispersion_product(inst), x1, objective};
    }
    if (c.problem == "dro") {
        const json inst_json = detail::instance_for(c, "dro");
        DroDiscreteInstance inst{DroQuadraticData{}, BallSpec::origin(n, c.radius), c.lambda, nullptr};
        if (c.formulation == "direct") {
            DroAffineData d;
            d.rows = detail::matrix_from_json(inst_json.at("rows"), "rows");
            d.offsets = detail::vector_from_json(inst_json.at("offsets"), "offsets");
            d.sigma = c.sigma;
            d.ambiguity = c.ambiguity_cap ? AmbiguitySet::capped_simplex(Vector::Constant(c.N, *c.ambiguity_cap))
                                          : AmbiguitySet::simplex();
            inst.data = d;
            inst.subspace = kernel_or_identity(c.R, n);
        } else {
            inst.data = DroQuadraticData{detail::matrix_from_json(inst_json.at("centers"), "centers").transpose()};
            inst.subspace = std::make_shared<ReplicatedSubspaceProjector>(kernel_or_identity(c.R, n), c.N);
        }
        CompositeProblem p;
        try {
            p = build_dro_discrete(inst);
        } catch (const PreconditionError& e) {
            throw ConfigError(e.what());
        }
        const Index blocks = c.formulation == "direct" ? 1 : c.N;
        Vector x1 = detail::seeded_start(p, n, blocks, c.seed, 0.5 * c.radius);
        auto objective = [p](const Vector& x) { return p.objective(x); };
        return {p, x1, objective};
    }
    const json inst_json = detail::instance_for(c, "lasso");
    LassoInstance inst;
    inst.design = detail::matrix_from_json(inst_json.at("design"), "design");
    inst.target = detail::vector_from_json(inst_json.at("target"), "target");
    inst.constraint = c.R.size() > 0 ? c.R : Matrix(0, n);
    inst.reg_lambda = c.reg_lambda;
    inst.reg_theta = c.reg_theta;
    try {
        if (c.regularizer == "l1") {
            inst.kind = RegularizerKind::L1;
        } else if (c.regularizer == "mcp") {
            inst.kind = RegularizerKind::MCP;
        } else if (c.regularizer == "scad") {
            inst.kind = RegularizerKind::SCAD;
        } else {
            inst.kind = RegularizerKind::TUKEY;
            inst.tukey_map = inst.design;
            inst.tukey_shifts = inst.target;
            inst.design = Matrix::Zero(1, n);
            inst.target = Vector::Zero(1);
        }
        CompositeProblem p = build_constrained_lasso(inst);
        Vector x1 = detail::seeded_start(p, n, 1, c.seed, 1.0);
        auto objective = [p](const Vector& x) { return p.objective(x); };
        return {p, x1, objective};
    } catch (const ParameterDomainError& e) {
        throw ConfigError(e.what());
    }
}

// ---------------------------------------------------------------------------
// output

inline std::string format_trace_csv(const IterateTrace& trace) {
    std::string out = "k,mu,gamma,objective,proj_grad_norm,prox_residual,elapsed_s\n";
    char buf[256];
    for (const auto& r : trace.records) {
        std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", r.k, r.mu, r.gamma, r.objective,
                      r.proj_grad_norm, r.prox_residual, r.elapsed_s);
        out += buf;
    }
    return out;
}

struct ExperimentOutcome {
    ExitCode code;
    std::string message;
    json summary;  ///< empty when the config was rejected
};

/**
 * Runs one configuration. Never throws for config or solver problems:
 * they map to exit codes 2 and 3 (the partial trace is still written on 3).
 * `out_dir`, when set, replaces the directory part of both output paths.
 */
inline ExperimentOutcome run_experiment(const ExperimentConfig& c, const std::optional<std::string>& out_dir = std::nullopt) {
    std::string trace_path = c.trace_path;
    std::string summary_path = c.summary_path;
    if (out_dir) {
        trace_path = (std::filesystem::path(*out_dir) / std::filesystem::path(trace_path).filename()).string();
        summary_path = (std::filesystem::path(*out_dir) / std::filesystem::path(summary_path).filename()).string();
    }

    BuiltExperiment built;
    const SolverConfig cfg = c.solver();
    try {
        built = build_experiment(c);
        cfg.validate(*built.problem.g);
    } catch (const ConfigError& e) {
        return {ExitCode::InvalidConfig, e.what(), {}};
    } catch (const ParameterDomainError& e) {
        return {ExitCode::InvalidConfig, e.what(), {}};
    }

    const auto started = std::chrono::steady_clock::now();
    auto elapsed = [&] {
        return c.wall_clock ? std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count() : 0.0;
    };
    IterateTrace trace;
    ExitCode code = ExitCode::Ok;
    std::string message = "ok";
    try {
        if (c.algorithm == "pvs") {
            trace = run_pvs(built.problem, cfg, built.x1);
        } else {
            trace = run_pvs_epochs(built.problem, cfg, built.x1, c.epsilon).trace;
        }
    } catch (const SolverError& e) {
        trace = e.trace();
        if (trace.final_x.size() == 0) trace.final_x = e.best();
        code = ExitCode::SolverFailure;
        message = e.what();
    }

    json summary;
    summary["final_objective"] = built.objective(trace.final_x);
    summary["iterations"] = trace.iterations;
    summary["stop_reason"] = code == ExitCode::Ok ? to_string(trace.stop) : "solver_failure";
    summary["elapsed_s"] = elapsed();
    if (built.problem.g->lipschitz() && !trace.records.empty()) {
        // F* := min over V of F_1, a lower bound for every F_k(x_k)
        CompositeProblem p = built.problem;
        p.f_star = std::min(oracle::reference_smoothed_minimum(p, c.C, built.x1, 200000), trace.records.back().objective);
        const BoundsCheck bc = check_rate_bounds(p, trace);
        summary["bounds_ok"] = bc.bound1_ok && bc.bound2_ok;
    } else {
        summary["bounds_ok"] = nullptr;
    }
    write_text(trace_path, format_trace_csv(trace));
    write_text(summary_path, summary.dump(2) + "\n");
    return {code, message, summary};
}

}  // namespace vsmooth

#pragma once

// Turns a validated ExperimentConfig into concrete objects, runs it, and
// writes the trace.  Also hosts the two canned scenarios and a numeric
// constrained minimizer used when the closed form is not separable.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "nsdw/analysis.hpp"
#include "nsdw/config.hpp"
#include "nsdw/objectives.hpp"
#include "nsdw/rng.hpp"
#include "nsdw/runner.hpp"
#include "nsdw/version.hpp"

namespace nsdw {

namespace detail {

/// Vector-valued field: "list:v1,v2,...", "constant:c", or (with an Rng)
/// "uniform:lo,hi".  Draws consume `dim` values from `rng` in coordinate
/// order, so a recorded seed reproduces the vector exactly.
inline Vec materialize_vec(const std::string& spec, std::size_t dim, Rng* rng,
                           const std::string& field) {
    if (spec.rfind("list:", 0) == 0) {
        Vec v = split_vec(spec.substr(5));
        if (dim != 0 && v.size() != dim)
            throw ConfigError(field + ": list has " + std::to_string(v.size()) +
                              " entries, objective has dimension " + std::to_string(dim));
        return v;
    }
    if (spec.rfind("constant:", 0) == 0) {
        double c = parse_double(spec.substr(9));
        return Vec(dim, c);
    }
    if (spec.rfind("uniform:", 0) == 0) {
        Vec range = split_vec(spec.substr(8));
        if (range.size() != 2 || !(range[0] < range[1]))
            throw ConfigError(field + ": expected uniform:lo,hi with lo < hi");
        if (!rng) throw ConfigError(field + ": uniform spec needs a seed");
        Vec v(dim);
        for (auto& c : v) c = rng->uniform(range[0], range[1]);
        return v;
    }
    throw ConfigError(field + ": unrecognized vector spec '" + spec + "'");
}

/// Target spec for the scaled quadratic.  "ones_then_uniform" sets the first
/// min(10, dim) coordinates to 1 and draws the tail uniformly from [-1, 1].
inline Vec materialize_target(const ObjectiveSpec& spec) {
    if (spec.target == "ones_then_uniform") {
        Rng rng(spec.seed);
        Vec t(spec.dim, 1.0);
        for (std::size_t i = 10; i < spec.dim; ++i) t[i] = rng.uniform(-1.0, 1.0);
        return t;
    }
    Rng rng(spec.seed);
    return materialize_vec(spec.target, spec.dim, &rng, "objective.target");
}

}  // namespace detail

/// Objective plus the header lines that make the trace self-describing.
struct BuiltObjective {
    Objective objective;
    std::vector<std::pair<std::string, std::string>> header;
};

inline BuiltObjective build_objective(const ObjectiveSpec& spec) {
    BuiltObjective b;
    b.header.emplace_back("objective.kind", spec.kind);
    if (spec.kind == "scaled_quadratic") {
        Vec target = detail::materialize_target(spec);
        b.header.emplace_back("objective.dim", std::to_string(target.size()));
        b.header.emplace_back("objective.target", join_vec(target));
        b.objective = make_scaled_quadratic(std::move(target));
    } else if (spec.kind == "counterexample") {
        b.header.emplace_back("objective.dim", "1");
        b.header.emplace_back("objective.x_tilde", format_double(spec.x_tilde));
        b.objective = make_counterexample_objective(spec.x_tilde);
    } else if (spec.kind == "smoothed_abs") {
        Rng rng(spec.seed);
        Vec center = detail::materialize_vec(spec.center, spec.dim, &rng, "objective.center");
        b.header.emplace_back("objective.dim", std::to_string(center.size()));
        b.header.emplace_back("objective.center", join_vec(center));
        b.header.emplace_back("objective.delta", format_double(spec.delta));
        b.objective = make_smoothed_abs(std::move(center), spec.delta);
    } else {
        throw ConfigError("objective.kind: unknown kind '" + spec.kind + "'");
    }
    return b;
}

/// Rebuild the objective a trace was produced with, from its header echo.
inline Objective objective_from_header(const Trace& trace) {
    std::string kind = trace.require("objective.kind");
    if (kind == "scaled_quadratic")
        return make_scaled_quadratic(split_vec(trace.require("objective.target")));
    if (kind == "counterexample")
        return make_counterexample_objective(parse_double(trace.require("objective.x_tilde")));
    if (kind == "smoothed_abs")
        return make_smoothed_abs(split_vec(trace.require("objective.center")),
                                 parse_double(trace.require("objective.delta")));
    throw std::invalid_argument("objective_from_header: unknown kind '" + kind + "'");
}

/// Minimum of the objective over the ball ||x|| <= 1/lambda.  Uses the
/// objective's closed form when it has one, otherwise projected gradient
/// descent (l2 ball only, needs an l2 smoothness constant).
inline ConstrainedMin constrained_minimum(const Objective& obj, double lambda, Norm k,
                                          double tol = 1e-10, long max_iter = 4000000) {
    if (!(lambda > 0.0))
        throw std::invalid_argument("constrained_minimum: lambda must be positive");
    if (obj.constrained_min) {
        if (auto m = obj.constrained_min(lambda, k)) return *m;
    }
    if (k != Norm::L2)
        throw std::invalid_argument(
            "constrained_minimum: no closed form and numeric fallback only handles l2");
    auto H = obj.smoothness ? obj.smoothness(Norm::L2) : std::nullopt;
    if (!H || !(*H > 0.0))
        throw std::invalid_argument("constrained_minimum: needs an l2 smoothness constant");
    double radius = 1.0 / lambda;
    double step = 1.0 / *H;
    Vec x(obj.dim, 0.0);
    for (long it = 0; it < max_iter; ++it) {
        Vec g = obj.grad(x);
        Vec y(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] - step * g[i];
        double n = norm(y, Norm::L2);
        if (n > radius) y = scale(y, radius / n);
        double moved = linf_distance(x, y);
        x = std::move(y);
        if (moved <= tol) return ConstrainedMin{x, obj.eval(x)};
    }
    throw std::runtime_error("constrained_minimum: projected gradient did not settle");
}

struct BuiltExperiment {
    Objective objective;
    OptimizerSpec optimizer;
    LrSchedule schedule;
    Vec x0;
    long steps = 0;
    RecordOptions record;
    std::string output_path;
    std::vector<std::pair<std::string, std::string>> header;
};

inline BuiltExperiment build_experiment(const ExperimentConfig& cfg) {
    BuiltExperiment b;
    BuiltObjective obj = build_objective(cfg.objective);
    b.objective = std::move(obj.objective);
    b.optimizer = cfg.optimizer;
    b.schedule = cfg.schedule;
    b.steps = cfg.steps;
    b.record = cfg.record;
    b.output_path = cfg.output_path;
    b.header = std::move(obj.header);

    if (cfg.optimizer.kind == OptimizerSpec::Kind::Adam) {
        std::size_t d = b.objective.dim;
        if (cfg.optimizer.m0 && cfg.optimizer.m0->size() != d)
            throw ConfigError("optimizer.m0: size does not match objective dimension");
        if (cfg.optimizer.v0 && cfg.optimizer.v0->size() != d)
            throw ConfigError("optimizer.v0: size does not match objective dimension");
    }

    bool seeded = cfg.x0_spec.rfind("uniform:", 0) == 0;
    Rng rng(cfg.seed);
    b.x0 = detail::materialize_vec(cfg.x0_spec, b.objective.dim, &rng, "run.x0");
    if (cfg.record_all_coords) {
        std::vector<std::size_t> all(b.objective.dim);
        for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
        b.record.coords = std::move(all);
    }

    b.header.emplace_back("run.x0_spec", cfg.x0_spec);
    if (seeded) {
        b.header.emplace_back("run.seed", std::to_string(cfg.seed));
        b.header.emplace_back("rng", "mt19937_64");
    }
    if (cfg.objective.target == "ones_then_uniform" ||
        cfg.objective.target.rfind("uniform:", 0) == 0 ||
        cfg.objective.center.rfind("uniform:", 0) == 0) {
        b.header.emplace_back("objective.seed", std::to_string(cfg.objective.seed));
        if (!seeded) b.header.emplace_back("rng", "mt19937_64");
    }
    return b;
}

/// Run a built experiment and write its trace when an output path is set.
inline RunResult run_built(const BuiltExperiment& b) {
    RunResult res = run(b.optimizer, b.objective, b.x0, b.schedule, b.steps, b.record, b.header);
    if (!b.output_path.empty()) write_trace_csv(res.trace, b.output_path);
    return res;
}

inline RunResult run_experiment(const ExperimentConfig& cfg) {
    return run_built(build_experiment(cfg));
}

// ---------------------------------------------------------------------------
// Canned scenarios.

struct ScenarioRun {
    std::string name;
    RunResult result;
};

/// Six descent variants on one seeded 100-dim scaled quadratic: normalized
/// steepest descent with and without decay, and plain unnormalized descent,
/// each under the max-norm and the Euclidean geometry.  Decay strength is 1
/// for the max-norm family and 0.1 for the Euclidean one; normalized variants
/// use the 2/(lambda (t+1)) schedule, unnormalized ones a constant 1/H step.
inline std::vector<ScenarioRun> scenario_synthetic_comparison(std::uint64_t seed,
                                                              long steps = 100) {
    const std::size_t dim = 100;
    Rng rng(seed);
    Vec target(dim, 1.0);
    for (std::size_t i = 10; i < dim; ++i) target[i] = rng.uniform(-1.0, 1.0);
    Vec x0(dim);
    for (auto& c : x0) c = rng.uniform(-5.0, 5.0);

    Objective obj = make_scaled_quadratic(target);
    std::vector<std::pair<std::string, std::string>> base_header = {
        {"scenario", "synthetic-comparison"},
        {"scenario.seed", std::to_string(seed)},
        {"rng", "mt19937_64"},
        {"objective.kind", "scaled_quadratic"},
        {"objective.dim", std::to_string(dim)},
        {"objective.target", join_vec(target)},
    };

    std::vector<ScenarioRun> out;
    for (Norm k : {Norm::LInf, Norm::L2}) {
        double lambda = k == Norm::LInf ? 1.0 : 0.1;
        double H = *obj.smoothness(k);
        std::string suffix = std::string("-") + norm_name(k);

        RecordOptions rec;
        rec.record_every = 1;
        rec.coords = std::vector<std::size_t>{};  // 100-dim: skip per-coordinate columns

        OptimizerSpec nsd;
        nsd.kind = OptimizerSpec::Kind::Nsd;
        nsd.nsd = NsdConfig{k, 0.0, true};
        out.push_back({"nsd" + suffix,
                       run(nsd, obj, x0, LrSchedule::fw_rate(lambda), steps, rec, base_header)});

        OptimizerSpec nsdwd = nsd;
        nsdwd.nsd.lambda = lambda;
        RecordOptions rec_bounds = rec;
        rec_bounds.bounds = true;
        out.push_back({"nsdwd" + suffix, run(nsdwd, obj, x0, LrSchedule::fw_rate(lambda), steps,
                                             rec_bounds, base_header)});

        OptimizerSpec sd;
        sd.kind = OptimizerSpec::Kind::Nsd;
        sd.nsd = NsdConfig{k, 0.0, false};
        out.push_back({"sd" + suffix,
                       run(sd, obj, x0, LrSchedule::constant(1.0 / H), steps, rec, base_header)});
    }
    for (auto& s : out) s.result.trace.set("scenario.run", s.name);
    return out;
}

/// One-dimensional quadratic started on the fixed ray of the moment
/// recursion: x0 = x_tilde + 1 with m0, v0 chosen so every step contracts the
/// gap by exactly (1 - lambda eta) in exact arithmetic.  epsilon is zero, so
/// the update is scale-free and the iterate crosses the ball boundary.
inline ScenarioRun scenario_counterexample(long steps = 10000) {
    const double beta1 = 0.99, beta2 = 0.9, lambda = 0.1, eta = 0.01;
    double x_tilde = counterexample_fixed_point(beta1, beta2, lambda, eta);
    Objective obj = make_counterexample_objective(x_tilde);

    Vec x0{x_tilde + 1.0};
    double g1 = x0[0] - x_tilde;  // first gradient the run will see
    double r1 = (1.0 - beta1) / (1.0 - lambda * eta - beta1);
    double r2 = (1.0 - beta2) / ((1.0 - lambda * eta) * (1.0 - lambda * eta) - beta2);

    OptimizerSpec opt;
    opt.kind = OptimizerSpec::Kind::Adam;
    opt.adam = AdamConfig{beta1, beta2, lambda, 0.0, DecayMode::Decoupled};
    opt.m0 = Vec{r1 * g1};
    opt.v0 = Vec{r2 * g1 * g1};

    RecordOptions rec;
    rec.record_every = 1;
    rec.coords = std::vector<std::size_t>{0};

    std::vector<std::pair<std::string, std::string>> header = {
        {"scenario", "counterexample"},
        {"objective.kind", "counterexample"},
        {"objective.dim", "1"},
        {"objective.x_tilde", format_double(x_tilde)},
    };
    RunResult res =
        run(opt, obj, x0, LrSchedule::constant(eta), steps, rec, header);
    res.trace.set("scenario.run", "counterexample");
    return {"counterexample", std::move(res)};
}

}  // namespace nsdw

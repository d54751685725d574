#pragma once

// Drives a step rule against an objective for T full-batch steps,
// producing a Trace (and optionally the complete per-step history).

#include <cmath>
#include <cstddef>
#include <deque>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "nsdw/analysis.hpp"
#include "nsdw/objectives.hpp"
#include "nsdw/optimizers.hpp"
#include "nsdw/schedule.hpp"
#include "nsdw/trace.hpp"
#include "nsdw/vecmath.hpp"
#include "nsdw/version.hpp"

namespace nsdw {

struct OptimizerSpec {
    enum class Kind { Adam, Nsd, FrankWolfe };

    Kind kind = Kind::Adam;
    AdamConfig adam;
    std::optional<Vec> m0;  // moment overrides, Adam only
    std::optional<Vec> v0;
    NsdConfig nsd;
    Norm fw_norm = Norm::LInf;  // Frank-Wolfe ball
    double fw_radius = 1.0;

    std::string kind_name() const {
        switch (kind) {
            case Kind::Adam:
                return adam.decay_mode == DecayMode::Decoupled ? "adamw" : "adam_l2";
            case Kind::Nsd: return "nsd";
            case Kind::FrankWolfe: return "frank_wolfe";
        }
        return "?";
    }

    double lambda() const {
        switch (kind) {
            case Kind::Adam: return adam.lambda;
            case Kind::Nsd: return nsd.lambda;
            case Kind::FrankWolfe: return 0.0;
        }
        return 0.0;
    }

    Norm ball_norm() const {
        switch (kind) {
            case Kind::Adam: return Norm::LInf;
            case Kind::Nsd: return nsd.norm;
            case Kind::FrankWolfe: return fw_norm;
        }
        return Norm::LInf;
    }
};

struct RecordOptions {
    long record_every = 0;  // 0 = auto: 1 for runs up to 10^4 steps, else 10
    std::optional<std::vector<std::size_t>> coords;  // per-coordinate columns;
                                                     // unset = all when dim <= 10
    bool bounds = false;          // attach envelope/rate columns where defined
    bool keep_history = false;    // retain full etas/deltas/vs/xs
    long convergence_window = 100;
    double convergence_tol = 1e-8;
};

struct RunResult {
    Trace trace;
    Vec x_final;
    Vec m_final;  // Adam only
    Vec v_final;  // Adam only
    std::optional<long> converged_at;
    // Populated when keep_history is set:
    std::vector<double> etas;
    std::vector<Vec> deltas;  // recorded update direction per step
    std::vector<Vec> veffs;   // Adam only: (sqrt(v_t) + eps)^2 per step
    std::vector<Vec> xs;      // x_1 .. x_T
};

inline long auto_record_every(long steps) { return steps <= 10000 ? 1 : 10; }

/// Run `steps` full-batch iterations.  Rows are recorded at steps with
/// (t-1) % record_every == 0, giving ceil(steps / record_every) rows.
/// `header_prefix` entries are copied to the front of the trace header so
/// the caller can echo its configuration.
inline RunResult run(const OptimizerSpec& spec, const Objective& obj, const Vec& x0,
                     const LrSchedule& schedule, long steps,
                     const RecordOptions& opts = {},
                     const std::vector<std::pair<std::string, std::string>>& header_prefix = {}) {
    if (steps < 1) throw std::invalid_argument("run: steps must be >= 1");
    if (x0.size() != obj.dim) throw std::invalid_argument("run: x0 dimension mismatch");
    if (!all_finite(x0)) throw std::invalid_argument("run: non-finite x0");

    std::vector<std::size_t> coords;
    if (opts.coords)
        coords = *opts.coords;
    else if (obj.dim <= 10)
        for (std::size_t i = 0; i < obj.dim; ++i) coords.push_back(i);
    for (std::size_t j : coords)
        if (j >= obj.dim)
            throw std::invalid_argument("run: recorded coordinate " + std::to_string(j) +
                                        " out of range");
    const long every = opts.record_every > 0 ? opts.record_every : auto_record_every(steps);
    const bool is_adam = spec.kind == OptimizerSpec::Kind::Adam;
    const double lam = spec.lambda();
    const Norm ball = spec.ball_norm();

    const bool envelope_col = opts.bounds && lam > 0.0;
    const bool rate_col = opts.bounds && lam > 0.0 &&
                          schedule.kind == LrSchedule::Kind::FwRate &&
                          obj.smoothness(ball).has_value();

    RunResult res;
    Trace& tr = res.trace;
    for (const auto& kv : header_prefix) tr.set(kv.first, kv.second);
    tr.set("trace_format", "nsdw-1");
    tr.set("version", std::string(library_version));
    tr.set("optimizer.kind", spec.kind_name());
    if (is_adam) {
        tr.set("optimizer.beta1", format_double(spec.adam.beta1));
        tr.set("optimizer.beta2", format_double(spec.adam.beta2));
        tr.set("optimizer.lambda", format_double(spec.adam.lambda));
        tr.set("optimizer.epsilon", format_double(spec.adam.epsilon));
    } else if (spec.kind == OptimizerSpec::Kind::Nsd) {
        tr.set("optimizer.norm", norm_name(spec.nsd.norm));
        tr.set("optimizer.lambda", format_double(spec.nsd.lambda));
        tr.set("optimizer.normalized", spec.nsd.normalized ? "true" : "false");
    } else {
        tr.set("optimizer.norm", norm_name(spec.fw_norm));
        tr.set("optimizer.radius", format_double(spec.fw_radius));
    }
    tr.set("schedule.kind", schedule.kind_name());
    if (schedule.kind == LrSchedule::Kind::Constant)
        tr.set("schedule.eta", format_double(schedule.eta));
    if (schedule.kind == LrSchedule::Kind::FwRate)
        tr.set("schedule.lambda", format_double(schedule.lambda));
    if (schedule.kind == LrSchedule::Kind::Table)
        tr.set("schedule.values", join_vec(schedule.values));
    tr.set("run.steps", std::to_string(steps));
    tr.set("run.record_every", std::to_string(every));
    tr.set("x0", join_vec(x0));
    tr.set("loss_x0", format_double(obj.eval(x0)));

    tr.columns = {"t", "eta", "loss", "x_linf", "x_l2", "grad_l1", "grad_l2"};
    for (std::size_t j : coords) tr.columns.push_back("x_" + std::to_string(j));
    for (std::size_t j : coords) tr.columns.push_back("delta_" + std::to_string(j));
    if (is_adam)
        for (std::size_t j : coords) tr.columns.push_back("v_" + std::to_string(j));
    if (envelope_col) tr.columns.push_back("ball_envelope");
    if (rate_col) tr.columns.push_back("rate_bound");

    const double norm_x0_ball = norm(x0, ball);
    const double rate_B = std::max(norm_x0_ball, lam > 0.0 ? 1.0 / lam : 0.0);
    const double rate_H = rate_col ? *obj.smoothness(ball) : 0.0;

    AdamState adam_state;
    Vec x = x0;
    if (is_adam) {
        adam_state = (spec.m0 || spec.v0)
                         ? AdamState::init_with_moments(x0, spec.m0 ? *spec.m0 : Vec(x0.size(), 0.0),
                                                        spec.v0 ? *spec.v0 : Vec(x0.size(), 0.0))
                         : AdamState::init(x0);
        spec.adam.validate();
    } else {
        spec.nsd.validate();
    }

    double eta_cumsum = 0.0;
    std::deque<Vec> recent;  // for convergence detection
    recent.push_back(x0);

    if (opts.keep_history) {
        res.etas.reserve(std::size_t(steps));
        res.deltas.reserve(std::size_t(steps));
        res.xs.reserve(std::size_t(steps));
        if (is_adam) res.veffs.reserve(std::size_t(steps));
    }

    for (long t = 1; t <= steps; ++t) {
        double eta = 0.0;
        try {
            eta = schedule.at(t);
            Vec g;
            Vec delta(obj.dim);
            Vec veff;

            if (is_adam) {
                auto capture_grad = [&](const Vec& at) {
                    g = obj.grad(at);
                    return g;
                };
                adam_state = adam_step(spec.adam, adam_state, capture_grad, eta);
                veff.resize(obj.dim);
                for (std::size_t i = 0; i < obj.dim; ++i) {
                    double denom = std::sqrt(adam_state.v[i]) + spec.adam.epsilon;
                    delta[i] = adam_state.m[i] / denom;
                    veff[i] = denom * denom;
                }
                x = adam_state.x;
            } else if (spec.kind == OptimizerSpec::Kind::Nsd) {
                g = obj.grad(x);
                delta = steepest_direction(g, spec.nsd.norm);
                if (!spec.nsd.normalized) {
                    double dn = dual_norm(g, spec.nsd.norm);
                    for (double& di : delta) di *= dn;
                }
                x = nsd_step(spec.nsd, x, g, eta);
            } else {
                g = obj.grad(x);
                delta = steepest_direction(g, spec.fw_norm);
                x = frank_wolfe_step(x, g, spec.fw_norm, spec.fw_radius, eta);
            }

            eta_cumsum += eta;

            if ((t - 1) % every == 0) {
                std::vector<double> row;
                row.reserve(tr.columns.size());
                row.push_back(double(t));
                row.push_back(eta);
                row.push_back(obj.eval(x));
                row.push_back(norm(x, Norm::LInf));
                row.push_back(norm(x, Norm::L2));
                row.push_back(norm(g, Norm::L1));
                row.push_back(norm(g, Norm::L2));
                for (std::size_t j : coords) row.push_back(x[j]);
                for (std::size_t j : coords) row.push_back(delta[j]);
                if (is_adam)
                    for (std::size_t j : coords) row.push_back(veff[j]);
                if (envelope_col) {
                    if (lam * eta > 1.0)
                        throw std::invalid_argument(
                            "ball envelope undefined for lambda*eta > 1");
                    double r = 1.0 / lam;
                    row.push_back(r + std::max(std::exp(-lam * eta_cumsum) *
                                                   (norm_x0_ball - r),
                                               0.0));
                }
                if (rate_col) row.push_back(fw_rate_bound(rate_H, lam, rate_B, t));
                tr.rows.push_back(std::move(row));
            }

            if (opts.keep_history) {
                res.etas.push_back(eta);
                res.deltas.push_back(delta);
                res.xs.push_back(x);
                if (is_adam) res.veffs.push_back(veff);
            }

            if (opts.convergence_window > 0 && !res.converged_at) {
                recent.push_back(x);
                if (long(recent.size()) > opts.convergence_window + 1) recent.pop_front();
                if (long(recent.size()) == opts.convergence_window + 1 &&
                    linf_distance(recent.back(), recent.front()) <= opts.convergence_tol)
                    res.converged_at = t;
            }
        } catch (const std::exception& e) {
            throw std::runtime_error("run: step " + std::to_string(t) + ": " + e.what());
        }
    }

    res.x_final = x;
    if (is_adam) {
        res.m_final = adam_state.m;
        res.v_final = adam_state.v;
        tr.set("final_m", join_vec(res.m_final));
        tr.set("final_v", join_vec(res.v_final));
    }
    tr.set("final_x", join_vec(res.x_final));
    if (res.converged_at) tr.set("converged_at", std::to_string(*res.converged_at));
    return res;
}

}  // namespace nsdw

#pragma once

// Step rules: Adam with decoupled weight decay (AdamW) or l2-regularized
// decay, steepest descent with decoupled decay (normalized or not), and
// Frank-Wolfe over a norm ball.  Steps are pure: state in, state out.

#include <cmath>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "nsdw/vecmath.hpp"

namespace nsdw {

enum class DecayMode { Decoupled, L2Regularized };

struct AdamConfig {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double lambda = 0.0;
    double epsilon = 1e-16;
    DecayMode decay_mode = DecayMode::Decoupled;

    /// The regime with the bounded-update guarantee.
    bool betas_ordered() const { return beta1 <= beta2; }

    void validate() const {
        if (!(beta1 >= 0.0 && beta1 < 1.0))
            throw std::invalid_argument("adam: beta1 must lie in [0,1)");
        if (!(beta2 > 0.0 && beta2 < 1.0))
            throw std::invalid_argument("adam: beta2 must lie in (0,1)");
        if (!(lambda >= 0.0)) throw std::invalid_argument("adam: lambda must be >= 0");
        if (!(epsilon >= 0.0)) throw std::invalid_argument("adam: epsilon must be >= 0");
    }
};

struct AdamState {
    Vec x;
    Vec m;
    Vec v;
    long t = 0;

    /// Standard zero-moment initialization.
    static AdamState init(Vec x0) {
        AdamState s;
        s.m.assign(x0.size(), 0.0);
        s.v.assign(x0.size(), 0.0);
        s.x = std::move(x0);
        return s;
    }

    /// Explicit moment override (used by the reversed-betas fixed-point
    /// construction; everything else starts from zeros).
    static AdamState init_with_moments(Vec x0, Vec m0, Vec v0) {
        if (m0.size() != x0.size() || v0.size() != x0.size())
            throw std::invalid_argument("adam state: m0/v0 dimension mismatch");
        for (double vi : v0)
            if (vi < 0.0) throw std::invalid_argument("adam state: v0 must be >= 0");
        AdamState s;
        s.x = std::move(x0);
        s.m = std::move(m0);
        s.v = std::move(v0);
        return s;
    }
};

/// One Adam step.  Gradient at x_{t-1}, moment updates, then
///   decoupled:      x' = x - eta * m'/(sqrt(v') + eps) - lambda*eta*x
///   l2-regularized: g += lambda*x before the moment updates, no decay term.
/// No bias correction.  The decay term uses the pre-update x.
inline AdamState adam_step(const AdamConfig& cfg, const AdamState& state,
                           const std::function<Vec(const Vec&)>& grad_at, double eta) {
    cfg.validate();
    if (!(eta > 0.0)) throw std::invalid_argument("adam_step: eta must be positive");

    const std::size_t d = state.x.size();
    AdamState next;
    next.t = state.t + 1;
    next.x.resize(d);
    next.m.resize(d);
    next.v.resize(d);

    Vec g = grad_at(state.x);
    if (g.size() != d) throw std::invalid_argument("adam_step: gradient dimension mismatch");
    if (cfg.decay_mode == DecayMode::L2Regularized)
        for (std::size_t i = 0; i < d; ++i) g[i] += cfg.lambda * state.x[i];

    for (std::size_t i = 0; i < d; ++i) {
        double m = cfg.beta1 * state.m[i] + (1.0 - cfg.beta1) * g[i];
        double v = cfg.beta2 * state.v[i] + (1.0 - cfg.beta2) * g[i] * g[i];
        double denom = std::sqrt(v) + cfg.epsilon;
        if (denom == 0.0)
            throw std::domain_error("adam_step: zero denominator at coordinate " +
                                    std::to_string(i) + " (epsilon = 0 and v = 0)");
        double x = state.x[i] - eta * (m / denom);
        if (cfg.decay_mode == DecayMode::Decoupled) x -= cfg.lambda * eta * state.x[i];
        next.m[i] = m;
        next.v[i] = v;
        next.x[i] = x;
    }
    return next;
}

struct NsdConfig {
    Norm norm = Norm::LInf;
    double lambda = 0.0;
    bool normalized = true;

    void validate() const {
        if (!(lambda >= 0.0)) throw std::invalid_argument("nsd: lambda must be >= 0");
    }
};

/// Steepest descent with decoupled weight decay:
///   x' = (1 - lambda*eta) x - eta * D
/// where D is the unit steepest direction (normalized) or
/// dual_norm(g) times it (unnormalized).  For the normalized rule with
/// decay the shrinkage argument needs lambda*eta <= 1; values above 1 are
/// rejected.  (Equality is allowed: the 1/t rate schedule starts there.)
inline Vec nsd_step(const NsdConfig& cfg, const Vec& x, const Vec& g, double eta) {
    cfg.validate();
    if (!(eta > 0.0)) throw std::invalid_argument("nsd_step: eta must be positive");
    if (cfg.normalized && cfg.lambda > 0.0 && cfg.lambda * eta > 1.0)
        throw std::invalid_argument("nsd_step: lambda*eta must be <= 1");
    if (x.size() != g.size()) throw std::invalid_argument("nsd_step: dimension mismatch");

    Vec d = steepest_direction(g, cfg.norm);
    const double step = cfg.normalized ? eta : eta * dual_norm(g, cfg.norm);
    const double keep = 1.0 - cfg.lambda * eta;
    Vec out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = keep * x[i] - step * d[i];
    return out;
}

/// Frank-Wolfe over the norm ball of the given radius:
///   y  = -radius * steepest_direction(g)   (the linear minimizer vertex)
///   x' = (1 - gamma) x + gamma y
/// Requires feasible x; a hair of slack covers accumulated roundoff.
inline Vec frank_wolfe_step(const Vec& x, const Vec& g, Norm k, double radius,
                            double gamma) {
    if (!(radius > 0.0)) throw std::invalid_argument("frank_wolfe_step: radius must be positive");
    if (!(gamma > 0.0 && gamma <= 1.0))
        throw std::invalid_argument("frank_wolfe_step: gamma must lie in (0,1]");
    if (x.size() != g.size()) throw std::invalid_argument("frank_wolfe_step: dimension mismatch");
    if (norm(x, k) > radius * (1.0 + 1e-12))
        throw std::invalid_argument("frank_wolfe_step: infeasible iterate, ||x|| > radius");

    Vec d = steepest_direction(g, k);
    Vec out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i)
        out[i] = (1.0 - gamma) * x[i] + gamma * (-radius * d[i]);
    return out;
}

}  // namespace nsdw

#pragma once

// Analytic test objectives with exact gradients, smoothness constants per
// norm, and closed-form linf-ball constrained minimizers where available.

#include <cmath>
#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "nsdw/vecmath.hpp"

namespace nsdw {

struct ConstrainedMin {
    Vec x;
    double loss = 0.0;
};

/// A differentiable objective. `smoothness(k)` is an H with
/// dual_norm(grad(x) - grad(y), k) <= H * norm(x - y, k) when known.
/// `constrained_min(lambda, k)` is the minimizer over the ball
/// norm(x, k) <= 1/lambda with its loss, when known in closed form.
struct Objective {
    std::string name;
    std::size_t dim = 0;
    std::function<double(const Vec&)> eval;
    std::function<Vec(const Vec&)> grad;
    std::function<std::optional<double>(Norm)> smoothness;
    std::function<std::optional<ConstrainedMin>(double, Norm)> constrained_min;
};

/// Quadratic with per-coordinate curvature 2/i^2 (i counted from 1):
///   f(x) = sum_i (x_i - target_i)^2 / i^2
/// Smoothness is 2 under l2 and sum_i 2/i^2 under linf.  The linf-ball
/// constrained minimizer is the coordinatewise clamp of the target.
inline Objective make_scaled_quadratic(Vec target) {
    if (target.empty()) throw std::invalid_argument("scaled_quadratic: empty target");
    if (!all_finite(target)) throw std::invalid_argument("scaled_quadratic: non-finite target");
    const std::size_t d = target.size();
    auto weights = std::make_shared<Vec>(d);
    for (std::size_t i = 0; i < d; ++i) (*weights)[i] = 1.0 / double((i + 1) * (i + 1));
    auto tgt = std::make_shared<Vec>(std::move(target));

    Objective o;
    o.name = "scaled_quadratic";
    o.dim = d;
    o.eval = [tgt, weights](const Vec& x) {
        double acc = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            double e = x[i] - (*tgt)[i];
            acc += e * e * (*weights)[i];
        }
        return acc;
    };
    o.grad = [tgt, weights](const Vec& x) {
        Vec g(x.size());
        for (std::size_t i = 0; i < x.size(); ++i)
            g[i] = 2.0 * (x[i] - (*tgt)[i]) * (*weights)[i];
        return g;
    };
    o.smoothness = [weights](Norm k) -> std::optional<double> {
        if (k == Norm::L2) return 2.0;
        if (k == Norm::LInf) {
            double h = 0.0;
            for (double w : *weights) h += 2.0 * w;
            return h;
        }
        return std::nullopt;
    };
    o.constrained_min = [tgt, weights](double lambda, Norm k) -> std::optional<ConstrainedMin> {
        if (k != Norm::LInf || lambda <= 0.0) return std::nullopt;
        // separable objective: clamp each coordinate into [-1/lambda, 1/lambda]
        double r = 1.0 / lambda;
        ConstrainedMin cm;
        cm.x.resize(tgt->size());
        for (std::size_t i = 0; i < tgt->size(); ++i)
            cm.x[i] = std::min(r, std::max(-r, (*tgt)[i]));
        double acc = 0.0;
        for (std::size_t i = 0; i < tgt->size(); ++i) {
            double e = cm.x[i] - (*tgt)[i];
            acc += e * e * (*weights)[i];
        }
        cm.loss = acc;
        return cm;
    };
    return o;
}

/// One-dimensional f(x) = (x - x_tilde)^2 / 2 with grad(x) = x - x_tilde.
inline Objective make_counterexample_objective(double x_tilde) {
    if (!std::isfinite(x_tilde)) throw std::invalid_argument("counterexample: non-finite x_tilde");
    Objective o;
    o.name = "counterexample";
    o.dim = 1;
    o.eval = [x_tilde](const Vec& x) {
        double e = x[0] - x_tilde;
        return 0.5 * e * e;
    };
    o.grad = [x_tilde](const Vec& x) { return Vec{x[0] - x_tilde}; };
    o.smoothness = [](Norm) -> std::optional<double> { return 1.0; };
    o.constrained_min = [x_tilde](double lambda, Norm k) -> std::optional<ConstrainedMin> {
        if (k != Norm::LInf || lambda <= 0.0) return std::nullopt;
        double r = 1.0 / lambda;
        double x = std::min(r, std::max(-r, x_tilde));
        double e = x - x_tilde;
        return ConstrainedMin{Vec{x}, 0.5 * e * e};
    };
    return o;
}

/// Smoothed absolute-value sum, f(x) = sum_i (sqrt(delta^2 + (x_i - c_i)^2) - delta).
/// Convex and separable; curvature per coordinate is at most 1/delta.
inline Objective make_smoothed_abs(Vec center, double delta) {
    if (center.empty()) throw std::invalid_argument("smoothed_abs: empty center");
    if (!(delta > 0.0)) throw std::invalid_argument("smoothed_abs: delta must be positive");
    const std::size_t d = center.size();
    auto c = std::make_shared<Vec>(std::move(center));

    Objective o;
    o.name = "smoothed_abs";
    o.dim = d;
    o.eval = [c, delta](const Vec& x) {
        double acc = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            double e = x[i] - (*c)[i];
            acc += std::sqrt(delta * delta + e * e) - delta;
        }
        return acc;
    };
    o.grad = [c, delta](const Vec& x) {
        Vec g(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) {
            double e = x[i] - (*c)[i];
            g[i] = e / std::sqrt(delta * delta + e * e);
        }
        return g;
    };
    o.smoothness = [d, delta](Norm k) -> std::optional<double> {
        if (k == Norm::L2) return 1.0 / delta;
        if (k == Norm::LInf) return double(d) / delta;
        return std::nullopt;
    };
    o.constrained_min = [c, delta](double lambda, Norm k) -> std::optional<ConstrainedMin> {
        if (k != Norm::LInf || lambda <= 0.0) return std::nullopt;
        double r = 1.0 / lambda;
        ConstrainedMin cm;
        cm.x.resize(c->size());
        for (std::size_t i = 0; i < c->size(); ++i)
            cm.x[i] = std::min(r, std::max(-r, (*c)[i]));
        double acc = 0.0;
        for (std::size_t i = 0; i < c->size(); ++i) {
            double e = cm.x[i] - (*c)[i];
            acc += std::sqrt(delta * delta + e * e) - delta;
        }
        cm.loss = acc;
        return cm;
    };
    return o;
}

/// Fixed point of AdamW on the 1-D counterexample quadratic when the decay
/// rates are reversed (beta2 < beta1) and the moments are seeded to match:
///   x = -(1/lambda) * [(1-beta1)/(1-lambda*eta-beta1)]
///       / sqrt[(1-beta2)/((1-lambda*eta)^2-beta2)]
/// Only defined for 0 < beta2 < beta1 < 1 - lambda*eta and (1-lambda*eta)^2 > beta2.
inline double counterexample_fixed_point(double beta1, double beta2, double lambda,
                                         double eta) {
    const double le = lambda * eta;
    if (!(le > 0.0 && le < 1.0))
        throw std::invalid_argument("counterexample_fixed_point: lambda*eta must lie in (0,1)");
    if (!(beta2 > 0.0))
        throw std::invalid_argument("counterexample_fixed_point: beta2 must be positive");
    if (!(beta2 < beta1))
        throw std::invalid_argument("counterexample_fixed_point: requires beta2 < beta1");
    if (!(beta1 < 1.0 - le))
        throw std::invalid_argument("counterexample_fixed_point: requires beta1 < 1 - lambda*eta");
    if (!((1.0 - le) * (1.0 - le) > beta2))
        throw std::invalid_argument("counterexample_fixed_point: requires (1-lambda*eta)^2 > beta2");
    const double num = (1.0 - beta1) / (1.0 - le - beta1);
    const double den = std::sqrt((1.0 - beta2) / ((1.0 - le) * (1.0 - le) - beta2));
    return -(1.0 / lambda) * num / den;
}

}  // namespace nsdw

#pragma once

// Evaluators for the closed-form bounds and optimality conditions:
// KKT residuals over a norm ball, the eta-weighted average update and its
// amortized bound, the per-coordinate iterate-norm bound, the weight-decay
// ball-shrinkage envelope, the O(1/t) suboptimality bound, and the
// step-size recursion envelope.

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "nsdw/objectives.hpp"
#include "nsdw/trace.hpp"
#include "nsdw/vecmath.hpp"

namespace nsdw {

struct KKTReport {
    double feasibility_gap = 0.0;     // max(||x|| - 1/lambda, 0)
    double alignment_residual = 0.0;  // | <-lambda x, grad> - dual_norm(grad) |
    Norm norm = Norm::LInf;
    double lambda = 0.0;
};

/// Residuals of the first-order optimality characterization for
/// min f over the ball norm(x) <= 1/lambda: x is optimal iff it is
/// feasible and <-lambda x, grad f(x)> equals the dual norm of the
/// gradient.  Both residuals are zero exactly at such points.
inline KKTReport kkt_residual(const Objective& obj, const Vec& x, double lambda, Norm k) {
    if (!(lambda > 0.0)) throw std::invalid_argument("kkt_residual: lambda must be positive");
    if (x.size() != obj.dim) throw std::invalid_argument("kkt_residual: dimension mismatch");
    Vec g = obj.grad(x);
    KKTReport r;
    r.norm = k;
    r.lambda = lambda;
    r.feasibility_gap = std::max(norm(x, k) - 1.0 / lambda, 0.0);
    double inner = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) inner += -lambda * x[i] * g[i];
    r.alignment_residual = std::fabs(inner - dual_norm(g, k));
    return r;
}

struct AverageUpdateEstimate {
    Vec weighted_avg;                  // sum eta_t * delta_t / sum eta_t
    std::vector<std::size_t> coords;   // coordinate index per entry
    long t_start = 0;
    long t_end = 0;
};

/// eta-weighted average of in-memory per-step updates over steps
/// [t_start, t_end], 1-based inclusive.
inline AverageUpdateEstimate avg_update_span(const std::vector<Vec>& deltas,
                                             const std::vector<double>& etas,
                                             long t_start, long t_end) {
    if (deltas.size() != etas.size())
        throw std::invalid_argument("avg_update: deltas/etas length mismatch");
    if (t_start < 1 || t_end > long(deltas.size()) || t_start > t_end)
        throw std::invalid_argument("avg_update: empty or reversed window");
    AverageUpdateEstimate est;
    est.t_start = t_start;
    est.t_end = t_end;
    const std::size_t d = deltas.empty() ? 0 : deltas[0].size();
    est.weighted_avg.assign(d, 0.0);
    est.coords.resize(d);
    for (std::size_t i = 0; i < d; ++i) est.coords[i] = i;
    double den = 0.0;
    for (long t = t_start; t <= t_end; ++t) {
        den += etas[std::size_t(t - 1)];
        for (std::size_t i = 0; i < d; ++i)
            est.weighted_avg[i] += etas[std::size_t(t - 1)] * deltas[std::size_t(t - 1)][i];
    }
    for (std::size_t i = 0; i < d; ++i) est.weighted_avg[i] /= den;
    return est;
}

/// Same average over the delta_<j> columns of a recorded trace; the window
/// refers to the step column t.
inline AverageUpdateEstimate avg_update(const Trace& tr, long t_start, long t_end) {
    if (t_start > t_end) throw std::invalid_argument("avg_update: reversed window");
    std::vector<std::size_t> coords = tr.recorded_coords();
    if (coords.empty()) throw std::invalid_argument("avg_update: trace has no delta columns");
    std::size_t eta_col = tr.column_index("eta");
    std::size_t t_col = tr.column_index("t");
    std::vector<std::size_t> delta_cols;
    for (std::size_t j : coords)
        delta_cols.push_back(tr.column_index("delta_" + std::to_string(j)));

    AverageUpdateEstimate est;
    est.t_start = t_start;
    est.t_end = t_end;
    est.coords = coords;
    est.weighted_avg.assign(coords.size(), 0.0);
    double den = 0.0;
    for (const auto& row : tr.rows) {
        long t = long(row[t_col]);
        if (t < t_start || t > t_end) continue;
        den += row[eta_col];
        for (std::size_t i = 0; i < delta_cols.size(); ++i)
            est.weighted_avg[i] += row[eta_col] * row[delta_cols[i]];
    }
    if (den == 0.0) throw std::invalid_argument("avg_update: no recorded steps in window");
    for (double& a : est.weighted_avg) a /= den;
    return est;
}

/// Upper envelope for ||x_t|| under x_t = (1-lambda*eta_t)x_{t-1} - eta_t*D_t
/// with ||D_t|| <= 1:  returns 1/lambda + max(exp(-lambda*sum eta)(||x0|| - 1/lambda), 0).
inline double ball_shrinkage_bound(double norm_x0, double lambda,
                                   const std::vector<double>& etas) {
    if (!(lambda > 0.0))
        throw std::invalid_argument("ball_shrinkage_bound: lambda must be positive");
    if (!(norm_x0 >= 0.0))
        throw std::invalid_argument("ball_shrinkage_bound: negative norm");
    double sum = 0.0;
    for (double e : etas) {
        if (!(e > 0.0 && lambda * e <= 1.0))
            throw std::invalid_argument(
                "ball_shrinkage_bound: each eta must satisfy 0 < lambda*eta <= 1");
        sum += e;
    }
    double r = 1.0 / lambda;
    return r + std::max(std::exp(-lambda * sum) * (norm_x0 - r), 0.0);
}

/// Right side of the amortized average-update bound for beta1 <= beta2:
///   sqrt( 1 + (b2-b1)/(1-b2) * sum eta_t b1^{t-1} / sum eta_t
///           + (b2-b1)(1-b1)/((1-b2) sum eta_t)
///             * sum_{t>=2} [eta_t (1-b1^{t-1})/(1-b1) - sum_i eta_{t+i} b1^{i-1}] ln(v_t/v_1) )
/// The v sequence is passed in directly so the caller can supply either the
/// raw second moment or its epsilon-stabilized variant (sqrt(v)+eps)^2.
inline double amortized_bound_rhs(double beta1, double beta2,
                                  const std::vector<double>& etas,
                                  const std::vector<double>& vs) {
    if (!(beta1 >= 0.0 && beta1 <= beta2 && beta2 < 1.0))
        throw std::invalid_argument("amortized_bound_rhs: need 0 <= beta1 <= beta2 < 1");
    if (etas.size() != vs.size() || etas.empty())
        throw std::invalid_argument("amortized_bound_rhs: etas/vs must be nonempty, equal length");
    for (double e : etas)
        if (!(e > 0.0)) throw std::invalid_argument("amortized_bound_rhs: etas must be positive");
    for (double v : vs)
        if (!(v > 0.0)) throw std::invalid_argument("amortized_bound_rhs: vs must be positive");

    const std::size_t T = etas.size();
    double eta_sum = 0.0;
    for (double e : etas) eta_sum += e;

    if (beta1 == beta2) return 1.0;

    // sum_t eta_t beta1^{t-1}
    double geo = 0.0, pow_b1 = 1.0;
    for (std::size_t t = 0; t < T; ++t) {
        geo += etas[t] * pow_b1;
        pow_b1 *= beta1;
    }

    // suffix[t] = sum_{i=1}^{T-t} eta_{t+i} beta1^{i-1}, built backward
    std::vector<double> suffix(T + 1, 0.0);
    for (std::size_t t = T - 1; t >= 1; --t) {
        suffix[t] = etas[t] + beta1 * suffix[t + 1];
        if (t == 1) break;
    }

    double log_term = 0.0;
    pow_b1 = beta1;  // beta1^{t-1} for t = 2
    for (std::size_t t = 2; t <= T; ++t) {
        double coeff = etas[t - 1] * (1.0 - pow_b1) / (1.0 - beta1) - suffix[t - 1];
        log_term += coeff * std::log(vs[t - 1] / vs[0]);
        pow_b1 *= beta1;
    }

    double inside = 1.0 + (beta2 - beta1) / (1.0 - beta2) * geo / eta_sum +
                    (beta2 - beta1) * (1.0 - beta1) / ((1.0 - beta2) * eta_sum) * log_term;
    if (inside < 0.0)
        throw std::domain_error("amortized_bound_rhs: negative operand under the square root "
                                "(v sequence incompatible with the recursion)");
    return std::sqrt(inside);
}

/// Per-coordinate bound on |x_T| for constant-eta Adam with decoupled decay,
/// beta1 <= beta2, with C = max_t |ln(v_t/v_1)| for that coordinate:
///   (1/lambda) * (1 + (1-le)^T lambda |x0|
///                   + le (b2-b1) [2C + b1^T + (1-le)^T] / (2 (1-b2) |1-le-b1|)),
/// le = lambda*eta.  Undefined at le = 1 - beta1 (rejected).
inline double iterate_norm_bound(double beta1, double beta2, double lambda, double eta,
                                 long T, double x0_coord, double C) {
    const double le = lambda * eta;
    if (!(le > 0.0 && le < 1.0))
        throw std::invalid_argument("iterate_norm_bound: lambda*eta must lie in (0,1)");
    if (!(beta1 >= 0.0 && beta1 <= beta2 && beta2 < 1.0))
        throw std::invalid_argument("iterate_norm_bound: need 0 <= beta1 <= beta2 < 1");
    if (1.0 - le - beta1 == 0.0)
        throw std::invalid_argument("iterate_norm_bound: singular at lambda*eta = 1 - beta1");
    if (!(C >= 0.0)) throw std::invalid_argument("iterate_norm_bound: C must be >= 0");
    if (T < 1) throw std::invalid_argument("iterate_norm_bound: T must be >= 1");

    double decay_T = std::pow(1.0 - le, double(T));
    double correction = le * (beta2 - beta1) *
                        (2.0 * C + std::pow(beta1, double(T)) + decay_T) /
                        (2.0 * (1.0 - beta2) * std::fabs(1.0 - le - beta1));
    return (1.0 / lambda) * (1.0 + decay_T * lambda * std::fabs(x0_coord) + correction);
}

/// O(1/t) suboptimality bound 2H(1+lambda*B)^2 / ((t+2) lambda^2) for the
/// decayed steepest-descent run with eta_t = 2/(lambda(t+1)),
/// B = max(||x0||, 1/lambda).
inline double fw_rate_bound(double H, double lambda, double B, long t) {
    if (!(H > 0.0)) throw std::invalid_argument("fw_rate_bound: H must be positive");
    if (!(lambda > 0.0)) throw std::invalid_argument("fw_rate_bound: lambda must be positive");
    if (!(B > 0.0)) throw std::invalid_argument("fw_rate_bound: B must be positive");
    if (t < 1) throw std::invalid_argument("fw_rate_bound: t must be >= 1");
    double factor = 1.0 + lambda * B;
    return 2.0 * H * factor * factor / (double(t + 2) * lambda * lambda);
}

/// Worst case of the recursion a_t <= (1-eta_t) a_{t-1} + C eta_t^2,
/// evaluated as an equality; returns a_1..a_T.  Shows the decay of any
/// sequence dominated by it when eta_t -> 0 and sum eta_t diverges.
inline std::vector<double> lr_sequence_limit_check(const std::vector<double>& etas,
                                                   double C, double a0) {
    if (!(C >= 0.0)) throw std::invalid_argument("lr_sequence_limit_check: C must be >= 0");
    if (!(a0 >= 0.0)) throw std::invalid_argument("lr_sequence_limit_check: a0 must be >= 0");
    for (double e : etas)
        if (!(e > 0.0 && e <= 1.0))
            throw std::invalid_argument("lr_sequence_limit_check: etas must lie in (0,1]");
    std::vector<double> a;
    a.reserve(etas.size());
    double cur = a0;
    for (double e : etas) {
        cur = (1.0 - e) * cur + C * e * e;
        a.push_back(cur);
    }
    return a;
}

inline double linf_distance(const Vec& a, const Vec& b) {
    if (a.size() != b.size()) throw std::invalid_argument("linf_distance: dimension mismatch");
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::fabs(a[i] - b[i]));
    return d;
}

}  // namespace nsdw

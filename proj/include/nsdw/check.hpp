#pragma once

// Bound checks over recorded traces.  Each check recomputes its inequality
// from the trace columns plus the header echo and reports one margin
// (bound minus observed quantity) per row; a negative margin beyond the
// tolerance is a violation.  Missing columns or inapplicable optimizers are
// MissingDataError, which callers treat as usage errors rather than
// violations.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "nsdw/analysis.hpp"
#include "nsdw/experiment.hpp"
#include "nsdw/schedule.hpp"
#include "nsdw/trace.hpp"
#include "nsdw/vecmath.hpp"

namespace nsdw {

struct MissingDataError : std::runtime_error {
    explicit MissingDataError(const std::string& what) : std::runtime_error(what) {}
};

struct CheckRow {
    long t = 0;
    std::size_t coord = SIZE_MAX;  // SIZE_MAX when the margin is not per-coordinate
    double margin = 0.0;
};

struct CheckResult {
    std::string bound;
    double tolerance = 1e-9;
    std::vector<CheckRow> rows;

    const CheckRow* first_violation() const {
        for (const auto& r : rows)
            if (r.margin < -tolerance) return &r;
        return nullptr;
    }
    double min_margin() const {
        double m = std::numeric_limits<double>::infinity();
        for (const auto& r : rows) m = std::min(m, r.margin);
        return m;
    }
};

namespace detail {

inline std::string header_or_missing(const Trace& tr, const std::string& key,
                                     const std::string& why) {
    auto v = tr.get(key);
    if (!v) throw MissingDataError("trace lacks header '" + key + "': " + why);
    return *v;
}

inline LrSchedule schedule_from_header(const Trace& tr) {
    std::string kind = header_or_missing(tr, "schedule.kind", "needed to rebuild step sizes");
    if (kind == "constant")
        return LrSchedule::constant(parse_double(header_or_missing(tr, "schedule.eta", "")));
    if (kind == "fw_rate")
        return LrSchedule::fw_rate(parse_double(header_or_missing(tr, "schedule.lambda", "")));
    if (kind == "table")
        return LrSchedule::table(split_vec(header_or_missing(tr, "schedule.values", "")));
    throw MissingDataError("unknown schedule.kind '" + kind + "'");
}

inline double header_num(const Trace& tr, const std::string& key, const std::string& why) {
    return parse_double(header_or_missing(tr, key, why));
}

inline std::vector<std::size_t> recorded_coords_or_fail(const Trace& tr, const char* col_kind) {
    auto coords = tr.recorded_coords();
    if (coords.empty())
        throw MissingDataError(std::string("trace has no per-coordinate ") + col_kind +
                               " columns; rerun with record_coords");
    return coords;
}

inline Norm ball_norm_from_header(const Trace& tr) {
    std::string kind = header_or_missing(tr, "optimizer.kind", "needed to pick the ball norm");
    if (kind == "adamw" || kind == "adam_l2") return Norm::LInf;
    return norm_from_name(header_or_missing(tr, "optimizer.norm", "needed for the ball norm"));
}

inline void require_every_step(const Trace& tr, const char* bound) {
    if (header_or_missing(tr, "run.record_every", "") != "1")
        throw MissingDataError(std::string(bound) +
                               " needs every step recorded (run.record_every = 1)");
}

}  // namespace detail

/// |m_t / (sqrt(v_t) + eps)| <= 1 per recorded coordinate, the cap that holds
/// whenever beta1 = beta2 (and can fail otherwise).
inline CheckResult check_unit_update(const Trace& tr) {
    std::string kind = detail::header_or_missing(tr, "optimizer.kind", "unit-update is about Adam");
    if (kind != "adamw" && kind != "adam_l2")
        throw MissingDataError("unit-update applies to adamw/adam_l2 traces, got '" + kind + "'");
    auto coords = detail::recorded_coords_or_fail(tr, "delta");
    std::size_t tcol = tr.column_index("t");
    CheckResult res{"unit-update", 1e-9, {}};
    for (std::size_t j : coords) {
        std::size_t dcol = tr.column_index("delta_" + std::to_string(j));
        for (const auto& row : tr.rows)
            res.rows.push_back({long(row[tcol]), j, 1.0 - std::fabs(row[dcol])});
    }
    return res;
}

/// ||x_t|| <= 1/lambda + exp(-lambda sum eta)(||x0|| - 1/lambda)_+ for the
/// decayed runs, in the optimizer's own ball norm.
inline CheckResult check_ball_shrinkage(const Trace& tr) {
    double lambda = detail::header_num(tr, "optimizer.lambda", "shrinkage needs decay");
    if (!(lambda > 0.0))
        throw MissingDataError("ball-shrinkage needs optimizer.lambda > 0");
    Norm ball = detail::ball_norm_from_header(tr);
    const char* col = ball == Norm::LInf ? "x_linf" : ball == Norm::L2 ? "x_l2" : nullptr;
    if (!col)
        throw MissingDataError("ball-shrinkage: traces record no l1 iterate norm column");
    if (!tr.has_column(col))
        throw MissingDataError(std::string("ball-shrinkage: trace lacks column ") + col);
    LrSchedule sched = detail::schedule_from_header(tr);
    double norm_x0 = norm(split_vec(detail::header_or_missing(tr, "x0", "")), ball);
    double inv = 1.0 / lambda;

    std::size_t tcol = tr.column_index("t");
    std::size_t xcol = tr.column_index(col);
    CheckResult res{"ball-shrinkage", 1e-9, {}};
    double eta_sum = 0.0;
    long next = 1;
    for (const auto& row : tr.rows) {
        long t = long(row[tcol]);
        for (; next <= t; ++next) {
            double eta = sched.at(next);
            if (lambda * eta > 1.0 + 1e-15)
                throw MissingDataError("ball-shrinkage: lambda*eta exceeds 1 at step " +
                                       std::to_string(next));
            eta_sum += eta;
        }
        double env = inv + std::max(std::exp(-lambda * eta_sum) * (norm_x0 - inv), 0.0);
        res.rows.push_back({t, SIZE_MAX, env - row[xcol]});
    }
    return res;
}

/// eta-weighted average of |updates| against the amortized cap, evaluated on
/// every prefix of the run (each prefix is itself a finite run).
inline CheckResult check_amortized(const Trace& tr) {
    std::string kind = detail::header_or_missing(tr, "optimizer.kind", "amortized is about Adam");
    if (kind != "adamw" && kind != "adam_l2")
        throw MissingDataError("amortized applies to adamw/adam_l2 traces, got '" + kind + "'");
    detail::require_every_step(tr, "amortized");
    double beta1 = detail::header_num(tr, "optimizer.beta1", "");
    double beta2 = detail::header_num(tr, "optimizer.beta2", "");
    if (beta1 > beta2)
        throw MissingDataError("amortized needs beta1 <= beta2");
    auto coords = detail::recorded_coords_or_fail(tr, "delta");

    std::size_t tcol = tr.column_index("t");
    std::size_t ecol = tr.column_index("eta");
    std::vector<double> etas;
    etas.reserve(tr.rows.size());
    for (const auto& row : tr.rows) etas.push_back(row[ecol]);

    CheckResult res{"amortized", 1e-9, {}};
    for (std::size_t j : coords) {
        std::string vs_name = "v_" + std::to_string(j);
        if (!tr.has_column(vs_name))
            throw MissingDataError("amortized: trace lacks column " + vs_name);
        std::size_t dcol = tr.column_index("delta_" + std::to_string(j));
        std::size_t vcol = tr.column_index(vs_name);
        std::vector<double> vs, prefix_etas;
        double num = 0.0, den = 0.0;
        for (std::size_t r = 0; r < tr.rows.size(); ++r) {
            const auto& row = tr.rows[r];
            vs.push_back(row[vcol]);
            prefix_etas.push_back(etas[r]);
            num += etas[r] * row[dcol];
            den += etas[r];
            double rhs = amortized_bound_rhs(beta1, beta2, prefix_etas, vs);
            res.rows.push_back({long(row[tcol]), j, rhs - std::fabs(num) / den});
        }
    }
    return res;
}

/// loss(x_t) - min_ball loss <= 2H(1 + lambda B)^2 / ((t+2) lambda^2) for
/// normalized decayed runs on the 2/(lambda(t+1)) schedule.
inline CheckResult check_rate(const Trace& tr) {
    std::string kind = detail::header_or_missing(tr, "optimizer.kind", "");
    bool nsd_ok = kind == "nsd" &&
                  detail::header_or_missing(tr, "optimizer.normalized", "") == "true";
    if (!nsd_ok)
        throw MissingDataError("rate applies to normalized nsd traces, got '" + kind + "'");
    if (detail::header_or_missing(tr, "schedule.kind", "") != "fw_rate")
        throw MissingDataError("rate needs the fw_rate schedule");
    double lambda = detail::header_num(tr, "optimizer.lambda", "rate needs decay");
    if (!(lambda > 0.0)) throw MissingDataError("rate needs optimizer.lambda > 0");
    Norm ball = detail::ball_norm_from_header(tr);

    Objective obj = objective_from_header(tr);
    auto H = obj.smoothness ? obj.smoothness(ball) : std::nullopt;
    if (!H) throw MissingDataError("rate: objective has no smoothness constant for this norm");
    double lstar = constrained_minimum(obj, lambda, ball).loss;
    double B = std::max(norm(split_vec(detail::header_or_missing(tr, "x0", "")), ball),
                        1.0 / lambda);

    std::size_t tcol = tr.column_index("t");
    std::size_t lcol = tr.column_index("loss");
    CheckResult res{"rate", 1e-9, {}};
    for (const auto& row : tr.rows) {
        long t = long(row[tcol]);
        res.rows.push_back({t, SIZE_MAX, fw_rate_bound(*H, lambda, B, t) - (row[lcol] - lstar)});
    }
    return res;
}

/// Per-coordinate cap on |x_t| for constant-step decoupled Adam, with the
/// moment-drift constant C taken from the run's own recorded v column
/// (prefix maximum of |ln v_t/v_1|, so each row uses only its own past).
inline CheckResult check_iterate_norm(const Trace& tr) {
    if (detail::header_or_missing(tr, "optimizer.kind", "") != "adamw")
        throw MissingDataError("iterate-norm applies to adamw traces");
    if (detail::header_or_missing(tr, "schedule.kind", "") != "constant")
        throw MissingDataError("iterate-norm needs a constant schedule");
    detail::require_every_step(tr, "iterate-norm");
    double beta1 = detail::header_num(tr, "optimizer.beta1", "");
    double beta2 = detail::header_num(tr, "optimizer.beta2", "");
    double lambda = detail::header_num(tr, "optimizer.lambda", "");
    double eta = detail::header_num(tr, "schedule.eta", "");
    if (!(lambda > 0.0)) throw MissingDataError("iterate-norm needs optimizer.lambda > 0");
    if (beta1 > beta2) throw MissingDataError("iterate-norm needs beta1 <= beta2");
    if (std::fabs(1.0 - lambda * eta - beta1) < 1e-12)
        throw MissingDataError("iterate-norm is undefined at lambda*eta = 1 - beta1");
    auto coords = detail::recorded_coords_or_fail(tr, "x");
    Vec x0 = split_vec(detail::header_or_missing(tr, "x0", ""));

    std::size_t tcol = tr.column_index("t");
    CheckResult res{"iterate-norm", 1e-9, {}};
    for (std::size_t j : coords) {
        std::string x_name = "x_" + std::to_string(j);
        std::string v_name = "v_" + std::to_string(j);
        if (!tr.has_column(v_name))
            throw MissingDataError("iterate-norm: trace lacks column " + v_name);
        std::size_t xcol = tr.column_index(x_name);
        std::size_t vcol = tr.column_index(v_name);
        if (j >= x0.size()) throw MissingDataError("iterate-norm: x0 shorter than coordinates");
        double v1 = tr.rows.front()[vcol];
        if (!(v1 > 0.0))
            throw MissingDataError("iterate-norm: v_1 must be positive for coordinate " +
                                   std::to_string(j));
        double C = 0.0;
        for (const auto& row : tr.rows) {
            C = std::max(C, std::fabs(std::log(row[vcol] / v1)));
            long t = long(row[tcol]);
            double bound = iterate_norm_bound(beta1, beta2, lambda, eta, t, x0[j], C);
            res.rows.push_back({t, j, bound - std::fabs(row[xcol])});
        }
    }
    return res;
}

inline CheckResult run_check(const std::string& bound, const Trace& tr) {
    if (bound == "unit-update") return check_unit_update(tr);
    if (bound == "ball-shrinkage") return check_ball_shrinkage(tr);
    if (bound == "amortized") return check_amortized(tr);
    if (bound == "rate") return check_rate(tr);
    if (bound == "iterate-norm") return check_iterate_norm(tr);
    throw std::invalid_argument(
        "unknown bound '" + bound +
        "' (expected unit-update, ball-shrinkage, amortized, rate, or iterate-norm)");
}

}  // namespace nsdw

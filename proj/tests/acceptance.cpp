// Acceptance gate: ten end-to-end checks, one output line each, exit code
// equal to the number of failing lines.  Tolerances and time budgets are
// pinned here on purpose; loosening one is a library change, not a test fix.
//
// Check 1 is expected to stay red: the reversed-betas fixed ray is repelling
// in floating point, so the exact per-step contraction it asks for cannot
// survive 10^4 steps at double precision.  The line reports how far the run
// tracks the ray before drift takes over.

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <vector>

#include "nsdw/nsdw.hpp"

namespace {

using namespace nsdw;

std::string str(const char* fmt, ...) {
    char buf[512];
    va_list ap;
    va_start(ap, fmt);
    std::vsnprintf(buf, sizeof buf, fmt, ap);
    va_end(ap);
    return buf;
}

struct Verdict {
    bool pass;
    std::string detail;
};

// 1. Reversed betas (beta1 > beta2): AdamW started on the seeded ray should
// contract the gap to the fixed point by exactly 1 - lambda*eta each step,
// with m/sqrt(v) frozen at -lambda*x_tilde, and land on x_tilde.
Verdict check_fixed_ray() {
    const double lambda = 0.1, eta = 0.01;
    const long steps = 10000;
    const double x_tilde = counterexample_fixed_point(0.99, 0.9, lambda, eta);
    const double value_err = std::fabs(std::fabs(x_tilde) - 10.9995);

    ScenarioRun sc = scenario_counterexample(steps);
    const std::vector<double> xs = sc.result.trace.column("x_0");
    const std::vector<double> mv = sc.result.trace.column("delta_0");  // eps = 0: m / sqrt(v)

    const double ray = -lambda * x_tilde;
    long ratio_break = 0, mv_break = 0;
    double prev_gap = 1.0;  // x0 = x_tilde + 1
    for (long t = 1; t <= steps; ++t) {
        const double gap = std::fabs(xs[std::size_t(t - 1)] - x_tilde);
        if (!ratio_break && std::fabs(gap / prev_gap - 0.999) > 1e-9) ratio_break = t;
        if (!mv_break && std::fabs(mv[std::size_t(t - 1)] - ray) > 1e-9) mv_break = t;
        prev_gap = gap;
    }
    const double final_gap = std::fabs(xs.back() - x_tilde);

    const bool pass = value_err <= 1e-3 && !ratio_break && !mv_break && final_gap <= 1e-3;
    std::string d = str("|x_tilde| err %.2g; ", value_err);
    d += ratio_break ? str("ratio 0.999 +/- 1e-9 breaks at t=%ld; ", ratio_break)
                     : "ratio 0.999 held all steps; ";
    d += mv_break ? str("m/sqrt(v) drifts past 1e-9 at t=%ld; ", mv_break)
                  : "m/sqrt(v) constant; ";
    d += str("final |x - x_tilde| %.3g, want <= 1e-3", final_gap);
    return {pass, d};
}

// 2. Equal betas cap every update at one in magnitude, whatever the
// gradients do.  Heavy tails, spikes, and strict sign flips on purpose.
Verdict check_unit_cap() {
    const double betas[] = {0.5, 0.9, 0.99, 0.999};
    Rng rng(2024);
    double worst = 0.0;
    long total_steps = 0;
    for (long trial = 0; trial < 10000; ++trial) {
        const double b = betas[trial % 4];
        const AdamConfig cfg{b, b, 0.0, 0.0, DecayMode::Decoupled};
        AdamState st = AdamState::init(Vec{0.0});
        const long len = 1 + long(rng.below(1000));
        const double amp = std::exp(rng.uniform(-6.0, 6.0));
        const int mode = int(rng.below(4));
        for (long t = 1; t <= len; ++t) {
            double g = 0.0;
            switch (mode) {
                case 0: g = amp * rng.normal(); break;
                case 1: g = amp * rng.cauchy(); break;
                case 2: g = (t % 2 ? amp : -amp) * rng.pareto(1.5); break;
                default: g = amp * rng.normal() * (rng.below(8) == 0 ? 1e6 : 1.0); break;
            }
            if (t == 1 && g == 0.0) g = amp;  // eps is zero, v1 must be positive
            auto grad = [&](const Vec&) { return Vec{g}; };
            st = adam_step(cfg, st, grad, 0.1);
            ++total_steps;
            const double u = std::fabs(st.m[0] / std::sqrt(st.v[0]));
            if (u > worst) worst = u;
            if (u > 1.0 + 1e-12)
                return {false, str("trial %ld step %ld: |m/sqrt(v)| = %.17g", trial, t, u)};
        }
    }
    return {true, str("10000 sequences (%ld steps), max |m/sqrt(v)| %.12g", total_steps, worst)};
}

// 3. For beta1 < beta2 and non-increasing steps, the eta-weighted average
// update is dominated by the amortized bound built from the v trace.
Verdict check_averaged_update_bound() {
    Rng rng(3);
    double min_slack = HUGE_VAL;
    for (long trial = 0; trial < 1000; ++trial) {
        const long T = 5 + long(rng.below(296));
        const double b1 = rng.uniform(0.0, 0.995);
        const double b2 = b1 + (0.9995 - b1) * rng.uniform(0.01, 1.0);
        const double eps = trial % 2 ? std::exp(rng.uniform(-12.0, -1.0)) : 0.0;
        const AdamConfig cfg{b1, b2, 0.0, eps, DecayMode::Decoupled};
        AdamState st = AdamState::init(Vec{0.0});
        const double amp = std::exp(rng.uniform(-2.0, 2.0));
        double eta = std::exp(rng.uniform(-3.0, 1.0));
        std::vector<double> etas, vs;
        double num = 0.0, den = 0.0;
        for (long t = 1; t <= T; ++t) {
            double g = rng.below(3) == 0 ? amp * rng.cauchy() : amp * rng.normal();
            if (rng.below(2) == 0) g = -g;
            if (t == 1 && eps == 0.0 && g == 0.0) g = amp;
            auto grad = [&](const Vec&) { return Vec{g}; };
            st = adam_step(cfg, st, grad, eta);
            const double denom = std::sqrt(st.v[0]) + eps;
            etas.push_back(eta);
            vs.push_back(denom * denom);
            num += eta * st.m[0] / denom;
            den += eta;
            eta *= rng.uniform(0.8, 1.0);
        }
        const double lhs = std::fabs(num) / den;
        const double rhs = amortized_bound_rhs(b1, b2, etas, vs);
        min_slack = std::min(min_slack, rhs + 1e-9 - lhs);
        if (lhs > rhs + 1e-9)
            return {false, str("trial %ld: weighted average %.12g > bound %.12g", trial, lhs, rhs)};
    }
    return {true, str("1000 trials, min slack %.3g", min_slack)};
}

// 4. Any recursion x' = (1 - lambda*eta) x - eta*delta with unit-bounded
// deltas stays inside the shrinking-ball envelope, in each norm.
Verdict check_ball_shrinkage() {
    const Norm norms[] = {Norm::L1, Norm::L2, Norm::LInf};
    Rng rng(4);
    double min_margin = HUGE_VAL;
    for (Norm k : norms) {
        for (long trial = 0; trial < 1000; ++trial) {
            const std::size_t d = 1 + std::size_t(rng.below(8));
            const double lambda = std::exp(rng.uniform(-2.0, 1.0));
            const long T = 10 + long(rng.below(191));
            Vec x(d);
            for (double& xi : x) xi = rng.uniform(-4.0, 4.0);
            const double n0 = norm(x, k);
            std::vector<double> etas;
            for (long t = 1; t <= T; ++t) {
                const double eta = rng.uniform(0.001, 1.0) / lambda;
                Vec delta(d);
                for (double& di : delta) di = rng.normal();
                const double nd = norm(delta, k);
                const double scale = nd > 0.0 ? rng.uniform01() / nd : 0.0;
                const double keep = 1.0 - lambda * eta;
                for (std::size_t i = 0; i < d; ++i) x[i] = keep * x[i] - eta * scale * delta[i];
                etas.push_back(eta);
                const double margin = ball_shrinkage_bound(n0, lambda, etas) + 1e-9 - norm(x, k);
                min_margin = std::min(min_margin, margin);
                if (margin < 0.0)
                    return {false, str("%s trial %ld step %ld: envelope exceeded by %.3g",
                                       norm_name(k).c_str(), trial, t, -margin)};
            }
        }
    }
    return {true, str("3000 trials across l1/l2/linf, min margin %.3g", min_margin)};
}

// 5. One normalized decayed step equals one Frank-Wolfe step with
// gamma = lambda*eta on the ball of radius 1/lambda, coordinate for
// coordinate.
Verdict check_frank_wolfe_equivalence() {
    const Norm norms[] = {Norm::L1, Norm::L2, Norm::LInf};
    Rng rng(5);
    double max_diff = 0.0;
    for (long trial = 0; trial < 1000; ++trial) {
        const Norm k = norms[trial % 3];
        const std::size_t d = 1 + std::size_t(rng.below(10));
        const double lambda = std::exp(rng.uniform(-2.0, 1.0));
        const double gamma = rng.uniform(0.001, 1.0);
        Vec x(d), g(d);
        for (double& v : x) v = rng.normal();
        const double nx = norm(x, k);
        const double rho = rng.uniform01() / lambda;
        if (nx > 0.0)
            for (double& v : x) v *= rho / nx;
        for (double& v : g) v = rng.normal();
        if (rng.below(4) == 0) g[rng.below(d)] = 0.0;  // sign(0) path
        if (d >= 2 && rng.below(4) == 0) g[1] = (rng.below(2) ? 1.0 : -1.0) * g[0];  // |g| ties
        const NsdConfig cfg{k, lambda, true};
        const Vec a = nsd_step(cfg, x, g, gamma / lambda);
        const Vec b = frank_wolfe_step(x, g, k, 1.0 / lambda, gamma);
        for (std::size_t i = 0; i < d; ++i) {
            const double diff = std::fabs(a[i] - b[i]);
            max_diff = std::max(max_diff, diff);
            if (diff > 1e-12)
                return {false, str("%s trial %ld coord %zu: steps differ by %.3g",
                                   norm_name(k).c_str(), trial, i, diff)};
        }
    }
    return {true, str("1000 trials, max coordinate gap %.3g", max_diff)};
}

// 6. Normalized decayed descent with the 2/(lambda (t+1)) schedule obeys the
// O(1/t) suboptimality bound at every step, in both geometries.
Verdict check_rate() {
    const std::size_t dim = 100;
    Rng rng(1);
    Vec target(dim, 3.0);
    for (std::size_t i = 10; i < dim; ++i) target[i] = 3.0 * rng.uniform(-1.0, 1.0);
    Vec x0(dim);
    for (double& v : x0) v = rng.uniform(-5.0, 5.0);
    const Objective obj = make_scaled_quadratic(target);

    std::string detail;
    struct Geo {
        Norm k;
        double lambda;
    };
    for (const Geo geo : {Geo{Norm::LInf, 1.0}, Geo{Norm::L2, 0.1}}) {
        const double H = *obj.smoothness(geo.k);
        const double B = std::max(norm(x0, geo.k), 1.0 / geo.lambda);
        const double lstar = geo.k == Norm::LInf
                                 ? obj.constrained_min(geo.lambda, geo.k)->loss
                                 : constrained_minimum(obj, geo.lambda, geo.k).loss;

        OptimizerSpec spec;
        spec.kind = OptimizerSpec::Kind::Nsd;
        spec.nsd = NsdConfig{geo.k, geo.lambda, true};
        RecordOptions rec;
        rec.record_every = 1;
        rec.convergence_window = 0;
        const RunResult res = run(spec, obj, x0, LrSchedule::fw_rate(geo.lambda), 10000, rec);
        const std::vector<double> ts = res.trace.column("t");
        const std::vector<double> loss = res.trace.column("loss");
        double min_margin = HUGE_VAL;
        for (std::size_t r = 0; r < loss.size(); ++r) {
            const long t = long(ts[r]);
            const double margin = fw_rate_bound(H, geo.lambda, B, t) - (loss[r] - lstar);
            min_margin = std::min(min_margin, margin);
            if (margin < 0.0)
                return {false, str("%s t=%ld: suboptimality exceeds the bound by %.3g",
                                   norm_name(geo.k).c_str(), t, -margin)};
        }
        detail += str("%s%s min margin %.3g", detail.empty() ? "" : "; ",
                      norm_name(geo.k).c_str(), min_margin);
    }
    return {true, detail};
}

// 7. Synthetic comparison, five seeds: the max-norm family beats the
// Euclidean family variant for variant, and decay beats no decay.  Only the
// orderings are pinned; the curves themselves move with the seed.
Verdict check_orderings() {
    double min_gap = HUGE_VAL;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const std::vector<ScenarioRun> runs = scenario_synthetic_comparison(seed);
        auto final_loss = [&](const char* name) {
            for (const ScenarioRun& r : runs)
                if (r.name == name)
                    return r.result.trace.rows.back()[r.result.trace.column_index("loss")];
            throw std::runtime_error(str("scenario is missing run %s", name));
        };
        struct Pair {
            const char* lo;
            const char* hi;
        };
        const Pair pairs[] = {
            {"nsd-linf", "nsd-l2"},     {"nsdwd-linf", "nsdwd-l2"}, {"sd-linf", "sd-l2"},
            {"nsdwd-linf", "nsd-linf"}, {"nsdwd-l2", "nsd-l2"},
        };
        for (const Pair& p : pairs) {
            const double lo = final_loss(p.lo), hi = final_loss(p.hi);
            if (!(lo < hi))
                return {false, str("seed %llu: loss(%s)=%.6g is not below loss(%s)=%.6g",
                                   (unsigned long long)seed, p.lo, lo, p.hi, hi)};
            min_gap = std::min(min_gap, hi - lo);
        }
    }
    return {true, str("5 seeds x 5 orderings, min loss gap %.3g", min_gap)};
}

// Shared by checks 8 and 9: a long AdamW run with lambda = 1 on a quadratic
// whose minimizer sits outside the unit max-norm ball.
struct LongRun {
    double beta1 = 0.0, beta2 = 0.0;
    Objective obj;
    RunResult res;
};

LongRun adamw_boundary_run(double beta1, double beta2) {
    Vec target(10);
    for (std::size_t i = 0; i < target.size(); ++i) target[i] = i % 2 ? -2.0 : 2.0;
    LongRun lr;
    lr.beta1 = beta1;
    lr.beta2 = beta2;
    lr.obj = make_scaled_quadratic(target);
    OptimizerSpec spec;
    spec.kind = OptimizerSpec::Kind::Adam;
    spec.adam = AdamConfig{beta1, beta2, 1.0, 1e-16, DecayMode::Decoupled};
    RecordOptions rec;
    rec.record_every = 10000;
    rec.keep_history = true;
    rec.convergence_window = 0;
    lr.res = run(spec, lr.obj, Vec(10, 0.0), LrSchedule::constant(1e-3), 100000, rec);
    return lr;
}

const LongRun& equal_betas_run() {
    static const LongRun lr = adamw_boundary_run(0.99, 0.99);
    return lr;
}

// 8. That run ends essentially feasible and on the clamped minimizer.
Verdict check_kkt_convergence() {
    const LongRun& lr = equal_betas_run();
    const Vec xstar = lr.obj.constrained_min(1.0, Norm::LInf)->x;
    const double gap = std::max(norm(lr.res.x_final, Norm::LInf) - 1.0, 0.0);
    const double dist = linf_distance(lr.res.x_final, xstar);
    const bool pass = gap <= 1e-2 && dist <= 5e-2;
    return {pass, str("feasibility gap %.3g (cap 1e-2), distance to clamped minimizer %.3g "
                      "(cap 5e-2)",
                      gap, dist)};
}

// 9. The per-coordinate iterate bound, evaluated with C taken from each
// run's own v history, caps every final coordinate.
Verdict check_iterate_bound() {
    const LongRun mixed = adamw_boundary_run(0.9, 0.999);
    const LongRun* runs[] = {&equal_betas_run(), &mixed};
    double min_slack = HUGE_VAL;
    for (const LongRun* lr : runs) {
        const std::vector<Vec>& veffs = lr->res.veffs;
        const long T = long(lr->res.etas.size());
        for (std::size_t j = 0; j < lr->obj.dim; ++j) {
            double C = 0.0;
            const double v1 = veffs.front()[j];
            for (const Vec& vt : veffs) C = std::max(C, std::fabs(std::log(vt[j] / v1)));
            const double bound = iterate_norm_bound(lr->beta1, lr->beta2, 1.0, 1e-3, T, 0.0, C);
            const double slack = bound - std::fabs(lr->res.x_final[j]);
            min_slack = std::min(min_slack, slack);
            if (slack < -1e-9)
                return {false, str("betas %g/%g coord %zu: |x_T| %.6g above bound %.6g",
                                   lr->beta1, lr->beta2, j, std::fabs(lr->res.x_final[j]), bound)};
        }
    }
    return {true, str("2 runs x 10 coords, min slack %.3g", min_slack)};
}

// 10. Analytic gradients of every registered objective against central
// differences.
Verdict check_gradients() {
    Rng rng(10);
    Vec target(7);
    for (double& v : target) v = rng.uniform(-3.0, 3.0);
    Vec center(5);
    for (double& v : center) v = rng.uniform(-2.0, 2.0);
    const Objective objs[] = {
        make_scaled_quadratic(target),
        make_counterexample_objective(-11.0),
        make_smoothed_abs(center, 0.1),
    };
    double worst = 0.0;
    for (const Objective& obj : objs) {
        for (int p = 0; p < 100; ++p) {
            Vec x(obj.dim);
            for (double& v : x) v = rng.uniform(-5.0, 5.0);
            const Vec g = obj.grad(x);
            double num = 0.0, den = 0.0;
            for (std::size_t i = 0; i < obj.dim; ++i) {
                const double h = 1e-6 * std::max(1.0, std::fabs(x[i]));
                const double keep = x[i];
                x[i] = keep + h;
                const double fp = obj.eval(x);
                x[i] = keep - h;
                const double fm = obj.eval(x);
                x[i] = keep;
                num = std::max(num, std::fabs((fp - fm) / (2.0 * h) - g[i]));
                den = std::max(den, std::fabs(g[i]));
            }
            const double rel = num / std::max(den, 1e-12);
            worst = std::max(worst, rel);
            if (rel > 1e-5)
                return {false,
                        str("%s: relative error %.3g at a random point", obj.name.c_str(), rel)};
        }
    }
    return {true, str("3 objectives x 100 points, max relative error %.3g", worst)};
}

struct Criterion {
    int id;
    const char* slug;
    double budget_s;
    Verdict (*fn)();
};

}  // namespace

int main() {
    const Criterion criteria[] = {
        {1, "fixed-ray-reproduction", 1.0, check_fixed_ray},
        {2, "equal-betas-unit-cap", 10.0, check_unit_cap},
        {3, "averaged-update-bound", 30.0, check_averaged_update_bound},
        {4, "ball-shrinkage-envelope", 10.0, check_ball_shrinkage},
        {5, "frank-wolfe-equivalence", 1.0, check_frank_wolfe_equivalence},
        {6, "one-over-t-rate", 5.0, check_rate},
        {7, "norm-geometry-orderings", 5.0, check_orderings},
        {8, "kkt-convergence", 30.0, check_kkt_convergence},
        {9, "iterate-norm-bound", 5.0, check_iterate_bound},
        {10, "gradient-checks", 1.0, check_gradients},
    };
    int failures = 0;
    for (const Criterion& c : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        Verdict v{false, ""};
        try {
            v = c.fn();
        } catch (const std::exception& e) {
            v = {false, str("exception: %s", e.what())};
        }
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (secs > c.budget_s) {
            v.pass = false;
            v.detail += str("; over the %gs budget", c.budget_s);
        }
        std::printf("%2d %s %-23s (%s) %.2fs\n", c.id, v.pass ? "PASS" : "FAIL", c.slug,
                    v.detail.c_str(), secs);
        std::fflush(stdout);
        if (!v.pass) ++failures;
    }
    std::printf("%d of %d criteria failed\n", failures, int(sizeof criteria / sizeof criteria[0]));
    return failures;
}

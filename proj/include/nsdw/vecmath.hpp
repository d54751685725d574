#pragma once

// Dense vector arithmetic, norms, dual norms and steepest-descent
// directions for the l1/l2/linf geometries.

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace nsdw {

using Vec = std::vector<double>;

enum class Norm { L1, L2, LInf };

inline Norm dual(Norm k) {
    switch (k) {
        case Norm::L1: return Norm::LInf;
        case Norm::L2: return Norm::L2;
        case Norm::LInf: return Norm::L1;
    }
    throw std::logic_error("dual: bad norm tag");
}

inline std::string norm_name(Norm k) {
    switch (k) {
        case Norm::L1: return "l1";
        case Norm::L2: return "l2";
        case Norm::LInf: return "linf";
    }
    throw std::logic_error("norm_name: bad norm tag");
}

inline Norm norm_from_name(const std::string& s) {
    if (s == "l1") return Norm::L1;
    if (s == "l2") return Norm::L2;
    if (s == "linf") return Norm::LInf;
    throw std::invalid_argument("unknown norm '" + s + "' (expected l1, l2 or linf)");
}

inline double norm(const Vec& v, Norm k) {
    double acc = 0.0;
    switch (k) {
        case Norm::L1:
            for (double x : v) acc += std::fabs(x);
            return acc;
        case Norm::L2:
            for (double x : v) acc += x * x;
            return std::sqrt(acc);
        case Norm::LInf:
            for (double x : v) acc = std::max(acc, std::fabs(x));
            return acc;
    }
    throw std::logic_error("norm: bad norm tag");
}

/// Dual norm: ||v||_* = max_{||u|| <= 1} <u, v>.
inline double dual_norm(const Vec& v, Norm k) { return norm(v, dual(k)); }

inline double sign(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

/// A maximizer of <d, g> over the unit ball of norm k, so that
/// <d, g> = dual_norm(g, k).  Selections are pinned for determinism:
/// sign(0) = 0 for linf, the zero vector for g = 0 under l2, and the
/// lowest maximal-|g_i| index for l1.
inline Vec steepest_direction(const Vec& g, Norm k) {
    Vec d(g.size(), 0.0);
    switch (k) {
        case Norm::LInf:
            for (std::size_t i = 0; i < g.size(); ++i) d[i] = sign(g[i]);
            return d;
        case Norm::L2: {
            double n = norm(g, Norm::L2);
            if (n == 0.0) return d;
            for (std::size_t i = 0; i < g.size(); ++i) d[i] = g[i] / n;
            return d;
        }
        case Norm::L1: {
            std::size_t best = 0;
            double best_abs = -1.0;
            for (std::size_t i = 0; i < g.size(); ++i) {
                double a = std::fabs(g[i]);
                if (a > best_abs) {
                    best_abs = a;
                    best = i;
                }
            }
            if (!g.empty()) d[best] = sign(g[best]);
            return d;
        }
    }
    throw std::logic_error("steepest_direction: bad norm tag");
}

inline double dot(const Vec& a, const Vec& b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc;
}

[[nodiscard]] inline Vec sub(const Vec& a, const Vec& b) {
    Vec r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
    return r;
}

[[nodiscard]] inline Vec add(const Vec& a, const Vec& b) {
    Vec r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] + b[i];
    return r;
}

[[nodiscard]] inline Vec scale(const Vec& a, double c) {
    Vec r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = c * a[i];
    return r;
}

inline bool all_finite(const Vec& v) {
    for (double x : v)
        if (!std::isfinite(x)) return false;
    return true;
}

}  // namespace nsdw

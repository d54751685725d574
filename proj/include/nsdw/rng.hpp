#pragma once

// Seedable RNG with fully pinned output: mt19937_64 supplies the bits (its
// sequence is fixed by the standard) and the mappings below are spelled out
// here rather than taken from <random> distributions, whose streams differ
// across standard libraries.

#include <cmath>
#include <cstdint>
#include <random>

namespace nsdw {

class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t bits() { return gen_(); }

    /// Uniform in [0, 1) with 53 random bits.
    double uniform01() { return double(gen_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    /// Box-Muller without the cached second value, for a reproducible
    /// one-draw-per-call stream.
    double normal() {
        double u1;
        do {
            u1 = uniform01();
        } while (u1 == 0.0);
        double u2 = uniform01();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
    }

    /// Standard Cauchy via the inverse CDF; heavy-tailed test gradients.
    double cauchy() {
        double u;
        do {
            u = uniform01();
        } while (u == 0.0 || u == 0.5 || u == 1.0);
        return std::tan(3.14159265358979323846264338328 * (u - 0.5));
    }

    /// Pareto with tail index alpha, support [1, inf).
    double pareto(double alpha) {
        double u;
        do {
            u = uniform01();
        } while (u == 0.0);
        return std::pow(u, -1.0 / alpha);
    }

    /// Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n) { return gen_() % n; }

private:
    std::mt19937_64 gen_;
};

}  // namespace nsdw

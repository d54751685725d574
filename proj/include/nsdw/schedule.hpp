#pragma once

// Learning-rate schedules shared by all step rules.

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace nsdw {

/// eta_t for t = 1, 2, ...  Three rules:
///   Constant      eta_t = eta
///   FwRate     eta_t = 2 / (lambda * (t + 1)), the classic Frank-Wolfe rate mapped through lambda
///   Table         explicit per-step values
struct LrSchedule {
    enum class Kind { Constant, FwRate, Table };

    Kind kind = Kind::Constant;
    double eta = 0.0;     // Constant
    double lambda = 0.0;  // FwRate
    std::vector<double> values;

    static LrSchedule constant(double eta) {
        if (!(eta > 0.0)) throw std::invalid_argument("schedule: eta must be positive");
        LrSchedule s;
        s.kind = Kind::Constant;
        s.eta = eta;
        return s;
    }

    static LrSchedule fw_rate(double lambda) {
        if (!(lambda > 0.0)) throw std::invalid_argument("schedule: lambda must be positive");
        LrSchedule s;
        s.kind = Kind::FwRate;
        s.lambda = lambda;
        return s;
    }

    static LrSchedule table(std::vector<double> values) {
        if (values.empty()) throw std::invalid_argument("schedule: empty table");
        for (double v : values)
            if (!(v > 0.0)) throw std::invalid_argument("schedule: table entries must be positive");
        LrSchedule s;
        s.kind = Kind::Table;
        s.values = std::move(values);
        return s;
    }

    double at(long t) const {
        if (t < 1) throw std::invalid_argument("schedule: t must be >= 1");
        switch (kind) {
            case Kind::Constant: return eta;
            case Kind::FwRate: return 2.0 / (lambda * double(t + 1));
            case Kind::Table:
                if (std::size_t(t) > values.size())
                    throw std::out_of_range("schedule: table exhausted at t=" + std::to_string(t));
                return values[std::size_t(t - 1)];
        }
        throw std::logic_error("schedule: bad kind");
    }

    std::string kind_name() const {
        switch (kind) {
            case Kind::Constant: return "constant";
            case Kind::FwRate: return "fw_rate";
            case Kind::Table: return "table";
        }
        return "?";
    }
};

}  // namespace nsdw

#pragma once

// Experiment configuration: a small INI-style text format (sections of
// key = value lines) parsed into an ExperimentConfig.  Validation collects
// field-level messages ("section.key: problem") and reports them together.

#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "nsdw/optimizers.hpp"
#include "nsdw/runner.hpp"
#include "nsdw/schedule.hpp"
#include "nsdw/trace.hpp"
#include "nsdw/vecmath.hpp"

namespace nsdw {

struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t");
    return s.substr(a, b - a + 1);
}

}  // namespace detail

/// Sections of key=value pairs.  '#' and ';' start full-line comments.
struct IniFile {
    std::map<std::string, std::map<std::string, std::string>> sections;

    static IniFile parse_text(const std::string& text) {
        IniFile ini;
        std::istringstream in(text);
        std::string line, section;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            std::string s = detail::trim(line);
            if (s.empty() || s[0] == '#' || s[0] == ';') continue;
            if (s.front() == '[') {
                if (s.back() != ']')
                    throw ConfigError("line " + std::to_string(lineno) + ": unterminated section");
                section = detail::trim(s.substr(1, s.size() - 2));
                if (section.empty())
                    throw ConfigError("line " + std::to_string(lineno) + ": empty section name");
                ini.sections[section];
                continue;
            }
            std::size_t eq = s.find('=');
            if (eq == std::string::npos)
                throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
            if (section.empty())
                throw ConfigError("line " + std::to_string(lineno) + ": key outside any section");
            std::string key = detail::trim(s.substr(0, eq));
            std::string value = detail::trim(s.substr(eq + 1));
            if (key.empty())
                throw ConfigError("line " + std::to_string(lineno) + ": empty key");
            ini.sections[section][key] = value;
        }
        return ini;
    }

    static IniFile parse_file(const std::string& path) {
        std::ifstream f(path);
        if (!f) throw ConfigError("cannot open config '" + path + "'");
        std::stringstream ss;
        ss << f.rdbuf();
        return parse_text(ss.str());
    }
};

struct ObjectiveSpec {
    std::string kind;           // scaled_quadratic | counterexample | smoothed_abs
    std::size_t dim = 0;
    std::string target;         // scaled_quadratic: ones_then_uniform | list:... | constant:c
    std::uint64_t seed = 0;
    double x_tilde = 0.0;       // counterexample
    double delta = 0.1;         // smoothed_abs
    std::string center;         // smoothed_abs: list:... | constant:c
};

struct ExperimentConfig {
    ObjectiveSpec objective;
    OptimizerSpec optimizer;
    LrSchedule schedule;
    long steps = 0;
    std::string x0_spec;        // uniform:lo,hi | list:... | constant:c
    std::uint64_t seed = 0;     // drives the x0 draw
    RecordOptions record;
    bool record_all_coords = false;  // force per-coordinate columns at any dimension
    std::string output_path;
};

namespace detail {

struct FieldReader {
    const IniFile& ini;
    std::vector<std::string> errors;
    std::map<std::string, std::vector<std::string>> known;

    explicit FieldReader(const IniFile& f) : ini(f) {}

    std::optional<std::string> raw(const std::string& section, const std::string& key) {
        known[section].push_back(key);
        auto s = ini.sections.find(section);
        if (s == ini.sections.end()) return std::nullopt;
        auto k = s->second.find(key);
        if (k == s->second.end()) return std::nullopt;
        return k->second;
    }

    void fail(const std::string& section, const std::string& key, const std::string& msg) {
        errors.push_back(section + "." + key + ": " + msg);
    }

    std::string str(const std::string& sec, const std::string& key, const std::string& dflt) {
        auto v = raw(sec, key);
        return v ? *v : dflt;
    }

    double num(const std::string& sec, const std::string& key, double dflt) {
        auto v = raw(sec, key);
        if (!v) return dflt;
        try {
            return parse_double(*v);
        } catch (const std::exception&) {
            fail(sec, key, "not a number: '" + *v + "'");
            return dflt;
        }
    }

    long integer(const std::string& sec, const std::string& key, long dflt) {
        double d = num(sec, key, double(dflt));
        long l = long(d);
        if (double(l) != d) fail(sec, key, "not an integer");
        return l;
    }

    bool boolean(const std::string& sec, const std::string& key, bool dflt) {
        auto v = raw(sec, key);
        if (!v) return dflt;
        if (*v == "true" || *v == "1") return true;
        if (*v == "false" || *v == "0") return false;
        fail(sec, key, "expected true/false");
        return dflt;
    }

    /// Flag unknown keys and sections after all reads.
    void check_unknown() {
        for (const auto& [sec, kv] : ini.sections) {
            auto it = known.find(sec);
            if (it == known.end()) {
                errors.push_back(sec + ": unknown section");
                continue;
            }
            for (const auto& [key, value] : kv) {
                (void)value;
                bool found = false;
                for (const auto& k : it->second)
                    if (k == key) {
                        found = true;
                        break;
                    }
                if (!found) errors.push_back(sec + "." + key + ": unknown key");
            }
        }
    }
};

inline std::optional<Vec> parse_vec_field(FieldReader& r, const std::string& sec,
                                          const std::string& key) {
    auto v = r.raw(sec, key);
    if (!v) return std::nullopt;
    if (v->rfind("list:", 0) != 0) {
        r.fail(sec, key, "expected list:v1,v2,...");
        return std::nullopt;
    }
    try {
        return split_vec(v->substr(5));
    } catch (const std::exception& e) {
        r.fail(sec, key, e.what());
        return std::nullopt;
    }
}

}  // namespace detail

/// Parse and validate a full experiment configuration.  Throws ConfigError
/// listing every offending field.
inline ExperimentConfig parse_experiment_config(const IniFile& ini) {
    detail::FieldReader r(ini);
    ExperimentConfig cfg;

    // [objective]
    cfg.objective.kind = r.str("objective", "kind", "");
    cfg.objective.dim = std::size_t(r.integer("objective", "dim", 0));
    cfg.objective.target = r.str("objective", "target", "");
    cfg.objective.seed = std::uint64_t(r.integer("objective", "seed", 0));
    cfg.objective.x_tilde = r.num("objective", "x_tilde", 0.0);
    cfg.objective.delta = r.num("objective", "delta", 0.1);
    cfg.objective.center = r.str("objective", "center", "");
    if (cfg.objective.kind.empty()) r.fail("objective", "kind", "required");
    else if (cfg.objective.kind == "scaled_quadratic") {
        if (cfg.objective.target.empty()) r.fail("objective", "target", "required");
        if (cfg.objective.dim == 0 && cfg.objective.target.rfind("list:", 0) != 0)
            r.fail("objective", "dim", "required unless target is an explicit list");
    } else if (cfg.objective.kind == "counterexample") {
        if (!r.raw("objective", "x_tilde")) r.fail("objective", "x_tilde", "required");
    } else if (cfg.objective.kind == "smoothed_abs") {
        if (cfg.objective.center.empty()) r.fail("objective", "center", "required");
        if (!(cfg.objective.delta > 0.0)) r.fail("objective", "delta", "must be positive");
        if (cfg.objective.dim == 0 && cfg.objective.center.rfind("list:", 0) != 0)
            r.fail("objective", "dim", "required unless center is an explicit list");
    } else {
        r.fail("objective", "kind", "unknown kind '" + cfg.objective.kind + "'");
    }

    // [optimizer]
    std::string okind = r.str("optimizer", "kind", "");
    OptimizerSpec& opt = cfg.optimizer;
    if (okind == "adamw" || okind == "adam_l2") {
        opt.kind = OptimizerSpec::Kind::Adam;
        opt.adam.decay_mode =
            okind == "adamw" ? DecayMode::Decoupled : DecayMode::L2Regularized;
        opt.adam.beta1 = r.num("optimizer", "beta1", 0.9);
        opt.adam.beta2 = r.num("optimizer", "beta2", 0.999);
        opt.adam.lambda = r.num("optimizer", "lambda", 0.0);
        opt.adam.epsilon = r.num("optimizer", "epsilon", 1e-16);
        opt.m0 = detail::parse_vec_field(r, "optimizer", "m0");
        opt.v0 = detail::parse_vec_field(r, "optimizer", "v0");
        if (!(opt.adam.beta1 >= 0.0 && opt.adam.beta1 < 1.0))
            r.fail("optimizer", "beta1", "must lie in [0,1)");
        if (!(opt.adam.beta2 > 0.0 && opt.adam.beta2 < 1.0))
            r.fail("optimizer", "beta2", "must lie in (0,1)");
        if (!(opt.adam.lambda >= 0.0)) r.fail("optimizer", "lambda", "must be >= 0");
        if (!(opt.adam.epsilon >= 0.0)) r.fail("optimizer", "epsilon", "must be >= 0");
    } else if (okind == "nsd") {
        opt.kind = OptimizerSpec::Kind::Nsd;
        try {
            opt.nsd.norm = norm_from_name(r.str("optimizer", "norm", "linf"));
        } catch (const std::exception& e) {
            r.fail("optimizer", "norm", e.what());
        }
        opt.nsd.lambda = r.num("optimizer", "lambda", 0.0);
        opt.nsd.normalized = r.boolean("optimizer", "normalized", true);
        if (!(opt.nsd.lambda >= 0.0)) r.fail("optimizer", "lambda", "must be >= 0");
    } else if (okind == "frank_wolfe") {
        opt.kind = OptimizerSpec::Kind::FrankWolfe;
        try {
            opt.fw_norm = norm_from_name(r.str("optimizer", "norm", "linf"));
        } catch (const std::exception& e) {
            r.fail("optimizer", "norm", e.what());
        }
        opt.fw_radius = r.num("optimizer", "radius", 1.0);
        if (!(opt.fw_radius > 0.0)) r.fail("optimizer", "radius", "must be positive");
    } else {
        r.fail("optimizer", "kind",
               okind.empty() ? "required" : "unknown kind '" + okind + "'");
    }

    // [schedule]
    std::string skind = r.str("schedule", "kind", "");
    double s_eta = r.num("schedule", "eta", 0.0);
    double s_lambda = r.num("schedule", "lambda", 0.0);
    auto s_values = r.raw("schedule", "values");
    if (skind == "constant") {
        if (!(s_eta > 0.0)) r.fail("schedule", "eta", "must be positive");
        else cfg.schedule = LrSchedule::constant(s_eta);
    } else if (skind == "fw_rate") {
        if (!(s_lambda > 0.0)) r.fail("schedule", "lambda", "must be positive");
        else cfg.schedule = LrSchedule::fw_rate(s_lambda);
    } else if (skind == "table") {
        if (!s_values) r.fail("schedule", "values", "required");
        else {
            try {
                cfg.schedule = LrSchedule::table(split_vec(*s_values));
            } catch (const std::exception& e) {
                r.fail("schedule", "values", e.what());
            }
        }
    } else {
        r.fail("schedule", "kind",
               skind.empty() ? "required" : "unknown kind '" + skind + "'");
    }

    // [run]
    cfg.steps = r.integer("run", "steps", 0);
    if (cfg.steps < 1) r.fail("run", "steps", "must be >= 1");
    cfg.x0_spec = r.str("run", "x0", "");
    if (cfg.x0_spec.empty()) r.fail("run", "x0", "required");
    cfg.seed = std::uint64_t(r.integer("run", "seed", 0));
    cfg.record.record_every = r.integer("run", "record_every", 0);
    if (cfg.record.record_every < 0) r.fail("run", "record_every", "must be >= 1");
    std::string coords = r.str("run", "record_coords", "");
    if (coords == "none") {
        cfg.record.coords = std::vector<std::size_t>{};
    } else if (coords == "all") {
        // resolved against the objective dimension at build time
        cfg.record_all_coords = true;
    } else if (!coords.empty()) {
        std::vector<std::size_t> idx;
        try {
            for (double v : split_vec(coords)) {
                if (v < 0 || v != double(std::size_t(v)))
                    throw std::invalid_argument("coordinate indices must be non-negative integers");
                idx.push_back(std::size_t(v));
            }
            cfg.record.coords = idx;
        } catch (const std::exception& e) {
            r.fail("run", "record_coords", e.what());
        }
    }
    cfg.record.bounds = r.boolean("run", "record_bounds", false);
    cfg.record.convergence_window = r.integer("run", "convergence_window", 100);
    cfg.record.convergence_tol = r.num("run", "convergence_tol", 1e-8);
    if (cfg.record.convergence_window < 0)
        r.fail("run", "convergence_window", "must be >= 0");

    // [output]
    cfg.output_path = r.str("output", "path", "");

    r.check_unknown();
    if (!r.errors.empty()) {
        std::string msg = "invalid config:";
        for (const auto& e : r.errors) msg += "\n  " + e;
        throw ConfigError(msg);
    }
    return cfg;
}

inline ExperimentConfig load_experiment_config(const std::string& path) {
    return parse_experiment_config(IniFile::parse_file(path));
}

}  // namespace nsdw

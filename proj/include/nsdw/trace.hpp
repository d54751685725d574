#pragma once

// Per-run record: a header block of key=value pairs (config echo, seed,
// version, start/final iterates) plus numeric rows, persisted as CSV.
// Floats are serialized with 17 significant digits so a round trip is
// bit-exact and two identical runs produce identical files.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "nsdw/vecmath.hpp"

namespace nsdw {

inline std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

inline double parse_double(const std::string& s) {
    const char* p = s.c_str();
    char* end = nullptr;
    double v = std::strtod(p, &end);
    if (end == p) throw std::invalid_argument("not a number: '" + s + "'");
    return v;
}

inline std::string join_vec(const Vec& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ',';
        out += format_double(v[i]);
    }
    return out;
}

inline Vec split_vec(const std::string& s) {
    Vec out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) out.push_back(parse_double(tok));
    return out;
}

struct Trace {
    std::vector<std::pair<std::string, std::string>> header;
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;

    void set(const std::string& key, const std::string& value) {
        for (auto& kv : header)
            if (kv.first == key) {
                kv.second = value;
                return;
            }
        header.emplace_back(key, value);
    }

    std::optional<std::string> get(const std::string& key) const {
        for (const auto& kv : header)
            if (kv.first == key) return kv.second;
        return std::nullopt;
    }

    std::string require(const std::string& key) const {
        auto v = get(key);
        if (!v) throw std::runtime_error("trace header missing '" + key + "'");
        return *v;
    }

    bool has_column(const std::string& name) const {
        for (const auto& c : columns)
            if (c == name) return true;
        return false;
    }

    std::size_t column_index(const std::string& name) const {
        for (std::size_t i = 0; i < columns.size(); ++i)
            if (columns[i] == name) return i;
        throw std::runtime_error("trace missing column '" + name + "'");
    }

    std::vector<double> column(const std::string& name) const {
        std::size_t j = column_index(name);
        std::vector<double> out;
        out.reserve(rows.size());
        for (const auto& r : rows) out.push_back(r[j]);
        return out;
    }

    /// Recorded coordinate indices, from the delta_<j> column names.
    std::vector<std::size_t> recorded_coords() const {
        std::vector<std::size_t> out;
        for (const auto& c : columns)
            if (c.rfind("delta_", 0) == 0) out.push_back(std::size_t(std::stoul(c.substr(6))));
        return out;
    }
};

inline void write_trace_csv(const Trace& tr, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open '" + path + "' for writing");
    for (const auto& kv : tr.header) f << "# " << kv.first << " = " << kv.second << "\n";
    for (std::size_t i = 0; i < tr.columns.size(); ++i)
        f << (i ? "," : "") << tr.columns[i];
    f << "\n";
    for (const auto& row : tr.rows) {
        for (std::size_t i = 0; i < row.size(); ++i)
            f << (i ? "," : "") << format_double(row[i]);
        f << "\n";
    }
    if (!f) throw std::runtime_error("write failed for '" + path + "'");
}

inline Trace read_trace_csv(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open '" + path + "'");
    Trace tr;
    std::string line;
    bool got_columns = false;
    while (std::getline(f, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::size_t start = line.size() > 1 && line[1] == ' ' ? 2 : 1;
            std::size_t sep = line.find(" = ", start);
            if (sep == std::string::npos) continue;
            tr.header.emplace_back(line.substr(start, sep - start), line.substr(sep + 3));
            continue;
        }
        std::stringstream ss(line);
        std::string tok;
        if (!got_columns) {
            while (std::getline(ss, tok, ',')) tr.columns.push_back(tok);
            got_columns = true;
            continue;
        }
        std::vector<double> row;
        row.reserve(tr.columns.size());
        while (std::getline(ss, tok, ',')) row.push_back(parse_double(tok));
        if (row.size() != tr.columns.size())
            throw std::runtime_error("malformed row in '" + path + "': expected " +
                                     std::to_string(tr.columns.size()) + " fields, got " +
                                     std::to_string(row.size()));
        tr.rows.push_back(std::move(row));
    }
    if (!got_columns) throw std::runtime_error("'" + path + "' has no column row");
    return tr;
}

}  // namespace nsdw

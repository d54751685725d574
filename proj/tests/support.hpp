#pragma once

// Shared helpers for the test suites: finite-difference gradients, temp
// directories, and driving the CLI binary end to end.

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <unistd.h>

#include "nsdw/nsdw.hpp"

namespace support {

using nsdw::Objective;
using nsdw::Vec;

/// Central-difference gradient, step scaled per coordinate.
inline Vec fd_gradient(const Objective& obj, const Vec& x) {
    Vec g(x.size());
    Vec p = x;
    for (std::size_t i = 0; i < x.size(); ++i) {
        double h = 1e-6 * std::max(1.0, std::fabs(x[i]));
        p[i] = x[i] + h;
        double up = obj.eval(p);
        p[i] = x[i] - h;
        double down = obj.eval(p);
        p[i] = x[i];
        g[i] = (up - down) / (2.0 * h);
    }
    return g;
}

/// Largest per-coordinate relative error, floored at unit scale.
inline double max_rel_err(const Vec& got, const Vec& want) {
    double worst = 0.0;
    for (std::size_t i = 0; i < got.size(); ++i)
        worst = std::max(worst,
                         std::fabs(got[i] - want[i]) / std::max(1.0, std::fabs(want[i])));
    return worst;
}

/// Self-cleaning scratch directory.
struct TempDir {
    std::filesystem::path path;
    TempDir() {
        static std::atomic<int> counter{0};
        path = std::filesystem::temp_directory_path() /
               ("nsdw_test_" + std::to_string(::getpid()) + "_" +
                std::to_string(counter.fetch_add(1)));
        std::filesystem::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

inline std::string read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary);
    f << content;
}

/// Path of the CLI binary under test (exported by the build).
inline std::string cli_bin() {
    const char* p = std::getenv("NSDW_CLI_BIN");
    return p ? p : "";
}

/// Run the CLI with the given argument string; returns its exit code and
/// captures combined stdout/stderr.
inline int run_cli(const std::string& args, std::string* output = nullptr) {
    TempDir tmp;
    std::string outfile = tmp.file("out.txt");
    std::string cmd = cli_bin() + " " + args + " > " + outfile + " 2>&1";
    int rc = std::system(cmd.c_str());
    if (output) *output = read_file(outfile);
    if (rc == -1) return -1;
    return WEXITSTATUS(rc);
}

}  // namespace support

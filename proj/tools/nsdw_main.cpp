// nsdw command line: run configured experiments, replay the canned
// scenarios, check recorded traces against the bounds, report optimality
// residuals, sweep parameter grids, and plot trace columns.
//
// Exit codes: 0 success, 1 usage/config/data errors, 2 a bound check failed.

#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "nsdw/nsdw.hpp"

namespace fs = std::filesystem;

namespace {

/// Resolve an output path: relative paths land in $NSDW_OUT_DIR when set.
std::string resolve_out(const std::string& path) {
    const char* base = std::getenv("NSDW_OUT_DIR");
    if (!base || !*base || path.empty()) return path;
    fs::path p(path);
    if (p.is_absolute()) return path;
    return (fs::path(base) / p).string();
}

void ensure_parent_dir(const std::string& path) {
    fs::path parent = fs::path(path).parent_path();
    if (!parent.empty()) fs::create_directories(parent);
}

int cmd_run(const std::string& config_path, const std::string& out_override,
            long steps_override, std::optional<std::uint64_t> seed_override) {
    nsdw::ExperimentConfig cfg = nsdw::load_experiment_config(config_path);
    if (!out_override.empty()) cfg.output_path = out_override;
    if (cfg.output_path.empty()) cfg.output_path = "trace.csv";
    cfg.output_path = resolve_out(cfg.output_path);
    if (steps_override > 0) cfg.steps = steps_override;
    if (seed_override) cfg.seed = *seed_override;
    ensure_parent_dir(cfg.output_path);
    nsdw::RunResult res = nsdw::run_experiment(cfg);
    std::printf("wrote %s (%zu rows)\n", cfg.output_path.c_str(), res.trace.rows.size());
    std::printf("final loss %s\n",
                nsdw::format_double(res.trace.rows.empty()
                                        ? 0.0
                                        : res.trace.rows.back()[res.trace.column_index("loss")])
                    .c_str());
    if (res.converged_at)
        std::printf("converged at step %ld\n", *res.converged_at);
    return 0;
}

int cmd_scenario(const std::string& name, bool list, std::optional<std::uint64_t> seed,
                 const std::string& out_dir) {
    if (list) {
        std::puts("synthetic-comparison");
        std::puts("counterexample");
        return 0;
    }
    std::string dir = resolve_out(out_dir.empty() ? "." : out_dir);
    fs::create_directories(dir);
    if (name == "synthetic-comparison") {
        auto runs = nsdw::scenario_synthetic_comparison(seed.value_or(1));
        for (const auto& s : runs) {
            std::string path = (fs::path(dir) / (s.name + ".csv")).string();
            nsdw::write_trace_csv(s.result.trace, path);
            std::printf("wrote %s\n", path.c_str());
        }
        return 0;
    }
    if (name == "counterexample") {
        if (seed) {
            std::fprintf(stderr, "error: scenario 'counterexample' is deterministic; "
                                 "--seed is not accepted\n");
            return 1;
        }
        auto s = nsdw::scenario_counterexample();
        std::string path = (fs::path(dir) / "counterexample.csv").string();
        nsdw::write_trace_csv(s.result.trace, path);
        std::printf("wrote %s\n", path.c_str());
        return 0;
    }
    std::fprintf(stderr, "error: unknown scenario '%s' (see --list)\n", name.c_str());
    return 1;
}

int cmd_check(const std::string& bound, const std::string& trace_path,
              const std::string& report_path) {
    nsdw::Trace tr = nsdw::read_trace_csv(trace_path);
    nsdw::CheckResult res = nsdw::run_check(bound, tr);
    if (!report_path.empty()) {
        std::string path = resolve_out(report_path);
        ensure_parent_dir(path);
        std::ofstream f(path, std::ios::binary);
        if (!f) throw std::runtime_error("cannot open report path '" + path + "'");
        f << "t,coord,margin\n";
        for (const auto& r : res.rows) {
            f << r.t << ',';
            if (r.coord != SIZE_MAX) f << r.coord;
            f << ',' << nsdw::format_double(r.margin) << '\n';
        }
    }
    const nsdw::CheckRow* bad = res.first_violation();
    std::printf("%s: %zu margins, min %s\n", res.bound.c_str(), res.rows.size(),
                nsdw::format_double(res.min_margin()).c_str());
    if (bad) {
        if (bad->coord != SIZE_MAX)
            std::printf("VIOLATION at t=%ld coord=%zu margin=%s\n", bad->t, bad->coord,
                        nsdw::format_double(bad->margin).c_str());
        else
            std::printf("VIOLATION at t=%ld margin=%s\n", bad->t,
                        nsdw::format_double(bad->margin).c_str());
        return 2;
    }
    std::puts("OK");
    return 0;
}

int cmd_kkt(const std::string& trace_path, const std::string& x_spec, double lambda_arg,
            const std::string& norm_arg) {
    nsdw::Trace tr = nsdw::read_trace_csv(trace_path);
    nsdw::Objective obj = nsdw::objective_from_header(tr);
    nsdw::Vec x;
    if (!x_spec.empty()) {
        if (x_spec.rfind("list:", 0) != 0)
            throw std::invalid_argument("--x expects list:v1,v2,...");
        x = nsdw::split_vec(x_spec.substr(5));
    } else {
        x = nsdw::split_vec(tr.require("final_x"));
    }
    double lambda = lambda_arg;
    if (!(lambda > 0.0)) {
        auto v = tr.get("optimizer.lambda");
        if (v) lambda = nsdw::parse_double(*v);
    }
    if (!(lambda > 0.0))
        throw std::invalid_argument("no positive lambda: pass --lambda or use a decayed trace");
    nsdw::Norm k = norm_arg.empty() ? nsdw::Norm::LInf : nsdw::norm_from_name(norm_arg);
    if (norm_arg.empty()) {
        std::string kind = tr.require("optimizer.kind");
        if (kind == "nsd" || kind == "frank_wolfe")
            k = nsdw::norm_from_name(tr.require("optimizer.norm"));
    }
    nsdw::KKTReport rep = nsdw::kkt_residual(obj, x, lambda, k);
    std::printf("norm %s  lambda %s\n", nsdw::norm_name(k).c_str(),
                nsdw::format_double(lambda).c_str());
    std::printf("feasibility_gap %s\n", nsdw::format_double(rep.feasibility_gap).c_str());
    std::printf("alignment_residual %s\n", nsdw::format_double(rep.alignment_residual).c_str());
    return 0;
}

struct GridAxis {
    std::string section, key;
    std::vector<std::string> values;
};

std::vector<GridAxis> parse_grid(const std::string& grid) {
    std::vector<GridAxis> axes;
    std::istringstream in(grid);
    std::string part;
    while (std::getline(in, part, ';')) {
        if (part.empty()) continue;
        std::size_t eq = part.find('=');
        std::size_t dot = part.find('.');
        if (eq == std::string::npos || dot == std::string::npos || dot > eq)
            throw std::invalid_argument("grid entries look like section.key=v1,v2,...");
        GridAxis ax;
        ax.section = part.substr(0, dot);
        ax.key = part.substr(dot + 1, eq - dot - 1);
        std::istringstream vals(part.substr(eq + 1));
        std::string v;
        while (std::getline(vals, v, ',')) ax.values.push_back(v);
        if (ax.values.empty()) throw std::invalid_argument("grid axis with no values");
        axes.push_back(std::move(ax));
    }
    if (axes.empty()) throw std::invalid_argument("empty grid");
    return axes;
}

int cmd_sweep(const std::string& config_path, const std::string& grid, const std::string& out_dir,
              int parallel) {
    nsdw::IniFile base = nsdw::IniFile::parse_file(config_path);
    std::vector<GridAxis> axes = parse_grid(grid);
    std::size_t total = 1;
    for (const auto& ax : axes) total *= ax.values.size();

    std::string dir = resolve_out(out_dir.empty() ? "sweep" : out_dir);
    fs::create_directories(dir);

    struct Row {
        std::vector<std::string> values;
        std::string path;
        std::string final_loss, x_linf, x_l2, converged;
        std::string error;
    };
    std::vector<Row> rows(total);

    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= total) return;
            nsdw::IniFile ini = base;
            Row& row = rows[i];
            std::size_t rem = i;
            for (const auto& ax : axes) {
                const std::string& v = ax.values[rem % ax.values.size()];
                rem /= ax.values.size();
                ini.sections[ax.section][ax.key] = v;
                row.values.push_back(v);
            }
            char name[32];
            std::snprintf(name, sizeof name, "run_%03zu.csv", i);
            row.path = (fs::path(dir) / name).string();
            try {
                nsdw::ExperimentConfig cfg = nsdw::parse_experiment_config(ini);
                cfg.output_path = row.path;
                nsdw::RunResult res = nsdw::run_experiment(cfg);
                const auto& last = res.trace.rows.back();
                row.final_loss = nsdw::format_double(last[res.trace.column_index("loss")]);
                row.x_linf = nsdw::format_double(last[res.trace.column_index("x_linf")]);
                row.x_l2 = nsdw::format_double(last[res.trace.column_index("x_l2")]);
                row.converged =
                    res.converged_at ? std::to_string(*res.converged_at) : "";
            } catch (const std::exception& e) {
                row.error = e.what();
            }
        }
    };
    int n_threads = std::max(parallel, 1);
    std::vector<std::thread> pool;
    for (int i = 1; i < n_threads; ++i) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();

    std::string summary_path = (fs::path(dir) / "summary.csv").string();
    std::ofstream f(summary_path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open '" + summary_path + "'");
    f << "run";
    for (const auto& ax : axes) f << ',' << ax.section << '.' << ax.key;
    f << ",trace,final_loss,final_x_linf,final_x_l2,converged_at\n";
    int failures = 0;
    for (std::size_t i = 0; i < total; ++i) {
        const Row& row = rows[i];
        f << i;
        for (const auto& v : row.values) f << ',' << v;
        f << ',' << row.path << ',' << row.final_loss << ',' << row.x_linf << ','
          << row.x_l2 << ',' << row.converged << '\n';
        if (!row.error.empty()) {
            std::fprintf(stderr, "run %zu failed: %s\n", i, row.error.c_str());
            ++failures;
        }
    }
    f.close();
    std::printf("wrote %s (%zu runs, %d failed)\n", summary_path.c_str(), total, failures);
    return failures == 0 ? 0 : 1;
}

int cmd_plot(const std::string& trace_path, const std::string& columns, const std::string& out,
             bool logy, const std::string& xcol) {
    nsdw::Trace tr = nsdw::read_trace_csv(trace_path);
    std::vector<std::string> names;
    {
        std::istringstream in(columns);
        std::string c;
        while (std::getline(in, c, ','))
            if (!c.empty()) names.push_back(c);
    }
    if (names.empty()) throw std::invalid_argument("--columns lists at least one column");
    std::vector<double> xs = tr.column(xcol);
    std::vector<nsdw::Series> series;
    for (const auto& n : names) series.push_back({n, xs, tr.column(n)});

    std::string svg_path = resolve_out(out);
    ensure_parent_dir(svg_path);
    fs::path csv_path = fs::path(svg_path);
    csv_path.replace_extension(".csv");
    nsdw::write_line_chart(svg_path, fs::path(trace_path).filename().string(), xcol,
                           names.size() == 1 ? names[0] : "value", series, logy);
    nsdw::write_chart_csv(csv_path.string(), series);
    std::printf("wrote %s and %s\n", svg_path.c_str(), csv_path.string().c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"steepest-descent and Adam experiment harness"};
    app.require_subcommand(1);

    // run
    auto* run = app.add_subcommand("run", "run one configured experiment");
    std::string run_config, run_out;
    long run_steps = 0;
    std::optional<std::uint64_t> run_seed;
    run->add_option("--config", run_config, "experiment config file")->required();
    run->add_option("--out", run_out, "trace output path (overrides [output] path)");
    run->add_option("--steps", run_steps, "override [run] steps");
    run->add_option("--seed", run_seed, "override [run] seed");

    // scenario
    auto* scen = app.add_subcommand("scenario", "run a canned scenario");
    std::string scen_name, scen_out;
    std::optional<std::uint64_t> scen_seed;
    bool scen_list = false;
    scen->add_option("name", scen_name, "scenario name");
    scen->add_flag("--list", scen_list, "list scenario names");
    scen->add_option("--seed", scen_seed, "seed (synthetic-comparison only)");
    scen->add_option("--out", scen_out, "output directory");

    // check
    auto* check = app.add_subcommand("check", "check a recorded trace against a bound");
    std::string check_bound, check_trace, check_report;
    check->add_option("bound", check_bound,
                      "unit-update | ball-shrinkage | amortized | rate | iterate-norm")
        ->required();
    check->add_option("--trace", check_trace, "trace csv")->required();
    check->add_option("--report", check_report, "write per-row margins to this csv");

    // kkt
    auto* kkt = app.add_subcommand("kkt", "optimality residuals at a trace's final point");
    std::string kkt_trace, kkt_x, kkt_norm;
    double kkt_lambda = 0.0;
    kkt->add_option("--trace", kkt_trace, "trace csv")->required();
    kkt->add_option("--x", kkt_x, "evaluate at list:v1,... instead of final_x");
    kkt->add_option("--lambda", kkt_lambda, "decay strength (default: from trace)");
    kkt->add_option("--norm", kkt_norm, "l1 | l2 | linf (default: from trace)");

    // sweep
    auto* sweep = app.add_subcommand("sweep", "run a cartesian parameter grid");
    std::string sweep_config, sweep_grid, sweep_out;
    int sweep_parallel = 1;
    sweep->add_option("--config", sweep_config, "base experiment config")->required();
    sweep->add_option("--grid", sweep_grid, "section.key=v1,v2;section.key=...")->required();
    sweep->add_option("--out", sweep_out, "output directory (default: sweep)");
    sweep->add_option("--parallel", sweep_parallel, "worker threads (default 1)");

    // plot
    auto* plot = app.add_subcommand("plot", "render trace columns as an svg chart");
    std::string plot_trace, plot_columns, plot_out, plot_x = "t";
    bool plot_logy = false;
    plot->add_option("--trace", plot_trace, "trace csv")->required();
    plot->add_option("--columns", plot_columns, "comma-separated y columns")->required();
    plot->add_option("--out", plot_out, "output svg path")->required();
    plot->add_option("--x", plot_x, "x column (default t)");
    plot->add_flag("--logy", plot_logy, "log10 y axis, drops non-positive samples");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);  // prints help, exit 0
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (run->parsed()) return cmd_run(run_config, run_out, run_steps, run_seed);
        if (scen->parsed()) {
            if (!scen_list && scen_name.empty()) {
                std::fprintf(stderr, "error: scenario name required (see --list)\n");
                return 1;
            }
            return cmd_scenario(scen_name, scen_list, scen_seed, scen_out);
        }
        if (check->parsed()) return cmd_check(check_bound, check_trace, check_report);
        if (kkt->parsed()) return cmd_kkt(kkt_trace, kkt_x, kkt_lambda, kkt_norm);
        if (sweep->parsed()) return cmd_sweep(sweep_config, sweep_grid, sweep_out, sweep_parallel);
        if (plot->parsed()) return cmd_plot(plot_trace, plot_columns, plot_out, plot_logy, plot_x);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 1;
}

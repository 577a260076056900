#pragma once

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "quadifs/analysis.hpp"
#include "quadifs/core.hpp"
#include "quadifs/markov.hpp"
#include "quadifs/render.hpp"
#include "quadifs/system_io.hpp"

namespace quadifs {

// Exit codes: 0 ok, 1 usage, 2 parse/validation, 3 engine, 4 io.
namespace exit_code {
inline constexpr int kOk = 0;
inline constexpr int kUsage = 1;
inline constexpr int kParse = 2;
inline constexpr int kEngine = 3;
inline constexpr int kIo = 4;
}  // namespace exit_code

namespace detail {

struct RunArgs {
    std::string system_path;
    int iters = 0;
    std::string engine = "quadtree";
    std::uint32_t n_max = 64;
    bool attractor_only = false;
    std::string points_path;
    std::string image_path;
    int width = 512;
    int height = 512;
    std::string stats_path;
    std::string tree_dump_path;
};

struct SweepArgs {
    std::string system_path;
    int iters = 0;
    std::string nmax_list = "2,4,8,16,32,64,128,256,512,1024";
    bool linear_baseline = false;
    std::string out_path;
};

inline std::vector<std::uint32_t> parse_nmax_list(const std::string& text) {
    std::vector<std::uint32_t> values;
    std::stringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) {
        if (item.empty()) throw std::invalid_argument("empty entry in capacity list");
        std::size_t used = 0;
        const unsigned long v = std::stoul(item, &used);
        if (used != item.size() || v < 1)
            throw std::invalid_argument("bad capacity '" + item + "'");
        values.push_back(static_cast<std::uint32_t>(v));
    }
    if (values.empty()) throw std::invalid_argument("empty capacity list");
    return values;
}

inline void write_stats_csv(const RunStats& stats, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out << "iteration,points,searches,comparisons,height,splits,time_s\n";
    char buf[160];
    for (const IterationStats& s : stats.iterations) {
        std::snprintf(buf, sizeof buf, "%d,%llu,%llu,%llu,%d,%llu,%.9g\n", s.iteration,
                      static_cast<unsigned long long>(s.points),
                      static_cast<unsigned long long>(s.searches),
                      static_cast<unsigned long long>(s.comparisons), s.tree_height,
                      static_cast<unsigned long long>(s.splits), s.wall_time_s);
        out << buf;
    }
    out.flush();
    if (!out) throw IoError("write failed: " + path);
}

inline int cmd_run(const RunArgs& args, std::ostream& out, std::ostream& err) {
    if (args.iters < 0) {
        err << "iteration count must be >= 0\n";
        return exit_code::kUsage;
    }
    if (!args.tree_dump_path.empty() && args.engine != "quadtree") {
        err << "--tree-dump needs the quadtree engine\n";
        return exit_code::kUsage;
    }

    const SystemSpec spec = load_system_file(args.system_path);

    RunOptions opt;
    opt.engine = args.engine == "linear" ? Engine::Linear : Engine::Quadtree;
    opt.n_max = args.n_max;
    opt.attractor_only = args.attractor_only;
    opt.keep_final_tree = !args.tree_dump_path.empty();
    const RunResult result = run_system(spec, args.iters, opt);

    if (!args.points_path.empty()) write_points_csv(result.points, args.points_path);
    if (!args.stats_path.empty()) write_stats_csv(result.stats, args.stats_path);
    if (!args.tree_dump_path.empty()) {
        std::ofstream dump(args.tree_dump_path);
        if (!dump) throw IoError("cannot open " + args.tree_dump_path + " for writing");
        if (result.final_tree) result.final_tree->dump(dump);
        dump.flush();
        if (!dump) throw IoError("write failed: " + args.tree_dump_path);
    }
    if (!args.image_path.empty()) {
        const RenderMode mode = args.attractor_only ? RenderMode::Attractor
                                : spec.mode == MeasureMode::Classic ? RenderMode::Classic
                                                                    : RenderMode::Idempotent;
        const ImageGrid img =
            rasterize(result.points, spec.region, args.width, args.height, mode);
        write_pgm(img, args.image_path);
    }

    char line[96];
    std::snprintf(line, sizeof line, "points=%llu height=%d time_s=%.6g\n",
                  static_cast<unsigned long long>(result.points.size()),
                  result.stats.max_height, result.stats.total_time_s);
    out << line;
    return exit_code::kOk;
}

inline int cmd_sweep(const SweepArgs& args, std::ostream& out, std::ostream& err) {
    if (args.iters < 0) {
        err << "iteration count must be >= 0\n";
        return exit_code::kUsage;
    }
    std::vector<std::uint32_t> nmax_values;
    try {
        nmax_values = parse_nmax_list(args.nmax_list);
    } catch (const std::exception& e) {
        err << e.what() << '\n';
        return exit_code::kUsage;
    }

    const SystemSpec spec = load_system_file(args.system_path);
    const SweepReport report = run_nmax_sweep(spec, args.iters, nmax_values, args.linear_baseline);
    for (const std::string& msg : report.row_errors) err << "sweep row failed: " << msg << '\n';

    std::ofstream csv(args.out_path);
    if (!csv) throw IoError("cannot open " + args.out_path + " for writing");
    write_sweep_csv(report, csv);
    csv.flush();
    if (!csv) throw IoError("write failed: " + args.out_path);

    if (report.rows.empty()) return exit_code::kEngine;
    (void)out;
    return exit_code::kOk;
}

}  // namespace detail

// Parses argv (program name excluded) and dispatches. All output goes through
// the given streams so tests can drive the interface in-process.
inline int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"deterministic fractal measure iteration with a quadtree point index"};
    app.require_subcommand(1);

    detail::RunArgs run_args;
    CLI::App* run = app.add_subcommand("run", "iterate one system and write its artifacts");
    run->add_option("--system", run_args.system_path, "system definition file")->required();
    run->add_option("--iters", run_args.iters, "number of iterations")->required();
    run->add_option("--engine", run_args.engine, "search engine")
        ->check(CLI::IsMember({"quadtree", "linear"}))
        ->capture_default_str();
    run->add_option("--nmax", run_args.n_max, "leaf capacity of the quadtree")
        ->check(CLI::Range(1u, 1u << 30))
        ->capture_default_str();
    run->add_flag("--attractor-only", run_args.attractor_only,
                  "skip weight updates, keep only the support");
    run->add_option("--points", run_args.points_path, "write final points as CSV");
    run->add_option("--image", run_args.image_path, "write a PGM raster");
    run->add_option("--width", run_args.width, "image width")->capture_default_str();
    run->add_option("--height", run_args.height, "image height")->capture_default_str();
    run->add_option("--stats", run_args.stats_path, "write per-iteration stats CSV");
    run->add_option("--tree-dump", run_args.tree_dump_path,
                    "write the final iteration's tree as text");

    detail::SweepArgs sweep_args;
    CLI::App* sweep = app.add_subcommand("sweep", "run once per leaf capacity, write a report");
    sweep->add_option("--system", sweep_args.system_path, "system definition file")->required();
    sweep->add_option("--iters", sweep_args.iters, "number of iterations")->required();
    sweep->add_option("--nmax-list", sweep_args.nmax_list, "comma-separated capacities")
        ->capture_default_str();
    sweep->add_flag("--linear-baseline", sweep_args.linear_baseline,
                    "also time one flat-scan run");
    sweep->add_option("--out", sweep_args.out_path, "report CSV path")->required();

    std::vector<const char*> argv;
    argv.reserve(args.size() + 1);
    argv.push_back("quadifs");
    for (const std::string& a : args) argv.push_back(a.c_str());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return exit_code::kOk;
    } catch (const CLI::ParseError& e) {
        err << e.what() << '\n';
        return exit_code::kUsage;
    }

    try {
        if (app.got_subcommand(run)) return detail::cmd_run(run_args, out, err);
        return detail::cmd_sweep(sweep_args, out, err);
    } catch (const ParseError& e) {
        err << "parse error: " << e.what() << '\n';
        return exit_code::kParse;
    } catch (const InvalidSpec& e) {
        err << "invalid system: " << e.what() << '\n';
        return exit_code::kParse;
    } catch (const CapacityExceeded& e) {
        err << "engine error: " << e.what() << '\n';
        return exit_code::kEngine;
    } catch (const IoError& e) {
        err << "io error: " << e.what() << '\n';
        return exit_code::kIo;
    }
}

}  // namespace quadifs

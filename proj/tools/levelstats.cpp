// Command-line front end: generate and solve lattice ensembles, analyze
// Riemann zero tables, merge partial runs and emit figure-ready datasets.

#include <CLI11.hpp>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "levelstats/core.hpp"

namespace fs = std::filesystem;
using namespace levelstats;

namespace {

std::string cache_root() {
    if (const char* env = std::getenv("LEVELSTATS_CACHE_ROOT")) return env;
    return "levelstats-cache";
}

std::pair<double, double> parse_pair(const std::string& s, const std::string& what) {
    auto comma = s.find(',');
    if (comma == std::string::npos) throw ConfigError(what + " expects 'a,b'");
    try {
        return {std::stod(s.substr(0, comma)), std::stod(s.substr(comma + 1))};
    } catch (const std::exception&) {
        throw ConfigError(what + " expects 'a,b'");
    }
}

struct CsvTable {
    std::string header_comment;
    std::vector<std::pair<double, double>> rows;
};

CsvTable read_two_column_csv(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("missing report file: " + path.string());
    CsvTable t;
    std::string line;
    bool saw_names = false;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            t.header_comment += line + "\n";
            continue;
        }
        if (!saw_names) {  // column-name row
            saw_names = true;
            continue;
        }
        auto comma = line.find(',');
        if (comma == std::string::npos) continue;
        t.rows.emplace_back(std::stod(line.substr(0, comma)), std::stod(line.substr(comma + 1)));
    }
    return t;
}

// --- run -------------------------------------------------------------------

struct RunCli {
    std::string config_path;
    std::map<std::string, std::string> overrides;
};

int cmd_run(const RunCli& cli) {
    KeyValueMap kv;
    if (!cli.config_path.empty()) kv = read_key_value_file(cli.config_path);
    for (const auto& [k, v] : cli.overrides) kv[k] = v;  // command line beats file
    for (const char* required : {"model", "n_realizations"})
        if (!kv.contains(required)) throw ConfigError(std::string("missing required key: ") + required);
    ExperimentPlan plan = plan_io::from_map(kv);
    if (plan.output_dir.empty())
        plan.output_dir = (fs::path(cache_root()) / (to_string(plan.model) + "-" + plan.hash().substr(0, 8))).string();

    auto report = run_experiment(plan);
    std::cout << "experiment written to " << report.dir << "\n";
    for (const auto& [k, v] : report.summary()) std::cout << "  " << k << '=' << v << '\n';
    if (report.n_failed > 0)
        std::cout << "warning: " << report.n_failed << " realizations failed (see failures.txt)\n";
    return 0;
}

// --- zeros -----------------------------------------------------------------

int cmd_zeros(const ZerosRunOptions& opts_in) {
    ZerosRunOptions opts = opts_in;
    if (opts.output_dir.empty())
        opts.output_dir = (fs::path(cache_root()) / "zeros").string();
    auto rep = run_zeros_analysis(opts);
    std::cout << "zeros analysis written to " << opts.output_dir << "\n";
    for (const auto& [k, v] : rep.summary()) std::cout << "  " << k << '=' << v << '\n';
    return 0;
}

// --- figures ---------------------------------------------------------------

struct FiguresCli {
    std::string chaotic, integrable, quasi, zeros, out;
};

void append_series(std::ofstream& out, const std::string& series, const CsvTable& t) {
    for (const auto& [x, y] : t.rows) out << series << ',' << format_full(x) << ',' << format_full(y) << '\n';
}

int cmd_figures(const FiguresCli& cli) {
    const std::vector<std::pair<std::string, std::string>> dirs = {
        {"chaotic", cli.chaotic}, {"integrable", cli.integrable}, {"quasi", cli.quasi}, {"zeros", cli.zeros}};
    for (const auto& [name, dir] : dirs) {
        if (dir.empty()) throw ConfigError("figures: missing --" + name + " directory");
        if (!fs::exists(fs::path(dir) / "report" / "summary.txt"))
            throw DataError("figures: no completed report in --" + name + " directory " + dir);
    }
    fs::create_directories(cli.out);
    {
        std::ofstream cfg(fs::path(cli.out) / "config.txt");
        for (const auto& [name, dir] : dirs) cfg << name << '=' << dir << '\n';
    }
    auto provenance = [&](std::ofstream& out) {
        for (const auto& [name, dir] : dirs) {
            auto summary = read_key_value_file((fs::path(dir) / "report" / "summary.txt").string());
            auto it = summary.find("plan_hash");
            out << "# " << name << '=' << dir
                << (it != summary.end() ? " plan=" + it->second : std::string()) << '\n';
        }
    };

    {
        std::ofstream out(fs::path(cli.out) / "fig1_signals.csv");
        provenance(out);
        out << "series,n,eps\n";
        for (const auto& [name, dir] : dirs) {
            if (name == "zeros") continue;  // the figure shows the three lattice regimes
            append_series(out, name, read_two_column_csv(fs::path(dir) / "report" / "level_signal.csv"));
        }
    }
    {
        std::ofstream out(fs::path(cli.out) / "fig2_powerspectra.csv");
        provenance(out);
        out << "series,f,P\n";
        for (const auto& [name, dir] : dirs)
            append_series(out, name, read_two_column_csv(fs::path(dir) / "report" / "power_spectrum.csv"));
    }
    {
        std::ofstream out(fs::path(cli.out) / "fig3_spacings.csv");
        provenance(out);
        out << "series,s,density\n";
        for (const auto& [name, dir] : dirs)
            append_series(out, name, read_two_column_csv(fs::path(dir) / "report" / "spacing_histogram.csv"));
        for (const auto& ref : {reference::wigner_goe(), reference::poisson(), reference::semi_poisson()}) {
            for (int i = 0; i < 240; ++i) {
                const double s = (2 * i + 1) * 0.025;
                out << "ref_" << ref.name << ',' << format_full(s) << ',' << format_full(ref.pdf(s)) << '\n';
            }
        }
    }
    {
        std::ofstream out(fs::path(cli.out) / "fig4_increments.csv");
        provenance(out);
        out << "series,x,density\n";
        for (const auto& [name, dir] : dirs)
            append_series(out, name, read_two_column_csv(fs::path(dir) / "report" / "increment_histogram.csv"));
        // gauss references use each run's fitted mu / sigma2, never hard-coded values
        for (const std::string name : {"chaotic", "zeros"}) {
            const std::string dir = name == "chaotic" ? cli.chaotic : cli.zeros;
            auto summary = read_key_value_file((fs::path(dir) / "report" / "summary.txt").string());
            const double mu = std::stod(summary.at("gauss_mu"));
            const double s2 = std::stod(summary.at("sigma2"));
            auto ref = reference::gauss(mu, s2);
            for (int i = -100; i <= 100; ++i) {
                const double x = i * 0.05;
                out << "ref_gauss_" << name << ',' << format_full(x) << ',' << format_full(ref.pdf(x)) << '\n';
            }
        }
        auto lap = reference::laplace(1.0);
        for (int i = -100; i <= 100; ++i) {
            const double x = i * 0.05;
            out << "ref_laplace," << format_full(x) << ',' << format_full(lap.pdf(x)) << '\n';
        }
        auto pinc = reference::poisson_increment();
        for (int i = 0; i < 100; ++i) {
            const double x = (2 * i + 1) * 0.025;
            out << "ref_poisson_increment," << format_full(x) << ',' << format_full(pinc.pdf(x)) << '\n';
        }
    }
    std::cout << "figure datasets written to " << cli.out << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"spectral statistics of energy-level sequences"};
    app.set_version_flag("--version", std::string("levelstats ") + LEVELSTATS_VERSION);
    app.require_subcommand(0, 1);

    // ---- run ----
    RunCli run_cli;
    auto* run = app.add_subcommand("run", "build, solve and analyze a lattice ensemble");
    run->add_option("--config", run_cli.config_path, "key=value config file");
    std::map<std::string, std::string> opt_values;
    auto add_kv = [&](CLI::App* cmd, const std::string& flag, const std::string& key, const std::string& help) {
        auto* opt = cmd->add_option_function<std::string>(
            flag, [&opt_values, key](const std::string& v) { opt_values[key] = v; }, help);
        return opt;
    };
    add_kv(run, "--model", "model", "anderson | harper");
    add_kv(run, "--L", "L", "anderson linear lattice size (dimension L^3)");
    add_kv(run, "--W", "W", "anderson disorder strength");
    add_kv(run, "--boundary", "boundary", "open | periodic");
    add_kv(run, "--N", "sites", "harper chain length");
    add_kv(run, "--sigma", "sigma", "harper frequency (default inverse golden mean)");
    add_kv(run, "--phase", "phase", "harper phase offset");
    add_kv(run, "--realizations", "n_realizations", "number of realizations");
    add_kv(run, "--offset", "realization_offset", "first realization index");
    add_kv(run, "--seed", "base_seed", "ensemble base seed");
    add_kv(run, "--margin", "margin", "solve-window margin fraction");
    add_kv(run, "--unfolding", "unfolding", "staircase | poly:K | gauss:W");
    add_kv(run, "--trim", "trim", "edge trim fraction after unfolding");
    add_kv(run, "--signal-N", "signal_length", "standardized level-signal length");
    add_kv(run, "--solver", "solver", "auto | dense | lanczos");
    add_kv(run, "--dense-cap", "dense_cap", "largest dimension the dense path accepts");
    std::string window_str, fit_str, box_str, out_dir;
    auto* wopt = run->add_option("--window", window_str, "analysis window 'lo,hi'");
    auto* fopt = run->add_option("--fit-range", fit_str, "power-law fit range 'fmin,fmax'");
    auto* bopt = run->add_option("--box-scales", box_str, "box-count dyadic scales 'kmin,kmax'");
    run->add_option("--out", out_dir, "output directory (default under the cache root)");

    // ---- zeros ----
    ZerosRunOptions zo;
    auto* zeros = app.add_subcommand("zeros", "unfold and analyze a Riemann zero table");
    zeros->add_option("--file", zo.file, "text file, one zero height per line")->required();
    zeros->add_option("--offset", zo.offset, "skip this many leading zeros");
    zeros->add_option("--count", zo.count, "number of zeros to analyze (0 = all)");
    zeros->add_option("--signal-N", zo.signal_length, "signal block length");
    std::string zfit_str;
    auto* zfopt = zeros->add_option("--fit-range", zfit_str, "power-law fit range 'fmin,fmax'");
    zeros->add_option("--out", zo.output_dir, "output directory");

    // ---- figures ----
    FiguresCli fig;
    auto* figures = app.add_subcommand("figures", "emit plot-ready datasets from completed runs");
    figures->add_option("--chaotic", fig.chaotic, "chaotic-regime experiment directory");
    figures->add_option("--integrable", fig.integrable, "integrable-regime experiment directory");
    figures->add_option("--quasi", fig.quasi, "quasi-integrable experiment directory");
    figures->add_option("--zeros", fig.zeros, "zeros analysis directory");
    figures->add_option("--out", fig.out, "output directory")->required();

    // ---- merge ----
    std::vector<std::string> merge_dirs;
    std::string merge_out;
    auto* merge = app.add_subcommand("merge", "merge disjoint partial runs of one plan");
    merge->add_option("dirs", merge_dirs, "completed partial experiment directories")->expected(-2);
    merge->add_option("--out", merge_out, "output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help / --version
        app.exit(e);
        return 2;
    }

    try {
        if (run->parsed()) {
            if (wopt->count()) {
                auto [lo, hi] = parse_pair(window_str, "--window");
                opt_values["window_lo"] = format_full(lo);
                opt_values["window_hi"] = format_full(hi);
            }
            if (fopt->count()) {
                auto [lo, hi] = parse_pair(fit_str, "--fit-range");
                opt_values["fit_min"] = std::to_string(static_cast<long>(lo));
                opt_values["fit_max"] = std::to_string(static_cast<long>(hi));
            }
            if (bopt->count()) {
                auto [lo, hi] = parse_pair(box_str, "--box-scales");
                opt_values["box_kmin"] = std::to_string(static_cast<long>(lo));
                opt_values["box_kmax"] = std::to_string(static_cast<long>(hi));
            }
            if (!out_dir.empty()) opt_values["output_dir"] = out_dir;
            run_cli.overrides = opt_values;
            return cmd_run(run_cli);
        }
        if (zeros->parsed()) {
            if (zfopt->count()) {
                auto [lo, hi] = parse_pair(zfit_str, "--fit-range");
                zo.fit_min = static_cast<std::size_t>(lo);
                zo.fit_max = static_cast<std::size_t>(hi);
            }
            return cmd_zeros(zo);
        }
        if (figures->parsed()) return cmd_figures(fig);
        if (merge->parsed()) {
            auto rep = merge_experiments(merge_dirs, merge_out);
            std::cout << "merged " << merge_dirs.size() << " runs into " << merge_out << "\n";
            for (const auto& [k, v] : rep.summary()) std::cout << "  " << k << '=' << v << '\n';
            return 0;
        }
        std::cout << app.help();
        return 0;
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

#pragma once

#include <filesystem>
#include <string>

#include "levelstats/ensemble.hpp"
#include "levelstats/riemann.hpp"

namespace levelstats {

/// Zeta-zero pipeline settings. The unfolded sequence is one long series;
/// power spectra are averaged over consecutive disjoint blocks of
/// signal_length spacings.
struct ZerosRunOptions {
    std::string file;
    std::size_t offset = 0;  // skip this many leading zeros
    std::size_t count = 0;   // 0 = to the end of the table
    std::size_t signal_length = 2048;
    std::size_t fit_min = 4;
    std::size_t fit_max = 0;  // 0 = signal_length / 32
    int box_kmin = 3;
    int box_kmax = 9;
    std::string output_dir;
};

struct ZerosReport {
    ZerosRunOptions opts;
    std::size_t n_zeros = 0;
    SeriesAnalysis analysis;

    KeyValueMap summary() const {
        KeyValueMap kv;
        kv["model"] = "riemann_zeros";
        kv["file"] = opts.file;
        kv["offset"] = std::to_string(opts.offset);
        kv["count"] = std::to_string(opts.count);
        kv["unfolding"] = "riemann_von_mangoldt";
        kv["signal_length"] = std::to_string(opts.signal_length);
        kv["fit_min"] = std::to_string(opts.fit_min);
        kv["fit_max"] = std::to_string(opts.fit_max);
        kv["n_zeros"] = std::to_string(n_zeros);
        for (auto& [k, v] : summarize_analysis(analysis)) kv[k] = v;
        return kv;
    }
};

/// Load, unfold through the closed-form counting function, rescale to exact
/// unit mean spacing and run the standard series statistics.
inline ZerosReport run_zeros_analysis(const ZerosRunOptions& opts) {
    ZerosReport rep;
    rep.opts = opts;
    auto table = load_zeros(opts.file);
    auto u = unfold_zeros(table, opts.offset, opts.count, /*rescale=*/true);
    rep.n_zeros = u.levels.size();

    SeriesAnalysisOptions sa;
    sa.signal_length = opts.signal_length;
    sa.fit_min = opts.fit_min;
    sa.fit_max = opts.fit_max != 0 ? opts.fit_max : opts.signal_length / 32;
    sa.box_kmin = opts.box_kmin;
    sa.box_kmax = opts.box_kmax;
    sa.blocks_per_series = 0;  // every disjoint block of the one long series

    rep.analysis = analyze_spacing_sets({spacings(u)}, sa);

    if (!opts.output_dir.empty()) {
        namespace fs = std::filesystem;
        fs::create_directories(opts.output_dir);
        {
            std::ofstream out(fs::path(opts.output_dir) / "plan.txt");
            for (const auto& [k, v] : rep.summary()) out << k << '=' << v << '\n';
        }
        detail::write_report_files(opts.output_dir, "riemann_zeros", rep.summary(), rep.analysis);
    }
    return rep;
}

}  // namespace levelstats

#pragma once

#include <filesystem>
#include <atomic>
#include <future>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "levelstats/dense_solver.hpp"
#include "levelstats/errors.hpp"
#include "levelstats/io.hpp"
#include "levelstats/lanczos.hpp"
#include "levelstats/models.hpp"
#include "levelstats/riemann.hpp"
#include "levelstats/series_stats.hpp"
#include "levelstats/spectrum.hpp"
#include "levelstats/unfolding.hpp"

namespace levelstats {

enum class ModelKind { Anderson, Harper };

inline std::string to_string(ModelKind m) { return m == ModelKind::Anderson ? "anderson" : "harper"; }

enum class SolverChoice { Auto, Dense, Lanczos };

inline std::string to_string(SolverChoice s) {
    switch (s) {
        case SolverChoice::Auto: return "auto";
        case SolverChoice::Dense: return "dense";
        case SolverChoice::Lanczos: return "lanczos";
    }
    return "?";
}

/// Everything needed to reproduce a many-realization experiment. Realization
/// seeds are pure functions of (base_seed, index), so partial runs over
/// disjoint index ranges merge exactly.
struct ExperimentPlan {
    ModelKind model = ModelKind::Anderson;
    // anderson
    std::size_t L = 12;
    double W = 10.0;
    Boundary boundary = Boundary::Open;
    // harper
    std::size_t sites = 4096;
    double sigma = 0.6180339887498949;
    double phase = 0.0;
    // ensemble
    std::size_t n_realizations = 1;
    std::size_t realization_offset = 0;
    std::uint64_t base_seed = 1;
    // analysis
    double window_lo = 0.0;
    double window_hi = 2.0;
    double margin = 0.10;  // fraction of window width solved extra on each side
    IdosMethod unfolding{};
    double trim = 0.02;
    std::size_t signal_length = 2048;
    std::size_t fit_min = 4;
    std::size_t fit_max = 0;  // 0 = signal_length / 32
    int box_kmin = 3;
    int box_kmax = 9;
    double spacing_bin = 0.1;
    double increment_bin = 0.1;
    SolverChoice solver = SolverChoice::Auto;
    std::size_t dense_cap = 4096;
    std::string output_dir;

    std::size_t dim() const { return model == ModelKind::Anderson ? L * L * L : sites; }
    double solve_lo() const { return window_lo - margin * (window_hi - window_lo); }
    double solve_hi() const { return window_hi + margin * (window_hi - window_lo); }
    std::size_t effective_fit_max() const { return fit_max != 0 ? fit_max : signal_length / 32; }

    /// Canonical serialization; `core_only` drops the fields a merge is
    /// allowed to differ in (realization range, output directory).
    KeyValueMap to_map(bool core_only = false) const {
        KeyValueMap kv;
        kv["model"] = to_string(model);
        if (model == ModelKind::Anderson) {
            kv["L"] = std::to_string(L);
            kv["W"] = format_full(W);
            kv["boundary"] = to_string(boundary);
        } else {
            kv["sites"] = std::to_string(sites);
            kv["sigma"] = format_full(sigma);
            kv["phase"] = format_full(phase);
        }
        kv["base_seed"] = std::to_string(base_seed);
        kv["window_lo"] = format_full(window_lo);
        kv["window_hi"] = format_full(window_hi);
        kv["margin"] = format_full(margin);
        kv["unfolding"] = to_string(unfolding);
        kv["trim"] = format_full(trim);
        kv["signal_length"] = std::to_string(signal_length);
        kv["fit_min"] = std::to_string(fit_min);
        kv["fit_max"] = std::to_string(fit_max);
        kv["box_kmin"] = std::to_string(box_kmin);
        kv["box_kmax"] = std::to_string(box_kmax);
        kv["spacing_bin"] = format_full(spacing_bin);
        kv["increment_bin"] = format_full(increment_bin);
        kv["solver"] = to_string(solver);
        kv["dense_cap"] = std::to_string(dense_cap);
        if (!core_only) {
            kv["n_realizations"] = std::to_string(n_realizations);
            kv["realization_offset"] = std::to_string(realization_offset);
        }
        return kv;
    }

    /// The subset of fields that determine cached spectra: model physics,
    /// seed derivation, solve window and solver path. Analysis settings
    /// (unfolding, signal length, fit ranges, bins) are free to change
    /// without invalidating the cache.
    KeyValueMap solve_map() const {
        KeyValueMap kv;
        kv["model"] = to_string(model);
        if (model == ModelKind::Anderson) {
            kv["L"] = std::to_string(L);
            kv["W"] = format_full(W);
            kv["boundary"] = to_string(boundary);
        } else {
            kv["sites"] = std::to_string(sites);
            kv["sigma"] = format_full(sigma);
            kv["phase"] = format_full(phase);
        }
        kv["base_seed"] = std::to_string(base_seed);
        kv["solve_lo"] = format_full(solve_lo());
        kv["solve_hi"] = format_full(solve_hi());
        kv["solver"] = to_string(solver);
        kv["dense_cap"] = std::to_string(dense_cap);
        return kv;
    }

    /// FNV-1a over the core fields; partial runs of the same experiment share it.
    std::string hash() const { return detail_hash(to_map(true)); }

    /// Hash stamped into cached spectrum files.
    std::string solve_hash() const { return detail_hash(solve_map()); }

  private:
    static std::string detail_hash(const KeyValueMap& kv) {
        std::uint64_t h = 0xcbf29ce484222325ULL;
        auto mix = [&h](const std::string& s) {
            for (unsigned char c : s) {
                h ^= c;
                h *= 0x100000001b3ULL;
            }
        };
        for (const auto& [k, v] : kv) {
            mix(k);
            mix("=");
            mix(v);
            mix(";");
        }
        char buf[20];
        std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
        return buf;
    }
};

namespace plan_io {

inline IdosMethod parse_unfolding(const std::string& s) {
    IdosMethod m;
    if (s == "ensemble_staircase" || s == "staircase") {
        m.kind = IdosKind::EnsembleStaircase;
    } else if (s.rfind("polynomial_", 0) == 0 || s.rfind("poly:", 0) == 0) {
        m.kind = IdosKind::Polynomial;
        m.degree = std::stoi(s.substr(s.find_first_of(":_") + 1));
    } else if (s.rfind("gaussian_", 0) == 0 || s.rfind("gauss:", 0) == 0) {
        m.kind = IdosKind::GaussianBroadened;
        m.width = std::stod(s.substr(s.find_first_of(":_") + 1));
    } else {
        throw ConfigError("unknown unfolding method: " + s);
    }
    return m;
}

inline ExperimentPlan from_map(const KeyValueMap& kv) {
    ExperimentPlan p;
    auto get = [&kv](const std::string& k) -> std::optional<std::string> {
        auto it = kv.find(k);
        if (it == kv.end()) return std::nullopt;
        return it->second;
    };
    try {
        if (auto v = get("model")) {
            if (*v == "anderson") p.model = ModelKind::Anderson;
            else if (*v == "harper") p.model = ModelKind::Harper;
            else throw ConfigError("unknown model: " + *v);
        }
        if (auto v = get("L")) p.L = std::stoul(*v);
        if (auto v = get("W")) p.W = std::stod(*v);
        if (auto v = get("boundary")) {
            if (*v == "open") p.boundary = Boundary::Open;
            else if (*v == "periodic") p.boundary = Boundary::Periodic;
            else throw ConfigError("unknown boundary: " + *v);
        }
        if (auto v = get("sites")) p.sites = std::stoul(*v);
        if (auto v = get("sigma")) p.sigma = std::stod(*v);
        if (auto v = get("phase")) p.phase = std::stod(*v);
        if (auto v = get("n_realizations")) p.n_realizations = std::stoul(*v);
        if (auto v = get("realization_offset")) p.realization_offset = std::stoul(*v);
        if (auto v = get("base_seed")) p.base_seed = std::stoull(*v);
        if (auto v = get("window_lo")) p.window_lo = std::stod(*v);
        if (auto v = get("window_hi")) p.window_hi = std::stod(*v);
        if (auto v = get("margin")) p.margin = std::stod(*v);
        if (auto v = get("unfolding")) p.unfolding = parse_unfolding(*v);
        if (auto v = get("trim")) p.trim = std::stod(*v);
        if (auto v = get("signal_length")) p.signal_length = std::stoul(*v);
        if (auto v = get("fit_min")) p.fit_min = std::stoul(*v);
        if (auto v = get("fit_max")) p.fit_max = std::stoul(*v);
        if (auto v = get("box_kmin")) p.box_kmin = std::stoi(*v);
        if (auto v = get("box_kmax")) p.box_kmax = std::stoi(*v);
        if (auto v = get("spacing_bin")) p.spacing_bin = std::stod(*v);
        if (auto v = get("increment_bin")) p.increment_bin = std::stod(*v);
        if (auto v = get("solver")) {
            if (*v == "auto") p.solver = SolverChoice::Auto;
            else if (*v == "dense") p.solver = SolverChoice::Dense;
            else if (*v == "lanczos") p.solver = SolverChoice::Lanczos;
            else throw ConfigError("unknown solver: " + *v);
        }
        if (auto v = get("dense_cap")) p.dense_cap = std::stoul(*v);
        if (auto v = get("output_dir")) p.output_dir = *v;
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError(std::string("bad plan value: ") + e.what());
    }
    if (!(p.window_lo < p.window_hi)) throw ConfigError("window requires lo < hi");
    if (p.n_realizations < 1) throw ConfigError("n_realizations must be >= 1");
    return p;
}

}  // namespace plan_io

// ---------------------------------------------------------------------------
// per-realization solving and caching
// ---------------------------------------------------------------------------

namespace detail {

inline std::string realization_filename(std::size_t index) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "realization_%05zu.txt", index);
    return buf;
}

/// Build and solve realization `index`, keeping only the solve window.
inline Spectrum solve_realization(const ExperimentPlan& plan, std::size_t index) {
    SparseSymmetricMatrix matrix = [&] {
        if (plan.model == ModelKind::Anderson) {
            AndersonParams ap;
            ap.L = plan.L;
            ap.W = plan.W;
            ap.boundary = plan.boundary;
            ap.seed = derive_stream_seed(plan.base_seed, index);
            return build_anderson(ap);
        }
        HarperParams hp;
        hp.N = plan.sites;
        hp.sigma = plan.sigma;
        // realization 0 uses the configured phase; later ones draw a random
        // offset from the realization stream
        hp.phase = plan.phase;
        if (index > 0) {
            SplitMix64 g(derive_stream_seed(plan.base_seed, index));
            hp.phase += 2.0 * std::numbers::pi * g.next_double();
        }
        return build_harper(hp);
    }();

    const double lo = plan.solve_lo(), hi = plan.solve_hi();
    const bool dense_path = plan.solver == SolverChoice::Dense ||
                            (plan.solver == SolverChoice::Auto && matrix.dim() <= plan.dense_cap);
    Spectrum full;
    if (dense_path) {
        full = eigs_dense(matrix, {.cap = std::max(plan.dense_cap, matrix.dim())});
        full.values = full.slice(lo, hi);
    } else {
        full = eigs_window(matrix, lo, hi);
    }
    full.window = {lo, hi};
    full.meta["model"] = to_string(plan.model);
    if (plan.model == ModelKind::Anderson) {
        full.meta["L"] = std::to_string(plan.L);
        full.meta["W"] = format_full(plan.W);
        full.meta["boundary"] = to_string(plan.boundary);
        full.meta["seed"] = std::to_string(derive_stream_seed(plan.base_seed, index));
    } else {
        full.meta["sites"] = std::to_string(plan.sites);
        full.meta["sigma"] = format_full(plan.sigma);
    }
    full.meta["base_seed"] = std::to_string(plan.base_seed);
    full.meta["realization"] = std::to_string(index);
    full.meta["solve"] = plan.solve_hash();
    full.meta["count"] = std::to_string(full.values.size());
    return full;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// spacing-set analysis shared by lattice ensembles and the zeta pipeline
// ---------------------------------------------------------------------------

struct SeriesAnalysisOptions {
    std::size_t signal_length = 2048;
    std::size_t fit_min = 4;
    std::size_t fit_max = 64;
    int box_kmin = 3;
    int box_kmax = 9;
    double spacing_bin = 0.1;
    double increment_bin = 0.1;
    std::size_t blocks_per_series = 1;  // 0 = as many disjoint blocks as fit
};

/// Everything the report prints about a set of spacing sequences.
struct SeriesAnalysis {
    std::size_t n_series = 0;
    std::size_t n_spacings = 0;
    std::size_t n_increments = 0;
    std::size_t n_signals = 0;
    double mean_spacing = 0.0;
    std::vector<double> pooled_spacings;
    std::vector<double> pooled_increments;
    std::optional<PowerSpectrum> avg_power;
    std::optional<PowerLawFit> alpha_fit;
    std::string alpha_error;  // why the fit is absent, when it is
    std::optional<LevelSignal> first_signal;
    double box_dimension = std::numeric_limits<double>::quiet_NaN();
    std::vector<double> box_scales;
    std::vector<double> box_mean_counts;
    Histogram spacing_hist;
    Histogram increment_hist;
    GaussianFit increment_gauss;
    DistanceResult dist_wigner, dist_poisson, dist_semi_poisson;
    double laplace_ks = 0.0;
    double abs_increment_exp2_ks = 0.0;
    double small_s_beta = std::numeric_limits<double>::quiet_NaN();
};

inline SeriesAnalysis analyze_spacing_sets(const std::vector<SpacingSeries>& sets,
                                           const SeriesAnalysisOptions& opts) {
    if (sets.empty()) throw InsufficientDataError("analyze_spacing_sets: no spacing series");
    SeriesAnalysis a;
    a.n_series = sets.size();

    std::vector<PowerSpectrum> powers;
    std::vector<double> box_dims;
    std::vector<std::vector<std::size_t>> box_counts;

    for (const auto& s : sets) {
        a.pooled_spacings.insert(a.pooled_spacings.end(), s.spacings.begin(), s.spacings.end());
        auto inc = increment_series(s);
        a.pooled_increments.insert(a.pooled_increments.end(), inc.increments.begin(), inc.increments.end());

        const std::size_t len = s.spacings.size();
        const std::size_t nsig = opts.signal_length;
        if (len >= nsig && nsig >= 4) {
            std::size_t blocks = opts.blocks_per_series == 0
                                     ? len / nsig
                                     : std::min<std::size_t>(opts.blocks_per_series, len / nsig);
            // single block: centred; multiple: consecutive from the start
            for (std::size_t b = 0; b < blocks; ++b) {
                const std::size_t start = blocks == 1 ? (len - nsig) / 2 : b * nsig;
                SpacingSeries blk;
                blk.spacings.assign(s.spacings.begin() + static_cast<std::ptrdiff_t>(start),
                                    s.spacings.begin() + static_cast<std::ptrdiff_t>(start + nsig));
                auto sig = level_signal(blk);
                powers.push_back(power_spectrum(sig));
                if (nsig >= 64) {
                    try {
                        auto box = box_counting_dimension(sig, dyadic_scales(opts.box_kmin, opts.box_kmax));
                        box_dims.push_back(box.dimension);
                        if (box_counts.empty()) a.box_scales = box.scales;
                        box_counts.push_back(box.counts);
                    } catch (const Error&) {
                        // degenerate block; box estimate skipped for it
                    }
                }
                if (!a.first_signal) a.first_signal = sig;
            }
        }
    }

    a.n_spacings = a.pooled_spacings.size();
    a.n_increments = a.pooled_increments.size();
    a.n_signals = powers.size();
    if (a.n_spacings == 0) throw InsufficientDataError("analyze_spacing_sets: no spacings");
    for (double v : a.pooled_spacings) a.mean_spacing += v;
    a.mean_spacing /= static_cast<double>(a.n_spacings);

    if (!powers.empty()) {
        a.avg_power = average_power_spectra(powers);
        try {
            a.alpha_fit = fit_power_law(*a.avg_power, opts.fit_min,
                                        opts.fit_max != 0 ? opts.fit_max : opts.signal_length / 32);
        } catch (const Error& e) {
            a.alpha_error = e.what();
        }
    }
    if (!box_dims.empty()) {
        double sum = 0.0;
        for (double d : box_dims) sum += d;
        a.box_dimension = sum / static_cast<double>(box_dims.size());
        a.box_mean_counts.assign(a.box_scales.size(), 0.0);
        for (const auto& counts : box_counts)
            for (std::size_t i = 0; i < counts.size(); ++i)
                a.box_mean_counts[i] += static_cast<double>(counts[i]) / static_cast<double>(box_counts.size());
    }

    a.spacing_hist = histogram(a.pooled_spacings, opts.spacing_bin, 0.0, 5.0);
    a.dist_wigner = distribution_distance(a.spacing_hist.counts.empty() ? std::span<const double>{} : std::span<const double>(a.pooled_spacings), reference::wigner_goe());
    a.dist_poisson = distribution_distance(std::span<const double>(a.pooled_spacings), reference::poisson());
    a.dist_semi_poisson = distribution_distance(std::span<const double>(a.pooled_spacings), reference::semi_poisson());
    try {
        a.small_s_beta = small_s_exponent(a.pooled_spacings);
    } catch (const Error&) {
        // too few small spacings (strong repulsion at small samples); leave NaN
    }

    if (a.n_increments >= 2) {
        a.increment_hist = histogram(a.pooled_increments, opts.increment_bin, -5.0, 5.0);
        a.increment_gauss = fit_gaussian(std::span<const double>(a.pooled_increments));
        a.laplace_ks = ks_distance(a.pooled_increments, reference::laplace(1.0).cdf);
        std::vector<double> abs_inc(a.pooled_increments.size());
        for (std::size_t i = 0; i < abs_inc.size(); ++i) abs_inc[i] = std::abs(a.pooled_increments[i]);
        a.abs_increment_exp2_ks = ks_distance(abs_inc, reference::poisson_increment().cdf);
    }
    return a;
}

// ---------------------------------------------------------------------------
// report writing
// ---------------------------------------------------------------------------

/// Statistics keys shared by lattice and zeta reports.
inline KeyValueMap summarize_analysis(const SeriesAnalysis& a) {
    KeyValueMap kv;
    kv["n_spacings"] = std::to_string(a.n_spacings);
    kv["n_increments"] = std::to_string(a.n_increments);
    kv["n_signals"] = std::to_string(a.n_signals);
    kv["mean_spacing"] = format_full(a.mean_spacing);
    if (a.alpha_fit) {
        kv["alpha"] = format_full(a.alpha_fit->alpha);
        kv["alpha_err"] = format_full(a.alpha_fit->alpha_err);
        kv["alpha_fit_min"] = std::to_string(a.alpha_fit->f_min);
        kv["alpha_fit_max"] = std::to_string(a.alpha_fit->f_max);
        kv["dimension_from_alpha"] = format_full(dimension_from_alpha(*a.alpha_fit));
    }
    kv["box_dimension"] = format_full(a.box_dimension);
    kv["sigma2"] = format_full(a.increment_gauss.sigma2);
    kv["gauss_mu"] = format_full(a.increment_gauss.mu);
    kv["gauss_ks"] = format_full(a.increment_gauss.goodness);
    kv["ks_wigner"] = format_full(a.dist_wigner.ks);
    kv["l1_wigner"] = format_full(a.dist_wigner.l1);
    kv["ks_poisson"] = format_full(a.dist_poisson.ks);
    kv["l1_poisson"] = format_full(a.dist_poisson.l1);
    kv["ks_semi_poisson"] = format_full(a.dist_semi_poisson.ks);
    kv["l1_semi_poisson"] = format_full(a.dist_semi_poisson.l1);
    kv["laplace_ks"] = format_full(a.laplace_ks);
    kv["abs_increment_exp2_ks"] = format_full(a.abs_increment_exp2_ks);
    kv["small_s_beta"] = format_full(a.small_s_beta);
    return kv;
}

struct ExperimentReport {
    ExperimentPlan plan;
    std::string dir;
    std::size_t n_used = 0;
    std::size_t n_failed = 0;
    std::size_t n_levels = 0;
    SeriesAnalysis analysis;

    KeyValueMap summary() const {
        KeyValueMap kv = plan.to_map();
        kv["plan_hash"] = plan.hash();
        kv["n_used"] = std::to_string(n_used);
        kv["n_failed"] = std::to_string(n_failed);
        kv["n_levels"] = std::to_string(n_levels);
        for (auto& [k, v] : summarize_analysis(analysis)) kv[k] = v;
        return kv;
    }
};

namespace detail {

inline void write_provenance(std::ofstream& out, const KeyValueMap& kv) {
    for (const auto& [k, v] : kv) out << "# " << k << '=' << v << '\n';
}

inline void write_report_files(const std::string& dir, const std::string& label,
                               const KeyValueMap& summary, const SeriesAnalysis& a) {
    namespace fs = std::filesystem;
    fs::create_directories(fs::path(dir) / "report");

    {
        std::ofstream out(fs::path(dir) / "report" / "summary.txt");
        for (const auto& [k, v] : summary) out << k << '=' << v << '\n';
    }
    if (a.avg_power) {
        std::ofstream out(fs::path(dir) / "report" / "power_spectrum.csv");
        out << "# plan=" << label << " n_averaged=" << a.avg_power->n_averaged
            << " N=" << a.avg_power->signal_length << '\n';
        out << "f,P\n";
        for (std::size_t f = 1; f <= a.avg_power->powers.size(); ++f)
            out << f << ',' << format_full(a.avg_power->powers[f - 1]) << '\n';
    }
    {
        std::ofstream out(fs::path(dir) / "report" / "spacing_histogram.csv");
        out << "# plan=" << label << " n=" << a.n_spacings << '\n';
        out << "bin_center,density\n";
        for (std::size_t i = 0; i < a.spacing_hist.bins(); ++i)
            out << format_full(a.spacing_hist.center(i)) << ',' << format_full(a.spacing_hist.density[i]) << '\n';
    }
    if (a.n_increments >= 2) {
        std::ofstream out(fs::path(dir) / "report" / "increment_histogram.csv");
        out << "# plan=" << label << " n=" << a.n_increments << '\n';
        out << "bin_center,density\n";
        for (std::size_t i = 0; i < a.increment_hist.bins(); ++i)
            out << format_full(a.increment_hist.center(i)) << ',' << format_full(a.increment_hist.density[i]) << '\n';
    }
    if (a.first_signal) {
        std::ofstream out(fs::path(dir) / "report" / "level_signal.csv");
        out << "# plan=" << label << " N=" << a.first_signal->values.size() << '\n';
        out << "n,eps\n";
        for (std::size_t i = 0; i < a.first_signal->values.size(); ++i)
            out << (i + 1) << ',' << format_full(a.first_signal->values[i]) << '\n';
    }
    if (!a.box_scales.empty()) {
        std::ofstream out(fs::path(dir) / "report" / "box_counts.csv");
        out << "# plan=" << label << " dimension=" << format_full(a.box_dimension) << '\n';
        out << "scale,mean_count\n";
        for (std::size_t i = 0; i < a.box_scales.size(); ++i)
            out << format_full(a.box_scales[i]) << ',' << format_full(a.box_mean_counts[i]) << '\n';
    }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// run / merge
// ---------------------------------------------------------------------------

/// Run (or resume) the experiment described by `plan`. Cached realizations
/// carrying the current plan hash are reused; everything else is solved,
/// written to the cache, then pooled into the report. Failures are recorded
/// per realization; more than 10% of them aborts the run.
inline ExperimentReport run_experiment(const ExperimentPlan& plan) {
    namespace fs = std::filesystem;
    if (plan.output_dir.empty()) throw ConfigError("run_experiment: output_dir not set");
    const fs::path dir(plan.output_dir);
    fs::create_directories(dir / "spectra");

    {
        std::ofstream out(dir / "plan.txt");
        for (const auto& [k, v] : plan.to_map()) out << k << '=' << v << '\n';
        out << "plan_hash=" << plan.hash() << '\n';
    }

    const std::string want_hash = plan.solve_hash();
    const std::size_t n = plan.n_realizations;
    std::vector<std::optional<Spectrum>> solved(n);
    std::vector<std::pair<std::size_t, std::string>> failures;

    // realization worker: load a valid cache file or solve and write one
    auto produce = [&](std::size_t slot) -> std::optional<std::string> {
        const std::size_t index = plan.realization_offset + slot;
        const fs::path file = dir / "spectra" / detail::realization_filename(index);
        if (fs::exists(file)) {
            try {
                Spectrum cached = Spectrum::load(file.string());
                auto it = cached.meta.find("solve");
                if (it != cached.meta.end() && it->second == want_hash) {
                    solved[slot] = std::move(cached);
                    return std::nullopt;
                }
                // stale hash: fall through and recompute
            } catch (const Error&) {
                // unreadable cache entry: recompute
            }
        }
        try {
            Spectrum s = detail::solve_realization(plan, index);
            s.save(file.string());
            solved[slot] = std::move(s);
            return std::nullopt;
        } catch (const std::exception& e) {
            return std::string(e.what());
        }
    };

    const std::size_t workers = std::max<std::size_t>(1, std::min<std::size_t>(
        n, std::thread::hardware_concurrency() ? std::thread::hardware_concurrency() : 1));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i)
            if (auto err = produce(i)) failures.emplace_back(plan.realization_offset + i, *err);
    } else {
        std::vector<std::optional<std::string>> errs(n);
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < workers; ++w)
            pool.emplace_back([&] {
                for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) errs[i] = produce(i);
            });
        for (auto& t : pool) t.join();
        for (std::size_t i = 0; i < n; ++i)
            if (errs[i]) failures.emplace_back(plan.realization_offset + i, *errs[i]);
    }

    if (!failures.empty()) {
        std::ofstream out(dir / "failures.txt");
        for (const auto& [idx, what] : failures) out << idx << ' ' << what << '\n';
        if (failures.size() * 10 > n)
            throw SolverError("run_experiment: " + std::to_string(failures.size()) + " of " +
                              std::to_string(n) + " realizations failed (>10%)");
    }

    // pooled unfolding and statistics over the successful realizations
    std::vector<Spectrum> windowed;
    std::size_t n_levels = 0;
    for (auto& s : solved)
        if (s) {
            Spectrum w;
            w.meta = s->meta;
            w.values = s->slice(plan.window_lo, plan.window_hi);
            n_levels += w.values.size();
            windowed.push_back(std::move(w));
        }
    if (windowed.empty()) throw SolverError("run_experiment: no usable realizations");

    const bool loo = plan.unfolding.kind == IdosKind::EnsembleStaircase && windowed.size() >= 2;
    std::optional<Idos> pooled_idos;
    std::vector<std::span<const double>> solve_views;
    for (auto& s : solved)
        if (s) solve_views.emplace_back(s->values);
    if (!loo) pooled_idos = estimate_idos(std::span<const std::span<const double>>(solve_views), plan.unfolding);

    std::vector<SpacingSeries> sets;
    for (std::size_t r = 0; r < windowed.size(); ++r) {
        Idos idos = [&] {
            if (!loo) return *pooled_idos;
            // leave-one-out: the averaged staircase of the other realizations,
            // so a realization's own levels do not bias its spacings by 1/R
            std::vector<std::span<const double>> views;
            for (std::size_t q = 0; q < solve_views.size(); ++q)
                if (q != r) views.push_back(solve_views[q]);
            return estimate_idos(std::span<const std::span<const double>>(views), plan.unfolding);
        }();
        // extreme levels of this realization can stick out past the pooled
        // range of the others when the window covers a whole small spectrum;
        // the IDOS is only defined on its own domain
        Spectrum clipped;
        clipped.meta = windowed[r].meta;
        clipped.values = windowed[r].slice(idos.lo, idos.hi);
        if (clipped.values.size() < 2) continue;
        auto u = unfold(clipped, idos, {.trim_fraction = plan.trim});
        if (u.levels.size() >= 2) sets.push_back(spacings(u));
    }
    if (sets.empty()) throw InsufficientDataError("run_experiment: no realization kept enough levels");

    SeriesAnalysisOptions opts;
    opts.signal_length = plan.signal_length;
    opts.fit_min = plan.fit_min;
    opts.fit_max = plan.effective_fit_max();
    opts.box_kmin = plan.box_kmin;
    opts.box_kmax = plan.box_kmax;
    opts.spacing_bin = plan.spacing_bin;
    opts.increment_bin = plan.increment_bin;

    ExperimentReport rep;
    rep.plan = plan;
    rep.dir = plan.output_dir;
    rep.n_used = windowed.size();
    rep.n_failed = failures.size();
    rep.n_levels = n_levels;
    rep.analysis = analyze_spacing_sets(sets, opts);
    detail::write_report_files(plan.output_dir, plan.hash(), rep.summary(), rep.analysis);
    return rep;
}

/// Merge completed partial runs (same core plan, disjoint contiguous index
/// ranges) into `output_dir` and recompute the report from the union of the
/// cached spectra. The result is identical to a single monolithic run.
inline ExperimentReport merge_experiments(const std::vector<std::string>& input_dirs,
                                          const std::string& output_dir) {
    namespace fs = std::filesystem;
    if (input_dirs.size() < 2) throw ConfigError("merge: need at least two experiment directories");

    std::vector<ExperimentPlan> plans;
    for (const auto& d : input_dirs) {
        auto kv = read_key_value_file((fs::path(d) / "plan.txt").string());
        plans.push_back(plan_io::from_map(kv));
        plans.back().output_dir = d;
    }
    const std::string hash0 = plans[0].hash();
    for (const auto& p : plans)
        if (p.hash() != hash0)
            throw ConfigError("merge: plans differ in core parameters (hash mismatch)");

    std::vector<std::pair<std::size_t, std::size_t>> ranges;  // [offset, offset+n)
    for (const auto& p : plans) ranges.emplace_back(p.realization_offset, p.realization_offset + p.n_realizations);
    std::sort(ranges.begin(), ranges.end());
    for (std::size_t i = 1; i < ranges.size(); ++i) {
        if (ranges[i].first < ranges[i - 1].second)
            throw ConfigError("merge: realization index ranges overlap");
        if (ranges[i].first != ranges[i - 1].second)
            throw ConfigError("merge: realization index ranges leave a gap; a single run could not produce this union");
    }

    ExperimentPlan merged = plans[0];
    merged.realization_offset = ranges.front().first;
    merged.n_realizations = ranges.back().second - ranges.front().first;
    merged.output_dir = output_dir;

    fs::create_directories(fs::path(output_dir) / "spectra");
    for (const auto& p : plans)
        for (std::size_t i = 0; i < p.n_realizations; ++i) {
            const auto name = detail::realization_filename(p.realization_offset + i);
            const fs::path src = fs::path(p.output_dir) / "spectra" / name;
            const fs::path dst = fs::path(output_dir) / "spectra" / name;
            if (fs::exists(src)) fs::copy_file(src, dst, fs::copy_options::overwrite_existing);
        }
    return run_experiment(merged);
}

}  // namespace levelstats

#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "levelstats/errors.hpp"
#include "levelstats/fft.hpp"
#include "levelstats/series.hpp"

namespace levelstats {

// ---------------------------------------------------------------------------
// level signal and power spectrum
// ---------------------------------------------------------------------------

/// Cumulative sum of mean-centred spacings. With the sample mean subtracted
/// the last value telescopes to zero.
inline LevelSignal level_signal(const SpacingSeries& s, std::optional<double> mean_override = {}) {
    if (s.spacings.empty()) throw InsufficientDataError("level_signal: empty spacing series");
    double mean = mean_override.value_or(0.0);
    if (!mean_override) {
        for (double v : s.spacings) mean += v;
        mean /= static_cast<double>(s.spacings.size());
    }
    LevelSignal sig;
    sig.mean_spacing = mean;
    sig.values.resize(s.spacings.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < s.spacings.size(); ++i) {
        acc += s.spacings[i] - mean;
        sig.values[i] = acc;
    }
    return sig;
}

/// P(f) for integer frequency index f = 1..N/2, single realization unless
/// produced by average_power_spectra.
struct PowerSpectrum {
    std::vector<double> powers;  // powers[k] is P(f = k + 1)
    std::size_t signal_length = 0;
    std::size_t n_averaged = 1;
};

/// P(f) = |sum_n eps_n exp(-2 pi i f n / N)|^2 / N via the fast transform.
inline PowerSpectrum power_spectrum(const LevelSignal& sig) {
    const std::size_t n = sig.values.size();
    if (n < 4) throw InsufficientDataError("power_spectrum: need at least 4 samples");
    auto spec = dft_real(sig.values);
    PowerSpectrum ps;
    ps.signal_length = n;
    ps.powers.resize(n / 2);
    for (std::size_t f = 1; f <= n / 2; ++f)
        ps.powers[f - 1] = std::norm(spec[f]) / static_cast<double>(n);
    return ps;
}

inline PowerSpectrum average_power_spectra(std::span<const PowerSpectrum> spectra) {
    if (spectra.empty()) throw InsufficientDataError("average_power_spectra: no spectra");
    PowerSpectrum out;
    out.signal_length = spectra.front().signal_length;
    out.powers.assign(spectra.front().powers.size(), 0.0);
    out.n_averaged = 0;
    for (const auto& s : spectra) {
        if (s.powers.size() != out.powers.size() || s.signal_length != out.signal_length)
            throw DataError("average_power_spectra: mismatched signal lengths");
        for (std::size_t i = 0; i < out.powers.size(); ++i)
            out.powers[i] += s.powers[i] * static_cast<double>(s.n_averaged);
        out.n_averaged += s.n_averaged;
    }
    for (auto& p : out.powers) p /= static_cast<double>(out.n_averaged);
    return out;
}

// ---------------------------------------------------------------------------
// fits
// ---------------------------------------------------------------------------

struct PowerLawFit {
    double alpha = 0.0;      // P(f) ~ f^(-alpha)
    double alpha_err = 0.0;  // standard error of the log-log slope
    std::size_t f_min = 0;
    std::size_t f_max = 0;
    std::size_t n_points = 0;
};

/// Least-squares slope of log P vs log f restricted to f in [f_min, f_max].
inline PowerLawFit fit_power_law(const PowerSpectrum& ps, std::size_t f_min, std::size_t f_max) {
    if (f_min < 1 || f_max <= f_min) throw DataError("fit_power_law: bad frequency range");
    std::vector<double> xs, ys;
    for (std::size_t f = f_min; f <= std::min(f_max, ps.powers.size()); ++f) {
        double p = ps.powers[f - 1];
        if (p <= 0.0)
            throw DataError("fit_power_law: non-positive power at f=" + std::to_string(f));
        xs.push_back(std::log(static_cast<double>(f)));
        ys.push_back(std::log(p));
    }
    if (xs.size() < 8) throw InsufficientDataError("fit_power_law: need at least 8 frequencies in range");
    const double n = static_cast<double>(xs.size());
    double sx = 0, sy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) { sx += xs[i]; sy += ys[i]; }
    const double mx = sx / n, my = sy / n;
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
    }
    const double slope = sxy / sxx;
    double sse = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        double r = ys[i] - my - slope * (xs[i] - mx);
        sse += r * r;
    }
    PowerLawFit fit;
    fit.alpha = -slope;
    fit.alpha_err = xs.size() > 2 ? std::sqrt(sse / (n - 2.0) / sxx) : 0.0;
    fit.f_min = f_min;
    fit.f_max = f_max;
    fit.n_points = xs.size();
    return fit;
}

/// D = (5 - alpha) / 2.
inline double dimension_from_alpha(double alpha) { return 0.5 * (5.0 - alpha); }
inline double dimension_from_alpha(const PowerLawFit& fit) { return dimension_from_alpha(fit.alpha); }

// ---------------------------------------------------------------------------
// box counting
// ---------------------------------------------------------------------------

struct BoxCountResult {
    double dimension = 0.0;
    std::vector<double> scales;       // box side lengths (unit square)
    std::vector<std::size_t> counts;  // occupied boxes per scale
};

inline std::vector<double> dyadic_scales(int k_min = 3, int k_max = 9) {
    std::vector<double> s;
    for (int k = k_min; k <= k_max; ++k) s.push_back(std::ldexp(1.0, -k));
    return s;
}

/// Box-counting dimension of the curve (n, eps_n) rescaled to the unit
/// square. Boxes are counted per column over the polyline's vertical span,
/// with column-boundary crossings interpolated. Per-scale counts are part of
/// the result so the fit can be audited.
inline BoxCountResult box_counting_dimension(const LevelSignal& sig, std::vector<double> scales = dyadic_scales()) {
    const std::size_t n = sig.values.size();
    if (n < 64) throw InsufficientDataError("box_counting_dimension: need at least 64 samples");
    std::sort(scales.begin(), scales.end(), std::greater<>());
    if (scales.size() < 4 || scales.front() / scales.back() < 31.6)
        throw DataError("box_counting_dimension: scales must span at least 1.5 decades with >= 4 points");

    const auto [mn_it, mx_it] = std::minmax_element(sig.values.begin(), sig.values.end());
    const double ymin = *mn_it, ymax = *mx_it;
    if (!(ymax > ymin)) throw DataError("box_counting_dimension: constant signal has no defined dimension");
    const double yspan = ymax - ymin;

    BoxCountResult res;
    res.scales = scales;
    for (double delta : scales) {
        const auto ncols = static_cast<std::size_t>(std::ceil(1.0 / delta));
        std::vector<double> lo(ncols, 2.0), hi(ncols, -1.0);
        auto touch = [&](std::size_t c, double y) {
            if (c >= ncols) c = ncols - 1;
            lo[c] = std::min(lo[c], y);
            hi[c] = std::max(hi[c], y);
        };
        auto xcoord = [n](std::size_t i) {
            return static_cast<double>(i) / static_cast<double>(n - 1);
        };
        auto ycoord = [&](double v) { return (v - ymin) / yspan; };
        std::size_t prev_col = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const double x = xcoord(i);
            auto c = std::min(static_cast<std::size_t>(x / delta), ncols - 1);
            touch(c, ycoord(sig.values[i]));
            if (i > 0 && c > prev_col) {
                // the segment crosses column boundaries; add the crossing points
                const double x0 = xcoord(i - 1), y0 = ycoord(sig.values[i - 1]);
                const double y1 = ycoord(sig.values[i]);
                for (std::size_t cb = prev_col; cb < c; ++cb) {
                    const double xb = static_cast<double>(cb + 1) * delta;
                    const double t = (xb - x0) / (x - x0);
                    const double yb = y0 + t * (y1 - y0);
                    touch(cb, yb);
                    touch(cb + 1, yb);
                }
            }
            prev_col = c;
        }
        std::size_t boxes = 0;
        for (std::size_t c = 0; c < ncols; ++c) {
            if (hi[c] < lo[c]) continue;
            boxes += static_cast<std::size_t>(std::floor(hi[c] / delta) - std::floor(lo[c] / delta)) + 1;
        }
        res.counts.push_back(boxes);
    }

    // slope of log count vs log (1/scale)
    const double m = static_cast<double>(scales.size());
    double sx = 0, sy = 0;
    for (std::size_t i = 0; i < scales.size(); ++i) {
        sx += std::log(1.0 / scales[i]);
        sy += std::log(static_cast<double>(res.counts[i]));
    }
    const double mx = sx / m, my = sy / m;
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < scales.size(); ++i) {
        const double dx = std::log(1.0 / scales[i]) - mx;
        sxx += dx * dx;
        sxy += dx * (std::log(static_cast<double>(res.counts[i])) - my);
    }
    res.dimension = sxy / sxx;
    return res;
}

// ---------------------------------------------------------------------------
// histograms and reference distributions
// ---------------------------------------------------------------------------

/// Uniform-bin histogram with unit-integral density. The requested range is
/// widened by whole bins when samples fall outside it, so counts always sum
/// to the sample size and the density always integrates to one.
struct Histogram {
    double lo = 0.0;
    double bin_width = 0.0;
    std::vector<std::size_t> counts;
    std::vector<double> density;

    std::size_t bins() const { return counts.size(); }
    double center(std::size_t i) const { return lo + (static_cast<double>(i) + 0.5) * bin_width; }
};

inline Histogram histogram(std::span<const double> samples, double bin_width, double lo, double hi) {
    if (samples.empty()) throw InsufficientDataError("histogram: empty input");
    if (!(bin_width > 0.0) || !(hi > lo)) throw DataError("histogram: bad bin layout");
    const auto [mn_it, mx_it] = std::minmax_element(samples.begin(), samples.end());
    if (*mn_it < lo) lo -= bin_width * std::ceil((lo - *mn_it) / bin_width);
    auto nbins = static_cast<std::size_t>(std::ceil((hi - lo) / bin_width - 1e-9));
    if (nbins == 0) nbins = 1;
    if (*mx_it >= lo + static_cast<double>(nbins) * bin_width)
        nbins = static_cast<std::size_t>(std::floor((*mx_it - lo) / bin_width)) + 1;
    Histogram h;
    h.lo = lo;
    h.bin_width = bin_width;
    h.counts.assign(nbins, 0);
    for (double s : samples) {
        auto b = static_cast<std::size_t>((s - lo) / bin_width);
        if (b >= nbins) b = nbins - 1;  // right edge inclusive
        ++h.counts[b];
    }
    h.density.resize(nbins);
    const double norm = 1.0 / (static_cast<double>(samples.size()) * bin_width);
    for (std::size_t i = 0; i < nbins; ++i) h.density[i] = static_cast<double>(h.counts[i]) * norm;
    return h;
}

/// Closed-form reference curve with density and cumulative evaluators.
struct ReferenceCurve {
    std::string name;
    std::function<double(double)> pdf;
    std::function<double(double)> cdf;
};

namespace reference {

inline ReferenceCurve wigner_goe() {
    return {"wigner_goe",
            [](double s) { return s < 0 ? 0.0 : 0.5 * std::numbers::pi * s * std::exp(-0.25 * std::numbers::pi * s * s); },
            [](double s) { return s < 0 ? 0.0 : 1.0 - std::exp(-0.25 * std::numbers::pi * s * s); }};
}

inline ReferenceCurve poisson() {
    return {"poisson", [](double s) { return s < 0 ? 0.0 : std::exp(-s); },
            [](double s) { return s < 0 ? 0.0 : 1.0 - std::exp(-s); }};
}

inline ReferenceCurve semi_poisson() {
    return {"semi_poisson", [](double s) { return s < 0 ? 0.0 : 4.0 * s * std::exp(-2.0 * s); },
            [](double s) { return s < 0 ? 0.0 : 1.0 - (1.0 + 2.0 * s) * std::exp(-2.0 * s); }};
}

inline ReferenceCurve gauss(double mu, double sigma2) {
    if (!(sigma2 > 0.0)) throw DataError("reference::gauss: variance must be positive");
    const double inv = 1.0 / std::sqrt(2.0 * std::numbers::pi * sigma2);
    const double den = 1.0 / std::sqrt(2.0 * sigma2);
    return {"gauss",
            [=](double x) { return inv * std::exp(-(x - mu) * (x - mu) / (2.0 * sigma2)); },
            [=](double x) { return 0.5 * (1.0 + std::erf((x - mu) * den)); }};
}

inline ReferenceCurve laplace(double b) {
    if (!(b > 0.0)) throw DataError("reference::laplace: scale must be positive");
    return {"laplace",
            [b](double x) { return 0.5 / b * std::exp(-std::abs(x) / b); },
            [b](double x) { return x < 0 ? 0.5 * std::exp(x / b) : 1.0 - 0.5 * std::exp(-x / b); }};
}

/// The e^{-2x} curve drawn through quasi-integrable |increment| histograms.
/// Kept unnormalized on purpose (integral 1/2); the cdf is the matching
/// rate-2 exponential for distance tests on |x|.
inline ReferenceCurve poisson_increment() {
    return {"poisson_increment", [](double x) { return x < 0 ? 0.0 : std::exp(-2.0 * x); },
            [](double x) { return x < 0 ? 0.0 : 1.0 - std::exp(-2.0 * x); }};
}

/// Small-S behaviour P(S) ~ S^beta of the two surmise classes, for
/// log-log slope tests near the origin.
inline ReferenceCurve goe_small_s() {
    return {"goe_small_s", [](double s) { return s < 0 ? 0.0 : 0.5 * std::numbers::pi * s; },
            [](double s) { return s < 0 ? 0.0 : 0.25 * std::numbers::pi * s * s; }};
}

inline ReferenceCurve gue_small_s() {
    const double c = 32.0 / (std::numbers::pi * std::numbers::pi);
    return {"gue_small_s", [c](double s) { return s < 0 ? 0.0 : c * s * s; },
            [c](double s) { return s < 0 ? 0.0 : c * s * s * s / 3.0; }};
}

}  // namespace reference

// ---------------------------------------------------------------------------
// increments and distribution statistics
// ---------------------------------------------------------------------------

inline IncrementSeries increment_series(const SpacingSeries& s) {
    if (s.spacings.size() < 2)
        throw InsufficientDataError("increment_series: need at least two spacings");
    IncrementSeries inc;
    inc.increments.resize(s.spacings.size() - 1);
    for (std::size_t i = 1; i < s.spacings.size(); ++i)
        inc.increments[i - 1] = s.spacings[i] - s.spacings[i - 1];
    return inc;
}

struct GaussianFit {
    double mu = 0.0;
    double sigma2 = 0.0;
    double goodness = 0.0;  // sup distance between empirical and fitted CDF
    bool degenerate = false;
    std::size_t n = 0;
};

/// KS sup-distance between the empirical CDF of samples and a reference CDF.
inline double ks_distance(std::span<const double> samples, const std::function<double(double)>& cdf) {
    if (samples.empty()) throw InsufficientDataError("ks_distance: empty sample set");
    std::vector<double> x(samples.begin(), samples.end());
    std::sort(x.begin(), x.end());
    const double n = static_cast<double>(x.size());
    double d = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double f = cdf(x[i]);
        d = std::max(d, std::abs(static_cast<double>(i + 1) / n - f));
        d = std::max(d, std::abs(static_cast<double>(i) / n - f));
    }
    return d;
}

inline GaussianFit fit_gaussian(std::span<const double> samples) {
    if (samples.size() < 2) throw InsufficientDataError("fit_gaussian: need at least two samples");
    GaussianFit fit;
    fit.n = samples.size();
    double sum = 0.0;
    for (double v : samples) sum += v;
    fit.mu = sum / static_cast<double>(samples.size());
    double ss = 0.0;
    for (double v : samples) ss += (v - fit.mu) * (v - fit.mu);
    fit.sigma2 = ss / static_cast<double>(samples.size() - 1);
    if (fit.sigma2 <= 0.0) {
        fit.degenerate = true;
        fit.goodness = std::numeric_limits<double>::quiet_NaN();
        return fit;
    }
    fit.goodness = ks_distance(samples, reference::gauss(fit.mu, fit.sigma2).cdf);
    return fit;
}

inline GaussianFit fit_gaussian(const IncrementSeries& inc) { return fit_gaussian(std::span<const double>(inc.increments)); }

struct DistanceResult {
    double ks = 0.0;  // sup distance between CDFs
    double l1 = 0.0;  // integrated absolute density difference
};

inline DistanceResult distribution_distance(const Histogram& h, const ReferenceCurve& ref) {
    DistanceResult d;
    double cum = 0.0;
    for (std::size_t i = 0; i < h.bins(); ++i) {
        cum += h.density[i] * h.bin_width;
        const double edge = h.lo + static_cast<double>(i + 1) * h.bin_width;
        d.ks = std::max(d.ks, std::abs(cum - ref.cdf(edge)));
        d.l1 += std::abs(h.density[i] - ref.pdf(h.center(i))) * h.bin_width;
    }
    return d;
}

inline DistanceResult distribution_distance(std::span<const double> samples, const ReferenceCurve& ref,
                                            double l1_bin_width = 0.1) {
    if (samples.empty()) throw InsufficientDataError("distribution_distance: empty sample set");
    DistanceResult d;
    d.ks = ks_distance(samples, ref.cdf);
    const auto [mn, mx] = std::minmax_element(samples.begin(), samples.end());
    d.l1 = distribution_distance(histogram(samples, l1_bin_width, *mn, *mx + l1_bin_width), ref).l1;
    return d;
}

/// Log-log slope of the spacing density near S = 0 (bins of 0.1 up to
/// s_max), the beta exponent separating GOE from GUE level repulsion.
inline double small_s_exponent(std::span<const double> spacings, double s_max = 0.6, double bin_width = 0.1) {
    Histogram h = histogram(spacings, bin_width, 0.0, s_max + bin_width);
    std::vector<double> xs, ys;
    for (std::size_t i = 0; i < h.bins(); ++i) {
        if (h.center(i) > s_max) break;
        if (h.counts[i] == 0) continue;
        xs.push_back(std::log(h.center(i)));
        ys.push_back(std::log(h.density[i]));
    }
    if (xs.size() < 3) throw InsufficientDataError("small_s_exponent: too few occupied bins near S=0");
    const double n = static_cast<double>(xs.size());
    double sx = 0, sy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) { sx += xs[i]; sy += ys[i]; }
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - sx / n) * (xs[i] - sx / n);
        sxy += (xs[i] - sx / n) * (ys[i] - sy / n);
    }
    return sxy / sxx;
}

}  // namespace levelstats

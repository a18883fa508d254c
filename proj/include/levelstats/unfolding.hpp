#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "levelstats/errors.hpp"
#include "levelstats/series.hpp"
#include "levelstats/spectrum.hpp"

namespace levelstats {

/// Monotone estimate of the averaged integrated density of states N(E),
/// valid on [lo, hi].
struct Idos {
    std::string method;
    double lo = 0.0;
    double hi = 0.0;
    std::function<double(double)> eval;

    double operator()(double e) const { return eval(e); }
};

enum class IdosKind { EnsembleStaircase, Polynomial, GaussianBroadened };

struct IdosMethod {
    IdosKind kind = IdosKind::EnsembleStaircase;
    int degree = 7;      // polynomial
    double width = 2.0;  // gaussian kernel width, in mean spacings
};

inline std::string to_string(const IdosMethod& m) {
    switch (m.kind) {
        case IdosKind::EnsembleStaircase: return "ensemble_staircase";
        case IdosKind::Polynomial: return "polynomial_" + std::to_string(m.degree);
        case IdosKind::GaussianBroadened: {
            char buf[32];
            std::snprintf(buf, sizeof(buf), "gaussian_%g", m.width);
            return buf;
        }
    }
    return "?";
}

namespace detail {

inline std::vector<double> pool_sorted(std::span<const std::span<const double>> spectra) {
    std::vector<double> pooled;
    std::size_t total = 0;
    for (const auto& s : spectra) total += s.size();
    pooled.reserve(total);
    for (const auto& s : spectra) pooled.insert(pooled.end(), s.begin(), s.end());
    std::sort(pooled.begin(), pooled.end());
    return pooled;
}

}  // namespace detail

/// Estimate N(E) from one or more raw spectra. The staircase method averages
/// the per-realization counting staircases (steps of 1/R at every pooled
/// level) and interpolates linearly between levels; the polynomial method
/// least-squares fits the pooled staircase and rejects non-monotone fits;
/// the broadened method convolves the staircase with a normal CDF kernel.
inline Idos estimate_idos(std::span<const std::span<const double>> spectra, const IdosMethod& method = {}) {
    if (spectra.empty()) throw InsufficientDataError("estimate_idos: need at least one spectrum");
    const double r = static_cast<double>(spectra.size());
    std::vector<double> pooled = detail::pool_sorted(spectra);
    if (pooled.size() < 2) throw InsufficientDataError("estimate_idos: need at least two levels");

    Idos idos;
    idos.method = to_string(method);
    idos.lo = pooled.front();
    idos.hi = pooled.back();

    switch (method.kind) {
        case IdosKind::EnsembleStaircase: {
            // breakpoints (x_k, cumulative count / R), duplicates collapsed
            auto xs = std::make_shared<std::vector<double>>();
            auto ys = std::make_shared<std::vector<double>>();
            xs->reserve(pooled.size());
            ys->reserve(pooled.size());
            for (std::size_t i = 0; i < pooled.size(); ++i) {
                if (!xs->empty() && xs->back() == pooled[i])
                    ys->back() = static_cast<double>(i + 1) / r;
                else {
                    xs->push_back(pooled[i]);
                    ys->push_back(static_cast<double>(i + 1) / r);
                }
            }
            idos.eval = [xs, ys](double e) {
                const auto& x = *xs;
                const auto& y = *ys;
                auto it = std::lower_bound(x.begin(), x.end(), e);
                if (it == x.begin()) return y.front();
                if (it == x.end()) return y.back();
                std::size_t hi = static_cast<std::size_t>(it - x.begin());
                std::size_t lo = hi - 1;
                double t = (e - x[lo]) / (x[hi] - x[lo]);
                return y[lo] + t * (y[hi] - y[lo]);
            };
            break;
        }
        case IdosKind::Polynomial: {
            const int deg = method.degree;
            if (deg < 1) throw DataError("estimate_idos: polynomial degree must be >= 1");
            const double lo = idos.lo, hi = idos.hi;
            const std::size_t npts = pooled.size();
            // least squares on scaled coordinate t in [-1, 1]
            Eigen::MatrixXd vand(static_cast<Eigen::Index>(npts), deg + 1);
            Eigen::VectorXd rhs(static_cast<Eigen::Index>(npts));
            for (std::size_t i = 0; i < npts; ++i) {
                double t = (2.0 * pooled[i] - lo - hi) / (hi - lo);
                double p = 1.0;
                for (int k = 0; k <= deg; ++k) {
                    vand(static_cast<Eigen::Index>(i), k) = p;
                    p *= t;
                }
                rhs[static_cast<Eigen::Index>(i)] = (static_cast<double>(i) + 0.5) / r;
            }
            Eigen::VectorXd coef = vand.colPivHouseholderQr().solve(rhs);
            auto poly = [&coef, deg, lo, hi](double e) {
                double t = (2.0 * e - lo - hi) / (hi - lo);
                double acc = 0.0;
                for (int k = deg; k >= 0; --k) acc = acc * t + coef[k];
                return acc;
            };
            // Sample on a fine grid and take the running maximum. Dips beyond
            // a fraction of a percent of the level count mean the polynomial
            // oscillates through the staircase and the fit is rejected; tiny
            // dips (flat density regions, edge curvature) are repaired so the
            // map stays monotone.
            const int grid = 4096;
            auto xs2 = std::make_shared<std::vector<double>>(grid + 1);
            auto ys2 = std::make_shared<std::vector<double>>(grid + 1);
            double runmax = -std::numeric_limits<double>::infinity();
            double worst_dip = 0.0;
            for (int g = 0; g <= grid; ++g) {
                const double e = lo + (hi - lo) * g / grid;
                const double v = poly(e);
                worst_dip = std::max(worst_dip, runmax - v);
                runmax = std::max(runmax, v);
                (*xs2)[static_cast<std::size_t>(g)] = e;
                (*ys2)[static_cast<std::size_t>(g)] = runmax;
            }
            const double count = static_cast<double>(pooled.size()) / r;
            if (worst_dip > std::max(1.0, 5e-3 * count))
                throw DataError("estimate_idos: degree-" + std::to_string(deg) +
                                " polynomial fit is not monotone on the data range; lower the degree");
            idos.eval = [xs2, ys2](double e) {
                const auto& x = *xs2;
                const auto& y = *ys2;
                auto it = std::upper_bound(x.begin(), x.end(), e);
                if (it == x.begin()) return y.front();
                if (it == x.end()) return y.back();
                std::size_t hi2 = static_cast<std::size_t>(it - x.begin());
                std::size_t lo2 = hi2 - 1;
                const double t = (e - x[lo2]) / (x[hi2] - x[lo2]);
                return y[lo2] + t * (y[hi2] - y[lo2]);
            };
            break;
        }
        case IdosKind::GaussianBroadened: {
            if (!(method.width > 0)) throw DataError("estimate_idos: kernel width must be positive");
            const double mean_spacing = (idos.hi - idos.lo) / (pooled.size() / r);
            const double sigma = method.width * mean_spacing;
            auto data = std::make_shared<std::vector<double>>(std::move(pooled));
            const double rr = r;
            idos.eval = [data, sigma, rr](double e) {
                const auto& x = *data;
                auto lo_it = std::lower_bound(x.begin(), x.end(), e - 8.0 * sigma);
                auto hi_it = std::upper_bound(x.begin(), x.end(), e + 8.0 * sigma);
                double acc = static_cast<double>(lo_it - x.begin());  // fully below kernel support
                const double inv = 1.0 / (sigma * std::numbers::sqrt2);
                for (auto it = lo_it; it != hi_it; ++it)
                    acc += 0.5 * (1.0 + std::erf((e - *it) * inv));
                return acc / rr;
            };
            break;
        }
    }
    return idos;
}

inline Idos estimate_idos(std::span<const Spectrum> ensemble, const IdosMethod& method = {}) {
    std::vector<std::span<const double>> views;
    views.reserve(ensemble.size());
    for (const auto& s : ensemble) views.emplace_back(s.values);
    return estimate_idos(std::span<const std::span<const double>>(views), method);
}

/// Monotone levels with unit mean spacing.
struct UnfoldedSpectrum {
    std::vector<double> levels;
    std::string method;
    bool rescaled = false;
    KeyValueMap meta;

    std::size_t size() const { return levels.size(); }

    void save(const std::string& path) const {
        std::ofstream out(path);
        if (!out) throw DataError("cannot write file: " + path);
        for (const auto& [k, v] : meta) out << "# " << k << '=' << v << '\n';
        out << "# unfolding=" << method << '\n';
        out << "# rescaled=" << (rescaled ? 1 : 0) << '\n';
        for (double v : levels) out << format_full(v) << '\n';
    }
};

struct UnfoldOptions {
    double trim_fraction = 0.0;  // fraction of levels dropped at each end
    bool rescale = true;         // affine map to exact unit mean spacing
};

inline UnfoldedSpectrum unfold(const Spectrum& spectrum, const Idos& idos, const UnfoldOptions& opts = {}) {
    UnfoldedSpectrum u;
    u.method = idos.method;
    u.meta = spectrum.meta;
    u.levels.reserve(spectrum.values.size());
    for (double e : spectrum.values) {
        if (e < idos.lo || e > idos.hi)
            throw DomainError("unfold: eigenvalue " + format_full(e) + " outside IDOS domain [" +
                              format_full(idos.lo) + ", " + format_full(idos.hi) + "]");
        u.levels.push_back(idos(e));
    }
    for (std::size_t i = 1; i < u.levels.size(); ++i)
        if (u.levels[i] < u.levels[i - 1]) throw SolverError("unfold: IDOS produced decreasing levels");

    if (opts.trim_fraction > 0.0 && u.levels.size() > 2) {
        auto k = static_cast<std::size_t>(std::ceil(opts.trim_fraction * static_cast<double>(u.levels.size())));
        if (2 * k >= u.levels.size())
            throw InsufficientDataError("unfold: trim fraction removes every level");
        u.levels.assign(u.levels.begin() + static_cast<std::ptrdiff_t>(k),
                        u.levels.end() - static_cast<std::ptrdiff_t>(k));
    }

    if (opts.rescale && u.levels.size() >= 2) {
        const double first = u.levels.front(), last = u.levels.back();
        if (last > first) {
            const double c = static_cast<double>(u.levels.size() - 1) / (last - first);
            for (auto& x : u.levels) x = first + c * (x - first);
            u.rescaled = true;
        }
    }
    return u;
}

/// Nearest-neighbour spacings of an unfolded sequence, order preserved.
inline SpacingSeries spacings(const UnfoldedSpectrum& u) {
    if (u.levels.size() < 2)
        throw InsufficientDataError("spacings: need at least two levels");
    SpacingSeries s;
    s.spacings.resize(u.levels.size() - 1);
    double sum = 0.0;
    for (std::size_t i = 1; i < u.levels.size(); ++i) {
        s.spacings[i - 1] = u.levels[i] - u.levels[i - 1];
        sum += s.spacings[i - 1];
    }
    s.mean_spacing = sum / static_cast<double>(s.spacings.size());
    return s;
}

}  // namespace levelstats

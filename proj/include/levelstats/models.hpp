#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>

#include "levelstats/errors.hpp"
#include "levelstats/rng.hpp"
#include "levelstats/series.hpp"
#include "levelstats/sparse_matrix.hpp"

namespace levelstats {

enum class Boundary { Open, Periodic };

inline std::string to_string(Boundary b) { return b == Boundary::Open ? "open" : "periodic"; }

/// Cubic-lattice tight-binding model with uniform diagonal disorder of
/// strength W (site energies i.i.d. on [-W/2, W/2], hopping 1).
struct AndersonParams {
    std::size_t L = 1;          // sites per edge; dimension is L^3
    double W = 0.0;             // disorder strength, hopping = 1
    std::uint64_t seed = 0;
    Boundary boundary = Boundary::Open;
};

/// 1D chain with quasi-periodic potential V_n = 2 cos(2 pi sigma n + phase).
struct HarperParams {
    std::size_t N = 1;
    double sigma = 0.6180339887498949;  // (sqrt(5)-1)/2
    double phase = 0.0;
};

inline SparseSymmetricMatrix build_anderson(const AndersonParams& p) {
    if (p.L < 1) throw DataError("anderson: L must be >= 1");
    if (p.W < 0) throw DataError("anderson: W must be >= 0");
    if (p.L > 1290)  // 1291^3 overflows int32 indices
        throw SizeError("anderson: L^3 exceeds the 32-bit index range");
    if (p.boundary == Boundary::Periodic && p.L < 3)
        throw DataError("anderson: periodic boundary needs L >= 3 (wrap bonds duplicate otherwise)");

    const std::int64_t L = static_cast<std::int64_t>(p.L);
    const std::size_t n = p.L * p.L * p.L;

    SplitMix64 rng(p.seed);
    std::vector<double> diag(n);
    for (std::size_t i = 0; i < n; ++i) diag[i] = p.W * (rng.next_double() - 0.5);

    auto site = [L](std::int64_t x, std::int64_t y, std::int64_t z) {
        return static_cast<std::int32_t>(x + L * (y + L * z));
    };

    std::vector<SparseSymmetricMatrix::Entry> entries;
    entries.reserve(3 * n);
    const bool periodic = p.boundary == Boundary::Periodic;
    for (std::int64_t z = 0; z < L; ++z)
        for (std::int64_t y = 0; y < L; ++y)
            for (std::int64_t x = 0; x < L; ++x) {
                const std::int32_t i = site(x, y, z);
                auto bond = [&](std::int32_t j) {
                    if (i < j)
                        entries.push_back({i, j, 1.0});
                    else
                        entries.push_back({j, i, 1.0});
                };
                if (x + 1 < L) bond(site(x + 1, y, z));
                else if (periodic) bond(site(0, y, z));
                if (y + 1 < L) bond(site(x, y + 1, z));
                else if (periodic) bond(site(x, 0, z));
                if (z + 1 < L) bond(site(x, y, z + 1));
                else if (periodic) bond(site(x, y, 0));
            }

    return SparseSymmetricMatrix(n, std::move(diag), std::move(entries));
}

inline SparseSymmetricMatrix build_harper(const HarperParams& p) {
    if (p.N < 1) throw DataError("harper: N must be >= 1");
    if (!(p.sigma > 0.0 && p.sigma < 1.0)) throw DataError("harper: sigma must be in (0, 1)");

    std::vector<double> diag(p.N);
    for (std::size_t k = 0; k < p.N; ++k) {
        // site index n runs from 1
        const double n = static_cast<double>(k + 1);
        diag[k] = 2.0 * std::cos(2.0 * std::numbers::pi * p.sigma * n + p.phase);
    }
    std::vector<SparseSymmetricMatrix::Entry> entries;
    entries.reserve(p.N - 1);
    for (std::size_t k = 0; k + 1 < p.N; ++k)
        entries.push_back({static_cast<std::int32_t>(k), static_cast<std::int32_t>(k + 1), 1.0});
    return SparseSymmetricMatrix(p.N, std::move(diag), std::move(entries));
}

enum class SpacingKind { WignerGOE, Poisson, SemiPoisson };

inline std::string to_string(SpacingKind k) {
    switch (k) {
        case SpacingKind::WignerGOE: return "wigner_goe";
        case SpacingKind::Poisson: return "poisson";
        case SpacingKind::SemiPoisson: return "semi_poisson";
    }
    return "?";
}

/// Monte Carlo spacing draws from the three reference laws, unit mean each.
/// Wigner and Poisson use the closed-form inverse CDF; semi-Poisson is the
/// sum of two Exp(2) variates (Gamma(2, rate 2)).
inline SpacingSeries sample_reference_spacings(SpacingKind kind, std::size_t count, std::uint64_t seed) {
    if (count < 1) throw InsufficientDataError("sample_reference_spacings: count must be >= 1");
    SplitMix64 rng(seed);
    auto exp_draw = [&rng]() {
        double u = rng.next_double();
        return -std::log1p(-u);
    };
    SpacingSeries out;
    out.spacings.resize(count);
    double sum = 0.0;
    for (std::size_t i = 0; i < count; ++i) {
        double s = 0.0;
        switch (kind) {
            case SpacingKind::WignerGOE:
                s = std::sqrt(4.0 * exp_draw() / std::numbers::pi);
                break;
            case SpacingKind::Poisson:
                s = exp_draw();
                break;
            case SpacingKind::SemiPoisson:
                s = 0.5 * (exp_draw() + exp_draw());
                break;
        }
        out.spacings[i] = s;
        sum += s;
    }
    out.mean_spacing = sum / static_cast<double>(count);
    return out;
}

}  // namespace levelstats

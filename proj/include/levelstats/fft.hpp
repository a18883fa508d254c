#pragma once

#include <bit>
#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

namespace levelstats {

namespace detail {

// In-place iterative radix-2 Cooley-Tukey, n a power of two.
inline void fft_pow2(std::vector<std::complex<double>>& a, bool inverse) {
    const std::size_t n = a.size();
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = (inverse ? 2.0 : -2.0) * std::numbers::pi / static_cast<double>(len);
        const std::complex<double> wl = std::polar(1.0, ang);
        for (std::size_t i = 0; i < n; i += len) {
            std::complex<double> w{1.0, 0.0};
            for (std::size_t k = 0; k < len / 2; ++k) {
                std::complex<double> u = a[i + k];
                std::complex<double> v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
                w *= wl;
            }
        }
    }
    if (inverse)
        for (auto& x : a) x /= static_cast<double>(n);
}

}  // namespace detail

/// Forward DFT, X_f = sum_n x_n exp(-2 pi i f n / N). Radix-2 for powers of
/// two, Bluestein's chirp-z otherwise, so any length is supported.
inline std::vector<std::complex<double>> dft(std::vector<std::complex<double>> x) {
    const std::size_t n = x.size();
    if (n == 0) return x;
    if (std::has_single_bit(n)) {
        detail::fft_pow2(x, false);
        return x;
    }
    // Bluestein: convolve chirp-multiplied input with the conjugate chirp
    const std::size_t m = std::bit_ceil(2 * n - 1);
    std::vector<std::complex<double>> chirp(n);
    for (std::size_t k = 0; k < n; ++k) {
        // angle uses k^2 mod 2n to keep the argument small
        const std::size_t k2 = (static_cast<unsigned long long>(k) * k) % (2 * n);
        chirp[k] = std::polar(1.0, -std::numbers::pi * static_cast<double>(k2) / static_cast<double>(n));
    }
    std::vector<std::complex<double>> fa(m, {0.0, 0.0}), fb(m, {0.0, 0.0});
    for (std::size_t k = 0; k < n; ++k) fa[k] = x[k] * chirp[k];
    fb[0] = std::conj(chirp[0]);
    for (std::size_t k = 1; k < n; ++k) fb[k] = fb[m - k] = std::conj(chirp[k]);
    detail::fft_pow2(fa, false);
    detail::fft_pow2(fb, false);
    for (std::size_t k = 0; k < m; ++k) fa[k] *= fb[k];
    detail::fft_pow2(fa, true);
    std::vector<std::complex<double>> out(n);
    for (std::size_t k = 0; k < n; ++k) out[k] = fa[k] * chirp[k];
    return out;
}

inline std::vector<std::complex<double>> dft_real(const std::vector<double>& x) {
    std::vector<std::complex<double>> c(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) c[i] = {x[i], 0.0};
    return dft(std::move(c));
}

}  // namespace levelstats

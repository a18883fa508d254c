#pragma once

#include <cmath>
#include <fstream>
#include <numbers>
#include <string>
#include <vector>

#include "levelstats/errors.hpp"
#include "levelstats/io.hpp"
#include "levelstats/unfolding.hpp"

namespace levelstats {

/// Heights t_n of nontrivial zeta zeros 1/2 + i t_n, strictly increasing.
struct ZeroTable {
    std::vector<double> heights;
    std::string source;

    std::size_t size() const { return heights.size(); }
};

/// Parse a plain-text zero table: one decimal height per line, ascending,
/// '#' comment lines allowed.
inline ZeroTable load_zeros(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open zeros file: " + path);
    ZeroTable table;
    table.source = path;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::size_t start = line.find_first_not_of(" \t");
        if (start == std::string::npos || line[start] == '#') continue;
        double t = 0.0;
        try {
            std::size_t pos = 0;
            t = std::stod(line.substr(start), &pos);
        } catch (const std::exception&) {
            throw DataError("zeros parse failure at " + path + ":" + std::to_string(lineno));
        }
        if (!table.heights.empty() && t <= table.heights.back())
            throw DataError("zeros not strictly increasing at " + path + ":" + std::to_string(lineno));
        if (t <= 0.0)
            throw DataError("zero height must be positive at " + path + ":" + std::to_string(lineno));
        table.heights.push_back(t);
    }
    if (table.heights.empty()) throw DataError("zeros file is empty: " + path);
    return table;
}

/// Smooth Riemann-von Mangoldt counting function
/// N(t) = (t / 2 pi) ln(t / (2 pi e)) + 7/8, increasing for t > 2 pi.
inline double smooth_zero_count(double t) {
    const double x = t / (2.0 * std::numbers::pi);
    return x * std::log(x / std::numbers::e) + 7.0 / 8.0;
}

/// Unfold zero heights through the closed-form counting function. Unlike the
/// lattice pipeline no empirical fit is involved, so by default the levels
/// are left exactly as N(t_n); enable rescale for downstream statistics that
/// require the sample mean spacing to be exactly one.
inline UnfoldedSpectrum unfold_zeros(const ZeroTable& table, std::size_t offset = 0,
                                     std::size_t count = 0, bool rescale = false) {
    if (offset >= table.heights.size())
        throw DataError("unfold_zeros: offset beyond end of table");
    std::size_t last = count == 0 ? table.heights.size() : std::min(table.heights.size(), offset + count);
    UnfoldedSpectrum u;
    u.method = "riemann_von_mangoldt";
    u.meta["source"] = table.source;
    u.meta["offset"] = std::to_string(offset);
    u.levels.reserve(last - offset);
    const double validity = 2.0 * std::numbers::pi;
    for (std::size_t i = offset; i < last; ++i) {
        const double t = table.heights[i];
        if (t <= validity)
            throw DomainError("unfold_zeros: height " + format_full(t) +
                              " below the counting-function validity threshold 2*pi");
        u.levels.push_back(smooth_zero_count(t));
    }
    if (rescale && u.levels.size() >= 2) {
        const double first = u.levels.front(), span = u.levels.back() - u.levels.front();
        const double c = static_cast<double>(u.levels.size() - 1) / span;
        for (auto& x : u.levels) x = first + c * (x - first);
        u.rescaled = true;
    }
    return u;
}

}  // namespace levelstats

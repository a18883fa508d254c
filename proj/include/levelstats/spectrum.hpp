#pragma once

#include <algorithm>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "levelstats/errors.hpp"
#include "levelstats/io.hpp"

namespace levelstats {

/// Sorted raw eigenvalues with provenance metadata. Files store the header
/// as "# key=value" lines followed by one eigenvalue per line.
struct Spectrum {
    std::vector<double> values;           // ascending
    KeyValueMap meta;                     // model, params, seed, solver, ...
    std::optional<std::pair<double, double>> window;

    std::size_t size() const { return values.size(); }

    /// Levels within [lo, hi], as a plain vector.
    std::vector<double> slice(double lo, double hi) const {
        auto first = std::lower_bound(values.begin(), values.end(), lo);
        auto last = std::upper_bound(values.begin(), values.end(), hi);
        return {first, last};
    }

    void save(const std::string& path) const {
        std::ofstream out(path);
        if (!out) throw DataError("cannot write spectrum file: " + path);
        for (const auto& [k, v] : meta) out << "# " << k << '=' << v << '\n';
        if (window) {
            out << "# window_lo=" << format_full(window->first) << '\n';
            out << "# window_hi=" << format_full(window->second) << '\n';
        }
        for (double v : values) out << format_full(v) << '\n';
    }

    static Spectrum load(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw DataError("cannot open spectrum file: " + path);
        Spectrum s;
        std::string line;
        std::size_t lineno = 0;
        std::optional<double> wlo, whi;
        while (std::getline(in, line)) {
            ++lineno;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (line.empty()) continue;
            if (line[0] == '#') {
                std::string key, value;
                if (parse_key_value(line.substr(1), key, value)) {
                    if (key == "window_lo") wlo = std::stod(value);
                    else if (key == "window_hi") whi = std::stod(value);
                    else s.meta[key] = value;
                }
                continue;
            }
            try {
                std::size_t pos = 0;
                double v = std::stod(line, &pos);
                s.values.push_back(v);
            } catch (const std::exception&) {
                throw DataError("spectrum parse failure at " + path + ":" + std::to_string(lineno));
            }
        }
        if (wlo && whi) s.window = {*wlo, *whi};
        if (!std::is_sorted(s.values.begin(), s.values.end()))
            throw DataError("spectrum file not sorted: " + path);
        return s;
    }
};

}  // namespace levelstats

#pragma once

#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "levelstats/errors.hpp"

namespace levelstats {

/// Shortest decimal form that round-trips a double exactly.
inline std::string format_full(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    double back = 0.0;
    std::sscanf(buf, "%lf", &back);
    if (back == x) {
        // try to shorten
        for (int prec = 1; prec < 17; ++prec) {
            char s[40];
            std::snprintf(s, sizeof(s), "%.*g", prec, x);
            double b = 0.0;
            std::sscanf(s, "%lf", &b);
            if (b == x) return s;
        }
    }
    return buf;
}

using KeyValueMap = std::map<std::string, std::string>;

/// Parse one "key=value" line; returns false for blank/comment lines.
inline bool parse_key_value(const std::string& line, std::string& key, std::string& value) {
    std::size_t start = line.find_first_not_of(" \t");
    if (start == std::string::npos) return false;
    if (line[start] == '#') return false;
    std::size_t eq = line.find('=', start);
    if (eq == std::string::npos) return false;
    key = line.substr(start, eq - start);
    while (!key.empty() && (key.back() == ' ' || key.back() == '\t')) key.pop_back();
    value = line.substr(eq + 1);
    std::size_t vs = value.find_first_not_of(" \t");
    value = vs == std::string::npos ? "" : value.substr(vs);
    while (!value.empty() && (value.back() == ' ' || value.back() == '\t' || value.back() == '\r'))
        value.pop_back();
    return !key.empty();
}

inline KeyValueMap read_key_value_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open file: " + path);
    KeyValueMap kv;
    std::string line, key, value;
    while (std::getline(in, line)) {
        if (parse_key_value(line, key, value)) kv[key] = value;
    }
    return kv;
}

}  // namespace levelstats

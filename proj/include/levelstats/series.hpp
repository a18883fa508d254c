#pragma once

#include <cstddef>
#include <vector>

namespace levelstats {

/// Ordered nearest-neighbour spacings S_n of an unfolded sequence.
struct SpacingSeries {
    std::vector<double> spacings;
    double mean_spacing = 0.0;

    std::size_t size() const { return spacings.size(); }
};

/// Spacings of spacings, x_n = S_n - S_{n-1}.
struct IncrementSeries {
    std::vector<double> increments;

    std::size_t size() const { return increments.size(); }
};

/// Cumulative sum of mean-centred spacings (the detrended level signal).
struct LevelSignal {
    std::vector<double> values;
    double mean_spacing = 0.0;  // the <S> that was subtracted

    std::size_t size() const { return values.size(); }
};

}  // namespace levelstats

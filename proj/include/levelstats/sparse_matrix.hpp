#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <ostream>
#include <span>
#include <vector>

#include "levelstats/errors.hpp"
#include "levelstats/io.hpp"

namespace levelstats {

/// Real symmetric matrix stored as a dense diagonal plus a list of strictly
/// upper-triangular entries (each symmetric pair stored once, row < col).
class SparseSymmetricMatrix {
  public:
    struct Entry {
        std::int32_t row;
        std::int32_t col;
        double value;
    };

    SparseSymmetricMatrix() = default;

    SparseSymmetricMatrix(std::size_t dim, std::vector<double> diagonal, std::vector<Entry> off_diagonal)
        : dim_(dim), diagonal_(std::move(diagonal)), off_diagonal_(std::move(off_diagonal)) {
        if (diagonal_.size() != dim_)
            throw DataError("diagonal length does not match matrix dimension");
        for (const auto& e : off_diagonal_) {
            if (e.row < 0 || e.col < 0 || static_cast<std::size_t>(e.row) >= dim_ ||
                static_cast<std::size_t>(e.col) >= dim_)
                throw DataError("off-diagonal index out of range");
            if (e.row >= e.col)
                throw DataError("off-diagonal entries must satisfy row < col");
        }
        std::sort(off_diagonal_.begin(), off_diagonal_.end(), [](const Entry& a, const Entry& b) {
            return a.row != b.row ? a.row < b.row : a.col < b.col;
        });
        for (std::size_t i = 1; i < off_diagonal_.size(); ++i) {
            if (off_diagonal_[i - 1].row == off_diagonal_[i].row &&
                off_diagonal_[i - 1].col == off_diagonal_[i].col)
                throw DataError("duplicate off-diagonal entry");
        }
    }

    std::size_t dim() const { return dim_; }
    std::span<const double> diagonal() const { return diagonal_; }
    std::span<const Entry> off_diagonal() const { return off_diagonal_; }

    double trace() const {
        double t = 0.0;
        for (double d : diagonal_) t += d;
        return t;
    }

    /// y = M x
    void apply(std::span<const double> x, std::span<double> y) const {
        for (std::size_t i = 0; i < dim_; ++i) y[i] = diagonal_[i] * x[i];
        for (const auto& e : off_diagonal_) {
            y[e.row] += e.value * x[e.col];
            y[e.col] += e.value * x[e.row];
        }
    }

    /// True when every stored entry sits on the first superdiagonal.
    bool is_tridiagonal() const {
        for (const auto& e : off_diagonal_)
            if (e.col != e.row + 1) return false;
        return true;
    }

    double max_abs() const {
        double m = 0.0;
        for (double d : diagonal_) m = std::max(m, std::abs(d));
        for (const auto& e : off_diagonal_) m = std::max(m, std::abs(e.value));
        return m;
    }

    /// Debug dump: "row col value" triples, 0-based, diagonal included.
    void dump(std::ostream& os) const {
        for (std::size_t i = 0; i < dim_; ++i)
            os << i << ' ' << i << ' ' << format_full(diagonal_[i]) << '\n';
        for (const auto& e : off_diagonal_)
            os << e.row << ' ' << e.col << ' ' << format_full(e.value) << '\n';
    }

  private:
    std::size_t dim_ = 0;
    std::vector<double> diagonal_;
    std::vector<Entry> off_diagonal_;
};

}  // namespace levelstats

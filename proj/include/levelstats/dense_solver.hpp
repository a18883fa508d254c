#pragma once

#include <Eigen/Dense>
#include <string>

#include "levelstats/errors.hpp"
#include "levelstats/sparse_matrix.hpp"
#include "levelstats/spectrum.hpp"

namespace levelstats {

struct DenseOpts {
    std::size_t cap = 4096;  // refuse larger problems; use eigs_window instead
};

/// Full spectrum by symmetric tridiagonalization + implicit QL/QR.
/// Tridiagonal inputs skip the reduction step.
inline Spectrum eigs_dense(const SparseSymmetricMatrix& m, const DenseOpts& opts = {}) {
    const std::size_t n = m.dim();
    if (n == 0) throw SizeError("eigs_dense: empty matrix");
    if (n > opts.cap)
        throw SizeError("eigs_dense: dim " + std::to_string(n) + " exceeds cap " +
                        std::to_string(opts.cap) + "; use the windowed solver");

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
    if (m.is_tridiagonal()) {
        Eigen::VectorXd diag(n), subdiag(n >= 1 ? n - 1 : 0);
        for (std::size_t i = 0; i < n; ++i) diag[static_cast<Eigen::Index>(i)] = m.diagonal()[i];
        subdiag.setZero();
        for (const auto& e : m.off_diagonal()) subdiag[e.row] = e.value;
        solver.computeFromTridiagonal(diag, subdiag, Eigen::EigenvaluesOnly);
    } else {
        Eigen::MatrixXd dense = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n),
                                                      static_cast<Eigen::Index>(n));
        for (std::size_t i = 0; i < n; ++i)
            dense(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = m.diagonal()[i];
        for (const auto& e : m.off_diagonal()) {
            dense(e.row, e.col) = e.value;
            dense(e.col, e.row) = e.value;
        }
        solver.compute(dense, Eigen::EigenvaluesOnly);
    }
    if (solver.info() != Eigen::Success)
        throw SolverError("eigs_dense: QL iteration failed to converge within the library's 30n sweep budget");

    Spectrum out;
    out.values.assign(solver.eigenvalues().data(), solver.eigenvalues().data() + n);
    std::sort(out.values.begin(), out.values.end());
    out.meta["solver"] = "dense";
    return out;
}

}  // namespace levelstats

#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "levelstats/errors.hpp"
#include "levelstats/rng.hpp"
#include "levelstats/sparse_matrix.hpp"
#include "levelstats/spectrum.hpp"

namespace levelstats {

/// Number of eigenvalues strictly below `shift`, from the inertia of the
/// LDL^T factorization of (M - shift I). Shifts that land on (or within
/// roundoff of) an eigenvalue produce a tiny pivot; those are retried with a
/// deterministically nudged shift.
inline std::size_t inertia_below(const SparseSymmetricMatrix& m, double shift) {
    using Sparse = Eigen::SparseMatrix<double>;
    const auto n = static_cast<Eigen::Index>(m.dim());
    const double scale = std::max(1.0, m.max_abs());

    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(m.dim() + 2 * m.off_diagonal().size());
    for (double nudge = 0.0;;) {
        trips.clear();
        for (Eigen::Index i = 0; i < n; ++i)
            trips.emplace_back(i, i, m.diagonal()[static_cast<std::size_t>(i)] - (shift + nudge));
        for (const auto& e : m.off_diagonal()) {
            trips.emplace_back(e.row, e.col, e.value);
            trips.emplace_back(e.col, e.row, e.value);
        }
        Sparse a(n, n);
        a.setFromTriplets(trips.begin(), trips.end());
        Eigen::SimplicialLDLT<Sparse> ldlt(a);
        bool bad = ldlt.info() != Eigen::Success;
        std::size_t neg = 0;
        if (!bad) {
            const auto& d = ldlt.vectorD();
            for (Eigen::Index i = 0; i < n; ++i) {
                double di = d[i];
                if (!std::isfinite(di) || std::abs(di) < 1e-13 * scale) {
                    bad = true;
                    break;
                }
                if (di < 0.0) ++neg;
            }
        }
        if (!bad) return neg;
        nudge = nudge == 0.0 ? 1e-10 * scale : 2.0 * nudge;
        if (nudge > 1e-4 * scale)
            throw SolverError("inertia_below: factorization kept hitting near-zero pivots near shift " +
                              std::to_string(shift));
    }
}

struct WindowOpts {
    double tol = 1e-8;            // residual test is tol * max(1, |theta|)
    std::size_t max_iter = 0;     // 0 = up to dim per pass
    std::size_t check_every = 64;
    std::size_t max_restarts = 4; // deflated restarts, needed only for exact degeneracies
    std::uint64_t seed = 0x1f2e3d4c5b6a7988ULL;
};

namespace detail {

// Eigenvector of the Lanczos tridiagonal for a converged Ritz value, by
// inverse iteration (banded elimination with partial pivoting). Used both
// for the beta*|last component| residual bound and for deflation vectors.
inline Eigen::VectorXd tridiag_eigvec(std::span<const double> alpha, std::span<const double> beta,
                                      double theta) {
    const std::size_t m = alpha.size();
    Eigen::VectorXd y(static_cast<Eigen::Index>(m));
    SplitMix64 r(0x9d2c5680ca876537ULL);
    for (std::size_t i = 0; i < m; ++i) y[static_cast<Eigen::Index>(i)] = r.next_double() - 0.5;
    y.normalize();
    std::vector<double> d(m), u1(m), u2(m), rhs(m);
    for (int sweep = 0; sweep < 2; ++sweep) {
        for (std::size_t i = 0; i < m; ++i) {
            d[i] = alpha[i] - theta;
            u1[i] = i + 1 < m ? beta[i + 1] : 0.0;
            u2[i] = 0.0;
            rhs[i] = y[static_cast<Eigen::Index>(i)];
        }
        for (std::size_t i = 0; i + 1 < m; ++i) {
            double sub = beta[i + 1];
            double du = u1[i];
            if (std::abs(sub) > std::abs(d[i])) {
                std::swap(d[i], sub);
                std::swap(u1[i], d[i + 1]);
                if (i + 2 < m) std::swap(u2[i], u1[i + 1]);
                std::swap(rhs[i], rhs[i + 1]);
                (void)du;
            }
            if (d[i] == 0.0) d[i] = 1e-300;
            double f = sub / d[i];
            d[i + 1] -= f * u1[i];
            if (i + 2 < m) u1[i + 1] -= f * u2[i];
            rhs[i + 1] -= f * rhs[i];
        }
        if (d[m - 1] == 0.0) d[m - 1] = 1e-300;
        for (std::size_t ii = m; ii-- > 0;) {
            double v = rhs[ii];
            if (ii + 1 < m) v -= u1[ii] * y[static_cast<Eigen::Index>(ii + 1)];
            if (ii + 2 < m) v -= u2[ii] * y[static_cast<Eigen::Index>(ii + 2)];
            y[static_cast<Eigen::Index>(ii)] = v / d[ii];
        }
        y.normalize();
    }
    return y;
}

}  // namespace detail

/// All eigenvalues of `m` in [a, b] by Lanczos with full reorthogonalization
/// of the Krylov basis, validated against the inertia count
/// inertia(b) - inertia(a). Exact degeneracies (invisible to a single Krylov
/// space) are recovered by deflated restarts. Deterministic for fixed seed.
inline Spectrum eigs_window(const SparseSymmetricMatrix& m, double a, double b,
                            const WindowOpts& opts = {}) {
    if (!(a < b)) throw DataError("eigs_window: window requires a < b");
    const std::size_t n = m.dim();
    if (n < 2) throw SizeError("eigs_window: matrix dimension must be >= 2");

    const std::size_t expected = inertia_below(m, b) - inertia_below(m, a);
    Spectrum out;
    out.window = {a, b};
    out.meta["solver"] = "lanczos";
    if (expected == 0) return out;

    const auto ni = static_cast<Eigen::Index>(n);
    const double scale = std::max(1.0, m.max_abs());
    const std::size_t per_pass = opts.max_iter == 0 ? n : std::min(opts.max_iter, n);

    Eigen::MatrixXd deflation(ni, 0);
    std::vector<double> found;
    SplitMix64 rng(opts.seed);
    std::size_t total_iters = 0;
    std::size_t passes_used = 0;

    for (std::size_t pass = 0; pass <= opts.max_restarts && found.size() < expected; ++pass) {
        passes_used = pass + 1;
        Eigen::MatrixXd basis(ni, static_cast<Eigen::Index>(per_pass));
        std::vector<double> alpha, beta;
        beta.push_back(0.0);

        Eigen::VectorXd v(ni), w(ni);
        for (Eigen::Index i = 0; i < ni; ++i) v[i] = rng.next_double() - 0.5;
        if (deflation.cols() > 0) v -= deflation * (deflation.transpose() * v);
        if (v.norm() < 1e-12) throw SolverError("eigs_window: start vector vanished after deflation");
        v.normalize();
        basis.col(0) = v;

        std::vector<double> pass_values;
        std::vector<Eigen::VectorXd> pass_tvecs;
        std::size_t mm = 0;

        auto harvest = [&]() {
            Eigen::VectorXd diag(static_cast<Eigen::Index>(mm));
            Eigen::VectorXd sub(static_cast<Eigen::Index>(mm > 0 ? mm - 1 : 0));
            for (std::size_t i = 0; i < mm; ++i) diag[static_cast<Eigen::Index>(i)] = alpha[i];
            for (std::size_t i = 0; i + 1 < mm; ++i) sub[static_cast<Eigen::Index>(i)] = beta[i + 1];
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
            es.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
            const double beta_last = beta[mm];
            pass_values.clear();
            pass_tvecs.clear();
            for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
                const double theta = es.eigenvalues()[i];
                if (theta < a || theta > b) continue;
                auto y = detail::tridiag_eigvec({alpha.data(), mm}, {beta.data(), mm + 1}, theta);
                const double resid = std::abs(beta_last * y[static_cast<Eigen::Index>(mm - 1)]);
                if (resid <= opts.tol * std::max(1.0, std::abs(theta))) {
                    pass_values.push_back(theta);
                    pass_tvecs.push_back(std::move(y));
                }
            }
            return found.size() + pass_values.size() >= expected;
        };

        bool complete = false;
        for (std::size_t j = 0; j < per_pass; ++j) {
            m.apply({basis.col(static_cast<Eigen::Index>(j)).data(), n}, {w.data(), n});
            if (j > 0) w -= beta[j] * basis.col(static_cast<Eigen::Index>(j - 1));
            const double aj = basis.col(static_cast<Eigen::Index>(j)).dot(w);
            alpha.push_back(aj);
            w -= aj * basis.col(static_cast<Eigen::Index>(j));
            // full reorthogonalization, classical Gram-Schmidt twice
            auto bj_cols = basis.leftCols(static_cast<Eigen::Index>(j + 1));
            for (int gs = 0; gs < 2; ++gs) {
                w -= bj_cols * (bj_cols.transpose() * w);
                if (deflation.cols() > 0) w -= deflation * (deflation.transpose() * w);
            }
            const double bj = w.norm();
            beta.push_back(bj);
            mm = j + 1;
            ++total_iters;
            if (bj < 1e-13 * scale) break;  // invariant subspace exhausted
            if (j + 1 < per_pass) basis.col(static_cast<Eigen::Index>(j + 1)) = w / bj;
            if (mm % opts.check_every == 0 && harvest()) {
                complete = true;
                break;
            }
        }
        if (!complete) harvest();

        found.insert(found.end(), pass_values.begin(), pass_values.end());

        if (found.size() < expected && pass < opts.max_restarts && !pass_tvecs.empty()) {
            // keep converged in-window directions out of the next Krylov space
            // so the remaining copies of degenerate eigenvalues can surface
            Eigen::Index old = deflation.cols();
            Eigen::MatrixXd grown(ni, old + static_cast<Eigen::Index>(pass_tvecs.size()));
            grown.leftCols(old) = deflation;
            Eigen::Index k = old;
            for (const auto& y : pass_tvecs) {
                Eigen::VectorXd rv = basis.leftCols(static_cast<Eigen::Index>(y.size())) * y;
                if (old > 0) rv -= grown.leftCols(k) * (grown.leftCols(k).transpose() * rv);
                const double nr = rv.norm();
                if (nr > 1e-8) grown.col(k++) = rv / nr;
            }
            deflation = grown.leftCols(k);
        }
    }

    if (found.size() < expected)
        throw IncompleteWindowError(found.size(), expected,
                                    "eigs_window: found " + std::to_string(found.size()) + " of " +
                                        std::to_string(expected) + " eigenvalues in [" +
                                        std::to_string(a) + ", " + std::to_string(b) + "] after " +
                                        std::to_string(total_iters) + " iterations");
    std::sort(found.begin(), found.end());
    while (found.size() > expected) {
        // re-found copy of a near-degenerate value; drop the closer of the pair
        std::size_t k = 1;
        for (std::size_t i = 2; i < found.size(); ++i)
            if (found[i] - found[i - 1] < found[k] - found[k - 1]) k = i;
        found.erase(found.begin() + static_cast<std::ptrdiff_t>(k));
    }
    out.values = std::move(found);
    out.meta["iterations"] = std::to_string(total_iters);
    out.meta["passes"] = std::to_string(passes_used);
    return out;
}

}  // namespace levelstats

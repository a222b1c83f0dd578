#pragma once

// Symmetric eigenvalue helpers.  Dense solvers up to mid sizes; a Lanczos
// extreme-eigenvalue estimate beyond the dense ceiling (documented accuracy
// caveat: Ritz values approach extreme eigenvalues from inside).

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "soslift/common.hpp"
#include "soslift/rng.hpp"

#ifdef SOSLIFT_HAVE_LAPACKE
#include <cblas.h>
#include <lapacke.h>
#endif

namespace soslift::eigs {

inline constexpr int kDenseEigenCeiling = 1500;   // Eigen below, LAPACK above
inline constexpr int kDenseLapackCeiling = 3000;  // LAPACK below, Lanczos above

/// All eigenvalues, ascending.  Dense only.
inline Eigen::VectorXd sym_eigenvalues(const Eigen::MatrixXd& a) {
#ifdef SOSLIFT_HAVE_LAPACKE
    if (a.rows() > kDenseEigenCeiling) {
        Eigen::MatrixXd work = a;
        Eigen::VectorXd w(a.rows());
        const lapack_int info =
            LAPACKE_dsyev(LAPACK_COL_MAJOR, 'N', 'U', static_cast<lapack_int>(a.rows()),
                          work.data(), static_cast<lapack_int>(a.rows()), w.data());
        if (info != 0) throw std::runtime_error("dsyev failed");
        return w;
    }
#endif
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a, Eigen::EigenvaluesOnly);
    return es.eigenvalues();
}

/// y = A x for large dense symmetric matrices.
inline void matvec(const Eigen::MatrixXd& a, const Eigen::VectorXd& x, Eigen::VectorXd& y) {
    const Eigen::Index n = a.rows();
    y.resize(n);
#ifdef SOSLIFT_HAVE_LAPACKE
    cblas_dsymv(CblasColMajor, CblasUpper, static_cast<int>(n), 1.0, a.data(),
                static_cast<int>(n), x.data(), 1, 0.0, y.data(), 1);
#else
    // per-thread row stripes, sweeping columns for contiguous access
    const int nthreads = std::max(1u, std::thread::hardware_concurrency());
    std::vector<std::thread> pool;
    const Eigen::Index chunk = (n + nthreads - 1) / nthreads;
    auto work = [&](Eigen::Index lo, Eigen::Index hi) {
        for (Eigen::Index r = lo; r < hi; ++r) y[r] = 0.0;
        for (Eigen::Index j = 0; j < n; ++j) {
            const double xj = x[j];
            const double* col = a.col(j).data();
            for (Eigen::Index r = lo; r < hi; ++r) y[r] += col[r] * xj;
        }
    };
    for (int t = 1; t < nthreads; ++t) {
        const Eigen::Index lo = t * chunk, hi = std::min(n, lo + chunk);
        if (lo < hi) pool.emplace_back(work, lo, hi);
    }
    work(0, std::min(n, chunk));
    for (auto& th : pool) th.join();
#endif
}

struct LanczosResult {
    double value = 0;
    int iterations = 0;
    double residual = 0;
    bool converged = false;
};

/// Extreme eigenvalue of symmetric `a` (smallest if `smallest`), with full
/// reorthogonalization and a deterministic start vector.
inline LanczosResult lanczos_extreme(const Eigen::MatrixXd& a, bool smallest, int max_iter = 300,
                                     double tol = 1e-11) {
    const Eigen::Index n = a.rows();
    CounterRng rng(0x5051u);
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = rng.next_normal();
    v.normalize();

    std::vector<Eigen::VectorXd> basis;
    std::vector<double> alpha, beta;
    Eigen::VectorXd w(n), prev = Eigen::VectorXd::Zero(n);
    LanczosResult res;
    for (int it = 0; it < max_iter; ++it) {
        basis.push_back(v);
        matvec(a, v, w);
        const double al = v.dot(w);
        alpha.push_back(al);
        w -= al * v;
        if (it > 0) w -= beta.back() * prev;
        // two rounds of classical full reorthogonalization
        for (int round = 0; round < 2; ++round)
            for (const auto& b : basis) w -= b.dot(w) * b;
        const double be = w.norm();

        // Ritz check every few steps
        const int m = static_cast<int>(alpha.size());
        if (it % 4 == 3 || be < 1e-14 || it == max_iter - 1) {
            Eigen::MatrixXd t = Eigen::MatrixXd::Zero(m, m);
            for (int i = 0; i < m; ++i) {
                t(i, i) = alpha[i];
                if (i + 1 < m) t(i, i + 1) = t(i + 1, i) = beta.size() > static_cast<std::size_t>(i)
                                                               ? beta[i]
                                                               : 0.0;
            }
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t);
            const int pick = smallest ? 0 : m - 1;
            const double theta = es.eigenvalues()[pick];
            const double resid = be * std::abs(es.eigenvectors()(m - 1, pick));
            res.value = theta;
            res.iterations = m;
            res.residual = resid;
            if (resid <= tol * std::max(1.0, std::abs(theta)) || be < 1e-14) {
                res.converged = true;
                return res;
            }
        }
        if (be < 1e-14) break;
        beta.push_back(be);
        prev = v;
        v = w / be;
    }
    return res;
}

/// Smallest eigenvalue with automatic method choice.
inline double lambda_min(const Eigen::MatrixXd& a) {
    if (a.rows() <= kDenseLapackCeiling) return sym_eigenvalues(a).minCoeff();
    return lanczos_extreme(a, /*smallest=*/true).value;
}

inline double lambda_max(const Eigen::MatrixXd& a) {
    if (a.rows() <= kDenseLapackCeiling) return sym_eigenvalues(a).maxCoeff();
    return lanczos_extreme(a, /*smallest=*/false).value;
}

/// Spectral norm (largest absolute eigenvalue) of a symmetric matrix.
inline double spectral_norm_sym(const Eigen::MatrixXd& a) {
    if (a.rows() <= kDenseLapackCeiling) {
        const Eigen::VectorXd w = sym_eigenvalues(a);
        return std::max(std::abs(w.minCoeff()), std::abs(w.maxCoeff()));
    }
    return std::max(std::abs(lanczos_extreme(a, true).value),
                    std::abs(lanczos_extreme(a, false).value));
}

}  // namespace soslift::eigs

#pragma once

// Degree-2 and degree-4 pseudomoment objects and their feasibility checks.

#include <Eigen/Dense>
#include <atomic>
#include <cmath>
#include <json.hpp>

#include "soslift/common.hpp"
#include "soslift/eigs.hpp"
#include "soslift/indexing.hpp"

namespace soslift::moments {

inline constexpr double kTolPsd = 1e-8;

struct Degree2Solution {
    int n = 0;
    Eigen::MatrixXd x;
    nlohmann::json provenance;
};

struct Degree4MomentMatrix {
    int n = 0;
    double eta = 0.0;
    Eigen::MatrixXd entries;  // indexed through MomentIndexMap

    std::int64_t dim() const { return entries.rows(); }
};

struct Sos2Report {
    bool ok = false;
    double lambda_min = 0;
    double max_diag_error = 0;
};

struct Sos4Report {
    bool ok = false;
    double lambda_min = 0;
    double max_symmetry_violation = 0;  // over equal symmetric differences
    double normalization_error = 0;     // |M[empty,empty] - 1|
    double max_odd_pattern_abs = 0;     // must be exactly 0
    double max_transpose_asymmetry = 0;
};

inline Sos2Report check_sos2_feasible(const Degree2Solution& sol, double tol = kTolPsd) {
    const Eigen::MatrixXd& x = sol.x;
    if (x.rows() != x.cols() || x.rows() != sol.n)
        throw MalformedInput("check_sos2_feasible: non-square or inconsistent dimension");
    const double asym = (x - x.transpose()).cwiseAbs().maxCoeff();
    if (asym > 1e-12) throw MalformedInput("check_sos2_feasible: input not symmetric");
    Sos2Report rep;
    rep.max_diag_error = (x.diagonal().array() - 1.0).abs().maxCoeff();
    rep.lambda_min = eigs::lambda_min(x);
    rep.ok = rep.max_diag_error <= tol && rep.lambda_min >= -tol;
    return rep;
}

namespace detail {

/// Canonical representative index pair for a symmetric difference pattern.
inline std::pair<std::int64_t, std::int64_t> repr_of_pattern(const MomentIndexMap& map,
                                                             const std::array<int, 4>& d, int k) {
    switch (k) {
        case 0:
            return {0, 0};
        case 1:
            return {0, map.index_of(SubsetLE2::single(d[0]))};
        case 2:
            return {map.index_of(SubsetLE2::single(d[0])), map.index_of(SubsetLE2::single(d[1]))};
        case 3:
            return {map.index_of(SubsetLE2::single(d[0])), map.index_of(SubsetLE2::pair(d[1], d[2]))};
        default:
            return {map.index_of(SubsetLE2::pair(d[0], d[1])), map.index_of(SubsetLE2::pair(d[2], d[3]))};
    }
}

}  // namespace detail

/// Verifies normalization, symmetric-difference consistency (grouped through
/// canonical representatives, O(N^2)), exact odd-pattern zeros, transpose
/// symmetry, and the PSD condition.
inline Sos4Report check_sos4_feasible(const Degree4MomentMatrix& m, double tol = kTolPsd) {
    const MomentIndexMap map(m.n);
    const std::int64_t dim = map.size();
    if (m.entries.rows() != dim || m.entries.cols() != dim)
        throw MalformedInput("check_sos4_feasible: dimension mismatch with index map");

    Sos4Report rep;
    rep.normalization_error = std::abs(m.entries(0, 0) - 1.0);

    std::vector<SubsetLE2> subs(dim);
    for (std::int64_t i = 0; i < dim; ++i) subs[i] = map.subset_of(i);

    const int nthreads = std::max(1u, std::thread::hardware_concurrency());
    std::vector<double> sym_v(nthreads, 0.0), odd_v(nthreads, 0.0), tr_v(nthreads, 0.0);
    std::atomic<std::int64_t> next_row{0};
    auto worker = [&](int tid) {
        double sym = 0, odd = 0, tr = 0;
        for (;;) {
            const std::int64_t r = next_row.fetch_add(64);
            if (r >= dim) break;
            const std::int64_t hi = std::min(dim, r + 64);
            for (std::int64_t i = r; i < hi; ++i) {
                for (std::int64_t j = i; j < dim; ++j) {
                    const double v = m.entries(i, j);
                    tr = std::max(tr, std::abs(v - m.entries(j, i)));
                    int k = 0;
                    const auto d = subs[i].sym_diff(subs[j], &k);
                    if (k % 2 == 1) {
                        odd = std::max(odd, std::abs(v));
                        continue;
                    }
                    const auto [ri, rj] = detail::repr_of_pattern(map, d, k);
                    sym = std::max(sym, std::abs(v - m.entries(ri, rj)));
                }
            }
        }
        sym_v[tid] = sym;
        odd_v[tid] = odd;
        tr_v[tid] = tr;
    };
    std::vector<std::thread> pool;
    for (int t = 1; t < nthreads; ++t) pool.emplace_back(worker, t);
    worker(0);
    for (auto& th : pool) th.join();
    for (int t = 0; t < nthreads; ++t) {
        rep.max_symmetry_violation = std::max(rep.max_symmetry_violation, sym_v[t]);
        rep.max_odd_pattern_abs = std::max(rep.max_odd_pattern_abs, odd_v[t]);
        rep.max_transpose_asymmetry = std::max(rep.max_transpose_asymmetry, tr_v[t]);
    }

    rep.lambda_min = eigs::lambda_min(m.entries);
    rep.ok = rep.normalization_error <= tol && rep.max_symmetry_violation == 0.0 &&
             rep.max_odd_pattern_abs == 0.0 && rep.max_transpose_asymmetry == 0.0 &&
             rep.lambda_min >= -tol;
    return rep;
}

inline double objective_deg2(const Eigen::MatrixXd& a, const Degree2Solution& sol) {
    if (a.rows() != sol.n || a.cols() != sol.n)
        throw MalformedInput("objective_deg2: dimension mismatch");
    return (a.array() * sol.x.array()).sum();
}

/// <A, M> over the singleton block: sum A[i,j] M[{i},{j}], with M[{i},{i}]
/// read from the diagonal singleton entries.
inline double objective_deg4(const Eigen::MatrixXd& a, const Degree4MomentMatrix& m) {
    if (a.rows() != m.n || a.cols() != m.n)
        throw MalformedInput("objective_deg4: dimension mismatch");
    double acc = 0;
    for (int i = 0; i < m.n; ++i)
        for (int j = 0; j < m.n; ++j) acc += a(i, j) * m.entries(1 + i, 1 + j);
    return acc;
}

}  // namespace soslift::moments

#pragma once

// The truncated-polynomial Gram matrix M2, the error split E = M1 - M2 by
// index pattern, numeric spectral norms, and the assembled analytic bounds.

#include <Eigen/Dense>

#include "soslift/families.hpp"
#include "soslift/lift.hpp"

namespace soslift::glyph {

inline constexpr int kM2Ceiling = 120;

/// Degree-4-shaped matrix M2[S,T] = lim E[p_S p_T], computed entrywise from
/// the compiled truncation patterns.  PSD up to numerical tolerance.
inline Eigen::MatrixXd m2_matrix(const lift::CholeskyRows& rows, int ceiling = kM2Ceiling) {
    const int n = rows.n;
    if (n > ceiling) throw CeilingExceeded("m2_matrix: n exceeds ceiling");
    const Eigen::MatrixXd gram = rows.rows * rows.rows.transpose();
    const moments::MomentIndexMap map(n);
    const std::int64_t dim = map.size();

    static const CompiledPattern alone(trunc_pair_alone_pattern());
    static const CompiledPattern eq(trunc_eq_pattern());
    static const CompiledPattern share(trunc_share_pattern());
    static const CompiledPattern disj(trunc_disjoint_pattern());

    Eigen::MatrixXd m2 = Eigen::MatrixXd::Zero(dim, dim);
    m2(0, 0) = 1.0;
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j)
            m2(1 + i, 1 + j) = m2(1 + j, 1 + i) = gram(i, j);

    parallel_for(0, map.pair_count(), [&](std::int64_t p) {
        const auto s = map.subset_of(1 + n + p);
        const std::int64_t is = 1 + n + p;
        // empty row/column
        const double v0 = alone.eval([&](int a, int b) {
            const int lab[2] = {s.a, s.b};
            return gram(lab[a], lab[b]);
        });
        m2(0, is) = m2(is, 0) = v0;
        for (std::int64_t q = p; q < map.pair_count(); ++q) {
            const auto t = map.subset_of(1 + n + q);
            const std::int64_t it = 1 + n + q;
            double v;
            const bool share_a = t.contains(s.a), share_b = t.contains(s.b);
            if (share_a && share_b) {
                v = eq.eval([&](int a, int b) {
                    const int lab[2] = {s.a, s.b};
                    return gram(lab[a], lab[b]);
                });
            } else if (share_a || share_b) {
                const int shared = share_a ? s.a : s.b;
                const int left = share_a ? s.b : s.a;
                const int right = t.a == shared ? t.b : t.a;
                v = share.eval([&](int a, int b) {
                    const int lab[3] = {left, shared, right};
                    return gram(lab[a], lab[b]);
                });
            } else {
                v = disj.eval([&](int a, int b) {
                    const int lab[4] = {s.a, s.b, t.a, t.b};
                    return gram(lab[a], lab[b]);
                });
            }
            m2(is, it) = m2(it, is) = v;
        }
    });
    return m2;
}

struct ErrorComponents {
    Eigen::VectorXd e1_diag;  // over the full canonical index space
    Eigen::MatrixXd e2;       // n x n, singleton block
    Eigen::MatrixXd e3;       // pair block, sets sharing one element
    Eigen::MatrixXd e4;       // pair block, disjoint sets
    double numeric_norms[4] = {0, 0, 0, 0};
    double analytic_bounds[4] = {0, 0, 0, 0};

    bool sound() const {
        for (int k = 0; k < 4; ++k)
            if (numeric_norms[k] > analytic_bounds[k]) return false;
        return true;
    }
};

/// Pattern-restricted pieces of E = M1 - M2 with numeric spectral norms and
/// the assembled factorization bounds.
inline ErrorComponents error_components(const lift::CholeskyRows& rows, int ceiling = kM2Ceiling) {
    const int n = rows.n;
    if (n > ceiling) throw CeilingExceeded("error_components: n exceeds ceiling");
    const Eigen::MatrixXd gram = rows.rows * rows.rows.transpose();
    const moments::MomentIndexMap map(n);
    const std::int64_t dim = map.size();
    const std::int64_t np = map.pair_count();

    static const CompiledPattern e1c(error1_pattern());
    static const CompiledPattern e2c(error2_pattern());
    static const CompiledPattern e3c(error3_pattern());
    static const CompiledPattern e4c(error4_pattern());

    ErrorComponents ec;
    ec.e1_diag = Eigen::VectorXd::Zero(dim);
    for (int i = 0; i < n; ++i) ec.e1_diag[1 + i] = 1.0 - gram(i, i);
    for (std::int64_t p = 0; p < np; ++p) {
        const auto s = map.subset_of(1 + n + p);
        ec.e1_diag[1 + n + p] = e1c.eval([&](int a, int b) {
            const int lab[2] = {s.a, s.b};
            return gram(lab[a], lab[b]);
        });
    }

    ec.e2 = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            ec.e2(i, j) = ec.e2(j, i) = e2c.eval([&](int a, int b) {
                const int lab[2] = {i, j};
                return gram(lab[a], lab[b]);
            });

    ec.e3 = Eigen::MatrixXd::Zero(np, np);
    ec.e4 = Eigen::MatrixXd::Zero(np, np);
    parallel_for(0, np, [&](std::int64_t p) {
        const auto s = map.subset_of(1 + n + p);
        for (std::int64_t q = p + 1; q < np; ++q) {
            const auto t = map.subset_of(1 + n + q);
            const bool share_a = t.contains(s.a), share_b = t.contains(s.b);
            if (share_a && share_b) continue;
            if (share_a || share_b) {
                const int shared = share_a ? s.a : s.b;
                const int left = share_a ? s.b : s.a;
                const int right = t.a == shared ? t.b : t.a;
                const double v = e3c.eval([&](int a, int b) {
                    const int lab[3] = {left, shared, right};
                    return gram(lab[a], lab[b]);
                });
                ec.e3(p, q) = v;
            } else {
                const double v = e4c.eval([&](int a, int b) {
                    const int lab[4] = {s.a, s.b, t.a, t.b};
                    return gram(lab[a], lab[b]);
                });
                ec.e4(p, q) = v;
            }
        }
    });
    // mirror below the diagonal
    ec.e3 = Eigen::MatrixXd(ec.e3 + ec.e3.transpose().eval());
    ec.e4 = Eigen::MatrixXd(ec.e4 + ec.e4.transpose().eval());

    ec.numeric_norms[0] = ec.e1_diag.cwiseAbs().maxCoeff();
    ec.numeric_norms[1] = eigs::spectral_norm_sym(ec.e2);
    ec.numeric_norms[2] = eigs::spectral_norm_sym(ec.e3);
    ec.numeric_norms[3] = eigs::spectral_norm_sym(ec.e4);

    lift::SolutionParams p;
    lift::measure_alphas(gram, p);
    for (int k = 1; k <= 4; ++k)
        ec.analytic_bounds[k - 1] =
            factorization_norm_bound(k, p.alpha_mag, p.alpha_row, p.alpha_spec);
    return ec;
}

}  // namespace soslift::glyph

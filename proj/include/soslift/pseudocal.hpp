#pragma once

// Monic probabilists' Hermite polynomials and the pseudocalibration
// coefficient formula for matrix multi-indices.  Self-contained; not wired
// into the lifting pipeline.

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "soslift/common.hpp"

namespace soslift::pseudocal {

/// h_0 = 1, h_1 = x, h_{k+1} = x h_k - k h_{k-1}.
inline double hermite(int k, double x) {
    if (k < 0) throw MalformedInput("hermite: k must be >= 0");
    if (k == 0) return 1.0;
    double prev = 1.0, cur = x;
    for (int i = 1; i < k; ++i) {
        const double next = x * cur - i * prev;
        prev = cur;
        cur = next;
    }
    return cur;
}

struct MultiIndex {
    Eigen::MatrixXi alpha;  // n x d, nonnegative
    std::vector<int> l_set;  // subset of row indices (0-based)

    bool in_l(int i) const {
        return std::find(l_set.begin(), l_set.end(), i) != l_set.end();
    }
};

/// The Hermite coefficient of the pseudocalibrated moment: zero unless every
/// column sum is even and every row sum's parity matches membership in L;
/// otherwise prod 1/alpha_ab! * prod_i h_{|alpha_i|}(1) / d^{|alpha_i|/2}.
inline double pseudocal_coefficient(const MultiIndex& idx, int d) {
    if (d < 1) throw MalformedInput("pseudocal_coefficient: d must be >= 1");
    const int n = static_cast<int>(idx.alpha.rows());
    const int cols = static_cast<int>(idx.alpha.cols());
    for (int j = 0; j < cols; ++j) {
        int colsum = 0;
        for (int i = 0; i < n; ++i) {
            if (idx.alpha(i, j) < 0)
                throw MalformedInput("pseudocal_coefficient: negative multi-index entry");
            colsum += idx.alpha(i, j);
        }
        if (colsum % 2 != 0) return 0.0;
    }
    double value = 1.0;
    for (int i = 0; i < n; ++i) {
        int rowsum = 0;
        for (int j = 0; j < cols; ++j) {
            rowsum += idx.alpha(i, j);
            double f = 1.0;
            for (int t = 2; t <= idx.alpha(i, j); ++t) f *= t;
            value /= f;
        }
        if ((rowsum % 2 == 1) != idx.in_l(i)) return 0.0;
        value *= hermite(rowsum, 1.0) / std::pow(static_cast<double>(d), rowsum / 2.0);
    }
    return value;
}

}  // namespace soslift::pseudocal

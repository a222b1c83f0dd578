#pragma once

// Lifting a degree-2 solution to a feasible degree-4 pseudomoment matrix:
// factor the solution into unit rows, fill every entry from the closed-form
// symmetric-difference table, then mix with the identity.

#include <Eigen/Dense>
#include <atomic>
#include <cmath>

#include "soslift/common.hpp"
#include "soslift/families.hpp"
#include "soslift/moments.hpp"

namespace soslift::lift {

using moments::Degree2Solution;
using moments::Degree4MomentMatrix;
using moments::MomentIndexMap;
using moments::SubsetLE2;

/// Dense lifts hold the full (1+n+C(n,2))^2 matrix; above this the CLI and
/// reports fall back to singleton-block evaluation.
inline constexpr int kDenseLiftCeiling = 300;

// ---------------------------------------------------------------------------
// Cholesky rows
// ---------------------------------------------------------------------------

struct CholeskyRows {
    int n = 0;
    Eigen::MatrixXd rows;  // unit rows; X = rows * rows^T
    int rank = 0;
};

/// Symmetric eigendecomposition square root with eigenvalue clamping at zero
/// (rank-deficient inputs are legal); rows are normalized to exact unit norm.
inline CholeskyRows cholesky_rows(const Degree2Solution& sol, double tol_psd = moments::kTolPsd) {
    const int n = sol.n;
    if (sol.x.rows() != n || sol.x.cols() != n)
        throw MalformedInput("cholesky_rows: dimension mismatch");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sol.x);
    if (es.eigenvalues().minCoeff() < -tol_psd)
        throw InfeasibleInput("cholesky_rows: input is not PSD within tolerance");
    Eigen::VectorXd lam = es.eigenvalues().cwiseMax(0.0);
    int rank = 0;
    for (int i = 0; i < n; ++i)
        if (lam[i] > 1e-12) ++rank;
    CholeskyRows out;
    out.n = n;
    out.rank = rank;
    out.rows = es.eigenvectors() * lam.cwiseSqrt().asDiagonal();
    for (int i = 0; i < n; ++i) {
        const double nrm = out.rows.row(i).norm();
        if (nrm > 0) out.rows.row(i) /= nrm;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Solution parameters
// ---------------------------------------------------------------------------

enum class LiftMode { certified, tight };

inline const char* mode_name(LiftMode m) { return m == LiftMode::certified ? "certified" : "tight"; }

struct SolutionParams {
    double alpha_mag = 0;
    double alpha_row = 0;
    double alpha_spec = 0;
    double alpha = 0;  // assembled error bound (certified assembly in either mode)
    double eta = 0;
    LiftMode mode = LiftMode::certified;
    double lambda_min_m1 = std::numeric_limits<double>::quiet_NaN();
};

/// alpha_mag / alpha_row / alpha_spec of the degree-2 solution, with
/// value-sorted row accumulation so relabelings reproduce identical doubles.
inline void measure_alphas(const Eigen::MatrixXd& x, SolutionParams& p) {
    const int n = static_cast<int>(x.rows());
    double mag = 0, row2 = 0;
    std::vector<double> rowterms;
    for (int i = 0; i < n; ++i) {
        rowterms.clear();
        for (int j = 0; j < n; ++j) {
            if (j == i) continue;
            const double v = x(i, j);
            mag = std::max(mag, std::abs(v));
            rowterms.push_back(v * v);
        }
        row2 = std::max(row2, sorted_sum(rowterms));
    }
    p.alpha_mag = mag;
    p.alpha_row = std::sqrt(row2);
    p.alpha_spec = eigs::spectral_norm_sym(x);
}

inline double certified_alpha(const SolutionParams& p) {
    std::vector<double> parts;
    for (int k = 1; k <= 4; ++k)
        parts.push_back(glyph::factorization_norm_bound(k, p.alpha_mag, p.alpha_row, p.alpha_spec));
    return sorted_sum(parts);
}

// ---------------------------------------------------------------------------
// Closed-form entry table
// ---------------------------------------------------------------------------

/// Entry for a symmetric difference of size 2: c + (2/3) c^3.
inline double pair_entry(double c) {
    std::vector<double> terms{c, (2.0 / 3.0) * (c * c * c)};
    return sorted_sum(terms);
}

/// Frozen evaluator for the symmetric-difference-4 entry: the limit of a
/// four-row seed polynomial product as an explicit polynomial in the six
/// pairwise inner products, derived once from the family calculus and pinned
/// by regression tests against both oracles.
class QuadEntryTable {
  public:
    static const QuadEntryTable& instance() {
        static const QuadEntryTable t;
        return t;
    }

    int term_count() const { return static_cast<int>(coefs_.size()); }

    /// c ordered as (ab, ac, ad, bc, bd, cd) for sorted labels a<b<c<d.
    double eval(const double c[6]) const {
        double pows[6][4];
        for (int v = 0; v < 6; ++v) {
            pows[v][0] = 1.0;
            pows[v][1] = c[v];
            pows[v][2] = c[v] * c[v];
            pows[v][3] = pows[v][2] * c[v];
        }
        double vals[64];
        const int m = term_count();
        for (int t = 0; t < m; ++t) {
            // multiply factor powers in value order so relabelings that
            // permute the six inner products reproduce identical doubles
            double f[6];
            int nf = 0;
            for (int v = 0; v < 6; ++v)
                if (exps_[t][v] > 0) f[nf++] = pows[v][exps_[t][v]];
            for (int i = 1; i < nf; ++i) {
                const double key = f[i];
                int j = i - 1;
                while (j >= 0 && f[j] > key) {
                    f[j + 1] = f[j];
                    --j;
                }
                f[j + 1] = key;
            }
            double prod = 1.0;
            for (int i = 0; i < nf; ++i) prod *= f[i];
            vals[t] = coefs_[t] * prod;
        }
        // relabelings permute terms only within an orbit class, so sorting
        // each class block gives an invariant summation order
        double acc = 0;
        for (std::size_t cl = 0; cl + 1 < class_offsets_.size(); ++cl) {
            const int lo = class_offsets_[cl], hi = class_offsets_[cl + 1];
            for (int i = lo + 1; i < hi; ++i) {
                const double key = vals[i];
                int j = i - 1;
                while (j >= lo && vals[j] > key) {
                    vals[j + 1] = vals[j];
                    --j;
                }
                vals[j + 1] = key;
            }
            for (int i = lo; i < hi; ++i) acc += vals[i];
        }
        return acc;
    }

  private:
    QuadEntryTable() {
        const glyph::PatternPoly& p = glyph::quad_pattern();
        const int var_of[4][4] = {{-1, 0, 1, 2}, {0, -1, 3, 4}, {1, 3, -1, 5}, {2, 4, 5, -1}};
        // orbit class = (coefficient, sorted exponent profile); terms of a
        // class map to each other under relabelings
        struct Term {
            double coef;
            std::array<int, 6> exps;
            std::array<int, 6> profile;
        };
        std::vector<Term> terms;
        for (const auto& [mono, coef] : p) {
            Term t{};
            t.coef = coef.value();
            for (const auto& [pk, ex] : mono) {
                t.exps[var_of[pk.first][pk.second]] = ex;
                if (ex > 3) throw std::logic_error("quad table: unexpected exponent");
            }
            t.profile = t.exps;
            std::sort(t.profile.begin(), t.profile.end());
            terms.push_back(t);
        }
        if (terms.size() > 64) throw std::logic_error("quad table: too many terms");
        std::stable_sort(terms.begin(), terms.end(), [](const Term& a, const Term& b) {
            if (a.coef != b.coef) return a.coef < b.coef;
            return a.profile < b.profile;
        });
        class_offsets_.push_back(0);
        for (std::size_t t = 0; t < terms.size(); ++t) {
            coefs_.push_back(terms[t].coef);
            exps_.push_back(terms[t].exps);
            if (t + 1 == terms.size() || terms[t + 1].coef != terms[t].coef ||
                terms[t + 1].profile != terms[t].profile)
                class_offsets_.push_back(static_cast<int>(t + 1));
        }
    }

    std::vector<double> coefs_;
    std::vector<std::array<int, 6>> exps_;
    std::vector<int> class_offsets_;
};

/// Closed-form entry for one symmetric-difference pattern.  `gram` supplies
/// the needed inner products of the Cholesky rows; the pattern is the sorted
/// symmetric difference.
inline double entry_value(const std::array<int, 4>& pattern, int pattern_size,
                          const Eigen::MatrixXd& gram) {
    switch (pattern_size) {
        case 0:
            return 1.0;
        case 1:
        case 3:
            return 0.0;
        case 2:
            return pair_entry(gram(pattern[0], pattern[1]));
        case 4: {
            const int a = pattern[0], b = pattern[1], c = pattern[2], d = pattern[3];
            const double cc[6] = {gram(a, b), gram(a, c), gram(a, d),
                                  gram(b, c), gram(b, d), gram(c, d)};
            return QuadEntryTable::instance().eval(cc);
        }
        default:
            throw MalformedInput("entry_value: pattern size must be <= 4");
    }
}

// ---------------------------------------------------------------------------
// The lift
// ---------------------------------------------------------------------------

/// Raw degree-4 moment table (eta = 0).  Entries depend only on the symmetric
/// difference: every pattern value is computed once and written to all its
/// positions, so the symmetry constraints hold bit-for-bit.
inline Degree4MomentMatrix lift_m1(const Degree2Solution& sol, int dense_ceiling = kDenseLiftCeiling) {
    const int n = sol.n;
    if (n > dense_ceiling)
        throw CeilingExceeded("lift_m1: n exceeds the dense lift ceiling (" +
                              std::to_string(dense_ceiling) + ")");
    // feasibility gate; the entry table itself is evaluated on X directly,
    // since the closed forms are polynomials in the row inner products and
    // those equal the entries of X
    cholesky_rows(sol);
    const Eigen::MatrixXd& gram = sol.x;
    const MomentIndexMap map(n);
    const std::int64_t dim = map.size();

    Degree4MomentMatrix m;
    m.n = n;
    m.eta = 0.0;
    m.entries = Eigen::MatrixXd::Zero(dim, dim);
    for (std::int64_t i = 0; i < dim; ++i) m.entries(i, i) = 1.0;

    // size-2 patterns: positions ({a},{b}), (empty,{a,b}), ({x,a},{x,b})
    for (int a = 0; a < n; ++a) {
        for (int b = a + 1; b < n; ++b) {
            const double v = pair_entry(gram(a, b));
            const std::int64_t ia = 1 + a, ib = 1 + b;
            m.entries(ia, ib) = m.entries(ib, ia) = v;
            const std::int64_t iab = map.index_of(SubsetLE2::pair(a, b));
            m.entries(0, iab) = m.entries(iab, 0) = v;
            for (int x = 0; x < n; ++x) {
                if (x == a || x == b) continue;
                const std::int64_t ixa = map.index_of(SubsetLE2::pair(x, a));
                const std::int64_t ixb = map.index_of(SubsetLE2::pair(x, b));
                m.entries(ixa, ixb) = m.entries(ixb, ixa) = v;
            }
        }
    }

    // size-4 patterns: one value per sorted quad, three pair/pair splits
    const QuadEntryTable& quad = QuadEntryTable::instance();
    const std::int64_t npairs = map.pair_count();
    std::atomic<std::int64_t> cursor{0};
    auto worker = [&] {
        for (;;) {
            const std::int64_t p0 = cursor.fetch_add(16);
            if (p0 >= npairs) return;
            const std::int64_t p1 = std::min(npairs, p0 + 16);
            for (std::int64_t p = p0; p < p1; ++p) {
                const SubsetLE2 ab = map.subset_of(1 + n + p);
                const int a = ab.a, b = ab.b;
                for (int c = b + 1; c < n; ++c) {
                    for (int d = c + 1; d < n; ++d) {
                        const double cc[6] = {gram(a, b), gram(a, c), gram(a, d),
                                              gram(b, c), gram(b, d), gram(c, d)};
                        const double v = quad.eval(cc);
                        const std::int64_t i1 = map.index_of(SubsetLE2::pair(a, b));
                        const std::int64_t j1 = map.index_of(SubsetLE2::pair(c, d));
                        const std::int64_t i2 = map.index_of(SubsetLE2::pair(a, c));
                        const std::int64_t j2 = map.index_of(SubsetLE2::pair(b, d));
                        const std::int64_t i3 = map.index_of(SubsetLE2::pair(a, d));
                        const std::int64_t j3 = map.index_of(SubsetLE2::pair(b, c));
                        m.entries(i1, j1) = m.entries(j1, i1) = v;
                        m.entries(i2, j2) = m.entries(j2, i2) = v;
                        m.entries(i3, j3) = m.entries(j3, i3) = v;
                    }
                }
            }
        }
    };
    {
        const int nthreads = std::max(1u, std::thread::hardware_concurrency());
        std::vector<std::thread> pool;
        for (int t = 1; t < nthreads; ++t) pool.emplace_back(worker);
        worker();
        for (auto& th : pool) th.join();
    }
    return m;
}

/// Certified-mode parameters (no degree-4 matrix needed).
inline SolutionParams solution_params_certified(const Degree2Solution& sol) {
    SolutionParams p;
    p.mode = LiftMode::certified;
    measure_alphas(sol.x, p);
    p.alpha = certified_alpha(p);
    p.eta = p.alpha / (1.0 + p.alpha);
    return p;
}

/// Parameters for either mode.  Tight mode measures lambda_min of the raw
/// table, which requires the dense lift.
inline SolutionParams solution_params(const Degree2Solution& sol, LiftMode mode,
                                      int dense_ceiling = kDenseLiftCeiling) {
    SolutionParams p = solution_params_certified(sol);
    if (mode == LiftMode::tight) {
        const Degree4MomentMatrix m1 = lift_m1(sol, dense_ceiling);
        p.mode = LiftMode::tight;
        p.lambda_min_m1 = eigs::lambda_min(m1.entries);
        const double s = std::max(0.0, -p.lambda_min_m1);
        p.eta = s > 0 ? s / (1.0 + s) + 1e-9 : 0.0;
    }
    return p;
}

/// Mix a raw table with the identity in place: entries scale by (1-eta),
/// the diagonal stays exactly 1.
inline void mix_with_identity(Degree4MomentMatrix& m, double eta) {
    const std::int64_t dim = m.entries.rows();
    const double scale = 1.0 - eta;
    parallel_for(0, dim, [&](std::int64_t j) {
        double* col = m.entries.col(j).data();
        for (std::int64_t i = 0; i < dim; ++i) col[i] = i == j ? 1.0 : scale * col[i];
    });
    m.eta = eta;
}

/// Full lift: raw table, mode-dependent mixing weight, identity mixing.
inline std::pair<Degree4MomentMatrix, SolutionParams> lift(const Degree2Solution& sol,
                                                           LiftMode mode,
                                                           int dense_ceiling = kDenseLiftCeiling) {
    SolutionParams p = solution_params_certified(sol);
    Degree4MomentMatrix m = lift_m1(sol, dense_ceiling);
    if (mode == LiftMode::tight) {
        p.mode = LiftMode::tight;
        p.lambda_min_m1 = eigs::lambda_min(m.entries);
        const double s = std::max(0.0, -p.lambda_min_m1);
        p.eta = s > 0 ? s / (1.0 + s) + 1e-9 : 0.0;
    }
    mix_with_identity(m, p.eta);
    return {std::move(m), p};
}

// ---------------------------------------------------------------------------
// Objective values and the lifting bound
// ---------------------------------------------------------------------------

/// <A, lifted singleton block> computed straight from the degree-2 solution:
/// trace(A) plus (1-eta) * sum of A[i,j] (X[i,j] + (2/3) X[i,j]^3) off the
/// diagonal.  O(n^2); valid for any n.
inline double lifted_objective_deg4(const Eigen::MatrixXd& a, const Degree2Solution& sol,
                                    const SolutionParams& p) {
    if (a.rows() != sol.n || a.cols() != sol.n)
        throw MalformedInput("lifted_objective_deg4: dimension mismatch");
    double off = 0;
    for (int i = 0; i < sol.n; ++i)
        for (int j = 0; j < sol.n; ++j) {
            if (i == j) continue;
            off += a(i, j) * pair_entry(sol.x(i, j));
        }
    return a.trace() + (1.0 - p.eta) * off;
}

/// Objective lower bound carried by the lift:
///   (1/(1+alpha)) <A,X> - (alpha/(1+alpha)) (sqrt(n) ||A||_F - tr A).
inline double objective_lower_bound(const Eigen::MatrixXd& a, const Degree2Solution& sol,
                                    const SolutionParams& p) {
    if (a.rows() != sol.n || a.cols() != sol.n)
        throw MalformedInput("objective_lower_bound: dimension mismatch");
    const double alpha = p.alpha;
    const double obj2 = (a.array() * sol.x.array()).sum();
    return obj2 / (1.0 + alpha) -
           alpha / (1.0 + alpha) * (std::sqrt(static_cast<double>(sol.n)) * a.norm() - a.trace());
}

/// Verification-mode variant: additionally asserts the realized degree-4
/// objective dominates the bound within 1e-6 relative.
inline double objective_lower_bound_verified(const Eigen::MatrixXd& a, const Degree2Solution& sol,
                                             const SolutionParams& p) {
    const double bound = objective_lower_bound(a, sol, p);
    const double realized = lifted_objective_deg4(a, sol, p);
    if (realized < bound - 1e-6 * (1.0 + std::abs(bound)))
        throw std::runtime_error("objective_lower_bound_verified: realized objective below bound");
    return bound;
}

}  // namespace soslift::lift

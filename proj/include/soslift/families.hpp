#pragma once

// Symbolic monomial families and their expectations over z ~ {+-1}^kappa.
//
// A family is a set of indexing slots attached to row labels, summed over
// injective cluster-ordered assignments into [kappa].  Products of seed
// polynomials and their low-degree truncations expand into finitely many
// families; the kappa -> infinity expectation of any product reduces to a
// polynomial in pairwise row inner products, enumerated here exactly with
// rational coefficients.
//
// Two independent oracles live side by side:
//   * limit_*     — the pairing-enumeration limit calculus,
//   * finite_*    — exact enumeration over all z in {+-1}^kappa.

#include <Eigen/Dense>
#include <bit>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <unordered_map>
#include <vector>

#include "soslift/common.hpp"

namespace soslift::glyph {

// ---------------------------------------------------------------------------
// Family algebra
// ---------------------------------------------------------------------------

/// Cluster of z-carrying slots: `size` slots, all with a single edge to `label`,
/// assigned strictly increasing indices.
struct ZCluster {
    int label;
    int size;
};

/// Cluster of even slots: `mult` slots each carrying edges to labels {a,b}
/// (no z left after multilinear reduction), assigned strictly increasing
/// indices.  Contributes <M_a,M_b>^mult / mult! in the limit.
struct EvenCluster {
    int a;
    int b;
    int mult;
};

struct MonomialFamily {
    Rational coef;
    std::vector<ZCluster> z;
    std::vector<EvenCluster> evens;

    int z_slot_count() const {
        int s = 0;
        for (const auto& c : z) s += c.size;
        return s;
    }
};

/// One polynomial factor = sum of families (e.g. a seed polynomial is
/// linear-family + cubic-family).
using FactorSum = std::vector<MonomialFamily>;

/// Seed polynomial q_i = sum_j M[i,j] z_j - 2 sum_{j1<j2<j3} prod M[i,j.] z_{j.}.
inline FactorSum seed_factor(int label) {
    return {
        MonomialFamily{Rational(1), {{label, 1}}, {}},
        MonomialFamily{Rational(-2), {{label, 3}}, {}},
    };
}

/// Truncation q_i^{<=1}: just the linear family.
inline FactorSum truncated_singleton_factor(int label) {
    return {MonomialFamily{Rational(1), {{label, 1}}, {}}};
}

/// Truncation (q_i q_j)^{<=2}: the six collision-pattern families with
/// coefficients (1, 1, -2, -2, 4, 4).
inline FactorSum truncated_pair_factor(int i, int j) {
    return {
        // lin*lin, full collision: constant <M_i,M_j>
        MonomialFamily{Rational(1), {}, {{i, j, 1}}},
        // lin*lin, no collision: z_u z_v
        MonomialFamily{Rational(1), {{i, 1}, {j, 1}}, {}},
        // cub_i*lin_j, one collision: two free i slots + one (i,j) even slot
        MonomialFamily{Rational(-2), {{i, 2}}, {{i, j, 1}}},
        // cub_j*lin_i, one collision
        MonomialFamily{Rational(-2), {{j, 2}}, {{i, j, 1}}},
        // cub_i*cub_j, two collisions: free i, free j, two (i,j) even slots
        MonomialFamily{Rational(4), {{i, 1}, {j, 1}}, {{i, j, 2}}},
        // cub_i*cub_j, three collisions: constant <M_i,M_j>^3/3!
        MonomialFamily{Rational(4), {}, {{i, j, 3}}},
    };
}

/// Truncated polynomial of a subset: the single linear family for |S| = 1,
/// the six collision-pattern families for |S| = 2.
inline FactorSum truncated_polynomial_families(const std::vector<int>& s) {
    if (s.size() == 1) return truncated_singleton_factor(s[0]);
    if (s.size() == 2) return truncated_pair_factor(s[0], s[1]);
    throw MalformedInput("truncated_polynomial_families: |S| must be 1 or 2");
}

// ---------------------------------------------------------------------------
// Pattern polynomials: polynomials in pairwise inner products c_{ab} over a
// small abstract label set, with exact rational coefficients.
// ---------------------------------------------------------------------------

using PairKey = std::pair<int, int>;  // (a,b) with a <= b
using Monomial = std::map<PairKey, int>;
using PatternPoly = std::map<Monomial, Rational>;

inline PairKey make_pair_key(int a, int b) { return a <= b ? PairKey{a, b} : PairKey{b, a}; }

inline void poly_add(PatternPoly& dst, const Monomial& m, const Rational& c) {
    auto it = dst.find(m);
    if (it == dst.end()) {
        if (!c.is_zero()) dst.emplace(m, c);
        return;
    }
    it->second += c;
    if (it->second.is_zero()) dst.erase(it);
}

inline PatternPoly poly_sub(const PatternPoly& a, const PatternPoly& b) {
    PatternPoly out = a;
    for (const auto& [m, c] : b) poly_add(out, m, Rational(0) - c);
    return out;
}

namespace detail {

struct LiveCluster {
    int family;
    int label;
    int remaining;
};

// Distribute the remaining edges of cluster `c` over eligible partner
// clusters, then recurse.  Each cluster-level multigraph is produced exactly
// once; a bundle of m parallel edges between clusters with labels (x,y)
// contributes c_{xy}^m / m!.
inline void enumerate_pairings(std::vector<LiveCluster>& cl, std::size_t first, Rational coef,
                               Monomial& mono, PatternPoly& out) {
    while (first < cl.size() && cl[first].remaining == 0) ++first;
    if (first == cl.size()) {
        poly_add(out, mono, coef);
        return;
    }
    // partners strictly after `first` from a different family
    std::vector<std::size_t> partners;
    for (std::size_t j = first + 1; j < cl.size(); ++j)
        if (cl[j].remaining > 0 && cl[j].family != cl[first].family) partners.push_back(j);

    const int need = cl[first].remaining;

    // compositions of `need` over partners with per-partner caps
    std::vector<int> take(partners.size(), 0);
    std::function<void(std::size_t, int, Rational)> rec = [&](std::size_t pi, int left,
                                                              Rational c) {
        if (pi == partners.size()) {
            if (left != 0) return;
            cl[first].remaining = 0;
            for (std::size_t t = 0; t < partners.size(); ++t) {
                if (take[t] == 0) continue;
                cl[partners[t]].remaining -= take[t];
                mono[make_pair_key(cl[first].label, cl[partners[t]].label)] += take[t];
            }
            enumerate_pairings(cl, first + 1, c, mono, out);
            cl[first].remaining = need;
            for (std::size_t t = 0; t < partners.size(); ++t) {
                if (take[t] == 0) continue;
                cl[partners[t]].remaining += take[t];
                auto key = make_pair_key(cl[first].label, cl[partners[t]].label);
                auto it = mono.find(key);
                it->second -= take[t];
                if (it->second == 0) mono.erase(it);
            }
            return;
        }
        const int cap = std::min(left, cl[partners[pi]].remaining);
        for (int m = 0; m <= cap; ++m) {
            take[pi] = m;
            rec(pi + 1, left - m, m == 0 ? c : c * rational_factorial_inv(m));
        }
        take[pi] = 0;
    };
    rec(0, need, coef);
}

}  // namespace detail

/// Limit expectation of a product of one family per factor, as a pattern
/// polynomial.  Families of the same factor never share indices, so all
/// pairings cross factors; middle classes of degree >= 4 vanish in the limit.
inline void accumulate_family_product(const std::vector<const MonomialFamily*>& fams,
                                      PatternPoly& out) {
    Rational coef(1);
    Monomial mono;
    int zslots = 0;
    for (std::size_t f = 0; f < fams.size(); ++f) {
        coef *= fams[f]->coef;
        zslots += fams[f]->z_slot_count();
        for (const auto& e : fams[f]->evens) {
            coef *= rational_factorial_inv(e.mult);
            mono[make_pair_key(e.a, e.b)] += e.mult;
        }
    }
    if (zslots % 2 != 0) return;  // odd z-degree: expectation is 0
    std::vector<detail::LiveCluster> cl;
    for (std::size_t f = 0; f < fams.size(); ++f)
        for (const auto& zc : fams[f]->z)
            cl.push_back({static_cast<int>(f), zc.label, zc.size});
    detail::enumerate_pairings(cl, 0, coef, mono, out);
}

/// Limit expectation of a product of factor sums (cartesian expansion).
inline PatternPoly limit_poly(const std::vector<FactorSum>& factors) {
    PatternPoly out;
    std::vector<const MonomialFamily*> pick(factors.size(), nullptr);
    std::function<void(std::size_t)> rec = [&](std::size_t f) {
        if (f == factors.size()) {
            accumulate_family_product(pick, out);
            return;
        }
        for (const auto& fam : factors[f]) {
            pick[f] = &fam;
            rec(f + 1);
        }
    };
    rec(0);
    return out;
}

// ---------------------------------------------------------------------------
// Compiled evaluator.  Terms are evaluated with value-sorted products and a
// value-sorted final sum, so a global relabeling of rows permutes the term
// values without changing the accumulated double.
// ---------------------------------------------------------------------------

class CompiledPattern {
  public:
    CompiledPattern() = default;

    explicit CompiledPattern(const PatternPoly& poly) {
        std::map<PairKey, int> var_of;
        for (const auto& [mono, coef] : poly) {
            Term t;
            t.coef = coef.value();
            for (const auto& [pk, e] : mono) {
                auto it = var_of.find(pk);
                if (it == var_of.end()) {
                    it = var_of.emplace(pk, static_cast<int>(vars_.size())).first;
                    vars_.push_back(pk);
                }
                t.pows.emplace_back(it->second, e);
            }
            terms_.push_back(std::move(t));
        }
    }

    const std::vector<PairKey>& vars() const { return vars_; }
    std::size_t term_count() const { return terms_.size(); }

    /// gram(a,b) must return <M_a, M_b> for abstract labels a,b.
    template <typename Gram>
    double eval(Gram&& gram) const {
        std::vector<double> vals(vars_.size());
        for (std::size_t v = 0; v < vars_.size(); ++v) vals[v] = gram(vars_[v].first, vars_[v].second);
        std::vector<double> terms;
        terms.reserve(terms_.size());
        std::vector<double> factors;
        for (const auto& t : terms_) {
            factors.clear();
            for (const auto& [v, e] : t.pows) factors.push_back(ipow(vals[v], e));
            terms.push_back(t.coef * sorted_product(factors));
        }
        return sorted_sum(terms);
    }

    static double ipow(double x, int e) {
        double r = 1.0;
        for (int i = 0; i < e; ++i) r *= x;
        return r;
    }

  private:
    struct Term {
        double coef;
        std::vector<std::pair<int, int>> pows;  // (var, exponent)
    };
    std::vector<PairKey> vars_;
    std::vector<Term> terms_;
};

// ---------------------------------------------------------------------------
// Cached canonical patterns
// ---------------------------------------------------------------------------

/// E[q_a q_b] on abstract labels (0,1).
inline const PatternPoly& pair_pattern() {
    static const PatternPoly p = limit_poly({seed_factor(0), seed_factor(1)});
    return p;
}

/// E[q_a q_b q_c q_d] on abstract labels (0,1,2,3).
inline const PatternPoly& quad_pattern() {
    static const PatternPoly p =
        limit_poly({seed_factor(0), seed_factor(1), seed_factor(2), seed_factor(3)});
    return p;
}

/// E[p_{01} p_{01}] (diagonal of the truncated Gram on pair sets).
inline const PatternPoly& trunc_eq_pattern() {
    static const PatternPoly p =
        limit_poly({truncated_pair_factor(0, 1), truncated_pair_factor(0, 1)});
    return p;
}

/// E[p_{01} p_{12}] (pair sets sharing label 1).
inline const PatternPoly& trunc_share_pattern() {
    static const PatternPoly p =
        limit_poly({truncated_pair_factor(0, 1), truncated_pair_factor(1, 2)});
    return p;
}

/// E[p_{01} p_{23}] (disjoint pair sets).
inline const PatternPoly& trunc_disjoint_pattern() {
    static const PatternPoly p =
        limit_poly({truncated_pair_factor(0, 1), truncated_pair_factor(2, 3)});
    return p;
}

/// E[p_{01}] alone (rows/columns indexed by the empty set).
inline const PatternPoly& trunc_pair_alone_pattern() {
    static const PatternPoly p = limit_poly({truncated_pair_factor(0, 1)});
    return p;
}

// ---------------------------------------------------------------------------
// Error-component patterns and factorized spectral-norm certificates.
//
// Each error component is a pattern polynomial; each monomial is bounded by
// routing the index pattern from row set to column set through growth/shrink
// (alpha_row), swap (alpha_spec) and residue (alpha_mag) factors, consuming
// one inner-product factor per step.  Unit-diagonal factors contribute 1.
// ---------------------------------------------------------------------------

/// Drop c(a,a) factors (rows are unit vectors, so these evaluate to 1).
inline PatternPoly substitute_unit_diagonal(const PatternPoly& p) {
    PatternPoly out;
    for (const auto& [m, c] : p) {
        Monomial reduced;
        for (const auto& [pk, e] : m)
            if (pk.first != pk.second) reduced[pk] = e;
        poly_add(out, reduced, c);
    }
    return out;
}

/// Difference M1 - M2 on singleton index pairs ({0},{1}).
inline const PatternPoly& error2_pattern() {
    static const PatternPoly p = substitute_unit_diagonal(poly_sub(
        pair_pattern(), limit_poly({truncated_singleton_factor(0), truncated_singleton_factor(1)})));
    return p;
}

/// Difference on pair sets sharing one label: ({0,1},{1,2}); M1 entry is the
/// pair formula at c(0,2).
inline const PatternPoly& error3_pattern() {
    static const PatternPoly p = [] {
        PatternPoly m1;
        for (const auto& [m, c] : pair_pattern()) {
            Monomial shifted;
            for (const auto& [pk, e] : m) shifted[make_pair_key(pk.first == 1 ? 2 : pk.first,
                                                                pk.second == 1 ? 2 : pk.second)] = e;
            poly_add(m1, shifted, c);
        }
        return substitute_unit_diagonal(poly_sub(m1, trunc_share_pattern()));
    }();
    return p;
}

/// Difference on disjoint pair sets: ({0,1},{2,3}).
inline const PatternPoly& error4_pattern() {
    static const PatternPoly p =
        substitute_unit_diagonal(poly_sub(quad_pattern(), trunc_disjoint_pattern()));
    return p;
}

/// Diagonal error on pair sets: 1 - E[p_{01}^2] as a polynomial in c(0,1).
inline const PatternPoly& error1_pattern() {
    static const PatternPoly p = [] {
        PatternPoly one;
        poly_add(one, Monomial{}, Rational(1));
        return substitute_unit_diagonal(poly_sub(one, trunc_eq_pattern()));
    }();
    return p;
}

struct BoundTerm {
    double coef;  // |coefficient|, including any K-conjugation factor
    int t_row;
    int t_mag;
    int t_spec;
};

namespace detail {

struct RouteCost {
    int t_row = -1, t_mag = 0, t_spec = 0;
    bool valid() const { return t_row >= 0; }
    // prefer growth/shrink factorizations, then fewer swaps
    bool better_than(const RouteCost& o) const {
        if (!o.valid()) return true;
        if (t_row != o.t_row) return t_row > o.t_row;
        return t_spec < o.t_spec;
    }
    RouteCost plus(int r, int m, int s) const { return {t_row + r, t_mag + m, t_spec + s}; }
};

struct Router {
    std::vector<PairKey> pairs;  // distinct pairs of the monomial, fixed order
    std::vector<int> goal;       // column label set, sorted
    std::unordered_map<std::uint64_t, RouteCost> memo;

    static std::uint64_t set_bits(const std::vector<int>& s) {
        std::uint64_t b = 0;
        for (int x : s) b |= 1ULL << x;
        return b;
    }

    std::uint64_t key(const std::vector<int>& set, const std::vector<int>& exps) const {
        std::uint64_t k = set_bits(set);
        for (std::size_t i = 0; i < exps.size(); ++i) k |= std::uint64_t(exps[i]) << (8 + 4 * i);
        return k;
    }

    RouteCost best(const std::vector<int>& set, std::vector<int>& exps) {
        bool done = true;
        for (int e : exps)
            if (e > 0) { done = false; break; }
        if (done) {
            if (set == goal) return {0, 0, 0};
            return {};
        }
        const std::uint64_t k = key(set, exps);
        if (auto it = memo.find(k); it != memo.end()) return it->second;
        RouteCost bst;
        auto consider = [&](const RouteCost& sub, int r, int m, int s) {
            if (!sub.valid()) return;
            const RouteCost cand = sub.plus(r, m, s);
            if (cand.better_than(bst)) bst = cand;
        };
        auto in_set = [&](int x) { return std::find(set.begin(), set.end(), x) != set.end(); };
        for (std::size_t pi = 0; pi < pairs.size(); ++pi) {
            if (exps[pi] == 0) continue;
            const int a = pairs[pi].first, b = pairs[pi].second;
            const bool ia = in_set(a), ib = in_set(b);
            --exps[pi];
            if (ia && ib) {
                consider(best(set, exps), 0, 1, 0);  // residue
                if (set.size() >= 2) {
                    for (int drop : {a, b}) {  // shrink
                        std::vector<int> ns;
                        for (int x : set)
                            if (x != drop) ns.push_back(x);
                        consider(best(ns, exps), 1, 0, 0);
                    }
                }
            } else if (ia != ib) {
                const int inside = ia ? a : b;
                const int outside = ia ? b : a;
                if (set.size() < 3) {  // growth
                    std::vector<int> ns = set;
                    ns.insert(std::lower_bound(ns.begin(), ns.end(), outside), outside);
                    consider(best(ns, exps), 1, 0, 0);
                }
                {  // swap
                    std::vector<int> ns;
                    for (int x : set)
                        if (x != inside) ns.push_back(x);
                    ns.insert(std::lower_bound(ns.begin(), ns.end(), outside), outside);
                    consider(best(ns, exps), 0, 0, 1);
                }
            }
            ++exps[pi];
        }
        memo.emplace(k, bst);
        return bst;
    }
};

inline std::vector<BoundTerm> routed_bound_terms(const PatternPoly& poly, std::vector<int> rowset,
                                                 std::vector<int> colset, double conj_factor) {
    std::vector<BoundTerm> out;
    std::sort(rowset.begin(), rowset.end());
    std::sort(colset.begin(), colset.end());
    for (const auto& [mono, coef] : poly) {
        Router router;
        router.goal = colset;
        std::vector<int> exps;
        for (const auto& [pk, e] : mono) {
            router.pairs.push_back(pk);
            exps.push_back(e);
        }
        const RouteCost best = router.best(rowset, exps);
        if (!best.valid())
            throw std::logic_error("routed_bound_terms: monomial admits no factorization route");
        out.push_back({std::abs(coef.value()) * conj_factor, best.t_row, best.t_mag, best.t_spec});
    }
    return out;
}

}  // namespace detail

/// Assembled bound terms for error component k in {1,2,3,4}.
inline const std::vector<BoundTerm>& component_bound_terms(int component) {
    static const std::vector<BoundTerm> b1 = [] {
        std::vector<BoundTerm> out;
        for (const auto& [mono, coef] : error1_pattern()) {
            int deg = 0;
            for (const auto& [pk, e] : mono) deg += e;
            out.push_back({std::abs(coef.value()), 0, deg, 0});
        }
        return out;
    }();
    static const std::vector<BoundTerm> b2 =
        detail::routed_bound_terms(error2_pattern(), {0}, {1}, 1.0);
    static const std::vector<BoundTerm> b3 =
        detail::routed_bound_terms(error3_pattern(), {0, 1}, {1, 2}, 2.0);
    static const std::vector<BoundTerm> b4 =
        detail::routed_bound_terms(error4_pattern(), {0, 1}, {2, 3}, 2.0);
    switch (component) {
        case 1: return b1;
        case 2: return b2;
        case 3: return b3;
        case 4: return b4;
        default: throw MalformedInput("component_bound_terms: component must be 1..4");
    }
}

/// Explicit constant-carrying spectral norm bound on error component k.
inline double factorization_norm_bound(int component, double alpha_mag, double alpha_row,
                                       double alpha_spec) {
    std::vector<double> terms;
    for (const auto& t : component_bound_terms(component))
        terms.push_back(t.coef * CompiledPattern::ipow(alpha_row, t.t_row) *
                        CompiledPattern::ipow(alpha_mag, t.t_mag) *
                        CompiledPattern::ipow(alpha_spec, t.t_spec));
    return sorted_sum(terms);
}

// ---------------------------------------------------------------------------
// Numeric limit oracle on concrete rows
// ---------------------------------------------------------------------------

/// Limit of E[q_S] for a multiset S of row labels, evaluated on the Gram
/// matrix of unit rows.  Independent oracle for the lift's entry table.
inline double limit_expectation(const Eigen::MatrixXd& gram, const std::vector<int>& s) {
    std::vector<FactorSum> factors;
    factors.reserve(s.size());
    for (int lbl : s) factors.push_back(seed_factor(lbl));
    const PatternPoly poly = limit_poly(factors);
    CompiledPattern cp(poly);
    return cp.eval([&](int a, int b) { return gram(a, b); });
}

// ---------------------------------------------------------------------------
// Finite-kappa exact oracle
// ---------------------------------------------------------------------------

inline bool is_power_of_two(int k) { return k > 0 && (k & (k - 1)) == 0; }

/// n x kappa matrix with exactly orthonormal rows: Sylvester Hadamard rows
/// (scaled by 1/sqrt(kappa)) when kappa is a power of two, DCT-II rows
/// otherwise.  Either way row inner products of rows * basis are preserved.
inline Eigen::MatrixXd orthonormal_row_basis(int n, int kappa) {
    if (kappa < n) throw MalformedInput("orthonormal_row_basis: kappa < n");
    Eigen::MatrixXd b(n, kappa);
    if (is_power_of_two(kappa)) {
        const double s = 1.0 / std::sqrt(static_cast<double>(kappa));
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < kappa; ++j)
                b(i, j) = (std::popcount(static_cast<unsigned>(i & j)) & 1) ? -s : s;
    } else {
        const double pi = 3.14159265358979323846;
        for (int i = 0; i < n; ++i) {
            const double norm = i == 0 ? std::sqrt(1.0 / kappa) : std::sqrt(2.0 / kappa);
            for (int j = 0; j < kappa; ++j)
                b(i, j) = norm * std::cos(pi * i * (2 * j + 1) / (2.0 * kappa));
        }
    }
    return b;
}

/// rows: n x r with r <= kappa; returns rows extended to length kappa with
/// pairwise inner products preserved exactly.
inline Eigen::MatrixXd extend_rows(const Eigen::MatrixXd& rows, int kappa) {
    return rows * orthonormal_row_basis(static_cast<int>(rows.cols()), kappa);
}

/// Cosine-basis extension for every kappa.  Convergence studies use one basis
/// family across the whole grid so the error constant does not jump between
/// power-of-two and other kappa values.
inline Eigen::MatrixXd extend_rows_uniform(const Eigen::MatrixXd& rows, int kappa) {
    const int n = static_cast<int>(rows.cols());
    if (kappa < n) throw MalformedInput("extend_rows_uniform: kappa < n");
    Eigen::MatrixXd b(n, kappa);
    const double pi = 3.14159265358979323846;
    for (int i = 0; i < n; ++i) {
        const double norm = i == 0 ? std::sqrt(1.0 / kappa) : std::sqrt(2.0 / kappa);
        for (int j = 0; j < kappa; ++j)
            b(i, j) = norm * std::cos(pi * i * (2 * j + 1) / (2.0 * kappa));
    }
    return rows * b;
}

/// q_{i,kappa}(z) for one row: linear part minus twice the elementary
/// symmetric cubic of (row_j z_j), via power sums in O(kappa).
inline double seed_polynomial_eval(const Eigen::VectorXd& row, const Eigen::VectorXd& z) {
    if (row.size() != z.size()) throw MalformedInput("seed_polynomial_eval: length mismatch");
    double p1 = 0, p2 = 0, p3 = 0;
    for (Eigen::Index j = 0; j < row.size(); ++j) {
        const double w = row[j] * z[j];
        p1 += w;
        p2 += w * w;
        p3 += w * w * w;
    }
    const double e3 = (p1 * p1 * p1 - 3.0 * p1 * p2 + 2.0 * p3) / 6.0;
    return p1 - 2.0 * e3;
}

inline constexpr int kKappaMax = 20;

/// Exact E_{z ~ {+-1}^kappa}[q_S(z)] by Gray-code enumeration of all 2^kappa
/// sign vectors.  `mk` holds the kappa-extended rows; S is a label multiset.
inline double finite_kappa_expectation(const Eigen::MatrixXd& mk, const std::vector<int>& s,
                                       int kappa) {
    if (kappa > kKappaMax) throw CeilingExceeded("finite_kappa_expectation: kappa > kappa_max");
    if (kappa != mk.cols()) throw MalformedInput("finite_kappa_expectation: row length != kappa");
    const std::size_t m = s.size();
    std::vector<double> p1(m), p3(m), p2(m);
    std::vector<int> sign(kappa, 1);
    auto refresh = [&] {
        for (std::size_t t = 0; t < m; ++t) {
            double a = 0, c = 0;
            for (int j = 0; j < kappa; ++j) {
                const double w = mk(s[t], j) * sign[j];
                a += w;
                c += w * w * w;
            }
            p1[t] = a;
            p3[t] = c;
        }
    };
    for (std::size_t t = 0; t < m; ++t) {
        double b = 0;
        for (int j = 0; j < kappa; ++j) b += mk(s[t], j) * mk(s[t], j);
        p2[t] = b;
    }
    refresh();
    KahanSum acc;
    const std::uint64_t total = 1ULL << kappa;
    for (std::uint64_t step = 0;; ++step) {
        double prod = 1.0;
        for (std::size_t t = 0; t < m; ++t) {
            const double e3 = (p1[t] * p1[t] * p1[t] - 3.0 * p1[t] * p2[t] + 2.0 * p3[t]) / 6.0;
            prod *= p1[t] - 2.0 * e3;
        }
        acc.add(prod);
        if (step + 1 == total) break;
        if ((step + 1) % 4096 == 0) {
            // periodic re-sync against incremental drift
            const int j = std::countr_zero(step + 1);
            sign[j] = -sign[j];
            refresh();
            continue;
        }
        const int j = std::countr_zero(step + 1);
        sign[j] = -sign[j];
        for (std::size_t t = 0; t < m; ++t) {
            const double v = mk(s[t], j);
            const double d = 2.0 * sign[j] * v;
            p1[t] += d;
            p3[t] += d * v * v;
        }
    }
    return acc.sum / static_cast<double>(total);
}

/// Fourier coefficients \hat{q_S}(U) for all |U| <= 2 at finite kappa,
/// indexed as: 0 -> empty, 1..kappa -> {u}, then pairs (u<v) in lex order.
/// E[p_S p_T] then equals sum over U of \hat{q_S}(U) \hat{q_T}(U) restricted
/// to |U| <= min(|S|,2), |U| <= min(|T|,2).
inline std::vector<double> finite_kappa_fourier_le2(const Eigen::MatrixXd& mk,
                                                    const std::vector<int>& s, int kappa) {
    if (kappa > 16) throw CeilingExceeded("finite_kappa_fourier_le2: kappa > 16");
    const std::size_t ncoef = 1 + kappa + static_cast<std::size_t>(kappa) * (kappa - 1) / 2;
    std::vector<KahanSum> acc(ncoef);
    std::vector<int> sign(kappa, 1);
    const std::uint64_t total = 1ULL << kappa;
    Eigen::VectorXd z(kappa);
    for (std::uint64_t step = 0;; ++step) {
        for (int j = 0; j < kappa; ++j) z[j] = sign[j];
        double q = 1.0;
        for (int lbl : s) q *= seed_polynomial_eval(mk.row(lbl), z);
        std::size_t idx = 0;
        acc[idx++].add(q);
        for (int u = 0; u < kappa; ++u) acc[idx++].add(q * sign[u]);
        for (int u = 0; u < kappa; ++u)
            for (int v = u + 1; v < kappa; ++v) acc[idx++].add(q * sign[u] * sign[v]);
        if (step + 1 == total) break;
        sign[std::countr_zero(step + 1)] *= -1;
    }
    std::vector<double> out(ncoef);
    for (std::size_t i = 0; i < ncoef; ++i) out[i] = acc[i].sum / static_cast<double>(total);
    return out;
}

// ---------------------------------------------------------------------------
// Convergence study: |finite-kappa - limit| against kappa
// ---------------------------------------------------------------------------

struct ConvergenceStudy {
    std::vector<int> kappas;
    std::vector<double> finite_values;
    std::vector<double> limit_value_per_kappa;  // same limit repeated (for CSV)
    std::vector<double> abs_errors;
    double fitted_slope = std::numeric_limits<double>::quiet_NaN();
};

/// rows: unit rows (n x n); S: label multiset; grid: kappa values <= kappa_max.
inline ConvergenceStudy kappa_convergence_study(const Eigen::MatrixXd& rows,
                                                const std::vector<int>& s,
                                                const std::vector<int>& grid) {
    for (int k : grid)
        if (k > kKappaMax || k < rows.rows())
            throw CeilingExceeded("kappa_convergence_study: grid outside oracle range");
    ConvergenceStudy st;
    const Eigen::MatrixXd gram = rows * rows.transpose();
    const double lim = limit_expectation(gram, s);
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int used = 0;
    for (int k : grid) {
        const Eigen::MatrixXd mk = extend_rows_uniform(rows, k);
        const double fin = finite_kappa_expectation(mk, s, k);
        const double err = std::abs(fin - lim);
        st.kappas.push_back(k);
        st.finite_values.push_back(fin);
        st.limit_value_per_kappa.push_back(lim);
        st.abs_errors.push_back(err);
        if (err > 1e-14) {
            const double x = std::log(static_cast<double>(k));
            const double y = std::log(err);
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
            ++used;
        }
    }
    if (used >= 2) {
        const double denom = used * sxx - sx * sx;
        if (std::abs(denom) > 1e-12) st.fitted_slope = (used * sxy - sx * sy) / denom;
    }
    return st;
}

}  // namespace soslift::glyph

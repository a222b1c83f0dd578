#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace soslift {

/// Input violates a structural precondition (wrong shape, bad subset, unknown schema).
struct MalformedInput : std::runtime_error {
    explicit MalformedInput(const std::string& what) : std::runtime_error(what) {}
};

/// Input fails a feasibility gate (e.g. a matrix that must be PSD is not).
struct InfeasibleInput : std::runtime_error {
    explicit InfeasibleInput(const std::string& what) : std::runtime_error(what) {}
};

/// Requested computation exceeds a documented size/cost ceiling.
struct CeilingExceeded : std::runtime_error {
    explicit CeilingExceeded(const std::string& what) : std::runtime_error(what) {}
};

// ---------------------------------------------------------------------------
// Exact rational coefficients for the monomial-family algebra.
// ---------------------------------------------------------------------------

struct Rational {
    std::int64_t num = 0;
    std::int64_t den = 1;

    Rational() = default;
    Rational(std::int64_t n) : num(n), den(1) {}
    Rational(std::int64_t n, std::int64_t d) : num(n), den(d) { normalize(); }

    void normalize() {
        if (den < 0) { num = -num; den = -den; }
        const std::int64_t g = std::gcd(num < 0 ? -num : num, den);
        if (g > 1) { num /= g; den /= g; }
        if (num == 0) den = 1;
    }

    Rational operator*(const Rational& o) const { return Rational(num * o.num, den * o.den); }
    Rational operator+(const Rational& o) const {
        return Rational(num * o.den + o.num * den, den * o.den);
    }
    Rational operator-(const Rational& o) const {
        return Rational(num * o.den - o.num * den, den * o.den);
    }
    Rational& operator*=(const Rational& o) { *this = *this * o; return *this; }
    Rational& operator+=(const Rational& o) { *this = *this + o; return *this; }
    bool operator==(const Rational& o) const { return num == o.num && den == o.den; }
    bool is_zero() const { return num == 0; }
    double value() const { return static_cast<double>(num) / static_cast<double>(den); }
};

inline Rational rational_factorial_inv(int k) {
    std::int64_t f = 1;
    for (int i = 2; i <= k; ++i) f *= i;
    return Rational(1, f);
}

// ---------------------------------------------------------------------------
// Deterministic, permutation-invariant floating point reductions.
//
// Summing in value-sorted order makes the result independent of how the
// addends were produced, so relabeling rows of a solution permutes entries
// without changing any computed scalar bit-for-bit.
// ---------------------------------------------------------------------------

inline double sorted_sum(std::vector<double>& terms) {
    std::sort(terms.begin(), terms.end());
    double acc = 0.0;
    for (double t : terms) acc += t;
    return acc;
}

inline double sorted_product(std::vector<double>& factors) {
    std::sort(factors.begin(), factors.end());
    double acc = 1.0;
    for (double f : factors) acc *= f;
    return acc;
}

/// Kahan accumulator for long sequential reductions (finite-kappa enumeration).
struct KahanSum {
    double sum = 0.0;
    double carry = 0.0;
    void add(double x) {
        const double y = x - carry;
        const double t = sum + y;
        carry = (t - sum) - y;
        sum = t;
    }
};

// ---------------------------------------------------------------------------
// Minimal parallel-for. Work items get disjoint write targets; no reduction
// happens across threads unless the caller merges results deterministically.
// ---------------------------------------------------------------------------

template <typename Fn>
void parallel_for(std::int64_t begin, std::int64_t end, Fn&& fn, int threads = 0) {
    const std::int64_t n = end - begin;
    if (n <= 0) return;
    int hw = threads > 0 ? threads : static_cast<int>(std::thread::hardware_concurrency());
    if (hw < 1) hw = 1;
    if (hw == 1 || n < 1024) {
        for (std::int64_t i = begin; i < end; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    const std::int64_t chunk = (n + hw - 1) / hw;
    for (int t = 0; t < hw; ++t) {
        const std::int64_t lo = begin + t * chunk;
        const std::int64_t hi = std::min(end, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([lo, hi, &fn] {
            for (std::int64_t i = lo; i < hi; ++i) fn(i);
        });
    }
    for (auto& th : pool) th.join();
}

}  // namespace soslift

#pragma once

#include <array>
#include <cstdint>

#include "soslift/common.hpp"

namespace soslift::moments {

/// Subset of [n] of size at most 2.  Elements are 0-based and kept sorted.
struct SubsetLE2 {
    int a = -1;
    int b = -1;
    int size = 0;

    static SubsetLE2 empty() { return {}; }
    static SubsetLE2 single(int i) { return {i, -1, 1}; }
    static SubsetLE2 pair(int i, int j) {
        if (i == j) return empty();  // {i} xor {i}
        if (i > j) std::swap(i, j);
        return {i, j, 2};
    }

    bool operator==(const SubsetLE2& o) const {
        return size == o.size && a == o.a && b == o.b;
    }

    bool contains(int x) const { return (size > 0 && a == x) || (size > 1 && b == x); }

    /// Symmetric difference as a sorted list of at most 4 elements.
    std::array<int, 4> sym_diff(const SubsetLE2& o, int* out_size) const {
        std::array<int, 4> d{};
        int k = 0;
        for (int x : {a, b})
            if (x >= 0 && !o.contains(x)) d[k++] = x;
        for (int x : {o.a, o.b})
            if (x >= 0 && !contains(x)) d[k++] = x;
        std::sort(d.begin(), d.begin() + k);
        *out_size = k;
        return d;
    }
};

/// Canonical enumeration of subsets of [n] with size <= 2:
/// empty set first, then singletons {0},...,{n-1}, then pairs {i,j} with
/// i < j in lexicographic order.
class MomentIndexMap {
  public:
    explicit MomentIndexMap(int n) : n_(n) {
        if (n < 1) throw MalformedInput("MomentIndexMap: n must be >= 1");
    }

    int n() const { return n_; }
    std::int64_t size() const {
        return 1 + static_cast<std::int64_t>(n_) + pair_count();
    }
    std::int64_t pair_count() const {
        return static_cast<std::int64_t>(n_) * (n_ - 1) / 2;
    }

    std::int64_t index_of(const SubsetLE2& s) const {
        switch (s.size) {
            case 0:
                return 0;
            case 1:
                check_elem(s.a);
                return 1 + s.a;
            case 2:
                check_elem(s.a);
                check_elem(s.b);
                return 1 + n_ + pair_offset(s.a, s.b);
            default:
                throw MalformedInput("index_of: subsets of size > 2 unsupported");
        }
    }

    SubsetLE2 subset_of(std::int64_t idx) const {
        if (idx < 0 || idx >= size()) throw MalformedInput("subset_of: index out of range");
        if (idx == 0) return SubsetLE2::empty();
        if (idx <= n_) return SubsetLE2::single(static_cast<int>(idx - 1));
        std::int64_t off = idx - 1 - n_;
        // row i holds (n-1-i) pairs {i, i+1..n-1}
        int i = 0;
        while (off >= n_ - 1 - i) {
            off -= n_ - 1 - i;
            ++i;
        }
        return SubsetLE2::pair(i, static_cast<int>(i + 1 + off));
    }

    /// Offset of pair {i,j}, i<j, within the pair block.
    std::int64_t pair_offset(int i, int j) const {
        if (i > j) std::swap(i, j);
        return static_cast<std::int64_t>(i) * n_ - static_cast<std::int64_t>(i) * (i + 1) / 2 +
               (j - i - 1);
    }

  private:
    void check_elem(int x) const {
        if (x < 0 || x >= n_) throw MalformedInput("subset element out of range");
    }
    int n_;
};

}  // namespace soslift::moments

#pragma once

// Generators for the three average-case instance families, with reproducible
// counter-based seeding.

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <vector>

#include "soslift/common.hpp"
#include "soslift/eigs.hpp"
#include "soslift/families.hpp"
#include "soslift/rng.hpp"

namespace soslift::instances {

struct GOEInstance {
    int n = 0;
    Eigen::MatrixXd g;
    std::uint64_t rng_seed = 0;
};

/// G = (W + W^T)/sqrt(2) with W iid standard normal; symmetric exactly.
inline GOEInstance sample_goe(int n, std::uint64_t seed) {
    if (n < 1) throw MalformedInput("sample_goe: n must be >= 1");
    CounterRng rng(seed);
    Eigen::MatrixXd w(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) w(i, j) = rng.next_normal();
    GOEInstance inst;
    inst.n = n;
    inst.rng_seed = seed;
    inst.g.resize(n, n);
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) inst.g(i, j) = inst.g(j, i) = (w(i, j) + w(j, i)) * inv_sqrt2;
    return inst;
}

struct RegularGraph {
    int n = 0;
    int d = 0;
    std::vector<std::array<int, 2>> edges;
    std::vector<std::vector<int>> adjacency;
    std::uint64_t rng_seed = 0;
    int attempts = 0;
};

/// Configuration-model sampler with whole-graph rejection on loops and
/// multi-edges.  Practical for d <= 10 or so; attempt counts are recorded.
inline RegularGraph sample_regular_graph(int n, int d, std::uint64_t seed) {
    if (d < 1 || d >= n) throw MalformedInput("sample_regular_graph: need 1 <= d < n");
    if ((static_cast<std::int64_t>(n) * d) % 2 != 0)
        throw MalformedInput("sample_regular_graph: n*d must be even");
    CounterRng rng(seed);
    const std::int64_t stubs = static_cast<std::int64_t>(n) * d;
    std::vector<int> perm(stubs);
    RegularGraph g;
    g.n = n;
    g.d = d;
    g.rng_seed = seed;
    for (int attempt = 1; attempt <= 100000; ++attempt) {
        for (std::int64_t i = 0; i < stubs; ++i) perm[i] = static_cast<int>(i / d);
        for (std::int64_t i = stubs - 1; i > 0; --i)
            std::swap(perm[i], perm[rng.next_below(static_cast<std::uint64_t>(i + 1))]);
        bool simple = true;
        std::vector<std::array<int, 2>> edges;
        edges.reserve(stubs / 2);
        std::vector<std::int64_t> seen;
        seen.reserve(stubs / 2);
        for (std::int64_t i = 0; i < stubs && simple; i += 2) {
            int u = perm[i], v = perm[i + 1];
            if (u == v) {
                simple = false;
                break;
            }
            if (u > v) std::swap(u, v);
            edges.push_back({u, v});
            seen.push_back(static_cast<std::int64_t>(u) * n + v);
        }
        if (simple) {
            std::sort(seen.begin(), seen.end());
            simple = std::adjacent_find(seen.begin(), seen.end()) == seen.end();
        }
        if (!simple) continue;
        g.attempts = attempt;
        g.edges = std::move(edges);
        g.adjacency.assign(n, {});
        for (const auto& e : g.edges) {
            g.adjacency[e[0]].push_back(e[1]);
            g.adjacency[e[1]].push_back(e[0]);
        }
        return g;
    }
    throw std::runtime_error("sample_regular_graph: rejection sampling did not terminate");
}

inline Eigen::MatrixXd adjacency_matrix(const RegularGraph& g) {
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(g.n, g.n);
    for (const auto& e : g.edges) a(e[0], e[1]) = a(e[1], e[0]) = 1.0;
    return a;
}

struct SubspaceInstance {
    int n = 0;
    int d = 0;
    Eigen::MatrixXd mg;  // n x d, entries N(0, 1/d)
    std::uint64_t rng_seed = 0;
};

inline SubspaceInstance sample_gaussian_matrix(int n, int d, std::uint64_t seed) {
    if (n < 1 || d < 1) throw MalformedInput("sample_gaussian_matrix: need n, d >= 1");
    CounterRng rng(seed);
    SubspaceInstance inst;
    inst.n = n;
    inst.d = d;
    inst.rng_seed = seed;
    inst.mg.resize(n, d);
    const double scale = 1.0 / std::sqrt(static_cast<double>(d));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < d; ++j) inst.mg(i, j) = scale * rng.next_normal();
    return inst;
}

/// Sylvester Hadamard matrix scaled to orthonormal rows (+-1/sqrt(kappa)).
inline Eigen::MatrixXd hadamard(int kappa) {
    if (!glyph::is_power_of_two(kappa)) throw MalformedInput("hadamard: kappa not a power of 2");
    return glyph::orthonormal_row_basis(kappa, kappa);
}

/// Projection onto the span of the top-k eigenvectors.
inline Eigen::MatrixXd projector_topk(const GOEInstance& inst, int k) {
    if (k < 1 || k > inst.n) throw MalformedInput("projector_topk: k out of range");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(inst.g);
    const Eigen::MatrixXd top = es.eigenvectors().rightCols(k);
    return top * top.transpose();
}

}  // namespace soslift::instances

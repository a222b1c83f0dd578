#pragma once

// The three degree-2 seed constructions feeding the lift, plus the
// nonbacktracking polynomial machinery for regular graphs.

#include <Eigen/Dense>
#include <cmath>
#include <deque>
#include <optional>

#include "soslift/instances.hpp"
#include "soslift/moments.hpp"

namespace soslift::seeds {

using instances::GOEInstance;
using instances::RegularGraph;
using instances::SubspaceInstance;
using moments::Degree2Solution;

// ---------------------------------------------------------------------------
// Boolean vector in a random subspace
// ---------------------------------------------------------------------------

struct BvsSeedReport {
    double gamma_requested = -1;  // -1 when auto
    double gamma_eff = 0;
    double gamma_paper = 0;  // 100 sqrt(log n / d), reported for reference
    double objective_scaled = 0;  // (d/n) <MM^T, X>
};

/// X[i,j] = (1-gamma) (Mg Mg^T)[i,j] off the diagonal, unit diagonal.  When
/// gamma is absent, the smallest gamma keeping the diagonal correction PSD is
/// chosen.
inline Degree2Solution seed_boolean_vector(const SubspaceInstance& inst,
                                           std::optional<double> gamma = std::nullopt,
                                           BvsSeedReport* report = nullptr) {
    const int n = inst.n;
    const Eigen::MatrixXd b = inst.mg * inst.mg.transpose();
    const double max_diag = b.diagonal().maxCoeff();
    const double gamma_auto = std::max(0.0, 1.0 - 1.0 / max_diag) + 1e-9;
    double g = gamma.has_value() ? std::max(*gamma, gamma_auto) : gamma_auto;
    if (gamma.has_value() && *gamma >= 1.0) g = 1.0;  // full damping
    Degree2Solution sol;
    sol.n = n;
    sol.x = (1.0 - g) * b;
    sol.x.diagonal().setOnes();
    sol.provenance = {{"kind", "bvs_seed"},
                      {"n", n},
                      {"d", inst.d},
                      {"rng_seed", inst.rng_seed},
                      {"gamma_eff", g},
                      {"rng", CounterRng::kAlgorithm}};
    if (report) {
        report->gamma_requested = gamma.value_or(-1);
        report->gamma_eff = g;
        report->gamma_paper = 100.0 * std::sqrt(std::log(static_cast<double>(n)) / inst.d);
        report->objective_scaled =
            static_cast<double>(inst.d) / n * (b.array() * sol.x.array()).sum();
    }
    return sol;
}

// ---------------------------------------------------------------------------
// Sherrington-Kirkpatrick seed via the top eigenspace projector
// ---------------------------------------------------------------------------

struct SkSeedReport {
    int k = 0;
    double gamma_eff = 0;
    double lambda_k = 0;         // k-th largest eigenvalue
    double sum_top_lambda = 0;   // sum of the top-k eigenvalues
    double objective_normalized = 0;  // <G, X> / n^{3/2}
    double term_projector = 0;   // (1-gamma)(n/k) <G, Pi> / n^{3/2}
    double term_diag = 0;        // sum_i G_ii D_ii / n^{3/2}
    double identity_residual = 0;  // |objective - term_projector - term_diag|
    double chain_rhs = 0;        // (1-gamma) lambda_k / sqrt(n) - |term_diag|
};

/// X[i,j] = (1-gamma)(n/k) Pi[i,j] off the diagonal with Pi the projector on
/// the top-k eigenvectors; gamma is clipped so the diagonal correction stays
/// PSD.
inline Degree2Solution seed_sk(const GOEInstance& inst, int k,
                               std::optional<double> gamma = std::nullopt,
                               SkSeedReport* report = nullptr) {
    const int n = inst.n;
    if (k < 1 || k > n) throw MalformedInput("seed_sk: k out of range");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(inst.g);
    const Eigen::MatrixXd top = es.eigenvectors().rightCols(k);
    const Eigen::MatrixXd pi = top * top.transpose();
    const double scale = static_cast<double>(n) / k;
    const double max_diag = scale * pi.diagonal().maxCoeff();
    const double gamma_auto = std::max(0.0, 1.0 - 1.0 / max_diag) + 1e-9;
    const double g = gamma.has_value() ? std::max(*gamma, gamma_auto) : gamma_auto;
    Degree2Solution sol;
    sol.n = n;
    sol.x = (1.0 - g) * scale * pi;
    sol.x.diagonal().setOnes();
    sol.provenance = {{"kind", "sk_seed"},      {"n", n},
                      {"k", k},                 {"rng_seed", inst.rng_seed},
                      {"gamma_eff", g},         {"rng", CounterRng::kAlgorithm}};
    if (report) {
        report->k = k;
        report->gamma_eff = g;
        report->lambda_k = es.eigenvalues()[n - k];
        report->sum_top_lambda = es.eigenvalues().tail(k).sum();
        const double n32 = std::pow(static_cast<double>(n), 1.5);
        report->objective_normalized = (inst.g.array() * sol.x.array()).sum() / n32;
        report->term_projector = (1.0 - g) * scale * report->sum_top_lambda / n32;
        double diag_term = 0;
        for (int i = 0; i < n; ++i)
            diag_term += inst.g(i, i) * (1.0 - (1.0 - g) * scale * pi(i, i));
        report->term_diag = diag_term / n32;
        report->identity_residual = std::abs(report->objective_normalized -
                                             report->term_projector - report->term_diag);
        report->chain_rhs =
            (1.0 - g) * report->lambda_k / std::sqrt(static_cast<double>(n)) -
            std::abs(report->term_diag);
    }
    return sol;
}

// ---------------------------------------------------------------------------
// Nonbacktracking polynomials
// ---------------------------------------------------------------------------

/// g_0 = 1, g_1 = x, g_2 = x^2 - d, g_t = x g_{t-1} - (d-1) g_{t-2}.
inline double nonbacktracking_poly(int t, int d, double x) {
    if (t < 0) throw MalformedInput("nonbacktracking_poly: t must be >= 0");
    if (t == 0) return 1.0;
    if (t == 1) return x;
    double prev = x, prev2 = 1.0;
    double cur = x * x - d;
    for (int i = 3; i <= t; ++i) {
        prev2 = prev;
        prev = cur;
        cur = x * prev - (d - 1) * prev2;
    }
    return cur;
}

/// g_t(A) with exact integer arithmetic; entries count nonbacktracking walks.
inline Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic> nonbacktracking_matrix(
    int t, const RegularGraph& g) {
    using MatI = Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic>;
    if (t < 0) throw MalformedInput("nonbacktracking_matrix: t must be >= 0");
    if (g.n > 4096) throw CeilingExceeded("nonbacktracking_matrix: graph too large");
    MatI a = MatI::Zero(g.n, g.n);
    for (const auto& e : g.edges) a(e[0], e[1]) = a(e[1], e[0]) = 1;
    MatI prev2 = MatI::Identity(g.n, g.n);
    if (t == 0) return prev2;
    MatI prev = a;
    if (t == 1) return prev;
    MatI cur = (a * a - std::int64_t(g.d) * MatI::Identity(g.n, g.n)).eval();
    for (int i = 3; i <= t; ++i) {
        MatI next = a * cur - std::int64_t(g.d - 1) * prev;
        prev = cur;
        cur = next;
    }
    return cur;
}

// ---------------------------------------------------------------------------
// Gaussian-wave parameters and vectors on regular graphs
// ---------------------------------------------------------------------------

struct GwaveParams {
    double epsilon = 0;
    double rho = 0;
    int C = 0;
    double amp = 0;
    std::vector<int> bad_set;
    std::vector<char> is_bad;
};

/// BFS ball of radius `radius`; tree iff |edges| == |vertices| - 1 inside.
inline bool ball_is_tree(const RegularGraph& g, int v, int radius) {
    std::vector<int> dist(g.n, -1);
    std::deque<int> queue{v};
    dist[v] = 0;
    std::vector<int> ball{v};
    while (!queue.empty()) {
        const int u = queue.front();
        queue.pop_front();
        if (dist[u] == radius) continue;
        for (int w : g.adjacency[u]) {
            if (dist[w] < 0) {
                dist[w] = dist[u] + 1;
                ball.push_back(w);
                queue.push_back(w);
            }
        }
    }
    std::int64_t internal_edges = 0;
    for (int u : ball)
        for (int w : g.adjacency[u])
            if (dist[w] >= 0) ++internal_edges;
    internal_edges /= 2;
    return internal_edges == static_cast<std::int64_t>(ball.size()) - 1;
}

/// rho = -(1-eps)/sqrt(d-1); C is the smallest integer with
/// amp(C)^2 (d/(d-1)) (1-eps)^C <= eps; amp normalizes the tree-ball vectors
/// to unit norm; the bad set is found by a radius-(2C+1) tree test.
inline GwaveParams gwave_params(const RegularGraph& g, double epsilon) {
    if (g.d < 3) throw MalformedInput("gwave_params: requires d >= 3");
    if (epsilon <= 0 || epsilon > 1) throw MalformedInput("gwave_params: epsilon in (0,1]");
    GwaveParams p;
    p.epsilon = epsilon;
    const int d = g.d;
    p.rho = -(1.0 - epsilon) / std::sqrt(static_cast<double>(d - 1));
    auto amp_sq = [&](int C) {
        double s = 1.0;
        for (int l = 1; l <= C; ++l)
            s += d * std::pow(static_cast<double>(d - 1), l - 1) * std::pow(p.rho * p.rho, l);
        return 1.0 / s;
    };
    int C = 1;
    for (; C < 64; ++C) {
        if (amp_sq(C) * d / (d - 1.0) * std::pow(1.0 - epsilon, C) <= epsilon) break;
    }
    p.C = C;
    p.amp = std::sqrt(amp_sq(C));
    const int radius = 2 * C + 1;
    p.is_bad.assign(g.n, 0);
    parallel_for(0, g.n, [&](std::int64_t v) {
        p.is_bad[v] = ball_is_tree(g, static_cast<int>(v), radius) ? 0 : 1;
    });
    for (int v = 0; v < g.n; ++v)
        if (p.is_bad[v]) p.bad_set.push_back(v);
    return p;
}

/// The unit vector attached to a C-good vertex: amp * rho^{dist} on its
/// radius-C ball.  Bad vertices get indicator vectors.
inline Eigen::VectorXd gwave_vector(const RegularGraph& g, const GwaveParams& p, int v) {
    Eigen::VectorXd x = Eigen::VectorXd::Zero(g.n);
    if (p.is_bad[v]) {
        x[v] = 1.0;
        return x;
    }
    std::vector<int> dist(g.n, -1);
    std::deque<int> queue{v};
    dist[v] = 0;
    while (!queue.empty()) {
        const int u = queue.front();
        queue.pop_front();
        x[u] = p.amp * std::pow(p.rho, dist[u]);
        if (dist[u] == p.C) continue;
        for (int w : g.adjacency[u])
            if (dist[w] < 0) {
                dist[w] = dist[u] + 1;
                queue.push_back(w);
            }
    }
    return x;
}

/// Closed-form edge inner product between C-good endpoints:
/// 2 amp^2 rho sum_{l=0}^{C-1} (d-1)^l rho^{2l}  (overlap down both sides of
/// the edge in the tree neighborhood).
inline double gwave_edge_value(int d, const GwaveParams& p) {
    double s = 0;
    for (int l = 0; l <= p.C - 1; ++l)
        s += std::pow(static_cast<double>(d - 1), l) * std::pow(p.rho, 2 * l);
    return 2.0 * p.amp * p.amp * p.rho * s;
}

// ---------------------------------------------------------------------------
// MaxCut seed
// ---------------------------------------------------------------------------

struct MaxCutSeedReport {
    double epsilon = 0;
    int C = 0;
    double amp = 0;
    double rho = 0;
    int bad_count = 0;
    double lambda2 = 0;             // second adjacency eigenvalue
    double lambda_min_adj = 0;
    double lambda_min_w = 0;        // min eigenvalue of the stage-2 matrix
    double edge_value_closed_form = 0;
    double objective = 0;           // <-A, X>
    double max_row_norm = 0;
    double spectral_norm = 0;
    double obs_kappa_fit = 0;       // max_n |<x_v,x_w> - X[v,w]| * n over sampled pairs
};

/// Stage 1-3 construction: polynomial of the adjacency matrix squared, minus
/// the all-ones projection, bad rows/columns zeroed, unit diagonal.
inline Degree2Solution seed_maxcut(const RegularGraph& g, double epsilon,
                                   MaxCutSeedReport* report = nullptr,
                                   const GwaveParams* params_in = nullptr) {
    const int n = g.n, d = g.d;
    const GwaveParams p = params_in ? *params_in : gwave_params(g, epsilon);

    const Eigen::MatrixXd a = instances::adjacency_matrix(g);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a);
    const Eigen::VectorXd& lam = es.eigenvalues();
    Eigen::VectorXd glam(n);
    for (int i = 0; i < n; ++i) {
        double acc = 0;
        for (int t = 0; t <= p.C; ++t)
            acc += std::pow(p.rho, t) * nonbacktracking_poly(t, d, lam[i]);
        glam[i] = p.amp * acc;
    }
    double gd = 0;  // g evaluated at the trivial eigenvalue d
    for (int t = 0; t <= p.C; ++t) gd += std::pow(p.rho, t) * nonbacktracking_poly(t, d, d);
    gd *= p.amp;
    Eigen::MatrixXd w = es.eigenvectors() * glam.array().square().matrix().asDiagonal() *
                        es.eigenvectors().transpose();
    w -= gd * gd / n * Eigen::MatrixXd::Ones(n, n);

    Degree2Solution sol;
    sol.n = n;
    sol.x = w;
    for (int v : p.bad_set) {
        sol.x.row(v).setZero();
        sol.x.col(v).setZero();
    }
    sol.x.diagonal().setOnes();
    sol.provenance = {{"kind", "maxcut_seed"}, {"n", n},       {"d", d},
                      {"epsilon", epsilon},    {"C", p.C},     {"amp", p.amp},
                      {"rng_seed", g.rng_seed}, {"rng", CounterRng::kAlgorithm}};

    if (report) {
        report->epsilon = epsilon;
        report->C = p.C;
        report->amp = p.amp;
        report->rho = p.rho;
        report->bad_count = static_cast<int>(p.bad_set.size());
        report->lambda2 = lam[n - 2];
        report->lambda_min_adj = lam[0];
        report->lambda_min_w = eigs::lambda_min(w);
        report->edge_value_closed_form = gwave_edge_value(d, p);
        double edge_sum = 0;
        for (const auto& e : g.edges) edge_sum += sol.x(e[0], e[1]);
        report->objective = -2.0 * edge_sum;
        double row2 = 0;
        for (int v = 0; v < n; ++v) {
            double s = 0;
            for (int u = 0; u < n; ++u)
                if (u != v) s += sol.x(v, u) * sol.x(v, u);
            row2 = std::max(row2, s);
        }
        report->max_row_norm = std::sqrt(row2);
        report->spectral_norm = eigs::spectral_norm_sym(sol.x);
        // Observation-style proxy: |<x_v,x_w> - X[v,w]| * n over edges and a
        // deterministic sample of non-adjacent pairs
        double worst = 0;
        if (static_cast<int>(p.bad_set.size()) < n) {
            CounterRng rng(g.rng_seed ^ 0xABCDEFULL);
            std::vector<std::pair<int, int>> pairs;
            for (const auto& e : g.edges) pairs.push_back({e[0], e[1]});
            for (int t = 0; t < 2000; ++t) {
                const int u = static_cast<int>(rng.next_below(n));
                const int v = static_cast<int>(rng.next_below(n));
                if (u != v) pairs.push_back({u, v});
            }
            std::vector<Eigen::VectorXd> cache(n);
            for (auto [u, v] : pairs) {
                if (cache[u].size() == 0) cache[u] = gwave_vector(g, p, u);
                if (cache[v].size() == 0) cache[v] = gwave_vector(g, p, v);
                const double ip = cache[u].dot(cache[v]);
                worst = std::max(worst, std::abs(ip - sol.x(u, v)) * n);
            }
        }
        report->obs_kappa_fit = worst;
    }
    return sol;
}

}  // namespace soslift::seeds

#include <catch2/catch_amalgamated.hpp>

#include "soslift/seeds.hpp"
#include "soslift/lift.hpp"

using namespace soslift;
using namespace soslift::seeds;

namespace {

// brute-force nonbacktracking walk counter (test oracle)
std::int64_t nb_walks(const instances::RegularGraph& g, int t, int u, int v) {
    if (t == 0) return u == v ? 1 : 0;
    std::int64_t count = 0;
    // walks as sequences; extend while forbidding immediate backtracking
    struct State { int prev, cur, len; };
    std::vector<State> stack{{-1, u, 0}};
    while (!stack.empty()) {
        auto [prev, cur, len] = stack.back();
        stack.pop_back();
        if (len == t) {
            if (cur == v) ++count;
            continue;
        }
        for (int w : g.adjacency[cur]) {
            if (w == prev) continue;
            stack.push_back({cur, w, len + 1});
        }
    }
    return count;
}

}  // namespace

TEST_CASE("nonbacktracking polynomial closed forms") {
    for (int d : {3, 4, 5}) {
        CHECK(nonbacktracking_poly(0, d, 1.23) == 1.0);
        CHECK(nonbacktracking_poly(2, d, d) == Catch::Approx(d * d - d));
        CHECK(nonbacktracking_poly(3, d, d) == Catch::Approx(double(d) * (d - 1) * (d - 1)));
        for (int t = 1; t <= 6; ++t)
            CHECK(nonbacktracking_poly(t, d, d) ==
                  Catch::Approx(d * std::pow(double(d - 1), t - 1)));
    }
}

TEST_CASE("nonbacktracking matrix counts walks") {
    // K4 exactly
    auto k4 = instances::sample_regular_graph(4, 3, 3);
    for (int t = 0; t <= 4; ++t) {
        auto m = nonbacktracking_matrix(t, k4);
        for (int u = 0; u < 4; ++u)
            for (int v = 0; v < 4; ++v) CHECK(m(u, v) == nb_walks(k4, t, u, v));
    }
    // a couple of random small graphs
    for (std::uint64_t seed : {1ull, 9ull}) {
        auto g = instances::sample_regular_graph(10, 3, seed);
        for (int t = 0; t <= 4; ++t) {
            auto m = nonbacktracking_matrix(t, g);
            for (int u = 0; u < g.n; ++u)
                for (int v = 0; v < g.n; ++v) CHECK(m(u, v) == nb_walks(g, t, u, v));
        }
    }
}

TEST_CASE("boolean vector seed") {
    auto inst = instances::sample_gaussian_matrix(80, 40, 21);
    BvsSeedReport rep;
    auto sol = seed_boolean_vector(inst, std::nullopt, &rep);
    CHECK(moments::check_sos2_feasible(sol).ok);
    CHECK(rep.gamma_eff > 0);
    CHECK(rep.gamma_eff < 1);

    // gamma = 1: full damping, X = Id
    auto sol1 = seed_boolean_vector(inst, 1.0);
    CHECK((sol1.x - Eigen::MatrixXd::Identity(80, 80)).cwiseAbs().maxCoeff() == 0.0);

    // orthonormal rows: X = Id at gamma = 0 (use an identity-like Mg)
    instances::SubspaceInstance ortho;
    ortho.n = 4;
    ortho.d = 4;
    ortho.mg = Eigen::MatrixXd::Identity(4, 4);
    auto sol2 = seed_boolean_vector(ortho, 0.0);
    CHECK((sol2.x - Eigen::MatrixXd::Identity(4, 4)).cwiseAbs().maxCoeff() < 2e-9);
}

TEST_CASE("sk seed") {
    auto inst = instances::sample_goe(120, 33);
    SkSeedReport rep;
    auto sol = seed_sk(inst, 12, std::nullopt, &rep);
    CHECK(moments::check_sos2_feasible(sol).ok);
    // identity chain: objective = projector term + diagonal term exactly
    CHECK(rep.identity_residual < 1e-9);
    // chain inequality with measured quantities
    CHECK(rep.objective_normalized >= rep.chain_rhs - 1e-9);

    // k = n: projector is the identity, X = Id
    SkSeedReport repn;
    auto soln = seed_sk(inst, 120, std::nullopt, &repn);
    CHECK((soln.x - Eigen::MatrixXd::Identity(120, 120)).cwiseAbs().maxCoeff() < 1e-8);

    CHECK_THROWS_AS(seed_sk(inst, 0, std::nullopt, nullptr), MalformedInput);
}

TEST_CASE("gwave parameters") {
    auto g = instances::sample_regular_graph(400, 3, 5);
    CHECK_THROWS_AS(gwave_params(g, 0.0), MalformedInput);

    // epsilon = 1: rho = 0, C = 1, amp = 1
    auto p1 = gwave_params(g, 1.0);
    CHECK(p1.rho == 0.0);
    CHECK(p1.C == 1);
    CHECK(p1.amp == Catch::Approx(1.0));

    // unit-norm identity for a mid-range epsilon
    auto p = gwave_params(g, 0.6);
    double s = 1.0;
    for (int l = 1; l <= p.C; ++l)
        s += 3 * std::pow(2.0, l - 1) * std::pow(p.rho * p.rho, l);
    CHECK(p.amp * p.amp * s == Catch::Approx(1.0).margin(1e-12));

    // selection rule: C is smallest with amp^2 (d/(d-1)) (1-eps)^C <= eps
    CHECK(p.amp * p.amp * 1.5 * std::pow(0.4, p.C) <= 0.6);

    // gwave vectors: unit norm for good vertices; distance decay bound
    int good = -1;
    for (int v = 0; v < g.n; ++v)
        if (!p.is_bad[v]) { good = v; break; }
    if (good >= 0) {
        auto xv = gwave_vector(g, p, good);
        CHECK(xv.norm() == Catch::Approx(1.0).margin(1e-12));
    }
}

TEST_CASE("gwave inner product distance bound") {
    // |<x_v, x_w>| <= |rho|^dist (dist+1) for vertices within distance C
    auto g = instances::sample_regular_graph(500, 3, 6);
    auto p = gwave_params(g, 0.7);
    // BFS distances from vertex 0
    std::vector<int> dist(g.n, -1);
    std::deque<int> q{0};
    dist[0] = 0;
    while (!q.empty()) {
        int u = q.front();
        q.pop_front();
        for (int w : g.adjacency[u])
            if (dist[w] < 0) {
                dist[w] = dist[u] + 1;
                q.push_back(w);
            }
    }
    auto x0 = gwave_vector(g, p, 0);
    int checked = 0;
    for (int v = 1; v < g.n && checked < 100; ++v) {
        if (dist[v] < 0 || dist[v] > p.C) continue;
        if (p.is_bad[0] || p.is_bad[v]) continue;
        auto xv = gwave_vector(g, p, v);
        CHECK(std::abs(x0.dot(xv)) <=
              std::pow(std::abs(p.rho), dist[v]) * (dist[v] + 1) + 1e-12);
        ++checked;
    }
}

TEST_CASE("maxcut seed") {
    auto g = instances::sample_regular_graph(300, 3, 11);
    MaxCutSeedReport rep;
    auto sol = seed_maxcut(g, 0.7, &rep);
    CHECK(moments::check_sos2_feasible(sol).ok);
    CHECK(rep.lambda_min_w >= -1e-8);  // stage-2 matrix is PSD

    // edge entries between C-good endpoints match the closed form
    auto p = gwave_params(g, 0.7);
    int found = 0;
    for (const auto& e : g.edges) {
        if (p.is_bad[e[0]] || p.is_bad[e[1]]) continue;
        // closed form up to the O(1/n) all-ones correction
        CHECK(sol.x(e[0], e[1]) ==
              Catch::Approx(rep.edge_value_closed_form).margin(50.0 / g.n));
        if (++found > 40) break;
    }
    CHECK(found > 0);

    // epsilon = 1: W = I - J/n, so X has O(1/n) off-diagonal entries
    MaxCutSeedReport rep1;
    auto sol1 = seed_maxcut(g, 1.0, &rep1);
    CHECK(moments::check_sos2_feasible(sol1).ok);
    Eigen::MatrixXd off = sol1.x - Eigen::MatrixXd::Identity(g.n, g.n);
    CHECK(off.cwiseAbs().maxCoeff() < 2.0 / g.n + 1e-12);
}

TEST_CASE("all three seeds lift to feasible degree-4 matrices") {
    // property suite across the families at small sizes
    for (std::uint64_t seed : {1ull, 2ull}) {
        auto bvs = seed_boolean_vector(instances::sample_gaussian_matrix(24, 12, seed));
        auto [m1, p1] = lift::lift(bvs, lift::LiftMode::tight);
        CHECK(moments::check_sos4_feasible(m1).ok);

        auto sk = seed_sk(instances::sample_goe(24, seed + 10), 6);
        auto [m2, p2] = lift::lift(sk, lift::LiftMode::tight);
        CHECK(moments::check_sos4_feasible(m2).ok);

        auto mc = seed_maxcut(instances::sample_regular_graph(24, 3, seed + 20), 0.8);
        auto [m3, p3] = lift::lift(mc, lift::LiftMode::tight);
        CHECK(moments::check_sos4_feasible(m3).ok);
    }
}

TEST_CASE("property: every sampled seed is degree-2 feasible") {
    int per_family = 0;
    for (std::uint64_t s = 0; s < 30; ++s) {
        const int n = 12 + 2 * static_cast<int>(s % 8);
        auto bvs = seed_boolean_vector(
            instances::sample_gaussian_matrix(n, std::max(2, n / 2), 1000 + s));
        CHECK(moments::check_sos2_feasible(bvs).ok);
        auto sk = seed_sk(instances::sample_goe(n, 2000 + s), std::max(2, n / 4));
        CHECK(moments::check_sos2_feasible(sk).ok);
        auto mc = seed_maxcut(instances::sample_regular_graph(n, 3, 3000 + s),
                              0.6 + 0.1 * (s % 4));
        CHECK(moments::check_sos2_feasible(mc).ok);
        ++per_family;
    }
    CHECK(per_family == 30);
}

TEST_CASE("gwave edge closed form") {
    // algebraic guarantee from the C selection rule
    for (int d : {3, 4, 5})
        for (double eps : {0.1, 0.3, 0.6}) {
            instances::RegularGraph dummy;
            dummy.n = 2;
            dummy.d = d;
            dummy.adjacency.assign(2, {});
            auto p = [&] {
                GwaveParams q;
                q.epsilon = eps;
                q.rho = -(1 - eps) / std::sqrt(d - 1.0);
                auto amp_sq = [&](int C) {
                    double s = 1.0;
                    for (int l = 1; l <= C; ++l)
                        s += d * std::pow(d - 1.0, l - 1) * std::pow(q.rho * q.rho, l);
                    return 1.0 / s;
                };
                int C = 1;
                for (; C < 64; ++C)
                    if (amp_sq(C) * d / (d - 1.0) * std::pow(1 - eps, C) <= eps) break;
                q.C = C;
                q.amp = std::sqrt(amp_sq(C));
                return q;
            }();
            CHECK(gwave_edge_value(d, p) <= -(1 - 2 * eps) * 2 * std::sqrt(d - 1.0) / d + 1e-12);
        }

    // vector inner products on good edges match the closed form to 1e-10
    auto g = instances::sample_regular_graph(600, 3, 77);
    auto p = gwave_params(g, 0.7);
    const double closed = gwave_edge_value(3, p);
    int tested = 0;
    for (const auto& e : g.edges) {
        if (p.is_bad[e[0]] || p.is_bad[e[1]]) continue;
        auto xv = gwave_vector(g, p, e[0]);
        auto xw = gwave_vector(g, p, e[1]);
        CHECK(xv.dot(xw) == Catch::Approx(closed).margin(1e-10));
        if (++tested >= 25) break;
    }
    CHECK(tested > 0);
}

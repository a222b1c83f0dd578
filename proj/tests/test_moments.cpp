#include <catch2/catch_amalgamated.hpp>

#include "soslift/lift.hpp"
#include "soslift/moments.hpp"
#include "soslift/rng.hpp"
#include "soslift/seeds.hpp"

using namespace soslift;
using namespace soslift::moments;

namespace {

Degree2Solution gram_of_random_unit_vectors(int n, std::uint64_t seed) {
    CounterRng rng(seed);
    Eigen::MatrixXd v(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) v(i, j) = rng.next_normal();
    for (int i = 0; i < n; ++i) v.row(i) /= v.row(i).norm();
    Degree2Solution sol;
    sol.n = n;
    sol.x = v * v.transpose();
    sol.x.diagonal().setOnes();
    sol.x = ((sol.x + sol.x.transpose()) / 2).eval();
    return sol;
}

}  // namespace

TEST_CASE("degree-2 feasibility checks") {
    Degree2Solution id;
    id.n = 4;
    id.x = Eigen::MatrixXd::Identity(4, 4);
    auto rep = check_sos2_feasible(id);
    CHECK(rep.ok);
    CHECK(rep.lambda_min == Catch::Approx(1.0));

    Degree2Solution ones;
    ones.n = 3;
    ones.x = Eigen::MatrixXd::Ones(3, 3);
    rep = check_sos2_feasible(ones);
    CHECK(rep.ok);
    CHECK(rep.lambda_min == Catch::Approx(0.0).margin(1e-12));

    // X12 = X13 = 1, X23 = -1: eigenvalues (-1, 2, 2), infeasible
    Degree2Solution bad;
    bad.n = 3;
    bad.x = Eigen::MatrixXd::Ones(3, 3);
    bad.x(1, 2) = bad.x(2, 1) = -1.0;
    rep = check_sos2_feasible(bad);
    CHECK_FALSE(rep.ok);
    CHECK(rep.lambda_min == Catch::Approx(-1.0).margin(1e-12));

    Degree2Solution asym;
    asym.n = 2;
    asym.x = Eigen::MatrixXd::Identity(2, 2);
    asym.x(0, 1) = 0.5;
    CHECK_THROWS_AS(check_sos2_feasible(asym), MalformedInput);
}

TEST_CASE("degree-4 feasibility checks") {
    const int n = 5;
    MomentIndexMap map(n);
    Degree4MomentMatrix id;
    id.n = n;
    id.entries = Eigen::MatrixXd::Identity(map.size(), map.size());
    auto rep = check_sos4_feasible(id);
    CHECK(rep.ok);

    // constructed symmetry violation: M[{0},{1}] != M[{0,1},empty]
    Degree4MomentMatrix bad = id;
    bad.entries(1, 2) = bad.entries(2, 1) = 0.25;
    auto rep2 = check_sos4_feasible(bad);
    CHECK_FALSE(rep2.ok);
    CHECK(rep2.max_symmetry_violation > 0.2);

    Degree4MomentMatrix wrong_dim;
    wrong_dim.n = n;
    wrong_dim.entries = Eigen::MatrixXd::Identity(7, 7);
    CHECK_THROWS_AS(check_sos4_feasible(wrong_dim), MalformedInput);
}

TEST_CASE("lifted matrices pass the degree-4 check") {
    // end-to-end pipeline property over random Gram seeds
    for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
        Degree2Solution sol = gram_of_random_unit_vectors(10, seed);
        REQUIRE(check_sos2_feasible(sol).ok);
        auto [m, params] = lift::lift(sol, lift::LiftMode::tight);
        auto rep = check_sos4_feasible(m);
        CHECK(rep.ok);
        CHECK(rep.max_symmetry_violation == 0.0);
        CHECK(rep.max_odd_pattern_abs == 0.0);
        CHECK(rep.lambda_min >= -1e-8);
    }
}

TEST_CASE("objective values") {
    Degree2Solution sol = gram_of_random_unit_vectors(6, 9);
    const Eigen::MatrixXd zero = Eigen::MatrixXd::Zero(6, 6);
    CHECK(objective_deg2(zero, sol) == 0.0);
    CHECK(objective_deg2(Eigen::MatrixXd::Identity(6, 6), sol) == Catch::Approx(6.0));

    // random symmetric A against the raw lift (eta = 0): the degree-4 value
    // equals sum over off-diagonal pairs of A_ij (X_ij + (2/3) X_ij^3) + tr A
    CounterRng rng(33);
    Eigen::MatrixXd a(6, 6);
    for (int i = 0; i < 6; ++i)
        for (int j = i; j < 6; ++j) a(i, j) = a(j, i) = rng.next_normal();
    Degree4MomentMatrix m1 = lift::lift_m1(sol);
    double expect = a.trace();
    for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 6; ++j) {
            if (i == j) continue;
            const double c = sol.x(i, j);
            expect += a(i, j) * (c + 2.0 / 3.0 * c * c * c);
        }
    CHECK(objective_deg4(a, m1) == Catch::Approx(expect).epsilon(1e-9));

    Eigen::MatrixXd small = Eigen::MatrixXd::Identity(3, 3);
    CHECK_THROWS_AS(objective_deg2(small, sol), MalformedInput);
    CHECK_THROWS_AS(objective_deg4(small, m1), MalformedInput);
}

TEST_CASE("degree-4 checker catches odd-pattern violations") {
    const int n = 4;
    MomentIndexMap map(n);
    Degree4MomentMatrix m;
    m.n = n;
    m.entries = Eigen::MatrixXd::Identity(map.size(), map.size());
    // M[empty, {0}] must be exactly 0
    m.entries(0, 1) = m.entries(1, 0) = 1e-14;
    auto rep = check_sos4_feasible(m);
    CHECK_FALSE(rep.ok);
    CHECK(rep.max_odd_pattern_abs == 1e-14);
}

TEST_CASE("property: lifted feasibility across families and sizes") {
    // >= 50 trials, n in [8, 64], all three seed families plus random Grams
    int trials = 0;
    double worst = 1.0;
    auto check = [&](const moments::Degree2Solution& sol) {
        REQUIRE(check_sos2_feasible(sol).ok);
        auto [m, params] = soslift::lift::lift(sol, soslift::lift::LiftMode::tight);
        auto rep = check_sos4_feasible(m);
        CHECK(rep.ok);
        worst = std::min(worst, rep.lambda_min);
        ++trials;
    };
    const int sizes[] = {8, 10, 12, 14, 16, 20, 24, 32};
    for (int i = 0; i < 8; ++i) {
        const int n = sizes[i];
        check(gram_of_random_unit_vectors(n, 50 + i));
        check(soslift::seeds::seed_boolean_vector(
            soslift::instances::sample_gaussian_matrix(n, std::max(2, n / 2), 60 + i)));
        check(soslift::seeds::seed_sk(soslift::instances::sample_goe(n, 70 + i),
                                      std::max(2, n / 4)));
        check(soslift::seeds::seed_maxcut(
            soslift::instances::sample_regular_graph(n % 2 ? n + 1 : n, 3, 80 + i), 0.85));
    }
    for (int i = 0; i < 10; ++i) check(gram_of_random_unit_vectors(40 + i, 90 + i));
    for (int i = 0; i < 6; ++i) check(gram_of_random_unit_vectors(56 + i, 100 + i));
    check(gram_of_random_unit_vectors(64, 111));
    check(gram_of_random_unit_vectors(36, 112));
    CHECK(trials >= 50);
    CHECK(worst >= -1e-8);
}

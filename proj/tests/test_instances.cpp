#include <catch2/catch_amalgamated.hpp>

#include "soslift/instances.hpp"

using namespace soslift;
using namespace soslift::instances;

TEST_CASE("goe sampling") {
    CHECK_THROWS_AS(sample_goe(0, 1), MalformedInput);
    auto one = sample_goe(1, 42);
    CHECK(one.g.rows() == 1);

    auto inst = sample_goe(300, 7);
    CHECK((inst.g - inst.g.transpose()).cwiseAbs().maxCoeff() == 0.0);
    // variance structure: off-diagonal ~ N(0,1), diagonal ~ N(0,2)
    double off2 = 0, diag2 = 0;
    for (int i = 0; i < 300; ++i) {
        diag2 += inst.g(i, i) * inst.g(i, i);
        for (int j = i + 1; j < 300; ++j) off2 += inst.g(i, j) * inst.g(i, j);
    }
    CHECK(off2 / (300.0 * 299 / 2) == Catch::Approx(1.0).margin(0.1));
    CHECK(diag2 / 300.0 == Catch::Approx(2.0).margin(0.5));

    // reproducibility: same seed, bitwise identical
    auto again = sample_goe(300, 7);
    CHECK((inst.g - again.g).cwiseAbs().maxCoeff() == 0.0);
    auto other = sample_goe(300, 8);
    CHECK((inst.g - other.g).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("regular graph sampling") {
    CHECK_THROWS_AS(sample_regular_graph(5, 3, 1), MalformedInput);  // nd odd
    CHECK_THROWS_AS(sample_regular_graph(4, 4, 1), MalformedInput);  // d >= n

    // n=4, d=3 is forced to be the complete graph
    auto k4 = sample_regular_graph(4, 3, 3);
    CHECK(k4.edges.size() == 6);
    for (int v = 0; v < 4; ++v) CHECK(k4.adjacency[v].size() == 3);

    for (std::uint64_t seed : {1ull, 2ull, 3ull, 4ull}) {
        auto g = sample_regular_graph(60, 3, seed);
        std::set<std::pair<int, int>> seen;
        for (auto e : g.edges) {
            CHECK(e[0] != e[1]);
            CHECK(seen.insert({e[0], e[1]}).second);  // no multi-edges
        }
        for (int v = 0; v < g.n; ++v) CHECK(g.adjacency[v].size() == 3);
        CHECK(g.attempts >= 1);
    }
    // determinism
    auto a = sample_regular_graph(50, 4, 9);
    auto b = sample_regular_graph(50, 4, 9);
    CHECK(a.edges == b.edges);
}

TEST_CASE("gaussian subspace instance") {
    auto inst = sample_gaussian_matrix(200, 80, 5);
    CHECK(inst.mg.rows() == 200);
    CHECK(inst.mg.cols() == 80);
    // entry variance calibration: mean square around 1/d
    const double ms = inst.mg.array().square().mean() * 80;
    CHECK(ms > 0.8);
    CHECK(ms < 1.2);
    // d = 1: rank-1 gram
    auto thin = sample_gaussian_matrix(5, 1, 6);
    Eigen::MatrixXd b = thin.mg * thin.mg.transpose();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(b);
    CHECK(es.eigenvalues()(3) < 1e-12);  // second-largest is 0
}

TEST_CASE("hadamard") {
    CHECK_THROWS_AS(hadamard(12), MalformedInput);
    CHECK(hadamard(1)(0, 0) == 1.0);
    Eigen::MatrixXd h2 = hadamard(2);
    const double s = 1.0 / std::sqrt(2.0);
    CHECK(h2(0, 0) == Catch::Approx(s));
    CHECK(h2(1, 1) == Catch::Approx(-s));
    Eigen::MatrixXd h16 = hadamard(16);
    Eigen::MatrixXd gram = h16 * h16.transpose();
    CHECK((gram - Eigen::MatrixXd::Identity(16, 16)).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("top-k projector") {
    auto inst = sample_goe(60, 11);
    CHECK_THROWS_AS(projector_topk(inst, 0), MalformedInput);
    CHECK_THROWS_AS(projector_topk(inst, 61), MalformedInput);

    Eigen::MatrixXd full = projector_topk(inst, 60);
    CHECK((full - Eigen::MatrixXd::Identity(60, 60)).cwiseAbs().maxCoeff() < 1e-10);

    Eigen::MatrixXd p1 = projector_topk(inst, 1);
    CHECK((p1 * p1 - p1).cwiseAbs().maxCoeff() < 1e-10);
    CHECK(p1.trace() == Catch::Approx(1.0).margin(1e-8));

    Eigen::MatrixXd pk = projector_topk(inst, 7);
    CHECK((pk * pk - pk).cwiseAbs().maxCoeff() < 1e-8);
    CHECK(pk.trace() == Catch::Approx(7.0).margin(1e-6));
}

TEST_CASE("goe spectrum: semicircle law and bulk eigenvalues") {
    const int n = 1000;
    auto inst = sample_goe(n, 99);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(inst.g, Eigen::EigenvaluesOnly);
    Eigen::VectorXd lam = es.eigenvalues() / std::sqrt(double(n));
    // Kolmogorov distance to the semicircle CDF
    auto cdf = [](double x) {
        if (x <= -2) return 0.0;
        if (x >= 2) return 1.0;
        const double pi = 3.14159265358979323846;
        return 0.5 + x * std::sqrt(4 - x * x) / (4 * pi) + std::asin(x / 2) / pi;
    };
    double ks = 0;
    for (int i = 0; i < n; ++i) {
        const double f = cdf(lam[i]);
        ks = std::max(ks, std::max(std::abs(f - double(i) / n), std::abs(f - double(i + 1) / n)));
    }
    CHECK(ks <= 0.05);
    // lambda_k stays near the edge for small k: the semicircle edge integral
    // puts the top-5% quantile at 2 - (3 pi q / 2)^{2/3} ~ 1.62 for q = 0.05
    CHECK(lam[n - 50] >= 1.55);
    CHECK(lam[n - 10] >= 2.0 - 0.3);
    CHECK(lam[n - 1] >= 1.9);
    CHECK(lam[n - 1] <= 2.1);
}

TEST_CASE("gaussian matrix norm concentration") {
    const int n = 1000, d = 600;
    auto inst = sample_gaussian_matrix(n, d, 31);
    const double t = 6.0;
    const double bound =
        (n + d + 2 * std::sqrt(double(d) * n) + t * t + 2 * (std::sqrt(double(d)) + std::sqrt(double(n))) * t) / d;
    Eigen::BDCSVD<Eigen::MatrixXd> svd(inst.mg);
    const double norm2 = svd.singularValues()[0] * svd.singularValues()[0];
    CHECK(norm2 <= bound);
    const double band = 100.0 * std::sqrt(std::log(double(n)) / d);
    for (int i = 0; i < n; ++i) {
        const double r = inst.mg.row(i).squaredNorm();
        CHECK(r >= 1 - band);
        CHECK(r <= 1 + band);
    }
}

#pragma once

// File formats.  All reals are serialized losslessly (shortest round-trip
// representation); matrices are row-major arrays of rows.

#include <Eigen/Dense>
#include <fstream>
#include <json.hpp>
#include <string>

#include "soslift/instances.hpp"
#include "soslift/lift.hpp"
#include "soslift/moments.hpp"

namespace soslift::io {

using nlohmann::json;

inline json matrix_to_json(const Eigen::MatrixXd& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

inline Eigen::MatrixXd matrix_from_json(const json& j) {
    if (!j.is_array() || j.empty() || !j[0].is_array())
        throw MalformedInput("matrix: expected array of rows");
    const Eigen::Index r = static_cast<Eigen::Index>(j.size());
    const Eigen::Index c = static_cast<Eigen::Index>(j[0].size());
    Eigen::MatrixXd m(r, c);
    for (Eigen::Index i = 0; i < r; ++i) {
        if (static_cast<Eigen::Index>(j[i].size()) != c)
            throw MalformedInput("matrix: ragged rows");
        for (Eigen::Index k = 0; k < c; ++k) m(i, k) = j[i][k].get<double>();
    }
    return m;
}

inline json degree2_to_json(const moments::Degree2Solution& sol) {
    return {{"kind", "degree2"}, {"n", sol.n}, {"x", matrix_to_json(sol.x)},
            {"provenance", sol.provenance}};
}

inline moments::Degree2Solution degree2_from_json(const json& j) {
    if (j.value("kind", "") != "degree2") throw MalformedInput("expected kind=degree2");
    moments::Degree2Solution sol;
    sol.n = j.at("n").get<int>();
    sol.x = matrix_from_json(j.at("x"));
    sol.provenance = j.value("provenance", json::object());
    return sol;
}

inline json degree4_to_json(const moments::Degree4MomentMatrix& m) {
    return {{"kind", "degree4"}, {"n", m.n}, {"eta", m.eta},
            {"entries", matrix_to_json(m.entries)}};
}

inline moments::Degree4MomentMatrix degree4_from_json(const json& j) {
    if (j.value("kind", "") != "degree4") throw MalformedInput("expected kind=degree4");
    moments::Degree4MomentMatrix m;
    m.n = j.at("n").get<int>();
    m.eta = j.at("eta").get<double>();
    m.entries = matrix_from_json(j.at("entries"));
    return m;
}

inline json graph_to_json(const instances::RegularGraph& g) {
    json edges = json::array();
    for (const auto& e : g.edges) edges.push_back({e[0], e[1]});
    return {{"kind", "regular"}, {"n", g.n}, {"d", g.d}, {"edges", edges},
            {"rng_seed", g.rng_seed}, {"attempts", g.attempts}};
}

inline instances::RegularGraph graph_from_json(const json& j) {
    if (j.value("kind", "") != "regular") throw MalformedInput("expected kind=regular");
    instances::RegularGraph g;
    g.n = j.at("n").get<int>();
    g.d = j.at("d").get<int>();
    g.rng_seed = j.value("rng_seed", 0ULL);
    g.attempts = j.value("attempts", 0);
    g.adjacency.assign(g.n, {});
    for (const auto& e : j.at("edges")) {
        const int u = e[0].get<int>(), v = e[1].get<int>();
        if (u < 0 || v < 0 || u >= g.n || v >= g.n || u == v)
            throw MalformedInput("graph: bad edge");
        g.edges.push_back({u, v});
        g.adjacency[u].push_back(v);
        g.adjacency[v].push_back(u);
    }
    return g;
}

inline json dense_to_json(const Eigen::MatrixXd& a, const json& provenance) {
    return {{"kind", "dense"}, {"n", a.rows()}, {"m", a.cols()}, {"a", matrix_to_json(a)},
            {"provenance", provenance}};
}

/// Reads any instance file and returns the natural objective matrix:
/// regular graph -> minus adjacency (cut objective), dense -> the matrix.
inline Eigen::MatrixXd objective_from_json(const json& j) {
    const std::string kind = j.value("kind", "");
    if (kind == "regular") {
        return -instances::adjacency_matrix(graph_from_json(j));
    }
    if (kind == "dense") {
        Eigen::MatrixXd a = matrix_from_json(j.at("a"));
        if (a.rows() != a.cols()) {
            // rectangular instance: use the Gram matrix (subspace objective)
            return a * a.transpose();
        }
        return a;
    }
    throw MalformedInput("objective: unsupported instance kind '" + kind + "'");
}

inline json lift_report_to_json(const lift::SolutionParams& p, double lambda_min_m,
                                double objective_in, double objective_out, double bound) {
    json rep = {{"schema", "soslift/1"},
                {"alpha_mag", p.alpha_mag},
                {"alpha_row", p.alpha_row},
                {"alpha_spec", p.alpha_spec},
                {"alpha", p.alpha},
                {"eta", p.eta},
                {"mode", lift::mode_name(p.mode)}};
    auto put = [&rep](const char* key, double v) {
        if (std::isnan(v)) rep[key] = nullptr; else rep[key] = v;
    };
    put("lambda_min_m1", p.lambda_min_m1);
    put("lambda_min_m", lambda_min_m);
    put("objective_in", objective_in);
    put("objective_out", objective_out);
    put("bound", bound);
    return rep;
}

inline json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw MalformedInput("cannot open file: " + path);
    json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw MalformedInput("cannot parse JSON in " + path + ": " + e.what());
    }
    return j;
}

inline void save_json(const std::string& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    out << j.dump(2) << "\n";
}

}  // namespace soslift::io

// Batch driver: generate instances, build degree-2 seeds, lift them to
// degree-4 pseudomoment matrices, and verify/certify the results.
//
// Exit codes: 0 success, 1 malformed input or usage error, 2 verification
// failure.

#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>

#include "soslift/certificates.hpp"
#include "soslift/json_io.hpp"
#include "soslift/pseudocal.hpp"
#include "soslift/seeds.hpp"

using namespace soslift;
using nlohmann::json;

namespace {

constexpr double kParisiReference = 0.763166;

json entry_table_stamp() {
    return {{"pair", "c + (2/3) c^3"},
            {"quad_terms", lift::QuadEntryTable::instance().term_count()}};
}

json config_echo(const std::string& subcommand, const json& params) {
    json cfg = {{"subcommand", subcommand}, {"params", params},
                {"entry_table", entry_table_stamp()}, {"schema", "soslift/1"}};
    return cfg;
}

void emit(const std::string& out_path, const json& artifact) {
    if (out_path.empty())
        std::cout << artifact.dump(2) << "\n";
    else
        io::save_json(out_path, artifact);
}

lift::LiftMode parse_mode(const std::string& mode) {
    if (mode == "certified") return lift::LiftMode::certified;
    if (mode == "tight") return lift::LiftMode::tight;
    throw MalformedInput("mode must be 'certified' or 'tight'");
}

int run_lift(const std::string& in_path, const std::string& mode_str,
             const std::string& objective_path, const std::string& out_path,
             const std::string& report_path, int dense_ceiling, double tol) {
    auto sol = io::degree2_from_json(io::load_json(in_path));
    const lift::LiftMode mode = parse_mode(mode_str);

    std::optional<Eigen::MatrixXd> objective;
    if (!objective_path.empty()) objective = io::objective_from_json(io::load_json(objective_path));

    double lambda_min_m = std::numeric_limits<double>::quiet_NaN();
    lift::SolutionParams params;
    std::optional<moments::Degree4MomentMatrix> m4;
    if (sol.n <= dense_ceiling) {
        auto [m, p] = lift::lift(sol, mode, dense_ceiling);
        params = p;
        lambda_min_m = eigs::lambda_min(m.entries);
        m4 = std::move(m);
    } else {
        if (mode == lift::LiftMode::tight)
            throw CeilingExceeded(
                "tight mode needs the dense table; n exceeds the dense ceiling "
                "(use certified mode or raise --dense-ceiling)");
        params = lift::solution_params_certified(sol);
    }

    double obj_in = std::numeric_limits<double>::quiet_NaN();
    double obj_out = std::numeric_limits<double>::quiet_NaN();
    double bound = std::numeric_limits<double>::quiet_NaN();
    if (objective) {
        obj_in = moments::objective_deg2(*objective, sol);
        obj_out = lift::lifted_objective_deg4(*objective, sol, params);
        bound = lift::objective_lower_bound(*objective, sol, params);
    }

    json report = io::lift_report_to_json(params, lambda_min_m, obj_in, obj_out, bound);
    report["config"] = config_echo("lift", {{"in", in_path},
                                            {"mode", mode_str},
                                            {"objective", objective_path},
                                            {"dense_ceiling", dense_ceiling},
                                            {"tol", tol}});
    report["n"] = sol.n;
    report["provenance"] = sol.provenance;
    if (!out_path.empty() && m4) {
        json artifact = io::degree4_to_json(*m4);
        artifact["config"] = report["config"];
        io::save_json(out_path, artifact);
    }
    emit(report_path, report);

    if (objective && obj_out < bound - 1e-6 * (1.0 + std::abs(bound))) return 2;
    if (m4 && lambda_min_m < -tol) return 2;
    return 0;
}

int run_verify(const std::string& in_path, const std::string& degree2_path,
               const std::string& objective_path, const std::string& report_path, double tol) {
    auto m = io::degree4_from_json(io::load_json(in_path));
    auto rep = moments::check_sos4_feasible(m, tol);
    json out = {{"schema", "soslift/1"},
                {"kind", "verify_report"},
                {"tol", tol},
                {"ok", rep.ok},
                {"lambda_min", rep.lambda_min},
                {"max_symmetry_violation", rep.max_symmetry_violation},
                {"normalization_error", rep.normalization_error},
                {"max_odd_pattern_abs", rep.max_odd_pattern_abs},
                {"max_transpose_asymmetry", rep.max_transpose_asymmetry}};
    bool ok = rep.ok;
    if (!degree2_path.empty() && !objective_path.empty()) {
        auto sol = io::degree2_from_json(io::load_json(degree2_path));
        auto a = io::objective_from_json(io::load_json(objective_path));
        auto params = lift::solution_params_certified(sol);
        const double bound = lift::objective_lower_bound(a, sol, params);
        const double realized = moments::objective_deg4(a, m);
        out["bound"] = bound;
        out["objective_deg4"] = realized;
        out["bound_ok"] = realized >= bound - 1e-6 * (1.0 + std::abs(bound));
        ok = ok && out["bound_ok"].get<bool>();
    }
    out["config"] = config_echo("verify", {{"in", in_path},
                                           {"degree2", degree2_path},
                                           {"objective", objective_path},
                                           {"tol", tol}});
    emit(report_path, out);
    return ok ? 0 : 2;
}

int run_certify(const std::string& in_path, const std::string& report_path, int ceiling) {
    auto sol = io::degree2_from_json(io::load_json(in_path));
    auto rows = lift::cholesky_rows(sol);
    auto ec = glyph::error_components(rows, ceiling);
    json comps = json::array();
    const char* names[4] = {"equal_sets", "disjoint_singletons", "pairs_sharing_one",
                            "disjoint_pairs"};
    for (int k = 0; k < 4; ++k) {
        comps.push_back({{"component", k + 1},
                         {"pattern", names[k]},
                         {"numeric_norm", ec.numeric_norms[k]},
                         {"analytic_bound", ec.analytic_bounds[k]},
                         {"sound", ec.numeric_norms[k] <= ec.analytic_bounds[k]}});
    }
    json out = {{"schema", "soslift/1"},
                {"kind", "certificate_report"},
                {"n", sol.n},
                {"components", comps},
                {"sound", ec.sound()}};
    out["config"] = config_echo("certify", {{"in", in_path}, {"ceiling", ceiling}});
    emit(report_path, out);
    return ec.sound() ? 0 : 2;
}

int run_converge(int n, const std::vector<int>& kappas, std::uint64_t seed,
                 const std::string& out_path) {
    CounterRng rng(seed);
    Eigen::MatrixXd rows(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) rows(i, j) = rng.next_normal();
    for (int i = 0; i < n; ++i) rows.row(i) /= rows.row(i).norm();

    std::vector<std::pair<std::string, std::vector<int>>> patterns;
    patterns.push_back({"pair", {0, 1}});
    if (n >= 4) patterns.push_back({"quad", {0, 1, 2, 3}});

    std::string csv = "pattern,kappa,oracle_value,closed_form_value,abs_error\n";
    json slopes = json::object();
    for (const auto& [name, s] : patterns) {
        auto st = glyph::kappa_convergence_study(rows, s, kappas);
        for (std::size_t i = 0; i < st.kappas.size(); ++i) {
            char line[256];
            std::snprintf(line, sizeof line, "%s,%d,%.17g,%.17g,%.17g\n", name.c_str(),
                          st.kappas[i], st.finite_values[i], st.limit_value_per_kappa[i],
                          st.abs_errors[i]);
            csv += line;
        }
        slopes[name] = st.fitted_slope;
    }
    if (out_path.empty()) {
        std::cout << csv;
    } else {
        std::ofstream out(out_path);
        out << csv;
    }
    json rep = {{"schema", "soslift/1"}, {"kind", "convergence_report"}, {"slopes", slopes}};
    rep["config"] =
        config_echo("converge", {{"n", n}, {"kappas", kappas}, {"seed", seed}, {"out", out_path}});
    std::cout << rep.dump(2) << "\n";
    return 0;
}

int run_pseudocal_demo(int n, int d, int max_total) {
    std::printf("monic Hermite values at 1: ");
    for (int k = 0; k <= 6; ++k) std::printf("h_%d(1)=%g ", k, pseudocal::hermite(k, 1.0));
    std::printf("\nnonzero coefficients for %dx%d multi-indices with |alpha| <= %d\n", n, d,
                max_total);
    // enumerate small multi-indices; L is forced by the row parities
    std::vector<int> flat(n * d, 0);
    int printed = 0;
    std::function<void(int, int)> rec = [&](int pos, int left) {
        if (printed > 40) return;
        if (pos == n * d) {
            pseudocal::MultiIndex idx;
            idx.alpha = Eigen::MatrixXi::Zero(n, d);
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < d; ++j) idx.alpha(i, j) = flat[i * d + j];
            for (int i = 0; i < n; ++i) {
                int rs = 0;
                for (int j = 0; j < d; ++j) rs += idx.alpha(i, j);
                if (rs % 2 == 1) idx.l_set.push_back(i);
            }
            const double v = pseudocal::pseudocal_coefficient(idx, d);
            if (v != 0.0) {
                std::printf("alpha=[");
                for (int i = 0; i < n * d; ++i) std::printf("%d%s", flat[i], i + 1 < n * d ? "," : "");
                std::printf("] L={");
                for (std::size_t i = 0; i < idx.l_set.size(); ++i)
                    std::printf("%d%s", idx.l_set[i], i + 1 < idx.l_set.size() ? "," : "");
                std::printf("} coefficient=%.12g\n", v);
                ++printed;
            }
            return;
        }
        for (int v = 0; v <= std::min(left, 3); ++v) {
            flat[pos] = v;
            rec(pos + 1, left - v);
        }
        flat[pos] = 0;
    };
    rec(0, max_total);
    return 0;
}

int run_report(const std::vector<std::string>& paths) {
    for (const auto& path : paths) {
        json j = io::load_json(path);
        std::printf("== %s\n", path.c_str());
        const std::string kind = j.value("kind", j.contains("alpha") ? "lift_report" : "unknown");
        if (kind == "regular") {
            const int d = j["d"].get<int>();
            std::printf("  random %d-regular graph, n=%d, edges=%zu\n", d, j["n"].get<int>(),
                        j["edges"].size());
            std::printf("  context: spectral cut bound 1/2 + sqrt(d-1)/d = %.6f, P* = %.6f\n",
                        0.5 + std::sqrt(d - 1.0) / d, kParisiReference);
        } else if (kind == "degree2") {
            std::printf("  degree-2 solution, n=%d, provenance=%s\n", j["n"].get<int>(),
                        j["provenance"].dump().c_str());
        } else if (kind == "degree4") {
            std::printf("  degree-4 moment matrix, n=%d, eta=%.12g\n", j["n"].get<int>(),
                        j["eta"].get<double>());
        } else if (j.contains("alpha")) {
            std::printf("  lift report: alpha=%.6g eta=%.6g mode=%s\n", j["alpha"].get<double>(),
                        j["eta"].get<double>(), j.value("mode", "?").c_str());
            std::printf("  context: Parisi reference P* = %.6f (2 P* = %.6f)\n", kParisiReference,
                        2 * kParisiReference);
        } else {
            std::printf("  %s\n", j.dump(2).c_str());
        }
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"degree-2 to degree-4 pseudomoment lifting toolkit"};
    app.require_subcommand(1);

    int n = 100, d = 3, k = 0, max_total = 4, dense_ceiling = lift::kDenseLiftCeiling;
    int m2_ceiling = glyph::kM2Ceiling;
    std::uint64_t seed = 1;
    double eps = 0.1, tol = moments::kTolPsd;
    std::string out, report_path, in_path, objective_path, degree2_path;
    std::string mode = "certified";
    std::optional<double> gamma;
    std::vector<int> kappas{8, 12, 16, 20};
    std::vector<std::string> report_files;

    auto* gen_goe = app.add_subcommand("gen-goe", "sample a GOE matrix");
    gen_goe->add_option("--n", n)->required();
    gen_goe->add_option("--seed", seed);
    gen_goe->add_option("--out", out);

    auto* gen_reg = app.add_subcommand("gen-regular", "sample a random d-regular graph");
    gen_reg->add_option("--n", n)->required();
    gen_reg->add_option("--d", d)->required();
    gen_reg->add_option("--seed", seed);
    gen_reg->add_option("--out", out);

    auto* gen_sub = app.add_subcommand("gen-subspace", "sample an n x d Gaussian matrix");
    gen_sub->add_option("--n", n)->required();
    gen_sub->add_option("--d", d)->required();
    gen_sub->add_option("--seed", seed);
    gen_sub->add_option("--out", out);

    double gamma_raw = -1;
    auto* s_bvs = app.add_subcommand("seed-bvs", "degree-2 seed from a subspace instance");
    s_bvs->add_option("--instance", in_path)->required();
    s_bvs->add_option("--gamma", gamma_raw);
    s_bvs->add_option("--out", out);
    s_bvs->add_option("--report", report_path);

    auto* s_sk = app.add_subcommand("seed-sk", "degree-2 seed from a GOE instance");
    s_sk->add_option("--instance", in_path)->required();
    s_sk->add_option("--k", k);
    s_sk->add_option("--gamma", gamma_raw);
    s_sk->add_option("--out", out);
    s_sk->add_option("--report", report_path);

    auto* s_mc = app.add_subcommand("seed-maxcut", "degree-2 seed from a regular graph");
    s_mc->add_option("--instance", in_path)->required();
    s_mc->add_option("--eps", eps);
    s_mc->add_option("--out", out);
    s_mc->add_option("--report", report_path);

    auto* c_lift = app.add_subcommand("lift", "lift a degree-2 solution to degree 4");
    c_lift->add_option("--in", in_path)->required();
    c_lift->add_option("--mode", mode)->check(CLI::IsMember({"certified", "tight"}));
    c_lift->add_option("--objective", objective_path);
    c_lift->add_option("--out", out);
    c_lift->add_option("--report", report_path);
    c_lift->add_option("--dense-ceiling", dense_ceiling);
    c_lift->add_option("--tol", tol);

    auto* c_verify = app.add_subcommand("verify", "check degree-4 feasibility");
    c_verify->add_option("--in", in_path)->required();
    c_verify->add_option("--degree2", degree2_path);
    c_verify->add_option("--objective", objective_path);
    c_verify->add_option("--report", report_path);
    c_verify->add_option("--tol", tol);

    auto* c_cert = app.add_subcommand("certify", "error-component norm certificates");
    c_cert->add_option("--in", in_path)->required();
    c_cert->add_option("--report", report_path);
    c_cert->add_option("--ceiling", m2_ceiling);

    auto* c_conv = app.add_subcommand("converge", "finite-kappa convergence study");
    c_conv->add_option("--n", n)->required();
    c_conv->add_option("--kappas", kappas)->delimiter(',');
    c_conv->add_option("--seed", seed);
    c_conv->add_option("--out", out);

    auto* c_pc = app.add_subcommand("pseudocal-demo", "print pseudocalibration coefficients");
    c_pc->add_option("--n", n)->required();
    c_pc->add_option("--d", d)->required();
    c_pc->add_option("--max-total", max_total);

    auto* c_rep = app.add_subcommand("report", "summarize artifacts");
    c_rep->add_option("files", report_files)->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen_goe->parsed()) {
            auto inst = instances::sample_goe(n, seed);
            json artifact = io::dense_to_json(
                inst.g,
                {{"kind", "goe"}, {"n", n}, {"rng_seed", seed}, {"rng", CounterRng::kAlgorithm}});
            artifact["config"] = config_echo("gen-goe", {{"n", n}, {"seed", seed}});
            emit(out, artifact);
            return 0;
        }
        if (gen_reg->parsed()) {
            auto g = instances::sample_regular_graph(n, d, seed);
            json artifact = io::graph_to_json(g);
            artifact["config"] = config_echo("gen-regular", {{"n", n}, {"d", d}, {"seed", seed}});
            emit(out, artifact);
            return 0;
        }
        if (gen_sub->parsed()) {
            auto inst = instances::sample_gaussian_matrix(n, d, seed);
            json artifact = io::dense_to_json(inst.mg, {{"kind", "subspace"},
                                                        {"n", n},
                                                        {"d", d},
                                                        {"rng_seed", seed},
                                                        {"rng", CounterRng::kAlgorithm}});
            artifact["config"] = config_echo("gen-subspace", {{"n", n}, {"d", d}, {"seed", seed}});
            emit(out, artifact);
            return 0;
        }
        if (gamma_raw >= 0) gamma = gamma_raw;
        if (s_bvs->parsed()) {
            json j = io::load_json(in_path);
            if (j.value("kind", "") != "dense") throw MalformedInput("expected a dense instance");
            instances::SubspaceInstance inst;
            inst.mg = io::matrix_from_json(j.at("a"));
            inst.n = static_cast<int>(inst.mg.rows());
            inst.d = static_cast<int>(inst.mg.cols());
            inst.rng_seed = j.value("provenance", json::object()).value("rng_seed", 0ULL);
            seeds::BvsSeedReport rep;
            auto sol = seeds::seed_boolean_vector(inst, gamma, &rep);
            json artifact = io::degree2_to_json(sol);
            artifact["config"] =
                config_echo("seed-bvs", {{"instance", in_path}, {"gamma", gamma_raw}});
            emit(out, artifact);
            if (!report_path.empty())
                io::save_json(report_path, {{"schema", "soslift/1"},
                                            {"kind", "bvs_seed_report"},
                                            {"gamma_eff", rep.gamma_eff},
                                            {"gamma_paper", rep.gamma_paper},
                                            {"objective_scaled", rep.objective_scaled}});
            return 0;
        }
        if (s_sk->parsed()) {
            json j = io::load_json(in_path);
            if (j.value("kind", "") != "dense") throw MalformedInput("expected a dense instance");
            instances::GOEInstance inst;
            inst.g = io::matrix_from_json(j.at("a"));
            inst.n = static_cast<int>(inst.g.rows());
            inst.rng_seed = j.value("provenance", json::object()).value("rng_seed", 0ULL);
            const int k_eff = k > 0 ? k : static_cast<int>(std::ceil(std::pow(inst.n, 0.7)));
            seeds::SkSeedReport rep;
            auto sol = seeds::seed_sk(inst, k_eff, gamma, &rep);
            json artifact = io::degree2_to_json(sol);
            artifact["config"] =
                config_echo("seed-sk", {{"instance", in_path}, {"k", k_eff}, {"gamma", gamma_raw}});
            emit(out, artifact);
            if (!report_path.empty())
                io::save_json(report_path,
                              {{"schema", "soslift/1"},
                               {"kind", "sk_seed_report"},
                               {"k", rep.k},
                               {"gamma_eff", rep.gamma_eff},
                               {"lambda_k", rep.lambda_k},
                               {"objective_normalized", rep.objective_normalized},
                               {"term_projector", rep.term_projector},
                               {"term_diag", rep.term_diag},
                               {"identity_residual", rep.identity_residual},
                               {"chain_rhs", rep.chain_rhs},
                               {"parisi_reference", 2 * kParisiReference}});
            return 0;
        }
        if (s_mc->parsed()) {
            auto g = io::graph_from_json(io::load_json(in_path));
            seeds::MaxCutSeedReport rep;
            auto sol = seeds::seed_maxcut(g, eps, &rep);
            json artifact = io::degree2_to_json(sol);
            artifact["config"] = config_echo("seed-maxcut", {{"instance", in_path}, {"eps", eps}});
            emit(out, artifact);
            if (!report_path.empty())
                io::save_json(report_path,
                              {{"schema", "soslift/1"},
                               {"kind", "maxcut_seed_report"},
                               {"epsilon", rep.epsilon},
                               {"C", rep.C},
                               {"amp", rep.amp},
                               {"rho", rep.rho},
                               {"bad_count", rep.bad_count},
                               {"lambda2", rep.lambda2},
                               {"lambda_min_w", rep.lambda_min_w},
                               {"edge_value_closed_form", rep.edge_value_closed_form},
                               {"objective", rep.objective},
                               {"max_row_norm", rep.max_row_norm},
                               {"spectral_norm", rep.spectral_norm},
                               {"obs_kappa_fit", rep.obs_kappa_fit},
                               {"friedman_threshold", 2 * std::sqrt(g.d - 1.0)},
                               {"spectral_cut_reference", 0.5 + std::sqrt(g.d - 1.0) / g.d}});
            return 0;
        }
        if (c_lift->parsed())
            return run_lift(in_path, mode, objective_path, out, report_path, dense_ceiling, tol);
        if (c_verify->parsed())
            return run_verify(in_path, degree2_path, objective_path, report_path, tol);
        if (c_cert->parsed()) return run_certify(in_path, report_path, m2_ceiling);
        if (c_conv->parsed()) return run_converge(n, kappas, seed, out);
        if (c_pc->parsed()) return run_pseudocal_demo(n, d, max_total);
        if (c_rep->parsed()) return run_report(report_files);
    } catch (const MalformedInput& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const InfeasibleInput& e) {
        std::fprintf(stderr, "infeasible input: %s\n", e.what());
        return 1;
    } catch (const CeilingExceeded& e) {
        std::fprintf(stderr, "ceiling exceeded: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 1;
}

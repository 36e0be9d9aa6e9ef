// Batch experiment runner: every verification in the library is exposed as a
// subcommand taking a JSON config and writing a JSON report. Exit status is 0
// when every per-item pass flag is true, 1 on any failure, 2 on config errors.

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "dirform/diffusion.hpp"
#include "dirform/forms.hpp"
#include "dirform/inequalities.hpp"
#include "dirform/measures.hpp"
#include "dirform/report.hpp"
#include "dirform/simplex.hpp"

using nlohmann::json;
using namespace dirform;

namespace {

std::string iso_timestamp() {
    auto now = std::chrono::system_clock::now();
    std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%FT%TZ", std::gmtime(&t));
    return buf;
}

std::vector<MultiIndex> monomials_up_to(std::size_t n_vars, unsigned max_degree,
                                        bool include_constant) {
    std::vector<MultiIndex> out;
    MultiIndex k(n_vars, 0);
    for (;;) {
        unsigned deg = 0;
        for (unsigned e : k) deg += e;
        if (deg <= max_degree && (include_constant || deg > 0)) out.push_back(k);
        std::size_t pos = 0;
        while (pos < n_vars) {
            if (++k[pos] <= max_degree) break;
            k[pos++] = 0;
        }
        if (pos == n_vars) break;
    }
    std::sort(out.begin(), out.end(), [](const MultiIndex& a, const MultiIndex& b) {
        unsigned da = 0, db = 0;
        for (unsigned e : a) da += e;
        for (unsigned e : b) db += e;
        if (da != db) return da < db;
        return a < b;
    });
    return out;
}

struct RunResult {
    json results;
    bool pass = true;
    json extra; // merged into the report root
};

RunResult run_sample(const json& cfg) {
    DirichletParams params = io::parse_params(cfg.at("params"));
    std::size_t n = cfg.at("n_samples").get<std::size_t>();
    RngStream rng(cfg.at("seed").get<std::uint64_t>());
    json rows = json::array();
    for (std::size_t k = 0; k < n; ++k)
        rows.push_back(sample(params, rng).coords());
    return {json{{"samples", rows}}, true, {}};
}

RunResult run_moments(const json& cfg) {
    DirichletParams params = io::parse_params(cfg.at("params"));
    std::size_t n = cfg.at("n_samples").get<std::size_t>();
    std::uint64_t seed = cfg.at("seed").get<std::uint64_t>();
    double sigma = cfg.value("sigma", 4.0);

    std::vector<MultiIndex> kappas;
    if (cfg.contains("kappas"))
        for (const auto& j : cfg.at("kappas")) kappas.push_back(j.get<MultiIndex>());
    else
        kappas = monomials_up_to(params.dim(), cfg.value("max_degree", 2u), false);

    RngStream rng(seed);
    std::vector<double> sums(kappas.size(), 0.0), sums2(kappas.size(), 0.0);
    for (std::size_t k = 0; k < n; ++k) {
        SimplexPoint x = sample(params, rng);
        for (std::size_t j = 0; j < kappas.size(); ++j) {
            double v = CylinderFunction::monomial(kappas[j]).eval(x);
            sums[j] += v;
            sums2[j] += v * v;
        }
    }
    json rows = json::array();
    bool pass = true;
    for (std::size_t j = 0; j < kappas.size(); ++j) {
        MonteCarloEstimate e = mc_from_sums(sums[j], sums2[j], n, seed);
        double exact = moment(params, kappas[j]);
        bool ok = std::abs(e.mean - exact) <= sigma * e.stderr_ + 1e-15;
        pass = pass && ok;
        rows.push_back({{"kappa", kappas[j]},
                        {"closed_form", exact},
                        {"mean", e.mean},
                        {"stderr", e.stderr_},
                        {"pass", ok}});
    }
    return {json{{"moments", rows}}, pass, {}};
}

RunResult run_verify_projection(const json& cfg) {
    AlphaFamily family = io::parse_family(cfg.at("family"));
    std::size_t n = cfg.at("n").get<std::size_t>();
    std::size_t m = cfg.at("m").get<std::size_t>();
    std::size_t n_samples = cfg.at("n_samples").get<std::size_t>();
    std::uint64_t seed = cfg.at("seed").get<std::uint64_t>();
    double sigma = cfg.value("sigma", 3.0);

    std::vector<CylinderFunction> funcs;
    if (cfg.contains("functions"))
        funcs = io::parse_functions(cfg.at("functions"));
    else
        for (const auto& k : monomials_up_to(m, cfg.value("max_degree", 3u), true))
            funcs.push_back(CylinderFunction::monomial(k));

    auto pairs = verify_projection_family(funcs, family, n, m, n_samples, seed);
    json rows = json::array();
    bool pass = true;
    for (std::size_t j = 0; j < funcs.size(); ++j) {
        const auto& [lhs, rhs] = pairs[j];
        double gap = std::abs(lhs.mean - rhs.mean);
        double slack = sigma * std::sqrt(lhs.stderr_ * lhs.stderr_ +
                                         rhs.stderr_ * rhs.stderr_);
        bool ok = gap <= slack + 1e-15;
        pass = pass && ok;
        rows.push_back({{"function", io::function_to_json(funcs[j])},
                        {"lhs", io::estimate_to_json(lhs, "direct")},
                        {"rhs", io::estimate_to_json(rhs, "nested")},
                        {"pass", ok}});
    }
    return {json{{"projections", rows}}, pass, {}};
}

RunResult run_check_symmetry(const json& cfg) {
    FormKind kind = io::parse_kind(cfg.at("kind").get<std::string>());
    DirichletParams params = io::parse_params(cfg.at("params"));
    std::string method_s = cfg.at("method").get<std::string>();
    SymmetryMethod method = method_s == "quadrature" ? SymmetryMethod::Quadrature
                                                     : SymmetryMethod::MonteCarlo;
    std::size_t n_or_order = method == SymmetryMethod::Quadrature
                                 ? cfg.value("order", 64u)
                                 : cfg.at("n_samples").get<std::size_t>();
    std::uint64_t seed = cfg.value("seed", std::uint64_t{0});
    double tol = cfg.value("tol", 1e-8);

    std::vector<CylinderFunction> funcs;
    if (cfg.contains("functions"))
        funcs = io::parse_functions(cfg.at("functions"));
    else
        for (const auto& k : monomials_up_to(params.dim(), cfg.value("max_degree", 3u), true))
            funcs.push_back(CylinderFunction::monomial(k));

    json rows = json::array();
    bool pass = true;
    for (std::size_t a = 0; a < funcs.size(); ++a)
        for (std::size_t b = 0; b < funcs.size(); ++b) {
            SymmetryResult res =
                check_symmetry(kind, funcs[a], funcs[b], params, method, n_or_order, seed);
            bool ok = method == SymmetryMethod::Quadrature
                          ? std::abs(res.residual) <= tol
                          : std::abs(res.residual) <= 3.0 * res.stderr_ + 1e-12;
            pass = pass && ok;
            rows.push_back({{"f", io::function_to_json(funcs[a])},
                            {"g", io::function_to_json(funcs[b])},
                            {"residual", res.residual},
                            {"stderr", res.stderr_},
                            {"pass", ok}});
        }
    return {json{{"residuals", rows}}, pass, {}};
}

RunResult run_gap(const json& cfg) {
    FormKind kind = io::parse_kind(cfg.at("kind").get<std::string>());
    DirichletParams params = io::parse_params(cfg.at("params"));
    std::size_t n_samples = cfg.at("n_samples").get<std::size_t>();
    std::uint64_t seed = cfg.at("seed").get<std::uint64_t>();

    std::vector<CylinderFunction> funcs;
    if (cfg.contains("functions"))
        funcs = io::parse_functions(cfg.at("functions"));
    else
        funcs = default_test_family(params, params.dim(), cfg.value("max_degree", 2u));

    double gap = rayleigh_gap(kind, params, funcs, n_samples, seed);
    bool pass = true;
    json results{{"gap", gap}, {"poincare_constant", poincare_constant(kind, params)}};
    if (cfg.contains("expected")) {
        double expected = cfg.at("expected").get<double>();
        double rel_tol = cfg.value("rel_tol", 0.05);
        pass = std::abs(gap - expected) <= rel_tol * std::abs(expected);
        results["expected"] = expected;
        results["rel_tol"] = rel_tol;
    }
    return {results, pass, {}};
}

RunResult run_certify_poincare(const json& cfg) {
    FormKind kind = io::parse_kind(cfg.at("kind").get<std::string>());
    DirichletParams params = io::parse_params(cfg.at("params"));
    std::size_t n_samples = cfg.at("n_samples").get<std::size_t>();
    std::uint64_t seed = cfg.at("seed").get<std::uint64_t>();
    double constant = poincare_constant(kind, params);

    std::vector<CylinderFunction> funcs;
    if (cfg.contains("functions"))
        funcs = io::parse_functions(cfg.at("functions"));
    else
        funcs = default_test_family(params, params.dim(), cfg.value("max_degree", 3u));

    FormSpec spec = kind == FormKind::Type1 ? FormSpec::type1() : FormSpec::type2();
    json rows = json::array();
    bool pass = true;
    std::size_t idx = 0;
    for (const auto& f : funcs) {
        MonteCarloEstimate var = estimate_variance(f, params, n_samples,
                                                   seed + 2 * idx);
        MonteCarloEstimate energy =
            estimate_form(spec, f, f, params, n_samples, seed + 2 * idx + 1);
        double slack = 3.0 * std::sqrt(var.stderr_ * var.stderr_ +
                                       constant * constant * energy.stderr_ *
                                           energy.stderr_);
        bool ok = var.mean <= constant * energy.mean + slack + 1e-12;
        pass = pass && ok;
        rows.push_back({{"function", io::function_to_json(f)},
                        {"variance", io::estimate_to_json(var, "variance")},
                        {"energy", io::estimate_to_json(energy, "dirichlet_form")},
                        {"pass", ok}});
        ++idx;
    }
    return {json{{"constant", constant}, {"checks", rows}}, pass, {}};
}

RunResult run_certify_super_poincare(const json& cfg) {
    FormKind kind = io::parse_kind(cfg.at("kind").get<std::string>());
    AlphaFamily family = io::parse_family(cfg.at("family"));
    WeightSequence weights = io::parse_weights(cfg.at("weights"));
    std::vector<double> r_grid = cfg.at("r_grid").get<std::vector<double>>();
    std::size_t m = cfg.at("m").get<std::size_t>();
    std::size_t n_samples = cfg.at("n_samples").get<std::size_t>();
    std::uint64_t seed = cfg.at("seed").get<std::uint64_t>();
    double c_n = cfg.value("c_n", 0.0);

    std::vector<CylinderFunction> funcs;
    if (cfg.contains("functions"))
        funcs = io::parse_functions(cfg.at("functions"));
    else
        funcs = default_test_family(family.truncate(m), std::min<std::size_t>(m, 4),
                                    cfg.value("max_degree", 3u));

    CertificateReport report = certify_super_poincare(kind, family, weights, r_grid,
                                                      funcs, m, n_samples, seed, c_n);
    if (cfg.contains("csv_output"))
        io::write_text(cfg.at("csv_output").get<std::string>(),
                       io::certificate_to_csv(report));
    return {io::certificate_to_json(report), report.all_pass(), {}};
}

RunResult run_beta_bound(const json& cfg) {
    FormKind kind = io::parse_kind(cfg.at("kind").get<std::string>());
    AlphaFamily family = io::parse_family(cfg.at("family"));
    WeightSequence weights = io::parse_weights(cfg.at("weights"));
    double c_n = cfg.at("c_n").get<double>();
    std::vector<double> r_grid = cfg.at("r_grid").get<std::vector<double>>();

    json rows = json::array();
    for (double r : r_grid) {
        std::size_t n = smallest_n(kind, r, family, weights);
        rows.push_back({{"r", r},
                        {"n", n},
                        {"theta", theta_exponent(family, n)},
                        {"bound", beta_bound({kind, c_n, r, family, weights})}});
    }
    return {json{{"bounds", rows}}, true, {}};
}

RunResult run_simulate(const json& cfg) {
    FormKind kind = io::parse_kind(cfg.at("kind").get<std::string>());
    DirichletParams params = io::parse_params(cfg.at("params"));
    SdeConfig sde(kind, params, cfg.at("dt").get<double>(),
                  cfg.at("steps").get<std::size_t>(),
                  cfg.value("burn_in", std::size_t{0}),
                  cfg.at("seed").get<std::uint64_t>());
    double sigma = cfg.value("sigma", 4.0);
    double floor = cfg.value("systematic_floor", 0.02);

    std::vector<MultiIndex> kappas;
    if (cfg.contains("kappas"))
        for (const auto& j : cfg.at("kappas")) kappas.push_back(j.get<MultiIndex>());
    else
        kappas = monomials_up_to(params.dim(), 2, false);
    std::vector<CylinderFunction> monos;
    for (const auto& k : kappas) monos.push_back(CylinderFunction::monomial(k));

    std::vector<SimplexPoint> trajectory;
    std::vector<SimplexPoint>* traj_ptr = nullptr;
    if (cfg.contains("trajectory_csv")) traj_ptr = &trajectory;

    auto estimates = simulate_moments(sde, monos, traj_ptr);

    if (traj_ptr) {
        std::ostringstream out;
        out.precision(17);
        out << "step";
        for (std::size_t i = 1; i <= params.dim(); ++i) out << ",x" << i;
        out << '\n';
        for (std::size_t t = 0; t < trajectory.size(); ++t) {
            out << t;
            for (std::size_t i = 0; i < params.dim(); ++i)
                out << ',' << trajectory[t][i];
            out << '\n';
        }
        io::write_text(cfg.at("trajectory_csv").get<std::string>(), out.str());
    }

    json rows = json::array();
    bool pass = true;
    for (std::size_t j = 0; j < kappas.size(); ++j) {
        double exact = moment(params, kappas[j]);
        double tol = std::max(sigma * estimates[j].stderr_, floor * std::abs(exact));
        bool ok = std::abs(estimates[j].mean - exact) <= tol;
        pass = pass && ok;
        rows.push_back({{"kappa", kappas[j]},
                        {"closed_form", exact},
                        {"mean", estimates[j].mean},
                        {"stderr", estimates[j].stderr_},
                        {"pass", ok}});
    }
    return {json{{"moments", rows}}, pass, {}};
}

using Handler = std::function<RunResult(const json&)>;

const std::map<std::string, Handler>& handlers() {
    static const std::map<std::string, Handler> table = {
        {"sample", run_sample},
        {"moments", run_moments},
        {"verify-projection", run_verify_projection},
        {"check-symmetry", run_check_symmetry},
        {"gap", run_gap},
        {"certify-poincare", run_certify_poincare},
        {"certify-super-poincare", run_certify_super_poincare},
        {"beta-bound", run_beta_bound},
        {"simulate", run_simulate},
    };
    return table;
}

std::string resolve_output(const json& cfg, const std::string& cli_output,
                           const std::string& subcommand) {
    std::string path = cli_output;
    if (path.empty()) path = cfg.value("output", subcommand + "_report.json");
    if (const char* dir = std::getenv("DIRFORM_OUT_DIR");
        dir && !path.empty() && path.front() != '/')
        path = std::string(dir) + "/" + path;
    return path;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Dirichlet-distribution functional-inequality experiment runner"};
    app.require_subcommand(1);

    std::string config_path;
    std::string output_path;
    for (const auto& [name, handler] : handlers()) {
        auto* sub = app.add_subcommand(name);
        sub->add_option("config", config_path, "JSON experiment config")->required();
        sub->add_option("-o,--output", output_path, "report path (overrides config)");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    const std::string sub = app.get_subcommands().front()->get_name();
    json cfg;
    try {
        cfg = io::load_json(config_path);
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    }

    RunResult result;
    try {
        result = handlers().at(sub)(cfg);
    } catch (const json::exception& e) {
        std::cerr << "config error in " << config_path << ": " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error in " << config_path << ": " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }

    json report{{"schema_version", io::kSchemaVersion},
                {"command", sub},
                {"config", cfg},
                {"results", result.results},
                {"pass", result.pass},
                {"timestamp", iso_timestamp()}};

    std::string out_path = resolve_output(cfg, output_path, sub);
    try {
        io::write_text(out_path, report.dump(2) + "\n");
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    std::cout << (result.pass ? "PASS" : "FAIL") << " " << sub << " -> " << out_path
              << "\n";
    return result.pass ? 0 : 1;
}

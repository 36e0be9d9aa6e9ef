#pragma once

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "forms.hpp"
#include "inequalities.hpp"
#include "measures.hpp"
#include "simplex.hpp"

// JSON config parsing and report serialization shared by the CLI and tests.
namespace dirform::io {

using nlohmann::json;

inline constexpr int kSchemaVersion = 1;

inline FormKind parse_kind(const std::string& s) {
    if (s == "type1") return FormKind::Type1;
    if (s == "type2") return FormKind::Type2;
    throw std::invalid_argument("kind must be \"type1\" or \"type2\"");
}

inline std::string kind_name(FormKind k) {
    return k == FormKind::Type1 ? "type1" : "type2";
}

inline DirichletParams parse_params(const json& j) {
    return DirichletParams(j.at("alphas").get<std::vector<double>>(),
                           j.at("alpha_inf").get<double>());
}

inline json params_to_json(const DirichletParams& p) {
    return json{{"alphas", p.alphas()}, {"alpha_inf", p.alpha_inf()}};
}

inline AlphaFamily parse_family(const json& j) {
    std::string rule = j.at("rule").get<std::string>();
    double a_inf = j.at("alpha_inf").get<double>();
    if (rule == "geometric")
        return AlphaFamily::geometric(j.at("a").get<double>(), j.at("q").get<double>(),
                                      a_inf);
    if (rule == "power_law")
        return AlphaFamily::power_law(j.at("a").get<double>(), j.at("p").get<double>(),
                                      a_inf);
    if (rule == "finite")
        return AlphaFamily::finite(j.at("values").get<std::vector<double>>(), a_inf);
    throw std::invalid_argument("family rule must be geometric, power_law or finite");
}

inline WeightSequence parse_weights(const json& j) {
    std::string rule = j.at("rule").get<std::string>();
    if (rule == "constant") return WeightSequence::constant(j.at("value").get<double>());
    if (rule == "geometric")
        return WeightSequence::geometric(j.at("a").get<double>(), j.at("q").get<double>());
    if (rule == "polynomial")
        return WeightSequence::polynomial(j.at("a").get<double>(),
                                          j.at("p").get<double>());
    if (rule == "table")
        return WeightSequence::table(j.at("head").get<std::vector<double>>(),
                                     j.at("tail").get<double>());
    throw std::invalid_argument(
        "weight rule must be constant, geometric, polynomial or table");
}

// a cylinder function is a list of {exponents, coeff} pairs
inline CylinderFunction parse_function(const json& j) {
    std::map<MultiIndex, double> terms;
    for (const auto& term : j) {
        MultiIndex k = term.at("exponents").get<std::vector<unsigned>>();
        terms[k] += term.at("coeff").get<double>();
    }
    return CylinderFunction(std::move(terms));
}

inline json function_to_json(const CylinderFunction& f) {
    json out = json::array();
    for (const auto& [k, c] : f.terms())
        out.push_back({{"exponents", k}, {"coeff", c}});
    return out;
}

inline std::vector<CylinderFunction> parse_functions(const json& j) {
    std::vector<CylinderFunction> out;
    for (const auto& jf : j) out.push_back(parse_function(jf));
    return out;
}

inline json estimate_to_json(const MonteCarloEstimate& e, const std::string& estimand) {
    return json{{"estimand", estimand},
                {"mean", e.mean},
                {"stderr", e.stderr_},
                {"n_samples", e.n_samples},
                {"seed", e.seed}};
}

inline json certificate_to_json(const CertificateReport& r) {
    json rows = json::array();
    for (std::size_t i = 0; i < r.r_grid.size(); ++i) {
        rows.push_back({{"r", r.r_grid[i]},
                        {"n", r.selected_n[i]},
                        {"theta", r.theta[i]},
                        {"beta_hat", r.beta_hat[i]},
                        {"beta_hat_stderr", r.beta_hat_stderr[i]},
                        {"bound", r.bound[i]},
                        {"pass", static_cast<bool>(r.pass[i])}});
    }
    return json{{"kind", kind_name(r.kind)},
                {"rows", rows},
                {"c_n", r.c_n},
                {"c_n_feasible", r.c_n_feasible},
                {"family_size", r.family_size},
                {"n_samples", r.n_samples},
                {"truncation_m", r.truncation_m},
                {"seed", r.seed},
                {"warnings", r.warnings},
                {"pass", r.all_pass()}};
}

inline std::string certificate_to_csv(const CertificateReport& r) {
    std::ostringstream out;
    out.precision(17);
    out << "r,n,beta_hat,bound,pass\n";
    for (std::size_t i = 0; i < r.r_grid.size(); ++i)
        out << r.r_grid[i] << ',' << r.selected_n[i] << ',' << r.beta_hat[i] << ','
            << r.bound[i] << ',' << (r.pass[i] ? 1 : 0) << '\n';
    return out.str();
}

inline json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    return json::parse(in);
}

inline void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << text;
}

} // namespace dirform::io

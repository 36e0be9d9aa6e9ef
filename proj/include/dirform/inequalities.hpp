#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "forms.hpp"
#include "measures.hpp"
#include "rng.hpp"
#include "simplex.hpp"

namespace dirform {

// Exponent theta = sum_{i<=n} max(1, 2 alpha_i) + (alpha_inf - 1)^+
inline double theta_exponent(const AlphaFamily& family, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 1; i <= n; ++i)
        s += std::max(1.0, 2.0 * family.alpha(i));
    return s + std::max(0.0, family.alpha_inf() - 1.0);
}

inline double theta_exponent(const DirichletParams& params, std::size_t n) {
    if (n > params.dim())
        throw std::invalid_argument("theta_exponent: n exceeds parameter count");
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        s += std::max(1.0, 2.0 * params.alpha(i));
    return s + std::max(0.0, params.alpha_inf() - 1.0);
}

// Smallest n >= 1 with 1/((sum_{i<=n} alpha_i + alpha_inf) inf_{i>n} gamma_i) <= r.
// Both form kinds use the tail infimum past n.
inline std::size_t smallest_n(FormKind /*kind*/, double r, const AlphaFamily& family,
                              const WeightSequence& weights) {
    if (!(r > 0.0))
        throw std::invalid_argument("smallest_n: r must be positive");
    constexpr std::size_t cap = 1000000;
    double head = 0.0;
    for (std::size_t n = 1; n <= cap; ++n) {
        head += family.alpha(n);
        double denom = (head + family.alpha_inf()) * weights.tail_inf(n);
        if (1.0 / denom <= r) return n;
    }
    throw std::domain_error("smallest_n: r below achievable range");
}

struct BetaBoundSpec {
    FormKind kind;
    double c_n;
    double r;
    AlphaFamily params;
    WeightSequence weights = WeightSequence::constant(1.0);
};

// c_n (r/3)^-theta for type 1, c_n (r/2)^-theta for type 2, with n from the
// smallest-n rule and theta from theta_exponent.
inline double beta_bound(const BetaBoundSpec& spec) {
    if (!(spec.c_n > 0.0))
        throw std::invalid_argument("beta_bound: c_n must be positive");
    std::size_t n = smallest_n(spec.kind, spec.r, spec.params, spec.weights);
    double theta = theta_exponent(spec.params, n);
    double divisor = spec.kind == FormKind::Type1 ? 3.0 : 2.0;
    return spec.c_n * std::pow(spec.r / divisor, -theta);
}

// Poincare constant consumed by the proofs. Type 1 (FMW): one over the
// slack-coordinate parameter; type 2 (Stannat): one over the full parameter
// sum.
inline double poincare_constant(FormKind kind, const DirichletParams& params) {
    return kind == FormKind::Type1 ? 1.0 / params.alpha_inf() : 1.0 / params.total();
}

// The three candidate readings of the type-2 mu_2 Poincare constant; the
// statement and proof of the second theorem disagree, so all are reported.
struct PoincareCandidates {
    double tail_reading; // 1/(sum_{i>n} alpha_i + alpha_inf)
    double head_reading; // 1/(sum_{i<=n} alpha_i + alpha_inf)
    double full_reading; // 1/(sum_i alpha_i + alpha_inf)
};

inline PoincareCandidates poincare_candidates(const AlphaFamily& family, std::size_t n) {
    double a_inf = family.alpha_inf();
    return PoincareCandidates{
        1.0 / (family.tail_sum(n + 1) + a_inf),
        1.0 / (family.head_sum(n) + a_inf),
        1.0 / (family.total_alpha() + a_inf),
    };
}

// Variance estimate with a delta-method standard error from the sample's
// central moments.
inline MonteCarloEstimate estimate_variance(const CylinderFunction& f,
                                            const DirichletParams& params,
                                            std::size_t n_samples, std::uint64_t seed) {
    RngStream rng(seed);
    std::vector<double> vals(n_samples);
    double s1 = 0.0;
    for (std::size_t k = 0; k < n_samples; ++k) {
        vals[k] = f.eval(sample(params, rng));
        s1 += vals[k];
    }
    double mean = s1 / static_cast<double>(n_samples);
    double m2 = 0.0, m4 = 0.0;
    for (double v : vals) {
        double d = v - mean;
        m2 += d * d;
        m4 += d * d * d * d;
    }
    m2 /= static_cast<double>(n_samples);
    m4 /= static_cast<double>(n_samples);
    MonteCarloEstimate e;
    e.mean = m2;
    double var_of_var = (m4 - m2 * m2) / static_cast<double>(n_samples);
    e.stderr_ = var_of_var > 0.0 ? std::sqrt(var_of_var) : 0.0;
    e.n_samples = n_samples;
    e.seed = seed;
    return e;
}

// min over the family of E(f,f)/Var(f); an upper-bound probe on the spectral
// gap, sharp when the family contains the extremal function.
inline double rayleigh_gap(FormKind kind, const DirichletParams& params,
                           const std::vector<CylinderFunction>& family,
                           std::size_t n_samples, std::uint64_t seed) {
    std::vector<const CylinderFunction*> nontrivial;
    for (const auto& f : family)
        if (!f.is_constant()) nontrivial.push_back(&f);
    if (nontrivial.empty())
        throw std::invalid_argument("rayleigh_gap: family has no non-constant member");

    FormSpec spec = kind == FormKind::Type1 ? FormSpec::type1() : FormSpec::type2();
    RngStream rng(seed);
    std::size_t nf = nontrivial.size();
    std::vector<double> sum_f(nf, 0.0), sum_f2(nf, 0.0), sum_g(nf, 0.0);
    for (std::size_t k = 0; k < n_samples; ++k) {
        SimplexPoint x = sample(params, rng);
        for (std::size_t j = 0; j < nf; ++j) {
            double v = nontrivial[j]->eval(x);
            sum_f[j] += v;
            sum_f2[j] += v * v;
            auto g = nontrivial[j]->gradient(x);
            sum_g[j] += carre_du_champ(spec, x, g, g);
        }
    }
    double best = std::numeric_limits<double>::infinity();
    double inv_n = 1.0 / static_cast<double>(n_samples);
    for (std::size_t j = 0; j < nf; ++j) {
        double mean = sum_f[j] * inv_n;
        double var = sum_f2[j] * inv_n - mean * mean;
        if (!(var > 0.0)) continue;
        best = std::min(best, sum_g[j] * inv_n / var);
    }
    return best;
}

// All monomials of total degree <= max_degree in the first n_vars variables
// (constant included), plus the centered linear functions x_i - E[x_i];
// linear functions are extremal for the Poincare constant.
inline std::vector<CylinderFunction> default_test_family(const DirichletParams& params,
                                                         std::size_t n_vars,
                                                         unsigned max_degree = 3) {
    n_vars = std::min(n_vars, params.dim());
    std::vector<CylinderFunction> family;
    // enumerate exponent vectors with total degree <= max_degree
    std::vector<MultiIndex> all;
    std::vector<unsigned> k(n_vars, 0);
    for (;;) {
        unsigned deg = 0;
        for (unsigned e : k) deg += e;
        if (deg <= max_degree) all.push_back(k);
        std::size_t pos = 0;
        while (pos < n_vars) {
            if (++k[pos] <= max_degree) break;
            k[pos++] = 0;
        }
        if (pos == n_vars) break;
    }
    std::sort(all.begin(), all.end(), [](const MultiIndex& a, const MultiIndex& b) {
        unsigned da = 0, db = 0;
        for (unsigned e : a) da += e;
        for (unsigned e : b) db += e;
        if (da != db) return da < db;
        return a < b;
    });
    for (auto& mi : all) family.push_back(CylinderFunction::monomial(mi));
    for (std::size_t i = 1; i <= n_vars; ++i) {
        MultiIndex mi(i, 0);
        mi[i - 1] = 1;
        double mean = moment(params, mi);
        family.push_back(CylinderFunction::coordinate(i) +
                         CylinderFunction::constant(-mean));
    }
    return family;
}

struct CertificateReport {
    FormKind kind;
    std::vector<double> r_grid;
    std::vector<std::size_t> selected_n;
    std::vector<double> theta;
    std::vector<double> beta_hat;
    std::vector<double> beta_hat_stderr;
    std::vector<double> bound;    // empty mirror of r_grid when c_n unset
    std::vector<bool> pass;
    double c_n = 0.0;             // as supplied, 0 when unset
    double c_n_feasible = 0.0;    // max_r beta_hat(r) * (r/k)^theta(r)
    std::size_t family_size = 0;
    std::size_t n_samples = 0;
    std::size_t truncation_m = 0;
    std::uint64_t seed = 0;
    std::vector<std::string> warnings;

    bool all_pass() const {
        return std::all_of(pass.begin(), pass.end(), [](bool b) { return b; });
    }
};

namespace detail {

struct FamilyStats {
    double mean_f2;
    double stderr_f2;
    double mean_abs;
    double stderr_abs;
};

} // namespace detail

// Empirical certification of the weighted super Poincare inequality over a
// polynomial test family. For each grid point r the rule selects n, the
// type-2 denominator level is set to that n (non-trivial weights only), and
// beta_hat(r) = max_f (mu(f^2) - r E~(f,f)) / mu(|f|)^2, clamped below at 1.
// When c_n > 0 the report compares against the paper-shaped bound with
// 3-sigma slack; c_n_feasible is the smallest constant making the bound hold
// on the whole grid.
inline CertificateReport certify_super_poincare(
    FormKind kind, const AlphaFamily& family, const WeightSequence& weights,
    std::vector<double> r_grid, const std::vector<CylinderFunction>& test_family,
    std::size_t truncation_m, std::size_t n_samples, std::uint64_t seed,
    double c_n = 0.0) {
    if (r_grid.empty())
        throw std::invalid_argument("certify_super_poincare: empty r grid");
    for (double r : r_grid)
        if (!(r > 0.0))
            throw std::invalid_argument("certify_super_poincare: r must be positive");
    for (const auto& f : test_family)
        if (f.active_vars() > truncation_m)
            throw std::invalid_argument(
                "certify_super_poincare: test function exceeds truncation");

    DirichletParams params = family.truncate(truncation_m);
    RngStream rng(seed);
    std::vector<SimplexPoint> samples;
    samples.reserve(n_samples);
    for (std::size_t k = 0; k < n_samples; ++k) samples.push_back(sample(params, rng));

    std::size_t nf = test_family.size();

    std::vector<detail::FamilyStats> stats(nf);
    std::vector<std::vector<CylinderFunction>> partials(nf);
    for (std::size_t j = 0; j < nf; ++j) {
        for (std::size_t i = 1; i <= test_family[j].active_vars(); ++i)
            partials[j].push_back(test_family[j].partial(i));
        double s2 = 0.0, s4 = 0.0, sa = 0.0, sa2 = 0.0;
        for (const auto& x : samples) {
            double v = test_family[j].eval(x);
            s2 += v * v;
            s4 += v * v * v * v;
            sa += std::abs(v);
            sa2 += v * v;
        }
        auto e2 = mc_from_sums(s2, s4, n_samples, seed);
        auto ea = mc_from_sums(sa, sa2, n_samples, seed);
        stats[j] = {e2.mean, e2.stderr_, ea.mean, ea.stderr_};
    }

    // the type-1 integrand and the trivial-weight type-2 integrand do not
    // depend on the selected n; cache per distinct level otherwise
    std::map<std::size_t, std::vector<MonteCarloEstimate>> form_cache;
    auto form_values = [&](std::size_t level) -> const std::vector<MonteCarloEstimate>& {
        std::size_t key =
            (kind == FormKind::Type2 && !weights.is_trivial()) ? level : 0;
        auto it = form_cache.find(key);
        if (it != form_cache.end()) return it->second;
        FormSpec spec = kind == FormKind::Type1
                            ? FormSpec::type1(weights)
                            : FormSpec::type2(weights,
                                              key == 0 ? std::optional<std::size_t>{}
                                                       : std::optional<std::size_t>{key});
        std::vector<MonteCarloEstimate> out(nf);
        std::vector<double> g;
        for (std::size_t j = 0; j < nf; ++j) {
            double s = 0.0, s2 = 0.0;
            for (std::size_t k = 0; k < n_samples; ++k) {
                const auto& x = samples[k];
                g.assign(x.dim(), 0.0);
                for (std::size_t i = 0; i < partials[j].size(); ++i)
                    g[i] = partials[j][i].eval(x);
                double v = carre_du_champ(spec, x, g, g);
                s += v;
                s2 += v * v;
            }
            out[j] = mc_from_sums(s, s2, n_samples, seed);
        }
        return form_cache.emplace(key, std::move(out)).first->second;
    };

    CertificateReport report;
    report.kind = kind;
    report.c_n = c_n;
    report.family_size = nf;
    report.n_samples = n_samples;
    report.truncation_m = truncation_m;
    report.seed = seed;
    std::sort(r_grid.begin(), r_grid.end());
    report.r_grid = r_grid;

    const double divisor = kind == FormKind::Type1 ? 3.0 : 2.0;
    std::vector<bool> warned(nf, false);

    for (double r : r_grid) {
        std::size_t n_sel = smallest_n(kind, r, family, weights);
        double theta = theta_exponent(family, n_sel);
        const auto& forms = form_values(n_sel);

        double best = 1.0; // constant functions force beta >= 1
        double best_stderr = 0.0;
        for (std::size_t j = 0; j < nf; ++j) {
            const auto& st = stats[j];
            if (st.mean_abs <= 5.0 * st.stderr_abs) {
                if (!warned[j]) {
                    report.warnings.push_back(
                        "family member " + std::to_string(j) +
                        " skipped: mu(|f|) indistinguishable from 0");
                    warned[j] = true;
                }
                continue;
            }
            double denom = st.mean_abs * st.mean_abs;
            double numer = st.mean_f2 - r * forms[j].mean;
            double val = numer / denom;
            // delta-method stderr, treating the three estimates as independent
            double var = st.stderr_f2 * st.stderr_f2 +
                         r * r * forms[j].stderr_ * forms[j].stderr_;
            double se = std::sqrt(var) / denom +
                        2.0 * std::abs(val) * st.stderr_abs / st.mean_abs;
            if (val > best) {
                best = val;
                best_stderr = se;
            }
        }

        report.selected_n.push_back(n_sel);
        report.theta.push_back(theta);
        report.beta_hat.push_back(best);
        report.beta_hat_stderr.push_back(best_stderr);
        report.c_n_feasible =
            std::max(report.c_n_feasible, best * std::pow(r / divisor, theta));
    }

    for (std::size_t i = 0; i < report.r_grid.size(); ++i) {
        if (c_n > 0.0) {
            double b = c_n * std::pow(report.r_grid[i] / divisor, -report.theta[i]);
            report.bound.push_back(b);
            report.pass.push_back(report.beta_hat[i] <=
                                  b + 3.0 * report.beta_hat_stderr[i]);
        } else {
            report.bound.push_back(0.0);
            report.pass.push_back(true);
        }
    }
    return report;
}

} // namespace dirform

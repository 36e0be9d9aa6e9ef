#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "measures.hpp"
#include "quadrature.hpp"
#include "rng.hpp"
#include "simplex.hpp"

namespace dirform {

enum class FormKind { Type1, Type2 };

// Which carre du champ to evaluate. Trivial weights and no denominator level
// recover the unweighted forms E_1 / E_2 exactly; denominator_level is the
// truncation index n inside the weighted type-2 form.
struct FormSpec {
    FormKind kind;
    WeightSequence weights = WeightSequence::constant(1.0);
    std::optional<std::size_t> denominator_level;

    static FormSpec type1(WeightSequence w = WeightSequence::constant(1.0)) {
        return FormSpec{FormKind::Type1, std::move(w), std::nullopt};
    }
    static FormSpec type2(WeightSequence w = WeightSequence::constant(1.0),
                          std::optional<std::size_t> level = std::nullopt) {
        if (level && w.is_trivial())
            throw std::invalid_argument(
                "FormSpec: denominator level requires non-trivial weights");
        return FormSpec{FormKind::Type2, std::move(w), level};
    }
};

// Pointwise integrand of the Dirichlet form for a pair of gradients.
// type1: (1-|x|_1) sum_i gamma_i x_i gf_i gg_i
// type2: w(x) sum_{ij} gamma_i gamma_j x_i (delta_ij - x_j) gf_i gg_j
inline double carre_du_champ(const FormSpec& spec, const SimplexPoint& x,
                             const std::vector<double>& gf,
                             const std::vector<double>& gg) {
    std::size_t n = x.dim();
    if (gf.size() != n || gg.size() != n)
        throw std::invalid_argument("carre_du_champ: gradient dimension mismatch");
    const bool trivial = spec.weights.is_trivial();

    if (spec.kind == FormKind::Type1) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double term = x[i] * gf[i] * gg[i];
            if (!trivial) term *= spec.weights.at(i + 1);
            s += term;
        }
        return x.slack() * s;
    }

    double weight = 1.0;
    if (spec.denominator_level) {
        std::size_t lvl = *spec.denominator_level;
        double tail = 0.0;
        for (std::size_t i = lvl; i < n; ++i) tail += x[i];
        double denom = 1.0 - tail;
        if (!(denom > 0.0))
            throw std::domain_error("carre_du_champ: singular type-2 weight");
        weight = 1.0 / denom;
    }

    // sum_ij x_i(delta_ij - x_j) a_i b_j = sum_i x_i a_i b_i - (sum x a)(sum x b)
    double diag = 0.0, xa = 0.0, xb = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double a = gf[i], b = gg[i];
        if (!trivial) {
            double g = spec.weights.at(i + 1);
            a *= g;
            b *= g;
        }
        diag += x[i] * a * b;
        xa += x[i] * a;
        xb += x[i] * b;
    }
    return weight * (diag - xa * xb);
}

// Monte Carlo estimate of E(f,g) = mu(Gamma(f,g)) under D(params)
inline MonteCarloEstimate estimate_form(const FormSpec& spec, const CylinderFunction& f,
                                        const CylinderFunction& g,
                                        const DirichletParams& params,
                                        std::size_t n_samples, std::uint64_t seed) {
    if (f.active_vars() > params.dim() || g.active_vars() > params.dim())
        throw std::invalid_argument("estimate_form: function exceeds sampling dimension");
    RngStream rng(seed);
    double s = 0.0, s2 = 0.0;
    for (std::size_t k = 0; k < n_samples; ++k) {
        SimplexPoint x = sample(params, rng);
        double v = carre_du_champ(spec, x, f.gradient(x), g.gradient(x));
        s += v;
        s2 += v * v;
    }
    return mc_from_sums(s, s2, n_samples, seed);
}

// L1 f = sum_i x_i(1-|x|_1) d_ii f + (alpha_i(1-|x|_1) - alpha_inf x_i) d_i f
// L2 f = sum_ij x_i(delta_ij - x_j) d_ij f + sum_i (alpha_i - |alpha|_1 x_i) d_i f
inline double apply_generator(FormKind kind, const CylinderFunction& f,
                              const DirichletParams& params, const SimplexPoint& x) {
    if (x.dim() != params.dim())
        throw std::invalid_argument("apply_generator: dimension mismatch");
    std::size_t n = x.dim();
    std::size_t m = f.active_vars();
    double s = 0.0;

    if (kind == FormKind::Type1) {
        double slack = x.slack();
        for (std::size_t i = 1; i <= std::min(m, n); ++i) {
            s += x[i - 1] * slack * f.hessian(i, i, x);
            s += (params.alpha(i - 1) * slack - params.alpha_inf() * x[i - 1]) *
                 f.partial(i).eval(x);
        }
        // d_i f = 0 for i > m, so the remaining terms vanish
        return s;
    }

    double total = params.total();
    for (std::size_t i = 1; i <= std::min(m, n); ++i) {
        for (std::size_t j = 1; j <= std::min(m, n); ++j) {
            double a = (i == j ? x[i - 1] * (1.0 - x[j - 1])
                               : -x[i - 1] * x[j - 1]);
            s += a * f.hessian(i, j, x);
        }
        s += (params.alpha(i - 1) - total * x[i - 1]) * f.partial(i).eval(x);
    }
    return s;
}

enum class SymmetryMethod { Quadrature, MonteCarlo };

// Residual mu(f Lg) + E(f,g); zero up to quadrature error / MC noise when the
// generator and form belong together.
struct SymmetryResult {
    double residual;
    double stderr_ = 0.0; // zero for quadrature
};

inline SymmetryResult check_symmetry(FormKind kind, const CylinderFunction& f,
                                     const CylinderFunction& g,
                                     const DirichletParams& params,
                                     SymmetryMethod method, std::size_t n_or_order,
                                     std::uint64_t seed = 0) {
    FormSpec spec = (kind == FormKind::Type1) ? FormSpec::type1() : FormSpec::type2();
    auto integrand = [&](const SimplexPoint& x) {
        double v = f.eval(x) * apply_generator(kind, g, params, x);
        return v + carre_du_champ(spec, x, f.gradient(x), g.gradient(x));
    };

    if (method == SymmetryMethod::Quadrature) {
        if (params.dim() > 2)
            throw std::invalid_argument("check_symmetry: quadrature limited to n <= 2");
        for (double a : params.alphas())
            if (a < 1.0)
                throw std::invalid_argument(
                    "check_symmetry: quadrature needs density exponents >= 0");
        if (params.alpha_inf() < 1.0)
            throw std::invalid_argument(
                "check_symmetry: quadrature needs density exponents >= 0");
        std::size_t order = n_or_order == 0 ? 64 : n_or_order;
        double r;
        if (params.dim() == 1) {
            r = integrate_interval(
                [&](double t) {
                    SimplexPoint x(std::vector<double>{t});
                    return std::exp(log_density(params, x)) * integrand(x);
                },
                order);
        } else {
            r = integrate_triangle(
                [&](double u, double v) {
                    SimplexPoint x(std::vector<double>{u, v});
                    return std::exp(log_density(params, x)) * integrand(x);
                },
                order);
        }
        return SymmetryResult{r, 0.0};
    }

    RngStream rng(seed);
    double s = 0.0, s2 = 0.0;
    std::size_t n_samples = n_or_order;
    for (std::size_t k = 0; k < n_samples; ++k) {
        SimplexPoint x = sample(params, rng);
        double v = integrand(x);
        s += v;
        s2 += v * v;
    }
    MonteCarloEstimate e = mc_from_sums(s, s2, n_samples, seed);
    return SymmetryResult{e.mean, e.stderr_};
}

} // namespace dirform

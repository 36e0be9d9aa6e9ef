#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "rng.hpp"
#include "simplex.hpp"

namespace dirform {

struct MonteCarloEstimate {
    double mean = 0.0;
    double stderr_ = 0.0;
    std::size_t n_samples = 0;
    std::uint64_t seed = 0;
};

inline MonteCarloEstimate mc_from_sums(double sum, double sum_sq, std::size_t n,
                                       std::uint64_t seed) {
    MonteCarloEstimate e;
    e.n_samples = n;
    e.seed = seed;
    e.mean = sum / static_cast<double>(n);
    double var = sum_sq / static_cast<double>(n) - e.mean * e.mean;
    e.stderr_ = var > 0.0 ? std::sqrt(var / static_cast<double>(n)) : 0.0;
    return e;
}

// log of the Dirichlet density; log-gamma throughout. Interior points always
// work; boundary points only when no exponent is negative there. The
// remainder 1 - |x|_1 can be supplied by callers that know it without
// cancellation (quadrature maps pinning points near the diagonal edge).
inline double log_density(const DirichletParams& params, const SimplexPoint& x,
                          double remainder) {
    if (x.dim() != params.dim())
        throw std::invalid_argument("log_density: dimension mismatch");
    double log_norm = std::lgamma(params.total());
    for (double a : params.alphas()) log_norm -= std::lgamma(a);
    log_norm -= std::lgamma(params.alpha_inf());

    double s = log_norm;
    for (std::size_t i = 0; i < x.dim(); ++i) {
        double e = params.alpha(i) - 1.0;
        if (x[i] <= 0.0) {
            if (e < 0.0)
                throw std::domain_error("log_density: density singular at boundary");
            if (e > 0.0) return -std::numeric_limits<double>::infinity();
        } else {
            s += e * std::log(x[i]);
        }
    }
    double slack = remainder;
    double e_inf = params.alpha_inf() - 1.0;
    if (slack <= 0.0) {
        if (e_inf < 0.0)
            throw std::domain_error("log_density: density singular at boundary");
        if (e_inf > 0.0) return -std::numeric_limits<double>::infinity();
    } else {
        s += e_inf * std::log(slack);
    }
    return s;
}

inline double log_density(const DirichletParams& params, const SimplexPoint& x) {
    return log_density(params, x, x.slack());
}

// E[prod x_i^kappa_i] via gamma ratios
inline double moment(const DirichletParams& params, const MultiIndex& kappa) {
    if (kappa.size() > params.dim())
        throw std::invalid_argument("moment: multi-index longer than parameter vector");
    double total = params.total();
    double deg = 0.0;
    for (unsigned k : kappa) deg += k;
    double lg = std::lgamma(total) - std::lgamma(total + deg);
    for (std::size_t i = 0; i < kappa.size(); ++i)
        lg += std::lgamma(params.alpha(i) + kappa[i]) - std::lgamma(params.alpha(i));
    return std::exp(lg);
}

// Gamma-normalization draw from D(alpha_1..alpha_n, alpha_inf) on Delta^(n)
inline SimplexPoint sample(const DirichletParams& params, RngStream& rng) {
    std::size_t n = params.dim();
    std::vector<double> g(n);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        g[i] = rng.gamma(params.alpha(i));
        total += g[i];
    }
    total += rng.gamma(params.alpha_inf());
    for (double& v : g) v /= total;
    return SimplexPoint(std::move(g));
}

// Partition property: summed coordinates over a partition are Dirichlet with
// summed parameters. Index sets are 1-based and must cover {1..n} exactly.
inline DirichletParams aggregate(const DirichletParams& params,
                                 const std::vector<std::vector<std::size_t>>& partition) {
    std::set<std::size_t> seen;
    std::size_t count = 0;
    std::vector<double> beta;
    beta.reserve(partition.size());
    for (const auto& block : partition) {
        if (block.empty())
            throw std::invalid_argument("aggregate: empty partition block");
        double b = 0.0;
        for (std::size_t idx : block) {
            if (idx < 1 || idx > params.dim())
                throw std::invalid_argument("aggregate: index out of range");
            if (!seen.insert(idx).second)
                throw std::invalid_argument("aggregate: overlapping partition blocks");
            b += params.alpha(idx - 1);
            ++count;
        }
        beta.push_back(b);
    }
    if (count != params.dim())
        throw std::invalid_argument("aggregate: partition does not cover all indices");
    return DirichletParams(std::move(beta), params.alpha_inf());
}

inline SimplexPoint aggregate_point(const SimplexPoint& x,
                                    const std::vector<std::vector<std::size_t>>& partition) {
    std::vector<double> y;
    y.reserve(partition.size());
    for (const auto& block : partition) {
        double s = 0.0;
        for (std::size_t idx : block) s += x[idx - 1];
        y.push_back(std::min(s, 1.0));
    }
    return SimplexPoint(std::move(y));
}

// mu_1 on Delta^(n) and mu_2^(m) on Delta^(m-n)
struct SplitMeasures {
    DirichletParams mu1;
    DirichletParams mu2;
    std::size_t n;
    std::size_t m;
};

inline SplitMeasures split(const AlphaFamily& family, std::size_t n, std::size_t m) {
    if (!(n >= 1 && n < m))
        throw std::invalid_argument("split: need 1 <= n < m");
    double tail = family.tail_sum(m);
    if (!(tail > 0.0))
        throw std::invalid_argument("split: tail mass must be positive");

    std::vector<double> a1;
    for (std::size_t i = 1; i <= n; ++i) a1.push_back(family.alpha(i));
    DirichletParams mu1(std::move(a1), family.alpha_inf());

    std::vector<double> a2;
    for (std::size_t i = n + 1; i < m; ++i) a2.push_back(family.alpha(i));
    a2.push_back(tail);
    DirichletParams mu2(std::move(a2), family.head_sum(n) + family.alpha_inf());
    return SplitMeasures{std::move(mu1), std::move(mu2), n, m};
}

// T_m: (x, y) in Delta^(n) x Delta^(m-n) -> Delta^(m); the head block is
// scaled by (1 - |y|_1), the tail block is copied.
inline SimplexPoint map_T(const SimplexPoint& x, const SimplexPoint& y) {
    double scale = 1.0 - y.l1_norm();
    std::vector<double> z;
    z.reserve(x.dim() + y.dim());
    for (std::size_t i = 0; i < x.dim(); ++i) z.push_back(x[i] * scale);
    for (std::size_t i = 0; i < y.dim(); ++i) z.push_back(y[i]);
    return SimplexPoint(std::move(z));
}

// det(grad T_m^{-1}(y)) = (1 - sum of tail coordinates)^(-n)
inline double jacobian_det_T_inverse(const std::vector<double>& tail, std::size_t n) {
    double s = 0.0;
    for (double t : tail) s += t;
    double slack = 1.0 - s;
    if (!(slack > 0.0))
        throw std::domain_error("jacobian_det_T_inverse: tail sum reaches 1");
    return std::pow(slack, -static_cast<double>(n));
}

// Monte Carlo check of the projection identity: direct sampling of mu^(m)
// versus the nested mu_1 (x) mu_2^(m) sampling through T_m.
inline std::pair<MonteCarloEstimate, MonteCarloEstimate> verify_projection(
    const CylinderFunction& f, const AlphaFamily& family, std::size_t n, std::size_t m,
    std::size_t n_samples, std::uint64_t seed) {
    if (f.active_vars() > m)
        throw std::invalid_argument("verify_projection: f needs more than m variables");

    DirichletParams direct = family.truncate(m);
    SplitMeasures sm = split(family, n, m);

    RngStream base(seed);
    RngStream lhs_rng = base.substream(0);
    RngStream rhs_rng = base.substream(1);

    double ls = 0.0, ls2 = 0.0, rs = 0.0, rs2 = 0.0;
    for (std::size_t k = 0; k < n_samples; ++k) {
        double v = f.eval(sample(direct, lhs_rng));
        ls += v;
        ls2 += v * v;

        SimplexPoint x = sample(sm.mu1, rhs_rng);
        SimplexPoint y = sample(sm.mu2, rhs_rng);
        double w = f.eval(map_T(x, y));
        rs += w;
        rs2 += w * w;
    }
    return {mc_from_sums(ls, ls2, n_samples, seed),
            mc_from_sums(rs, rs2, n_samples, seed)};
}

// Batched variant sharing one sample set across a whole test family; results
// match per-function runs up to the shared RNG stream.
inline std::vector<std::pair<MonteCarloEstimate, MonteCarloEstimate>>
verify_projection_family(const std::vector<CylinderFunction>& family_f,
                         const AlphaFamily& family, std::size_t n, std::size_t m,
                         std::size_t n_samples, std::uint64_t seed) {
    DirichletParams direct = family.truncate(m);
    SplitMeasures sm = split(family, n, m);

    RngStream base(seed);
    RngStream lhs_rng = base.substream(0);
    RngStream rhs_rng = base.substream(1);

    std::size_t nf = family_f.size();
    std::vector<double> ls(nf, 0.0), ls2(nf, 0.0), rs(nf, 0.0), rs2(nf, 0.0);
    for (std::size_t k = 0; k < n_samples; ++k) {
        SimplexPoint zl = sample(direct, lhs_rng);
        SimplexPoint x = sample(sm.mu1, rhs_rng);
        SimplexPoint y = sample(sm.mu2, rhs_rng);
        SimplexPoint zr = map_T(x, y);
        for (std::size_t j = 0; j < nf; ++j) {
            double v = family_f[j].eval(zl);
            double w = family_f[j].eval(zr);
            ls[j] += v;
            ls2[j] += v * v;
            rs[j] += w;
            rs2[j] += w * w;
        }
    }
    std::vector<std::pair<MonteCarloEstimate, MonteCarloEstimate>> out;
    out.reserve(nf);
    for (std::size_t j = 0; j < nf; ++j)
        out.emplace_back(mc_from_sums(ls[j], ls2[j], n_samples, seed),
                         mc_from_sums(rs[j], rs2[j], n_samples, seed));
    return out;
}

} // namespace dirform

#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "forms.hpp"
#include "measures.hpp"
#include "rng.hpp"
#include "simplex.hpp"

namespace dirform {

// Euler-Maruyama discretization of the two diffusions. Generator convention:
// L = sum a_ij d_ij + sum b_i d_i with a = sigma sigma^T / 2, so the noise
// covariance per step is 2 a dt (the generators carry no 1/2).
struct SdeConfig {
    FormKind kind;
    DirichletParams params;
    double dt;
    std::size_t steps;
    std::size_t burn_in = 0;
    std::uint64_t seed = 0;
    bool zero_noise = false; // diagnostic: pure drift flow

    SdeConfig(FormKind k, DirichletParams p, double dt_, std::size_t steps_,
              std::size_t burn_in_ = 0, std::uint64_t seed_ = 0)
        : kind(k), params(std::move(p)), dt(dt_), steps(steps_), burn_in(burn_in_),
          seed(seed_) {
        if (!(dt > 0.0)) throw std::invalid_argument("SdeConfig: dt must be positive");
        if (steps == 0) throw std::invalid_argument("SdeConfig: steps must be positive");
        if (burn_in >= steps)
            throw std::invalid_argument("SdeConfig: burn_in must be below steps");
        if (dt * params.total() >= 0.5)
            throw std::invalid_argument("SdeConfig: dt * |alpha|_1 must be < 0.5");
    }
};

namespace detail {

// Pivoted Cholesky of a symmetric PSD matrix (row-major, n x n); pivots below
// tol are truncated to rank deficiency. Returns L with A ~= L L^T.
inline std::vector<double> pivoted_cholesky(std::vector<double> a, std::size_t n,
                                            double tol = 1e-14) {
    std::vector<std::size_t> perm(n);
    for (std::size_t i = 0; i < n; ++i) perm[i] = i;
    std::vector<double> l(n * n, 0.0);
    std::size_t rank = 0;
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t p = k;
        for (std::size_t i = k + 1; i < n; ++i)
            if (a[perm[i] * n + perm[i]] > a[perm[p] * n + perm[p]]) p = i;
        std::swap(perm[k], perm[p]);
        double piv = a[perm[k] * n + perm[k]];
        if (piv <= tol) break;
        double sq = std::sqrt(piv);
        l[perm[k] * n + k] = sq;
        for (std::size_t i = k + 1; i < n; ++i)
            l[perm[i] * n + k] = a[perm[i] * n + perm[k]] / sq;
        for (std::size_t i = k + 1; i < n; ++i)
            for (std::size_t j = k + 1; j < n; ++j)
                a[perm[i] * n + perm[j]] -= l[perm[i] * n + k] * l[perm[j] * n + k];
        ++rank;
    }
    l.resize(n * n);
    (void)rank;
    return l;
}

// clamp negatives to zero, rescale if the total exceeds 1
inline std::vector<double> project_to_simplex(std::vector<double> x) {
    double s = 0.0;
    for (double& v : x) {
        if (v < 0.0) v = 0.0;
        if (v > 1.0) v = 1.0;
        s += v;
    }
    if (s > 1.0)
        for (double& v : x) v /= s;
    return x;
}

} // namespace detail

inline SimplexPoint step(const SdeConfig& config, const SimplexPoint& x, RngStream& rng) {
    std::size_t n = config.params.dim();
    if (x.dim() != n) throw std::invalid_argument("step: dimension mismatch");
    const double dt = config.dt;
    std::vector<double> next(n);

    if (config.kind == FormKind::Type1) {
        double slack = x.slack();
        for (std::size_t i = 0; i < n; ++i) {
            double drift = config.params.alpha(i) * slack -
                           config.params.alpha_inf() * x[i];
            double diff = 2.0 * x[i] * slack;
            double noise =
                config.zero_noise ? 0.0 : std::sqrt(std::max(diff, 0.0) * dt) * rng.normal();
            next[i] = x[i] + drift * dt + noise;
        }
    } else {
        double total = config.params.total();
        // sigma sigma^T = 2 [x_i (delta_ij - x_j)]
        std::vector<double> a(n * n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                a[i * n + j] = 2.0 * x[i] * ((i == j ? 1.0 : 0.0) - x[j]);
        std::vector<double> l = detail::pivoted_cholesky(std::move(a), n);
        std::vector<double> z(n, 0.0);
        if (!config.zero_noise)
            for (std::size_t k = 0; k < n; ++k) z[k] = rng.normal();
        for (std::size_t i = 0; i < n; ++i) {
            double drift = config.params.alpha(i) - total * x[i];
            double noise = 0.0;
            for (std::size_t k = 0; k < n; ++k) noise += l[i * n + k] * z[k];
            next[i] = x[i] + drift * dt + std::sqrt(dt) * noise;
        }
    }

    for (double v : next)
        if (!std::isfinite(v))
            throw std::runtime_error("step: diverged to a non-finite state");
    return SimplexPoint(detail::project_to_simplex(std::move(next)));
}

// Time averages of test monomials after burn-in, with batch-means standard
// errors. Starts from the drift fixed point alpha/|alpha|_1.
inline std::vector<MonteCarloEstimate> simulate_moments(
    const SdeConfig& config, const std::vector<CylinderFunction>& monomials,
    std::vector<SimplexPoint>* trajectory = nullptr) {
    std::size_t n = config.params.dim();
    double total = config.params.total();
    std::vector<double> x0(n);
    for (std::size_t i = 0; i < n; ++i) x0[i] = config.params.alpha(i) / total;
    SimplexPoint x(std::move(x0));

    RngStream rng(config.seed);
    const std::size_t kept = config.steps - config.burn_in;
    const std::size_t n_batches = std::min<std::size_t>(32, kept);
    std::size_t nf = monomials.size();
    std::vector<std::vector<double>> batch_sums(nf, std::vector<double>(n_batches, 0.0));
    std::vector<std::size_t> batch_counts(n_batches, 0);

    for (std::size_t t = 0; t < config.steps; ++t) {
        x = step(config, x, rng);
        if (trajectory) trajectory->push_back(x);
        if (t < config.burn_in) continue;
        std::size_t b = (t - config.burn_in) * n_batches / kept;
        ++batch_counts[b];
        for (std::size_t j = 0; j < nf; ++j)
            batch_sums[j][b] += monomials[j].eval(x);
    }

    std::vector<MonteCarloEstimate> out(nf);
    for (std::size_t j = 0; j < nf; ++j) {
        double mean = 0.0;
        std::vector<double> means(n_batches);
        for (std::size_t b = 0; b < n_batches; ++b) {
            means[b] = batch_sums[j][b] / static_cast<double>(batch_counts[b]);
            mean += means[b];
        }
        mean /= static_cast<double>(n_batches);
        double var = 0.0;
        for (double m : means) var += (m - mean) * (m - mean);
        var /= static_cast<double>(n_batches - 1);
        out[j].mean = mean;
        out[j].stderr_ = std::sqrt(var / static_cast<double>(n_batches));
        out[j].n_samples = kept;
        out[j].seed = config.seed;
    }
    return out;
}

} // namespace dirform

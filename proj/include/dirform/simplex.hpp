#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace dirform {

inline constexpr double kSimplexSlack = 1e-12;

// Point on the simplex: coords in [0,1], sum <= 1 (+ small arithmetic slack).
class SimplexPoint {
public:
    explicit SimplexPoint(std::vector<double> coords) : coords_(std::move(coords)) {
        if (coords_.empty())
            throw std::invalid_argument("SimplexPoint: empty coordinate vector");
        double s = 0.0;
        for (double c : coords_) {
            if (!(c >= 0.0) || c > 1.0 + kSimplexSlack)
                throw std::invalid_argument("SimplexPoint: coordinate outside [0,1]");
            s += c;
        }
        if (s > 1.0 + kSimplexSlack)
            throw std::invalid_argument("SimplexPoint: coordinate sum exceeds 1");
        sum_ = s;
    }

    std::size_t dim() const { return coords_.size(); }
    double operator[](std::size_t i) const { return coords_[i]; }
    const std::vector<double>& coords() const { return coords_; }
    double l1_norm() const { return sum_; }
    double slack() const { return 1.0 - sum_; }

private:
    std::vector<double> coords_;
    double sum_;
};

// Finite Dirichlet parameter vector (alpha_1..alpha_n) plus the weight on the
// slack coordinate 1-|x|_1.
class DirichletParams {
public:
    DirichletParams(std::vector<double> alphas, double alpha_inf)
        : alphas_(std::move(alphas)), alpha_inf_(alpha_inf) {
        if (alphas_.empty())
            throw std::invalid_argument("DirichletParams: need at least one alpha");
        for (double a : alphas_)
            if (!(a > 0.0))
                throw std::invalid_argument("DirichletParams: alphas must be positive");
        if (!(alpha_inf_ > 0.0))
            throw std::invalid_argument("DirichletParams: alpha_inf must be positive");
    }

    std::size_t dim() const { return alphas_.size(); }
    const std::vector<double>& alphas() const { return alphas_; }
    double alpha(std::size_t i) const { return alphas_[i]; }
    double alpha_inf() const { return alpha_inf_; }
    double total() const {
        return std::accumulate(alphas_.begin(), alphas_.end(), alpha_inf_);
    }

private:
    std::vector<double> alphas_;
    double alpha_inf_;
};

// Weight sequence gamma_i >= 1 with an exactly computable tail infimum
// inf_{i>n} gamma_i. Only monotone-friendly rule shapes are allowed so the
// tail infimum is exact, which the smallest-n selection rule depends on.
class WeightSequence {
public:
    static WeightSequence constant(double value) {
        WeightSequence w;
        w.kind_ = Kind::Constant;
        w.a_ = value;
        w.validate();
        return w;
    }

    // gamma_i = a * q^(i-1), q >= 1
    static WeightSequence geometric(double a, double q) {
        WeightSequence w;
        w.kind_ = Kind::Geometric;
        w.a_ = a;
        w.b_ = q;
        w.validate();
        return w;
    }

    // gamma_i = a * i^p, p >= 0
    static WeightSequence polynomial(double a, double p) {
        WeightSequence w;
        w.kind_ = Kind::Polynomial;
        w.a_ = a;
        w.b_ = p;
        w.validate();
        return w;
    }

    // explicit head values, constant from index table.size()+1 on
    static WeightSequence table(std::vector<double> head, double tail) {
        WeightSequence w;
        w.kind_ = Kind::Table;
        w.head_ = std::move(head);
        w.a_ = tail;
        w.validate();
        return w;
    }

    double at(std::size_t i) const { // 1-based
        if (i == 0) throw std::invalid_argument("WeightSequence: index is 1-based");
        switch (kind_) {
            case Kind::Constant: return a_;
            case Kind::Geometric: return a_ * std::pow(b_, static_cast<double>(i - 1));
            case Kind::Polynomial: return a_ * std::pow(static_cast<double>(i), b_);
            case Kind::Table:
                return i <= head_.size() ? head_[i - 1] : a_;
        }
        return a_;
    }

    // inf_{i>n} gamma_i, exact for every supported rule shape
    double tail_inf(std::size_t n) const {
        switch (kind_) {
            case Kind::Constant: return a_;
            case Kind::Geometric:
            case Kind::Polynomial:
                return at(n + 1); // nondecreasing rules attain the inf at i=n+1
            case Kind::Table: {
                double m = a_;
                for (std::size_t i = n; i < head_.size(); ++i)
                    m = std::min(m, head_[i]);
                return m;
            }
        }
        return a_;
    }

    bool is_trivial() const { // gamma_i == 1 identically
        if (kind_ == Kind::Constant) return a_ == 1.0;
        if (kind_ == Kind::Geometric) return a_ == 1.0 && b_ == 1.0;
        if (kind_ == Kind::Polynomial) return a_ == 1.0 && b_ == 0.0;
        if (kind_ == Kind::Table) {
            if (a_ != 1.0) return false;
            return std::all_of(head_.begin(), head_.end(),
                               [](double g) { return g == 1.0; });
        }
        return false;
    }

private:
    enum class Kind { Constant, Geometric, Polynomial, Table };

    WeightSequence() = default;

    void validate() const {
        switch (kind_) {
            case Kind::Constant:
                if (!(a_ >= 1.0))
                    throw std::invalid_argument("WeightSequence: constant must be >= 1");
                break;
            case Kind::Geometric:
                if (!(a_ >= 1.0) || !(b_ >= 1.0))
                    throw std::invalid_argument(
                        "WeightSequence: geometric needs a >= 1 and ratio >= 1");
                break;
            case Kind::Polynomial:
                if (!(a_ >= 1.0) || !(b_ >= 0.0))
                    throw std::invalid_argument(
                        "WeightSequence: polynomial needs a >= 1 and exponent >= 0");
                break;
            case Kind::Table:
                if (!(a_ >= 1.0))
                    throw std::invalid_argument("WeightSequence: tail must be >= 1");
                for (double g : head_)
                    if (!(g >= 1.0))
                        throw std::invalid_argument("WeightSequence: entries must be >= 1");
                break;
        }
    }

    Kind kind_ = Kind::Constant;
    double a_ = 1.0;
    double b_ = 1.0;
    std::vector<double> head_;
};

using MultiIndex = std::vector<unsigned>;

// Polynomial in the first m coordinates, stored as sparse multi-index ->
// coefficient. Evaluation and derivatives are exact polynomial arithmetic.
class CylinderFunction {
public:
    CylinderFunction() : m_(0) {}

    explicit CylinderFunction(std::map<MultiIndex, double> terms) : terms_(std::move(terms)) {
        m_ = 0;
        for (auto it = terms_.begin(); it != terms_.end();) {
            if (it->second == 0.0) {
                it = terms_.erase(it);
                continue;
            }
            const MultiIndex& k = it->first;
            for (std::size_t i = 0; i < k.size(); ++i)
                if (k[i] > 0) m_ = std::max(m_, i + 1);
            ++it;
        }
    }

    static CylinderFunction constant(double c) {
        return CylinderFunction({{MultiIndex{}, c}});
    }

    static CylinderFunction coordinate(std::size_t i) { // 1-based
        MultiIndex k(i, 0);
        k[i - 1] = 1;
        return CylinderFunction({{k, 1.0}});
    }

    static CylinderFunction monomial(MultiIndex k, double coeff = 1.0) {
        return CylinderFunction({{std::move(k), coeff}});
    }

    std::size_t active_vars() const { return m_; }
    const std::map<MultiIndex, double>& terms() const { return terms_; }
    bool is_constant() const { return m_ == 0; }

    double eval(const SimplexPoint& x) const { return eval(x.coords()); }

    double eval(const std::vector<double>& x) const {
        if (x.size() < m_)
            throw std::invalid_argument("CylinderFunction: point has too few coordinates");
        double s = 0.0;
        for (const auto& [k, c] : terms_) {
            double t = c;
            for (std::size_t i = 0; i < k.size(); ++i)
                for (unsigned e = 0; e < k[i]; ++e) t *= x[i];
            s += t;
        }
        return s;
    }

    CylinderFunction partial(std::size_t i) const { // 1-based
        std::map<MultiIndex, double> out;
        for (const auto& [k, c] : terms_) {
            if (i > k.size() || k[i - 1] == 0) continue;
            MultiIndex dk = k;
            double coeff = c * dk[i - 1];
            dk[i - 1] -= 1;
            out[dk] += coeff;
        }
        return CylinderFunction(std::move(out));
    }

    // Entries past the active variable count are zero; output sized to x.
    std::vector<double> gradient(const SimplexPoint& x) const {
        std::vector<double> g(x.dim(), 0.0);
        for (std::size_t i = 1; i <= m_; ++i)
            g[i - 1] = partial(i).eval(x);
        return g;
    }

    double hessian(std::size_t i, std::size_t j, const SimplexPoint& x) const {
        return partial(i).partial(j).eval(x);
    }

    CylinderFunction operator+(const CylinderFunction& o) const {
        std::map<MultiIndex, double> out = terms_;
        for (const auto& [k, c] : o.terms_) out[k] += c;
        return CylinderFunction(std::move(out));
    }

    CylinderFunction operator*(double s) const {
        std::map<MultiIndex, double> out = terms_;
        for (auto& [k, c] : out) c *= s;
        return CylinderFunction(std::move(out));
    }

    CylinderFunction operator*(const CylinderFunction& o) const {
        std::map<MultiIndex, double> out;
        for (const auto& [ka, ca] : terms_)
            for (const auto& [kb, cb] : o.terms_) {
                MultiIndex k(std::max(ka.size(), kb.size()), 0);
                for (std::size_t i = 0; i < ka.size(); ++i) k[i] += ka[i];
                for (std::size_t i = 0; i < kb.size(); ++i) k[i] += kb[i];
                out[k] += ca * cb;
            }
        return CylinderFunction(std::move(out));
    }

private:
    std::map<MultiIndex, double> terms_;
    std::size_t m_;
};

// Infinite parameter family alpha_1, alpha_2, ... with exactly computable
// tail sums, plus the terminal weight alpha_inf. Total mass must be finite.
class AlphaFamily {
public:
    // alpha_i = a * q^(i-1), 0 < q < 1
    static AlphaFamily geometric(double a, double q, double alpha_inf) {
        if (!(a > 0.0) || !(q > 0.0) || !(q < 1.0))
            throw std::invalid_argument("AlphaFamily: geometric needs a > 0, 0 < q < 1");
        AlphaFamily f;
        f.kind_ = Kind::Geometric;
        f.a_ = a;
        f.b_ = q;
        f.alpha_inf_ = check_inf(alpha_inf);
        return f;
    }

    // alpha_i = a * i^(-p), p > 1
    static AlphaFamily power_law(double a, double p, double alpha_inf) {
        if (!(a > 0.0) || !(p > 1.0))
            throw std::invalid_argument("AlphaFamily: power law needs a > 0, p > 1");
        AlphaFamily f;
        f.kind_ = Kind::PowerLaw;
        f.a_ = a;
        f.b_ = p;
        f.alpha_inf_ = check_inf(alpha_inf);
        return f;
    }

    // finite list; alpha_i = 0 for i beyond the list
    static AlphaFamily finite(std::vector<double> values, double alpha_inf) {
        for (double v : values)
            if (!(v > 0.0))
                throw std::invalid_argument("AlphaFamily: finite entries must be positive");
        AlphaFamily f;
        f.kind_ = Kind::Finite;
        f.head_ = std::move(values);
        f.alpha_inf_ = check_inf(alpha_inf);
        return f;
    }

    double alpha(std::size_t i) const { // 1-based
        if (i == 0) throw std::invalid_argument("AlphaFamily: index is 1-based");
        switch (kind_) {
            case Kind::Geometric: return a_ * std::pow(b_, static_cast<double>(i - 1));
            case Kind::PowerLaw: return a_ * std::pow(static_cast<double>(i), -b_);
            case Kind::Finite: return i <= head_.size() ? head_[i - 1] : 0.0;
        }
        return 0.0;
    }

    double alpha_inf() const { return alpha_inf_; }

    double head_sum(std::size_t n) const { // sum_{i<=n}
        double s = 0.0;
        for (std::size_t i = 1; i <= n; ++i) s += alpha(i);
        return s;
    }

    // sum_{i>=m}; exact for geometric, Euler-Maclaurin for power law
    double tail_sum(std::size_t m) const {
        switch (kind_) {
            case Kind::Geometric:
                return a_ * std::pow(b_, static_cast<double>(m - 1)) / (1.0 - b_);
            case Kind::PowerLaw: {
                const std::size_t cut = std::max<std::size_t>(m, 10000);
                double s = 0.0;
                for (std::size_t i = m; i < cut; ++i)
                    s += std::pow(static_cast<double>(i), -b_);
                // remainder sum_{i>=cut} i^-p via Euler-Maclaurin at N=cut
                double N = static_cast<double>(cut);
                s += std::pow(N, 1.0 - b_) / (b_ - 1.0) + 0.5 * std::pow(N, -b_) +
                     b_ / 12.0 * std::pow(N, -b_ - 1.0);
                return a_ * s;
            }
            case Kind::Finite: {
                double s = 0.0;
                for (std::size_t i = m; i <= head_.size(); ++i) s += head_[i - 1];
                return s;
            }
        }
        return 0.0;
    }

    double total_alpha() const { return tail_sum(1); }

    // mu^(m): D(alpha_1,...,alpha_{m-1}, sum_{i>=m} alpha_i; alpha_inf)
    DirichletParams truncate(std::size_t m) const {
        if (m < 1) throw std::invalid_argument("AlphaFamily: truncation level must be >= 1");
        double tail = tail_sum(m);
        if (!(tail > 0.0))
            throw std::invalid_argument("AlphaFamily: truncation tail mass must be positive");
        std::vector<double> v;
        v.reserve(m);
        for (std::size_t i = 1; i < m; ++i) v.push_back(alpha(i));
        v.push_back(tail);
        return DirichletParams(std::move(v), alpha_inf_);
    }

private:
    enum class Kind { Geometric, PowerLaw, Finite };

    AlphaFamily() = default;

    static double check_inf(double a) {
        if (!(a > 0.0))
            throw std::invalid_argument("AlphaFamily: alpha_inf must be positive");
        return a;
    }

    Kind kind_ = Kind::Geometric;
    double a_ = 1.0;
    double b_ = 0.5;
    double alpha_inf_ = 1.0;
    std::vector<double> head_;
};

} // namespace dirform

#include "lhsforge/response_basis.hpp"

#include <array>
#include <cmath>
#include <numbers>

#include "lhsforge/errors.hpp"

namespace lhsforge {

namespace {

constexpr int kMaxHarmonicOrder = 15;

}  // namespace

std::string_view to_string(FeatureKind k) {
    return k == FeatureKind::OddSphericalHarmonics ? "odd-harmonics" : "monomials";
}

FeatureKind parse_feature_kind(std::string_view name) {
    if (name == "odd-harmonics") {
        return FeatureKind::OddSphericalHarmonics;
    }
    if (name == "monomials") {
        return FeatureKind::Monomials;
    }
    throw ValidationError("unknown feature map '" + std::string(name) + "'");
}

int odd_harmonic_count(int order) {
    return (order + 1) * (order + 2) / 2;
}

int monomial_count(int input_dim, int order) {
    // C(n + D, D) - 1
    long long c = 1;
    for (int k = 1; k <= order; ++k) {
        c = c * (input_dim + k) / k;
    }
    return static_cast<int>(c - 1);
}

FeatureMap::FeatureMap(FeatureKind kind, int order, int input_dim)
    : kind_(kind), order_(order), input_dim_(input_dim), n_features_(0) {}

FeatureMap FeatureMap::odd_harmonics(int order) {
    if (order < 1 || order % 2 == 0) {
        throw ValidationError("odd_harmonics: order must be a positive odd integer, got " + std::to_string(order));
    }
    if (order > kMaxHarmonicOrder) {
        throw CapacityError("odd_harmonics: order above " + std::to_string(kMaxHarmonicOrder) + " is not supported");
    }
    FeatureMap fm(FeatureKind::OddSphericalHarmonics, order, 3);
    fm.n_features_ = odd_harmonic_count(order);
    fm.norm_.assign(static_cast<std::size_t>((order + 1) * (order + 1)), 0.0);
    for (int l = 1; l <= order; l += 2) {
        for (int m = 0; m <= l; ++m) {
            // sqrt((2l+1)/(4 pi) (l-m)!/(l+m)!), times sqrt(2) for the cos/sin pairs.
            double ratio = 1.0;
            for (int k = l - m + 1; k <= l + m; ++k) {
                ratio /= k;
            }
            double n = std::sqrt((2.0 * l + 1.0) / (4.0 * std::numbers::pi) * ratio);
            if (m > 0) {
                n *= std::numbers::sqrt2;
            }
            fm.norm_[static_cast<std::size_t>(l * (order + 1) + m)] = n;
        }
    }
    return fm;
}

FeatureMap FeatureMap::monomials(int order, int input_dim) {
    if (order < 1) {
        throw ValidationError("monomial_features: order must be >= 1");
    }
    if (input_dim < 1) {
        throw ValidationError("monomial_features: input dimension must be >= 1");
    }
    FeatureMap fm(FeatureKind::Monomials, order, input_dim);
    // Degree-k monomials are non-decreasing index tuples (i_1 <= ... <= i_k) in lexicographic
    // order; each extends its degree-(k-1) prefix by one factor.
    std::vector<std::vector<int>> prev_tuples{{}};
    std::vector<int> prev_index{-1};
    for (int k = 1; k <= order; ++k) {
        std::vector<std::vector<int>> tuples;
        std::vector<int> index;
        for (std::size_t p = 0; p < prev_tuples.size(); ++p) {
            int start = prev_tuples[p].empty() ? 0 : prev_tuples[p].back();
            for (int v = start; v < input_dim; ++v) {
                auto t = prev_tuples[p];
                t.push_back(v);
                index.push_back(static_cast<int>(fm.parent_.size()));
                fm.parent_.push_back(prev_index[p]);
                fm.var_.push_back(v);
                tuples.push_back(std::move(t));
            }
        }
        prev_tuples = std::move(tuples);
        prev_index = std::move(index);
    }
    fm.n_features_ = static_cast<int>(fm.parent_.size());
    return fm;
}

void FeatureMap::evaluate(std::span<const double> g, std::span<double> out) const {
    if (static_cast<int>(g.size()) != input_dim_) {
        throw ShapeError("feature map: expected input of length " + std::to_string(input_dim_) + ", got " +
                         std::to_string(g.size()));
    }
    if (static_cast<int>(out.size()) != n_features_) {
        throw ShapeError("feature map: output buffer has the wrong length");
    }
    if (kind_ == FeatureKind::OddSphericalHarmonics) {
        eval_harmonics(g.data(), out.data());
    } else {
        eval_monomials(g.data(), out.data());
    }
}

RVector FeatureMap::operator()(const RVector& g) const {
    RVector out(n_features_);
    evaluate(std::span<const double>(g.data(), static_cast<std::size_t>(g.size())),
             std::span<double>(out.data(), static_cast<std::size_t>(out.size())));
    return out;
}

void FeatureMap::eval_monomials(const double* g, double* out) const {
    for (std::size_t k = 0; k < parent_.size(); ++k) {
        double base = parent_[k] < 0 ? 1.0 : out[parent_[k]];
        out[k] = base * g[var_[k]];
    }
}

void FeatureMap::eval_harmonics(const double* g, double* out) const {
    const int dmax = order_;
    const double x = g[0];
    const double y = g[1];
    const double z = g[2];
    const double r2 = x * x + y * y + z * z;

    // Re/Im of (x + iy)^m.
    std::array<double, kMaxHarmonicOrder + 1> cm{};
    std::array<double, kMaxHarmonicOrder + 1> sm{};
    cm[0] = 1.0;
    sm[0] = 0.0;
    for (int m = 1; m <= dmax; ++m) {
        cm[static_cast<std::size_t>(m)] = x * cm[static_cast<std::size_t>(m - 1)] - y * sm[static_cast<std::size_t>(m - 1)];
        sm[static_cast<std::size_t>(m)] = x * sm[static_cast<std::size_t>(m - 1)] + y * cm[static_cast<std::size_t>(m - 1)];
    }

    // q[l][m] = r^l P_l^m(z / r) / (x^2 + y^2)^(m/2), a polynomial in z and r^2.
    std::array<std::array<double, kMaxHarmonicOrder + 1>, kMaxHarmonicOrder + 1> q{};
    double dfact = 1.0;  // (2m - 1)!!
    for (int m = 0; m <= dmax; ++m) {
        if (m > 0) {
            dfact *= 2.0 * m - 1.0;
        }
        auto um = static_cast<std::size_t>(m);
        q[um][um] = dfact;
        if (m + 1 <= dmax) {
            q[um + 1][um] = (2.0 * m + 1.0) * z * dfact;
        }
        for (int l = m + 2; l <= dmax; ++l) {
            auto ul = static_cast<std::size_t>(l);
            q[ul][um] = ((2.0 * l - 1.0) * z * q[ul - 1][um] - (l + m - 1.0) * r2 * q[ul - 2][um]) / (l - m);
        }
    }

    int k = 0;
    for (int l = 1; l <= dmax; l += 2) {
        auto ul = static_cast<std::size_t>(l);
        for (int m = 1; m <= l; ++m) {
            auto um = static_cast<std::size_t>(m);
            double n = norm_[static_cast<std::size_t>(l * (dmax + 1) + m)];
            out[k++] = n * q[ul][um] * cm[um];
            out[k++] = n * q[ul][um] * sm[um];
        }
        out[k++] = norm_[static_cast<std::size_t>(l * (dmax + 1))] * q[ul][0];
    }
}

RVector odd_harmonics(int order, const RVector& g) {
    return FeatureMap::odd_harmonics(order)(g);
}

RVector monomial_features(int order, const RVector& g) {
    return FeatureMap::monomials(order, static_cast<int>(g.size()))(g);
}

}  // namespace lhsforge

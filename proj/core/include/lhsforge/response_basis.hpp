#pragma once

#include <span>
#include <string_view>
#include <vector>

#include "lhsforge/quantum.hpp"

namespace lhsforge {

enum class FeatureKind { OddSphericalHarmonics, Monomials };

std::string_view to_string(FeatureKind k);
FeatureKind parse_feature_kind(std::string_view name);

/// (D+1)(D+2)/2 for odd D: the number of real spherical harmonics of odd degree <= D.
int odd_harmonic_count(int order);

/// C(input_dim + D, D) - 1: monomials of total degree 1..D.
int monomial_count(int input_dim, int order);

/// Feature map B(g) applied to one measurement operator's coefficient vector.
///
/// OddSphericalHarmonics works on a 3-vector (the traceless Bloch part) and
/// emits the real solid harmonics r^l Y_lm of odd degree l = 1, 3, ..., D,
/// normalized to be orthonormal on the unit sphere. Within a degree the order
/// is (cos 1, sin 1, cos 2, sin 2, ..., cos l, sin l, m = 0), so degree one is
/// (x, y, z) up to a common factor. Every component is an odd polynomial, so
/// B(-g) = -B(g) holds bit for bit.
///
/// Monomials emits every monomial of total degree 1..D in graded
/// lexicographic order; for (a, b) and D = 2 that is (a, b, a^2, ab, b^2).
class FeatureMap {
   public:
    static FeatureMap odd_harmonics(int order);
    static FeatureMap monomials(int order, int input_dim);

    FeatureKind kind() const { return kind_; }
    int order() const { return order_; }
    int input_dim() const { return input_dim_; }
    int size() const { return n_features_; }

    void evaluate(std::span<const double> g, std::span<double> out) const;
    RVector operator()(const RVector& g) const;

    bool operator==(const FeatureMap& other) const {
        return kind_ == other.kind_ && order_ == other.order_ && input_dim_ == other.input_dim_;
    }

   private:
    FeatureMap(FeatureKind kind, int order, int input_dim);

    void eval_harmonics(const double* g, double* out) const;
    void eval_monomials(const double* g, double* out) const;

    FeatureKind kind_;
    int order_;
    int input_dim_;
    int n_features_;
    // Monomials: feature k = feature parent_[k] * g[var_[k]] (parent -1 means the constant 1).
    std::vector<int> parent_;
    std::vector<int> var_;
    // Harmonics: normalization per (l, m), indexed [l * (order + 1) + m].
    std::vector<double> norm_;
};

RVector odd_harmonics(int order, const RVector& g);
RVector monomial_features(int order, const RVector& g);

}  // namespace lhsforge

#include <gtest/gtest.h>

#include "lhsforge/errors.hpp"
#include "lhsforge/response_basis.hpp"
#include "test_support.hpp"

namespace lhsforge {
namespace {

TEST(OddHarmonics, Counts) {
    EXPECT_EQ(odd_harmonic_count(1), 3);
    EXPECT_EQ(odd_harmonic_count(3), 10);
    EXPECT_EQ(odd_harmonic_count(5), 21);
    for (int d = 1; d <= 15; d += 2) {
        EXPECT_EQ(FeatureMap::odd_harmonics(d).size(), (d + 1) * (d + 2) / 2);
    }
}

TEST(OddHarmonics, RejectsEvenOrder) {
    EXPECT_THROW(FeatureMap::odd_harmonics(2), ValidationError);
    EXPECT_THROW(FeatureMap::odd_harmonics(0), ValidationError);
}

TEST(OddHarmonics, DegreeOneIsCoordinates) {
    RVector z = odd_harmonics(1, Eigen::Vector3d(0, 0, 1));
    ASSERT_EQ(z.size(), 3);
    EXPECT_EQ(z(0), 0.0);
    EXPECT_EQ(z(1), 0.0);
    EXPECT_GT(z(2), 0.0);
    Rng rng(30);
    Eigen::Vector3d g = testing::random_unit(rng);
    RVector b = odd_harmonics(1, g);
    EXPECT_NEAR(b(0) / g.x(), z(2), 1e-14);
    EXPECT_NEAR(b(1) / g.y(), z(2), 1e-14);
    EXPECT_NEAR(b(2) / g.z(), z(2), 1e-14);
}

TEST(OddHarmonics, ExactlyOdd) {
    Rng rng(31);
    std::normal_distribution<double> n(0.0, 1.0);
    FeatureMap fm = FeatureMap::odd_harmonics(7);
    for (int k = 0; k < 1000; ++k) {
        RVector g(3);
        g << n(rng), n(rng), n(rng);
        RVector s = fm(g) + fm(RVector(-g));
        EXPECT_EQ(s.cwiseAbs().maxCoeff(), 0.0);
    }
}

TEST(OddHarmonics, OrthonormalOnSphere) {
    // Monte-Carlo Gram matrix over uniform sphere points, normalized per component.
    Rng rng(32);
    const int n = 1000000;
    FeatureMap fm = FeatureMap::odd_harmonics(5);
    const int nf = fm.size();
    RMatrix gram = RMatrix::Zero(nf, nf);
    RMatrix chunk(nf, 10000);
    RVector out(nf);
    for (int start = 0; start < n; start += chunk.cols()) {
        for (int c = 0; c < chunk.cols(); ++c) {
            Eigen::Vector3d g = testing::random_unit(rng);
            fm.evaluate(std::span<const double>(g.data(), 3), std::span<double>(out.data(), nf));
            chunk.col(c) = out;
        }
        gram.noalias() += chunk * chunk.transpose();
    }
    RVector d = gram.diagonal().cwiseSqrt();
    RMatrix corr = d.cwiseInverse().asDiagonal() * gram * d.cwiseInverse().asDiagonal();
    double worst = 0.0;
    for (int i = 0; i < nf; ++i) {
        for (int j = 0; j < nf; ++j) {
            if (i != j) {
                worst = std::max(worst, std::abs(corr(i, j)));
            }
        }
    }
    EXPECT_LE(worst, 5e-3);
    // Normalization: mean of B_m^2 over the sphere is 1 / (4 pi).
    RVector mean_sq = gram.diagonal() / n;
    for (int i = 0; i < nf; ++i) {
        EXPECT_NEAR(mean_sq(i) * 4.0 * std::numbers::pi, 1.0, 0.02) << i;
    }
}

TEST(Monomials, Counts) {
    EXPECT_EQ(monomial_count(2, 1), 2);
    EXPECT_EQ(monomial_count(2, 2), 5);
    EXPECT_EQ(monomial_count(9, 2), 54);
    EXPECT_EQ(monomial_count(4, 2), 14);
    for (int dim = 1; dim <= 9; ++dim) {
        for (int d = 1; d <= 4; ++d) {
            EXPECT_EQ(FeatureMap::monomials(d, dim).size(), monomial_count(dim, d));
        }
    }
}

TEST(Monomials, GradedLexOrder) {
    RVector g(2);
    g << 3.0, 5.0;
    RVector d1 = monomial_features(1, g);
    ASSERT_EQ(d1.size(), 2);
    EXPECT_EQ(d1(0), 3.0);
    EXPECT_EQ(d1(1), 5.0);
    RVector d2 = monomial_features(2, g);
    ASSERT_EQ(d2.size(), 5);
    EXPECT_EQ(d2(2), 9.0);
    EXPECT_EQ(d2(3), 15.0);
    EXPECT_EQ(d2(4), 25.0);
    RVector h(3);
    h << 2.0, 3.0, 5.0;
    RVector d3 = monomial_features(3, h);
    // Degree 3 block starts after 3 + 6 entries: a^3, a^2 b, a^2 c, a b^2, a b c, ...
    EXPECT_EQ(d3(9), 8.0);
    EXPECT_EQ(d3(10), 12.0);
    EXPECT_EQ(d3(11), 20.0);
    EXPECT_EQ(d3(12), 18.0);
    EXPECT_EQ(d3(13), 30.0);
    EXPECT_EQ(d3(18), 125.0);
}

TEST(Monomials, DegreeOneIsLinear) {
    Rng rng(33);
    std::normal_distribution<double> n(0.0, 1.0);
    RVector g(9);
    for (int i = 0; i < 9; ++i) {
        g(i) = n(rng);
    }
    EXPECT_LE((monomial_features(1, RVector(2 * g)) - 2 * monomial_features(1, g)).cwiseAbs().maxCoeff(), 0.0);
}

TEST(Monomials, Deterministic) {
    RVector g = RVector::LinSpaced(4, 0.1, 0.7);
    EXPECT_EQ((monomial_features(4, g) - monomial_features(4, g)).cwiseAbs().maxCoeff(), 0.0);
}

TEST(FeatureMap, RejectsWrongInputLength) {
    FeatureMap fm = FeatureMap::odd_harmonics(3);
    EXPECT_THROW(fm(RVector::Zero(4)), ShapeError);
    EXPECT_THROW(FeatureMap::monomials(0, 3), ValidationError);
}

}  // namespace
}  // namespace lhsforge

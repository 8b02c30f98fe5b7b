#include <gtest/gtest.h>

#include "lhsforge/errors.hpp"
#include "lhsforge/quantum.hpp"
#include "lhsforge/states.hpp"
#include "lhsforge/tolerances.hpp"
#include "test_support.hpp"

namespace lhsforge {
namespace {

using testing::random_density;
using testing::random_hermitian;

CMatrix ket_bra(int d, int i, int j) {
    CMatrix m = CMatrix::Zero(d, d);
    m(i, j) = 1.0;
    return m;
}

TEST(GellMann, QubitIsPauli) {
    const auto& b = cached_gellmann_basis(2);
    ASSERT_EQ(b.size(), 4);
    const Complex i1(0.0, 1.0);
    CMatrix sx(2, 2), sy(2, 2), sz(2, 2);
    sx << 0, 1, 1, 0;
    sy << 0, -i1, i1, 0;
    sz << 1, 0, 0, -1;
    EXPECT_EQ(max_abs(b[0] - CMatrix::Identity(2, 2)), 0.0);
    EXPECT_EQ(max_abs(b[1] - sx), 0.0);
    EXPECT_EQ(max_abs(b[2] - sy), 0.0);
    EXPECT_EQ(max_abs(b[3] - sz), 0.0);
    EXPECT_DOUBLE_EQ((b[0] * b[0]).trace().real(), 2.0);
}

class GellMannDim : public ::testing::TestWithParam<int> {};

TEST_P(GellMannDim, OrthonormalHermitianTraceless) {
    const int d = GetParam();
    GellMannBasis b = gellmann_basis(d);
    ASSERT_EQ(b.size(), d * d);
    for (int mu = 0; mu < b.size(); ++mu) {
        EXPECT_LE(hermiticity_defect(b[mu]), tol::kHermitian);
        if (mu > 0) {
            EXPECT_LE(std::abs(b[mu].trace()), tol::kHermitian);
        }
        for (int nu = 0; nu < b.size(); ++nu) {
            Complex t = (b[mu] * b[nu]).trace();
            EXPECT_NEAR(t.real(), mu == nu ? 2.0 : 0.0, 1e-12) << mu << "," << nu;
            EXPECT_NEAR(t.imag(), 0.0, 1e-12);
        }
    }
}

INSTANTIATE_TEST_SUITE_P(Dims, GellMannDim, ::testing::Values(2, 3, 4, 5));

TEST(GellMann, RejectsSmallDimension) {
    EXPECT_THROW(gellmann_basis(1), DimensionError);
    EXPECT_THROW(gellmann_basis(0), DimensionError);
}

TEST(PartialTrace, ProductState) {
    Rng rng(1);
    CMatrix sigma = random_density(2, rng);
    CMatrix rho = kron(ket_bra(2, 0, 0), sigma);
    EXPECT_LE(max_abs(partial_trace_A(rho, 2, 2) - sigma), 1e-15);
}

TEST(PartialTrace, MaximallyMixed) {
    CMatrix rho = CMatrix::Identity(4, 4) / 4.0;
    EXPECT_LE(max_abs(partial_trace_A(rho, 2, 2) - CMatrix::Identity(2, 2) / 2.0), 1e-15);
}

TEST(PartialTrace, WernerMarginalIsMaximallyMixed) {
    for (double v : {0.0, 0.3, 0.5, 0.9, 1.0}) {
        CMatrix r = partial_trace_A(werner(v).rho.matrix(), 2, 2);
        EXPECT_LE(max_abs(r - CMatrix::Identity(2, 2) / 2.0), 1e-15) << v;
    }
}

TEST(PartialTrace, PreservesTraceAndRejectsShape) {
    Rng rng(2);
    CMatrix rho = random_density(6, rng);
    EXPECT_NEAR(partial_trace_A(rho, 3, 2).trace().real(), 1.0, 1e-12);
    EXPECT_NEAR(partial_trace_A(rho, 2, 3).trace().real(), 1.0, 1e-12);
    EXPECT_THROW(partial_trace_A(rho, 2, 2), ShapeError);
}

TEST(TraceDistance, Examples) {
    CMatrix p0 = ket_bra(2, 0, 0);
    CMatrix p1 = ket_bra(2, 1, 1);
    EXPECT_NEAR(trace_distance(p0, p1), 1.0, 1e-15);
    EXPECT_EQ(trace_distance(p0, p0), 0.0);
    EXPECT_NEAR(trace_distance(0.5 * p1, CMatrix::Identity(2, 2) / 4.0), 0.25, 1e-15);
}

TEST(TraceDistance, RejectsNonHermitian) {
    CMatrix a = ket_bra(2, 0, 1);
    EXPECT_THROW(trace_distance(a, CMatrix::Zero(2, 2)), ValidationError);
    EXPECT_THROW(trace_distance(CMatrix::Zero(2, 2), CMatrix::Zero(3, 3)), ShapeError);
}

TEST(TraceDistance, MetricProperties) {
    Rng rng(3);
    for (int k = 0; k < 200; ++k) {
        const int d = 2 + k % 3;
        CMatrix a = random_hermitian(d, rng), b = random_hermitian(d, rng), c = random_hermitian(d, rng);
        double ab = trace_distance(a, b);
        EXPECT_GE(ab, 0.0);
        EXPECT_NEAR(ab, trace_distance(b, a), 1e-12);
        EXPECT_LE(trace_distance(a, c), ab + trace_distance(b, c) + 1e-10);
    }
}

TEST(Eigen, Reassembles) {
    Rng rng(4);
    for (int d = 2; d <= 9; ++d) {
        CMatrix a = random_hermitian(d, rng);
        HermitianEigen e = eigh(a);
        CMatrix back = e.vectors * e.values.asDiagonal() * e.vectors.adjoint();
        EXPECT_LE(max_abs(back - a), 1e-10);
    }
}

TEST(SmoothTraceNorm, ClosedFormMatchesEigen) {
    Rng rng(5);
    for (int k = 0; k < 100; ++k) {
        CMatrix x = random_hermitian(2, rng);
        Eigen::Matrix2cd g2;
        double v2 = smooth_trace_norm_2x2(x, 1e-6, &g2);
        // Force the generic branch through a 3x3 embedding with a zero block.
        CMatrix big = CMatrix::Zero(3, 3);
        big.topLeftCorner(2, 2) = x;
        SmoothTraceNorm s = smooth_trace_norm(big, 1e-6);
        EXPECT_NEAR(v2, s.value - std::sqrt(1e-6), 1e-12);
        EXPECT_LE(max_abs(CMatrix(g2) - s.gradient.topLeftCorner(2, 2)), 1e-10);
        EXPECT_NEAR(smooth_trace_norm_2x2(x, 0.0, nullptr), trace_norm(x), 1e-12);
    }
}

TEST(SmoothTraceNorm, GradientMatchesFiniteDifference) {
    Rng rng(6);
    for (int d : {2, 3}) {
        CMatrix x = random_hermitian(d, rng);
        CMatrix dx = random_hermitian(d, rng);
        SmoothTraceNorm s = smooth_trace_norm(x, 1e-12);
        const double h = 1e-6;
        double fd = (smooth_trace_norm(x + h * dx, 1e-12).value - smooth_trace_norm(x - h * dx, 1e-12).value) / (2 * h);
        EXPECT_NEAR((s.gradient * dx).trace().real(), fd, 1e-7);
    }
}

TEST(QuantumAssemblage, WernerZBasis) {
    for (double v : {0.0, 0.25, 0.5, 1.0}) {
        std::vector<CMatrix> z{ket_bra(2, 0, 0), ket_bra(2, 1, 1)};
        Assemblage s = quantum_assemblage(werner(v).rho.matrix(), 2, 2, z);
        CMatrix expect = v / 2.0 * ket_bra(2, 1, 1) + (1.0 - v) / 4.0 * CMatrix::Identity(2, 2);
        EXPECT_LE(max_abs(s[0] - expect), 1e-15) << v;
    }
}

TEST(QuantumAssemblage, TrivialPovmGivesMarginal) {
    Rng rng(7);
    CMatrix rho = random_density(6, rng);
    std::vector<CMatrix> id{CMatrix::Identity(3, 3)};
    Assemblage s = quantum_assemblage(rho, 3, 2, id);
    EXPECT_LE(max_abs(s[0] - partial_trace_A(rho, 3, 2)), 1e-15);
}

TEST(QuantumAssemblage, WernerOutcomesAreEquiprobable) {
    Rng rng(8);
    VisibilityState w = werner(0.7);
    for (int k = 0; k < 100; ++k) {
        Measurement m = sample_qubit_pvm(rng);
        Assemblage s = quantum_assemblage(w.rho.matrix(), 2, 2, m.elements);
        EXPECT_NEAR(s[0].trace().real(), 0.5, 1e-12);
        EXPECT_NEAR(s[1].trace().real(), 0.5, 1e-12);
    }
}

TEST(QuantumAssemblage, NoSignalingAndPositivity) {
    Rng rng(9);
    for (int k = 0; k < 100; ++k) {
        const int da = 2 + k % 2;
        const int db = 2 + (k / 2) % 2;
        CMatrix rho = random_density(da * db, rng);
        Measurement m = k % 3 == 0 ? sample_qudit_pvm(da, rng) : sample_povm(da, da * da, rng);
        Assemblage s = quantum_assemblage(rho, da, db, m.elements);
        CMatrix sum = CMatrix::Zero(db, db);
        double tr = 0.0;
        for (const auto& e : s) {
            sum += e;
            tr += e.trace().real();
            EXPECT_GE(min_eigenvalue(e), -1e-12);
        }
        EXPECT_LE(max_abs(sum - partial_trace_A(rho, da, db)), 1e-10);
        EXPECT_NEAR(tr, 1.0, 1e-12);
    }
}

TEST(QuantumAssemblage, RejectsWrongDimension) {
    std::vector<CMatrix> e{CMatrix::Identity(3, 3)};
    EXPECT_THROW(quantum_assemblage(werner(0.5).rho.matrix(), 2, 2, e), ShapeError);
}

TEST(AssemblageDistance, Examples) {
    std::vector<CMatrix> s1{ket_bra(2, 0, 0) / 2.0, ket_bra(2, 1, 1) / 2.0};
    std::vector<CMatrix> s2{ket_bra(2, 1, 1) / 2.0, ket_bra(2, 0, 0) / 2.0};
    EXPECT_NEAR(assemblage_distance(s1, s2), 1.0, 1e-15);
    EXPECT_EQ(assemblage_distance(s1, s1), 0.0);
    std::vector<CMatrix> s3{ket_bra(2, 0, 0)};
    EXPECT_THROW(assemblage_distance(s1, s3), ShapeError);
}

TEST(AssemblageDistance, NonNegativeAndSymmetric) {
    Rng rng(10);
    for (int k = 0; k < 100; ++k) {
        std::vector<CMatrix> a, b;
        for (int o = 0; o < 3; ++o) {
            a.push_back(random_density(2, rng) / 3.0);
            b.push_back(random_density(2, rng) / 3.0);
        }
        double ab = assemblage_distance(a, b);
        EXPECT_GE(ab, 0.0);
        EXPECT_NEAR(ab, assemblage_distance(b, a), 1e-14);
    }
}

TEST(DensityMatrix, ValidatesInvariants) {
    EXPECT_NO_THROW(DensityMatrix(CMatrix::Identity(2, 2) / 2.0));
    EXPECT_THROW(DensityMatrix(CMatrix::Identity(2, 2) * 0.45), ValidationError);
    CMatrix neg(2, 2);
    neg << 1.01, 0, 0, -0.01;
    EXPECT_THROW(DensityMatrix{neg}, ValidationError);
    EXPECT_THROW(DensityMatrix{ket_bra(2, 0, 1)}, ValidationError);
    EXPECT_NO_THROW(DensityMatrix(CMatrix::Identity(2, 2) * 0.1, TraceRule::SubNormalized));
}

}  // namespace
}  // namespace lhsforge

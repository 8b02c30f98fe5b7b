#include <gtest/gtest.h>

#include <sstream>

#include "lhsforge/errors.hpp"
#include "lhsforge/lhs_model.hpp"
#include "lhsforge/states.hpp"
#include "test_support.hpp"

namespace lhsforge {
namespace {

ModelConfig softmax_config(int dim, int o_max, int n_hidden = 4, int order = 2) {
    ModelConfig c;
    c.mode = ResponseMode::SoftmaxGeneral;
    c.dim_a = dim;
    c.dim_b = dim;
    c.o_max = o_max;
    c.n_hidden = n_hidden;
    c.order = order;
    return c;
}

TEST(InitModel, DeterministicInSeed) {
    ModelConfig c;
    c.seed = 42;
    LhsModel a = init_model(c);
    LhsModel b = init_model(c);
    EXPECT_EQ((a.params() - b.params()).cwiseAbs().maxCoeff(), 0.0);
    c.seed = 43;
    EXPECT_GT((init_model(c).params() - a.params()).cwiseAbs().maxCoeff(), 0.0);
}

TEST(InitModel, LargeModelShapes) {
    ModelConfig c;
    c.n_hidden = 8;
    c.order = 5;
    LhsModel m = init_model(c);
    for (int i = 0; i < 8; ++i) {
        HiddenVariable hv = m.hidden_variable(i);
        EXPECT_EQ(hv.coeffs.rows(), 1);
        EXPECT_EQ(hv.coeffs.cols(), 21);
        EXPECT_EQ(hv.bias.size(), 0);
        EXPECT_NO_THROW(hidden_state(m.hidden_state_param(i)));
    }
    LhsModel s = init_model(softmax_config(2, 4));
    HiddenVariable hv = s.hidden_variable(0);
    EXPECT_EQ(hv.coeffs.rows(), 4);
    EXPECT_EQ(hv.coeffs.cols(), monomial_count(4, 2));
    EXPECT_EQ(hv.bias.size(), 4);
    EXPECT_EQ(hv.bias.cwiseAbs().maxCoeff(), 0.0);
}

TEST(InitModel, ValidatesConfig) {
    ModelConfig c;
    c.n_hidden = 0;
    EXPECT_THROW(init_model(c), ValidationError);
    c = ModelConfig{};
    c.order = 4;
    EXPECT_THROW(init_model(c), ValidationError);
    EXPECT_THROW(init_model(softmax_config(2, 5)), CapacityError);
}

TEST(ModelConfigFor, PicksModePerClass) {
    EXPECT_EQ(model_config_for(MeasurementClass::pauli_triple(), 2, 8, 5, 0).mode, ResponseMode::SigmoidDichotomic);
    EXPECT_EQ(model_config_for(MeasurementClass::qubit_pvm(), 2, 8, 5, 0).mode, ResponseMode::SigmoidDichotomic);
    ModelConfig p = model_config_for(MeasurementClass::povm(2), 2, 8, 2, 0);
    EXPECT_EQ(p.mode, ResponseMode::SoftmaxGeneral);
    EXPECT_EQ(p.o_max, 4);
    EXPECT_EQ(model_config_for(MeasurementClass::qudit_pvm(3), 3, 8, 2, 0).o_max, 3);
}

TEST(ResponseProbs, ZeroCoefficientsAreUniform) {
    LhsModel m(softmax_config(2, 4));
    Rng rng(40);
    Measurement x = sample_povm(2, 4, rng);
    RVector p = response_probs(m.hidden_variable(0), x, m.features(), m.mode());
    ASSERT_EQ(p.size(), 4);
    for (int a = 0; a < 4; ++a) {
        EXPECT_DOUBLE_EQ(p(a), 0.25);
    }
}

TEST(ResponseProbs, PaddedOutcomesTakeNoMass) {
    LhsModel m = init_model(softmax_config(2, 4));
    Rng rng(41);
    Measurement x = sample_povm(2, 3, rng);
    RVector p = response_probs(m.hidden_variable(1), x, m.features(), m.mode());
    ASSERT_EQ(p.size(), 3);
    EXPECT_NEAR(p.sum(), 1.0, 1e-12);
    EXPECT_THROW(response_probs(m.hidden_variable(1), sample_povm(3, 9, rng), m.features(), m.mode()), ValidationError);
}

TEST(ResponseProbs, CapacityExceeded) {
    LhsModel m = init_model(softmax_config(3, 3));
    Rng rng(42);
    EXPECT_THROW(response_probs(m.hidden_variable(0), sample_povm(3, 4, rng), m.features(), m.mode()),
                 CapacityError);
}

TEST(ResponseProbs, SigmoidSymmetry) {
    ModelConfig c;
    c.n_hidden = 3;
    c.seed = 5;
    LhsModel m = init_model(c);
    Rng rng(43);
    for (int k = 0; k < 200; ++k) {
        Eigen::Vector3d n = testing::random_unit(rng);
        HiddenVariable hv = m.hidden_variable(k % 3);
        hv.coeffs *= 30.0;
        RVector p = response_probs(hv, qubit_pvm(n), m.features(), m.mode());
        RVector q = response_probs(hv, qubit_pvm(-n), m.features(), m.mode());
        EXPECT_NEAR(p(0) + q(0), 1.0, 1e-15);
        EXPECT_NEAR(p.sum(), 1.0, 1e-15);
        EXPECT_GE(p.minCoeff(), 0.0);
    }
}

TEST(ResponseProbs, SaturatesToDeterministicRule) {
    ModelConfig c;
    c.n_hidden = 1;
    c.order = 3;
    LhsModel m(c);
    HiddenVariable hv;
    hv.coeffs = RMatrix::Zero(1, 10);
    hv.coeffs(0, 2) = 1e3;  // the z component of degree one
    RVector p = response_probs(hv, qubit_pvm(Eigen::Vector3d(0.1, 0.2, 0.97).normalized()), m.features(), m.mode());
    EXPECT_GE(p(0), 1.0 - 1e-6);
}

TEST(HiddenState, Examples) {
    EXPECT_LE(max_abs(hidden_state({CMatrix::Identity(2, 2)}).matrix() - CMatrix::Identity(2, 2) / 2.0), 1e-15);
    CMatrix d = CMatrix::Zero(2, 2);
    d(0, 0) = 1.0;
    EXPECT_LE(max_abs(hidden_state({d}).matrix() - d), 1e-15);
    EXPECT_THROW(hidden_state({CMatrix::Zero(2, 2)}), DegenerateParameterError);
    EXPECT_THROW(hidden_state({CMatrix::Identity(2, 2) * 1e-16}), DegenerateParameterError);
}

TEST(HiddenState, RandomParamsAreStates) {
    Rng rng(44);
    for (int k = 0; k < 1000; ++k) {
        const int d = 2 + k % 3;
        CMatrix m = testing::random_hermitian(d, rng) + Complex(0, 1) * testing::random_hermitian(d, rng);
        CMatrix s = hidden_state({m}).matrix();
        EXPECT_GE(min_eigenvalue(s), -1e-14);
        EXPECT_NEAR(s.trace().real(), 1.0, 1e-14);
        EXPECT_LE(hermiticity_defect(s), 1e-12);
    }
}

TEST(HiddenState, GaugeInvariant) {
    Rng rng(45);
    std::normal_distribution<double> n(0.0, 3.0);
    for (int k = 0; k < 200; ++k) {
        CMatrix m = testing::random_hermitian(3, rng) + Complex(0, 1) * testing::random_hermitian(3, rng);
        Complex c(n(rng), n(rng));
        EXPECT_LE(max_abs(hidden_state({c * m}).matrix() - hidden_state({m}).matrix()), 1e-12);
    }
}

TEST(LhsAssemblage, DeterministicSingleHidden) {
    ModelConfig c;
    c.n_hidden = 1;
    c.order = 1;
    LhsModel m(c);
    HiddenVariable hv;
    hv.coeffs = RMatrix::Zero(1, 3);
    hv.coeffs(0, 2) = 1e9;
    m.set_hidden_variable(0, hv);
    CMatrix d = CMatrix::Zero(2, 2);
    d(1, 1) = 1.0;
    m.set_hidden_state_param(0, {d});
    Assemblage s = lhs_assemblage(m, pauli_triple()[2]);
    EXPECT_LE(max_abs(s[0] - d), 1e-15);
    EXPECT_LE(max_abs(s[1]), 1e-15);
}

TEST(LhsAssemblage, UniformResponseSplitsMarginal) {
    LhsModel m = init_model(softmax_config(3, 3, 5));
    m.layout().coeffs(m.params(), 0).setZero();
    m.layout().coeffs(m.params(), 1).setZero();
    m.layout().coeffs(m.params(), 2).setZero();
    Rng rng(46);
    Assemblage s = lhs_assemblage(m, sample_qudit_pvm(3, rng));
    CMatrix marginal = lhs_marginal(m);
    for (const auto& e : s) {
        EXPECT_LE(max_abs(e - marginal / 3.0), 1e-15);
    }
}

TEST(LhsAssemblage, NoSignaling) {
    Rng rng(47);
    for (auto [cfg, cls] : {std::pair{ModelConfig{}, MeasurementClass::qubit_pvm()},
                           std::pair{softmax_config(2, 4, 6), MeasurementClass::povm(2)},
                           std::pair{softmax_config(3, 3, 6), MeasurementClass::qudit_pvm(3)}}) {
        cfg.seed = 3;
        LhsModel m = init_model(cfg);
        CMatrix marginal = lhs_marginal(m);
        for (int k = 0; k < 50; ++k) {
            Assemblage s = lhs_assemblage(m, sample_measurement(cls, rng));
            CMatrix sum = CMatrix::Zero(cfg.dim_b, cfg.dim_b);
            double tr = 0.0;
            for (const auto& e : s) {
                sum += e;
                tr += e.trace().real();
                EXPECT_GE(min_eigenvalue(e), -1e-14);
            }
            EXPECT_LE(max_abs(sum - marginal), 1e-12);
            EXPECT_NEAR(tr, 1.0, 1e-12);
        }
    }
}

TEST(LhsAssemblage, HemisphereModelReproducesWernerHalf) {
    LhsModel model = testing::hemisphere_model(100000, 48);
    VisibilityState w = werner(0.5);
    Rng rng(49);
    double worst = 0.0;
    for (int k = 0; k < 20; ++k) {
        Measurement x = sample_qubit_pvm(rng);
        Assemblage lhs = lhs_assemblage(model, x);
        Assemblage q = quantum_assemblage(w.rho.matrix(), 2, 2, x.elements);
        for (int a = 0; a < 2; ++a) {
            worst = std::max(worst, trace_distance(lhs[a], q[a]));
        }
    }
    EXPECT_LE(worst, 5e-3);
}

TEST(Checkpoint, BitExactRoundTrip) {
    for (ModelConfig c : {ModelConfig{}, softmax_config(3, 3, 7)}) {
        c.seed = 17;
        LhsModel m = init_model(c);
        Rng rng(123);
        rng.discard(1000);
        std::stringstream ss;
        save_checkpoint(ss, m, rng, 4321);
        Checkpoint back = load_checkpoint(ss);
        EXPECT_EQ(back.step, 4321);
        EXPECT_EQ(back.rng, rng);
        ASSERT_EQ(back.model.params().size(), m.params().size());
        for (Eigen::Index i = 0; i < m.params().size(); ++i) {
            EXPECT_EQ(back.model.params()(i), m.params()(i));
        }
        EXPECT_TRUE(back.model.features() == m.features());
        EXPECT_EQ(back.model.mode(), m.mode());
    }
}

TEST(Checkpoint, RejectsGarbage) {
    std::stringstream ss("{\"format\": \"something-else\"}");
    EXPECT_THROW(load_checkpoint(ss), ValidationError);
    std::stringstream broken("not json");
    EXPECT_THROW(load_checkpoint(broken), ValidationError);
    EXPECT_THROW(load_checkpoint(std::string("/nonexistent/dir/ckpt.json")), IoError);
}

TEST(Layout, BlockNames) {
    LhsModel m = init_model(softmax_config(2, 4));
    const auto& l = m.layout();
    EXPECT_NE(l.block_name(0).find("coeffs"), std::string::npos);
    EXPECT_NE(l.block_name(l.bias_offset()).find("bias"), std::string::npos);
    EXPECT_NE(l.block_name(l.states_offset()).find("state"), std::string::npos);
}

}  // namespace
}  // namespace lhsforge

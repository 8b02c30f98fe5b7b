#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>

#include "lhsforge/measurements.hpp"
#include "lhsforge/quantum.hpp"
#include "lhsforge/response_basis.hpp"

namespace lhsforge {

enum class ResponseMode {
    /// Qubit PVMs: p(0) = sigmoid(<B(g^0), lambda>), p(1) = 1 - p(0).
    SigmoidDichotomic,
    /// p(a) = softmax_a(<coeffs row a, B(g^a)> + bias_a) over the measurement's outcomes.
    SoftmaxGeneral,
};

std::string_view to_string(ResponseMode m);
ResponseMode parse_response_mode(std::string_view name);

struct ModelConfig {
    int n_hidden = 8;
    /// Polynomial order D of the feature map.
    int order = 5;
    int dim_a = 2;
    int dim_b = 2;
    /// Largest outcome count the model can answer.
    int o_max = 2;
    ResponseMode mode = ResponseMode::SigmoidDichotomic;
    std::uint64_t seed = 0;

    void validate() const;
    /// Odd harmonics on the Bloch vector for the dichotomic mode, monomials on g^a otherwise.
    FeatureMap feature_map() const;
    /// One rule row per hidden variable in the dichotomic mode, o_max otherwise.
    int rule_rows() const { return mode == ResponseMode::SigmoidDichotomic ? 1 : o_max; }
};

/// Model configuration matching a measurement class: dichotomic sigmoid for
/// the qubit PVM classes, softmax with o_max = class outcome count otherwise.
ModelConfig model_config_for(const MeasurementClass& cls, int dim_b, int n_hidden, int order,
                             std::uint64_t seed);

/// Coefficient matrix of one hidden variable: rows are outcome rules c_a(lambda).
struct HiddenVariable {
    RMatrix coeffs;  // rule_rows x n_features
    RVector bias;    // o_max (empty in the dichotomic mode)
};

/// Unconstrained complex matrix mapped to sigma = M M^dagger / Tr[M M^dagger].
struct HiddenStateParam {
    CMatrix m;
};

/// Offsets of each parameter block inside the flat parameter vector.
///
/// Blocks, in order: one n_hidden x n_features coefficient matrix per rule row
/// (column-major), the n_hidden x o_max bias (softmax mode only), then the
/// hidden-state parameters as an n_hidden x dim_b^2 complex matrix whose row
/// lambda holds M_lambda in row-major order. Gradients and optimizer moments
/// share this layout.
struct ParameterLayout {
    int n_hidden = 0;
    int rule_rows = 0;
    int n_features = 0;
    int bias_cols = 0;
    int dim_b = 0;

    Eigen::Index coeffs_offset(int row) const;
    Eigen::Index bias_offset() const;
    Eigen::Index states_offset() const;
    Eigen::Index size() const;

    Eigen::Map<RMatrix> coeffs(RVector& v, int row) const;
    Eigen::Map<const RMatrix> coeffs(const RVector& v, int row) const;
    Eigen::Map<RMatrix> bias(RVector& v) const;
    Eigen::Map<const RMatrix> bias(const RVector& v) const;
    Eigen::Map<CMatrix> states(RVector& v) const;
    Eigen::Map<const CMatrix> states(const RVector& v) const;

    /// Name of the block holding flat index i, for diagnostics.
    std::string block_name(Eigen::Index i) const;
};

class LhsModel {
   public:
    /// All parameters zero; use init_model for the random start.
    explicit LhsModel(const ModelConfig& cfg);

    const ModelConfig& config() const { return cfg_; }
    const FeatureMap& features() const { return features_; }
    const ParameterLayout& layout() const { return layout_; }
    ResponseMode mode() const { return cfg_.mode; }
    int n_hidden() const { return cfg_.n_hidden; }
    int dim_b() const { return cfg_.dim_b; }
    int o_max() const { return cfg_.o_max; }

    RVector& params() { return params_; }
    const RVector& params() const { return params_; }

    HiddenVariable hidden_variable(int i) const;
    void set_hidden_variable(int i, const HiddenVariable& hv);
    HiddenStateParam hidden_state_param(int i) const;
    void set_hidden_state_param(int i, const HiddenStateParam& p);

   private:
    ModelConfig cfg_;
    FeatureMap features_;
    ParameterLayout layout_;
    RVector params_;
};

/// Coefficients ~ N(0, 0.1^2), bias 0, M = I + complex N(0, 0.1^2) noise; deterministic in cfg.seed.
LhsModel init_model(const ModelConfig& cfg);

/// Redraws hidden pair i from the init distribution.
void reinitialize_hidden(LhsModel& model, int i, Rng& rng);

/// Feature input for one outcome: the Bloch part (g_1, g_2, g_3) in the dichotomic mode, g^a otherwise.
RVector response_input(const Measurement& m, int outcome, ResponseMode mode);

/// Outcome probabilities p(a | x, lambda) for one hidden variable.
RVector response_probs(const HiddenVariable& lambda, const Measurement& m, const FeatureMap& fm,
                       ResponseMode mode);

/// sigma = M M^dagger / Tr[M M^dagger]; throws DegenerateParameterError for a vanishing norm.
DensityMatrix hidden_state(const HiddenStateParam& param);

/// sigma^LHS_a = (1/N_hidden) sum_lambda p(a | x, lambda) sigma_lambda.
Assemblage lhs_assemblage(const LhsModel& model, const Measurement& m);

/// (1/N_hidden) sum_lambda sigma_lambda, the measurement-independent marginal.
CMatrix lhs_marginal(const LhsModel& model);

/// Saved model plus the RNG and step counter needed to resume training.
struct Checkpoint {
    LhsModel model;
    Rng rng;
    std::int64_t step = 0;
};

void save_checkpoint(std::ostream& out, const LhsModel& model, const Rng& rng, std::int64_t step);
void save_checkpoint(const std::string& path, const LhsModel& model, const Rng& rng, std::int64_t step);
Checkpoint load_checkpoint(std::istream& in);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace lhsforge

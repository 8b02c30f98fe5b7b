#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "lhsforge/lhs_model.hpp"
#include "lhsforge/measurements.hpp"
#include "lhsforge/states.hpp"

namespace lhsforge {

enum class OptimizerKind { PlainGD, Adam };

struct OptimizerConfig {
    OptimizerKind kind = OptimizerKind::Adam;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

struct TrainConfig {
    int steps = 50000;
    int meas_per_step = 512;
    double learning_rate = 1e-3;
    /// eta_t = eta * (1 + cos(pi t / steps)) / 2
    bool cosine_decay = true;
    OptimizerConfig optimizer;
    /// Verdict threshold on the held-out loss.
    double loss_tolerance = 1e-3;
    /// 0 picks the default: 10^4 for qubit classes, 10^3 otherwise.
    int test_set_size = 0;
    std::uint64_t seed = 0;
    MeasurementClass measurement_class = MeasurementClass::qubit_pvm();
    int n_hidden = 8;
    int order = 5;

    /// Cadence of loss_history entries and log lines.
    int log_every = 1000;
    /// Cadence of the in-memory restore point used by the divergence guard.
    int snapshot_every = 1000;
    /// Periodic checkpoint file; empty disables.
    std::string checkpoint_path;
    int checkpoint_every = 10000;
    /// Training log sink (one `step=... train_loss=... lr=... wall_time=...` line per log_every).
    std::ostream* log = nullptr;

    void validate() const;
    int effective_test_set_size() const;
};

enum class Verdict { LhsFound, NotConverged };

std::string_view to_string(Verdict v);
Verdict parse_verdict(std::string_view name);

struct TrainReport {
    double final_train_loss = 0.0;
    double final_test_loss = 0.0;
    std::vector<std::pair<std::int64_t, double>> loss_history;
    Verdict verdict = Verdict::NotConverged;
    double wall_time = 0.0;
    std::int64_t steps_run = 0;
    int lr_halvings = 0;
    int hidden_resets = 0;
};

std::string report_to_json(const TrainReport& r);
TrainReport report_from_json(std::string_view text);

/// Features and quantum targets of a measurement batch, laid out for the batched forward pass.
///
/// Outcome slots beyond a measurement's own outcome count are padding: their
/// mask entry is 0 and they take no probability mass.
struct PreparedBatch {
    int size = 0;
    int outcome_slots = 0;
    /// Per rule row: size x n_features.
    std::vector<RMatrix> features;
    /// size x outcome_slots, 1 for real outcomes.
    RMatrix mask;
    /// Per outcome slot: size x dim_b^2 quantum assemblage entries (row-major within each element).
    std::vector<CMatrix> targets;
};

PreparedBatch prepare_batch(const LhsModel& model, const VisibilityState& state,
                            std::span<const Measurement> batch);

enum class LossKind {
    /// sum of trace distances, as reported.
    Exact,
    /// |x| replaced by sqrt(x^2 + eps); the function compute_gradients differentiates.
    Smoothed,
};

/// (1/|batch|) sum_x assemblage_distance(lhs_assemblage(model, x), quantum_assemblage(state, x)).
double batch_loss(const LhsModel& model, const VisibilityState& state, std::span<const Measurement> batch,
                  LossKind kind = LossKind::Exact);
double batch_loss(const LhsModel& model, const PreparedBatch& batch, LossKind kind = LossKind::Exact);

struct LossGradient {
    /// Smoothed loss at the current parameters.
    double loss = 0.0;
    /// d loss / d params, in the model's ParameterLayout.
    RVector gradient;
};

/// Reverse-mode gradient of the smoothed batch loss with respect to every parameter.
LossGradient compute_gradients(const LhsModel& model, const VisibilityState& state,
                               std::span<const Measurement> batch);
LossGradient compute_gradients(const LhsModel& model, const PreparedBatch& batch);

/// Held-out measurements for a config: the three Pauli settings, or
/// effective_test_set_size() fresh draws from an RNG seeded with seed + 1.
std::vector<Measurement> test_measurements(const TrainConfig& cfg);

struct TrainResult {
    LhsModel model;
    TrainReport report;
};

/// Stochastic gradient descent on a fresh batch per step, followed by the held-out evaluation.
TrainResult train(const VisibilityState& state, const TrainConfig& cfg);

struct Certification {
    Verdict verdict = Verdict::NotConverged;
    TrainReport report;
    /// One-sided reading of the verdict.
    std::string summary;
};

/// LhsFound means no steering was detected at this capacity and tolerance;
/// NotConverged means no LHS model was found, which is not a proof of steerability.
Certification certify(const VisibilityState& state, const TrainConfig& cfg);

}  // namespace lhsforge

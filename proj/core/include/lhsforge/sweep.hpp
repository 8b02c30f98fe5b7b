#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "lhsforge/states.hpp"
#include "lhsforge/trainer.hpp"

namespace lhsforge {

/// A visibility sweep: one training run per (v, repeat).
///
/// Config files are JSON documents:
///
///     {
///       "state": {"family": "werner"},            // or "isotropic", or {"family": "custom", "path": "rho.json"}
///       "measurement": {"class": "pauli"},        // "pvm", "qudit-pvm", "povm"; optional "dim", "outcomes"
///       "v_grid": [0.4, 0.55, 0.7],               // or {"start": 0.0, "stop": 0.8, "step": 0.05}
///       "repeats": 1,
///       "output": "sweep.csv",
///       "train": {"steps": 50000, "n_hidden": 8, "order": 5, "seed": 7}
///     }
///
/// Everything but "state" is optional. A custom state is mixed with white
/// noise: v rho + (1 - v) I / (d_A d_B).
struct SweepConfig {
    StateFamily family = StateFamily::Werner2;
    std::string custom_state_path;
    std::vector<double> v_grid;
    int repeats = 1;
    std::string output_path = "sweep.csv";
    /// measurement_class and seed live here; run r uses seed train.seed + r.
    TrainConfig train;

    void validate() const;
};

/// 0.0..0.8 for Werner2 and custom states, 0.1..0.6 for Isotropic3, step 0.05.
std::vector<double> default_v_grid(StateFamily family);

SweepConfig parse_sweep_config(std::string_view document);
SweepConfig load_sweep_config(const std::string& path);

/// Canonical JSON form of everything that affects the results (not the output path).
std::string canonical_config(const SweepConfig& cfg);
/// 16 hex digits of FNV-1a over canonical_config.
std::string config_hash(const SweepConfig& cfg);

/// The state trained at visibility v.
VisibilityState sweep_state(const SweepConfig& cfg, double v);

struct SweepRecord {
    double v = 0.0;
    double train_loss = 0.0;
    double test_loss = 0.0;
    std::int64_t steps = 0;
    std::uint64_t seed = 0;
    Verdict verdict = Verdict::NotConverged;
    double wall_time_s = 0.0;

    bool operator==(const SweepRecord&) const = default;
};

inline constexpr std::string_view kSweepCsvHeader = "v,train_loss,test_loss,steps,seed,verdict,wall_time_s";

std::string format_record(const SweepRecord& r);

struct SweepCsv {
    /// Empty when the file has no hash comment.
    std::string config_hash;
    std::vector<SweepRecord> records;
};

/// Throws IoError for unreadable files and ValidationError naming the line for malformed content.
SweepCsv read_sweep_csv(std::istream& in);
SweepCsv read_sweep_csv_file(const std::string& path);

struct SweepOptions {
    int jobs = 1;
    /// Progress lines, one per finished run; may be null.
    std::ostream* log = nullptr;
};

/// Runs every (v, repeat) pair not already recorded in cfg.output_path and
/// appends one CSV line per finished run. Returns all records for the config,
/// old and new, sorted by (v, seed).
///
/// The output file is opened before any training; an existing file written
/// under a different config hash is rejected.
std::vector<SweepRecord> run_sweep(const SweepConfig& cfg, const SweepOptions& opts = {});

struct MonotonicityViolation {
    double v_low = 0.0;
    double v_high = 0.0;
    double loss_low = 0.0;
    double loss_high = 0.0;
};

struct ThresholdEstimate {
    double v_star = 0.0;
    double lo = 0.0;
    double hi = 0.0;
    /// Adjacent grid points where the best loss drops by more than eps/2 as v grows.
    std::vector<MonotonicityViolation> violations;
};

/// Bracket [largest v with best test loss <= eps, smallest larger v with best test loss > eps].
/// The best loss at each v is the minimum over repeats. Throws NoBracketError when
/// every v lands on the same side of eps.
ThresholdEstimate estimate_threshold(const std::vector<SweepRecord>& records, double eps);

}  // namespace lhsforge

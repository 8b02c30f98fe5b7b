#include <CLI11.hpp>
#include <iostream>
#include <string>

#include "lhsforge/errors.hpp"
#include "lhsforge/sweep.hpp"

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitNoBracket = 3;
constexpr int kExitFailure = 1;

lhsforge::MeasurementClass class_from_name(const std::string& name, int dim, int outcomes) {
    using lhsforge::MeasurementClass;
    switch (lhsforge::parse_measurement_kind(name)) {
        case lhsforge::MeasurementKind::PauliTriple:
            return MeasurementClass::pauli_triple();
        case lhsforge::MeasurementKind::QubitPVM:
            return dim == 2 ? MeasurementClass::qubit_pvm() : MeasurementClass::qudit_pvm(dim);
        case lhsforge::MeasurementKind::QuditPVM:
            return MeasurementClass::qudit_pvm(dim);
        case lhsforge::MeasurementKind::POVM:
            return MeasurementClass::povm(dim, outcomes);
    }
    throw lhsforge::ValidationError("unknown measurement class '" + name + "'");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Local hidden-state model search and visibility sweeps"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_path;
    int jobs = 1;
    auto* sweep = app.add_subcommand("sweep", "Train one model per (v, repeat) and append results to a CSV");
    sweep->add_option("--config", config_path, "JSON sweep config")->required();
    sweep->add_option("--out", out_path, "CSV output (overrides the config)");
    sweep->add_option("--jobs", jobs, "Concurrent training runs")->check(CLI::PositiveNumber);

    std::string state_name = "werner";
    std::string state_path;
    double v = 0.5;
    std::string class_name = "pvm";
    int outcomes = 0;
    lhsforge::TrainConfig tc;
    bool verbose = false;
    bool as_json = false;
    auto* certify = app.add_subcommand("certify", "Search for an LHS model of one state");
    certify->add_option("--state", state_name, "werner, isotropic or custom")->capture_default_str();
    certify->add_option("--path", state_path, "State document for --state custom");
    certify->add_option("--v", v, "Visibility")->capture_default_str();
    certify->add_option("--class", class_name, "pauli, pvm, qudit-pvm or povm")->capture_default_str();
    certify->add_option("--outcomes", outcomes, "POVM outcome count (0 = d^2)");
    certify->add_option("--steps", tc.steps)->capture_default_str();
    certify->add_option("--meas-per-step", tc.meas_per_step)->capture_default_str();
    certify->add_option("--lr", tc.learning_rate)->capture_default_str();
    certify->add_option("--n-hidden", tc.n_hidden)->capture_default_str();
    certify->add_option("--order", tc.order)->capture_default_str();
    std::string optimizer = "adam";
    certify->add_option("--optimizer", optimizer, "adam or gd")
        ->check(CLI::IsMember({"adam", "gd"}))
        ->capture_default_str();
    bool constant_lr = false;
    certify->add_flag("--constant-lr", constant_lr, "Disable the cosine learning-rate decay");
    certify->add_option("--eps", tc.loss_tolerance, "Held-out loss tolerance")->capture_default_str();
    certify->add_option("--seed", tc.seed)->capture_default_str();
    certify->add_option("--checkpoint", tc.checkpoint_path, "Periodic checkpoint file");
    certify->add_flag("--verbose", verbose, "Print the training log to stderr");
    certify->add_flag("--json", as_json, "Print the training report as JSON");

    std::string in_path;
    double eps = 1e-3;
    auto* threshold = app.add_subcommand("threshold", "Estimate the critical visibility from a sweep CSV");
    threshold->add_option("--in", in_path, "Sweep CSV")->required();
    threshold->add_option("--eps", eps, "Loss tolerance")->capture_default_str();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*sweep) {
            lhsforge::SweepConfig cfg = lhsforge::load_sweep_config(config_path);
            if (!out_path.empty()) {
                cfg.output_path = out_path;
            }
            auto records = lhsforge::run_sweep(cfg, {jobs, &std::cerr});
            std::cout << records.size() << " records in " << cfg.output_path << '\n';
        } else if (*certify) {
            lhsforge::VisibilityState state = [&] {
                const auto family = lhsforge::parse_state_family(state_name);
                if (family != lhsforge::StateFamily::Custom) {
                    return lhsforge::make_family_state(family, v);
                }
                lhsforge::SweepConfig sc;
                sc.family = family;
                sc.custom_state_path = state_path;
                if (state_path.empty()) {
                    throw lhsforge::ValidationError("--state custom needs --path");
                }
                return lhsforge::sweep_state(sc, v);
            }();
            tc.measurement_class = class_from_name(class_name, state.dim_a, outcomes);
            tc.optimizer.kind = optimizer == "gd" ? lhsforge::OptimizerKind::PlainGD : lhsforge::OptimizerKind::Adam;
            tc.cosine_decay = !constant_lr;
            if (verbose) {
                tc.log = &std::cerr;
            }
            auto c = lhsforge::certify(state, tc);
            if (as_json) {
                std::cout << lhsforge::report_to_json(c.report) << '\n';
            } else {
                std::cout << lhsforge::to_string(c.verdict) << '\n' << c.summary << '\n';
            }
        } else if (*threshold) {
            auto csv = lhsforge::read_sweep_csv_file(in_path);
            auto est = lhsforge::estimate_threshold(csv.records, eps);
            std::cout << "v* = " << est.v_star << "  bracket [" << est.lo << ", " << est.hi << "]\n";
            for (const auto& m : est.violations) {
                std::cout << "monotonicity violation: loss " << m.loss_low << " at v=" << m.v_low << " > loss "
                          << m.loss_high << " at v=" << m.v_high << '\n';
            }
        }
    } catch (const lhsforge::NoBracketError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitNoBracket;
    } catch (const lhsforge::ValidationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitFailure;
    }
    return 0;
}

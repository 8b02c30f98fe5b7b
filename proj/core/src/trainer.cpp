#include "lhsforge/trainer.hpp"

#include <chrono>
#include <cmath>
#include <nlohmann/json.hpp>
#include <numbers>
#include <ostream>
#include <sstream>

#include "lhsforge/errors.hpp"
#include "lhsforge/tolerances.hpp"

namespace lhsforge {

namespace {

constexpr int kMaxLrHalvings = 40;

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

struct HiddenStates {
    RMatrix re;  // n_hidden x dim_b^2, sigma_lambda row-major
    RMatrix im;
    RVector norms;  // Tr[M M^dagger]
    std::vector<CMatrix> m;
};

HiddenStates build_hidden_states(const LhsModel& model) {
    const int nh = model.n_hidden();
    const int db = model.dim_b();
    HiddenStates hs;
    hs.re.resize(nh, db * db);
    hs.im.resize(nh, db * db);
    hs.norms.resize(nh);
    hs.m.reserve(static_cast<std::size_t>(nh));
    auto flat = model.layout().states(model.params());
    for (int i = 0; i < nh; ++i) {
        CMatrix m(db, db);
        for (int r = 0; r < db; ++r) {
            for (int c = 0; c < db; ++c) {
                m(r, c) = flat(i, r * db + c);
            }
        }
        double t = m.squaredNorm();
        if (!(t > tol::kMinHiddenNorm)) {
            throw DegenerateParameterError("hidden state " + std::to_string(i) + " has vanishing norm");
        }
        CMatrix s = m * m.adjoint() / t;
        for (int r = 0; r < db; ++r) {
            for (int c = 0; c < db; ++c) {
                // Average with the mirrored entry so sigma is Hermitian to the last bit.
                Complex v = 0.5 * (s(r, c) + std::conj(s(c, r)));
                hs.re(i, r * db + c) = v.real();
                hs.im(i, r * db + c) = v.imag();
            }
        }
        hs.norms(i) = t;
        hs.m.push_back(std::move(m));
    }
    return hs;
}

// Outcome probabilities per slot (size x n_hidden).
std::vector<RMatrix> response_matrices(const LhsModel& model, const PreparedBatch& b) {
    const ParameterLayout& l = model.layout();
    const RVector& p = model.params();
    std::vector<RMatrix> probs;
    if (model.mode() == ResponseMode::SigmoidDichotomic) {
        RMatrix z = b.features[0] * l.coeffs(p, 0).transpose();
        // One exp per entry, evaluated on -|z| so neither branch overflows.
        Eigen::ArrayXXd e = (-z.array().abs()).exp();
        Eigen::ArrayXXd big = (1.0 + e).inverse();
        Eigen::ArrayXXd small = e * big;
        probs.emplace_back((z.array() >= 0.0).select(big, small).matrix());
        probs.emplace_back((z.array() >= 0.0).select(small, big).matrix());
        return probs;
    }
    const int slots = b.outcome_slots;
    const double neg_inf = -std::numeric_limits<double>::infinity();
    auto bias = l.bias(p);
    probs.resize(static_cast<std::size_t>(slots));
    RMatrix zmax = RMatrix::Constant(b.size, model.n_hidden(), neg_inf);
    for (int a = 0; a < slots; ++a) {
        RMatrix& z = probs[static_cast<std::size_t>(a)];
        z = b.features[static_cast<std::size_t>(a)] * l.coeffs(p, a).transpose();
        z.rowwise() += bias.col(a).transpose();
        for (int x = 0; x < b.size; ++x) {
            if (b.mask(x, a) <= 0.0) {
                z.row(x).setConstant(neg_inf);
            }
        }
        zmax = zmax.cwiseMax(z);
    }
    RMatrix total = RMatrix::Zero(b.size, model.n_hidden());
    for (int a = 0; a < slots; ++a) {
        RMatrix& z = probs[static_cast<std::size_t>(a)];
        z = (z - zmax).array().exp().matrix();
        // Vectorized exp(-inf) can come out subnormal rather than zero.
        for (int x = 0; x < b.size; ++x) {
            if (b.mask(x, a) <= 0.0) {
                z.row(x).setZero();
            }
        }
        total += z;
    }
    for (auto& z : probs) {
        z.array() /= total.array();
    }
    return probs;
}

// Loss of the batch; fills `grad` (smoothed loss only) when non-null.
double evaluate(const LhsModel& model, const PreparedBatch& b, LossKind kind, RVector* grad) {
    const int nh = model.n_hidden();
    const int db = model.dim_b();
    const int d2 = db * db;
    const int slots = b.outcome_slots;
    const double eps = kind == LossKind::Smoothed ? tol::kTraceNormSmoothing : 0.0;
    const double inv_k = 1.0 / b.size;

    HiddenStates hs = build_hidden_states(model);
    std::vector<RMatrix> probs = response_matrices(model, b);

    std::vector<RMatrix> g_re;
    std::vector<RMatrix> g_im;
    if (grad != nullptr) {
        g_re.assign(static_cast<std::size_t>(slots), RMatrix::Zero(b.size, d2));
        g_im.assign(static_cast<std::size_t>(slots), RMatrix::Zero(b.size, d2));
    }

    double loss = 0.0;
    for (int a = 0; a < slots; ++a) {
        const auto ua = static_cast<std::size_t>(a);
        RMatrix a_re = probs[ua] * hs.re / nh;
        RMatrix a_im = probs[ua] * hs.im / nh;
        const CMatrix& target = b.targets[ua];
        for (int x = 0; x < b.size; ++x) {
            if (b.mask(x, a) <= 0.0) {
                continue;
            }
            if (db == 2) {
                Eigen::Matrix2cd diff;
                for (int e = 0; e < 4; ++e) {
                    diff(e / 2, e % 2) = Complex(a_re(x, e), a_im(x, e)) - target(x, e);
                }
                Eigen::Matrix2cd g;
                loss += 0.5 * inv_k * smooth_trace_norm_2x2(diff, eps, grad != nullptr ? &g : nullptr);
                if (grad != nullptr) {
                    for (int e = 0; e < 4; ++e) {
                        g_re[ua](x, e) = 0.5 * inv_k * g(e / 2, e % 2).real();
                        g_im[ua](x, e) = 0.5 * inv_k * g(e / 2, e % 2).imag();
                    }
                }
                continue;
            }
            CMatrix diff(db, db);
            for (int e = 0; e < d2; ++e) {
                diff(e / db, e % db) = Complex(a_re(x, e), a_im(x, e)) - target(x, e);
            }
            diff = 0.5 * (diff + diff.adjoint()).eval();
            if (grad == nullptr && kind == LossKind::Exact) {
                loss += 0.5 * inv_k * trace_norm(diff);
                continue;
            }
            SmoothTraceNorm tn = smooth_trace_norm(diff, eps);
            loss += 0.5 * inv_k * tn.value;
            if (grad != nullptr) {
                for (int e = 0; e < d2; ++e) {
                    g_re[ua](x, e) = 0.5 * inv_k * tn.gradient(e / db, e % db).real();
                    g_im[ua](x, e) = 0.5 * inv_k * tn.gradient(e / db, e % db).imag();
                }
            }
        }
    }
    if (grad == nullptr) {
        return loss;
    }

    // Reverse pass. dL = sum_{x,a} Tr(G_xa dA_xa) with A_xa = (1/N) sum_lambda P_a[x, lambda] sigma_lambda.
    const ParameterLayout& l = model.layout();
    grad->setZero(l.size());
    std::vector<RMatrix> d_probs(static_cast<std::size_t>(slots));
    RMatrix h_re = RMatrix::Zero(nh, d2);
    RMatrix h_im = RMatrix::Zero(nh, d2);
    for (int a = 0; a < slots; ++a) {
        const auto ua = static_cast<std::size_t>(a);
        // Tr(G sigma) = sum_ij G_ij conj(sigma_ij) for Hermitian sigma.
        d_probs[ua] = (g_re[ua] * hs.re.transpose() + g_im[ua] * hs.im.transpose()) / nh;
        h_re.noalias() += probs[ua].transpose() * g_re[ua] / nh;
        h_im.noalias() += probs[ua].transpose() * g_im[ua] / nh;
    }

    if (model.mode() == ResponseMode::SigmoidDichotomic) {
        RMatrix dz = ((d_probs[0] - d_probs[1]).array() * probs[0].array() * probs[1].array()).matrix();
        l.coeffs(*grad, 0) = dz.transpose() * b.features[0];
    } else {
        RMatrix weighted = RMatrix::Zero(b.size, nh);
        for (int a = 0; a < slots; ++a) {
            weighted.array() += probs[static_cast<std::size_t>(a)].array() * d_probs[static_cast<std::size_t>(a)].array();
        }
        auto bias_grad = l.bias(*grad);
        for (int a = 0; a < slots; ++a) {
            const auto ua = static_cast<std::size_t>(a);
            RMatrix dz = (probs[ua].array() * (d_probs[ua] - weighted).array()).matrix();
            l.coeffs(*grad, a) = dz.transpose() * b.features[ua];
            bias_grad.col(a) = dz.colwise().sum().transpose();
        }
    }

    // sigma = M M^dagger / t  =>  dL/dRe M + i dL/dIm M = (2/t) (H - Tr(H sigma) I) M.
    auto state_grad = l.states(*grad);
    for (int i = 0; i < nh; ++i) {
        CMatrix h(db, db);
        double c = 0.0;
        for (int e = 0; e < d2; ++e) {
            h(e / db, e % db) = Complex(h_re(i, e), h_im(i, e));
            c += h_re(i, e) * hs.re(i, e) + h_im(i, e) * hs.im(i, e);
        }
        CMatrix gm = (2.0 / hs.norms(i)) * (h - c * CMatrix::Identity(db, db)) * hs.m[static_cast<std::size_t>(i)];
        for (int e = 0; e < d2; ++e) {
            state_grad(i, e) = gm(e / db, e % db);
        }
    }
    return loss;
}

struct Snapshot {
    RVector params;
    RVector m1;
    RVector m2;
    std::int64_t adam_t = 0;
};

}  // namespace

void TrainConfig::validate() const {
    if (steps < 1 || meas_per_step < 1 || n_hidden < 1 || order < 1 || log_every < 1 || snapshot_every < 1) {
        throw ValidationError("train config: step, batch, model and cadence counts must be positive");
    }
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
        throw ValidationError("train config: learning rate must be positive");
    }
    if (!(loss_tolerance > 0.0)) {
        throw ValidationError("train config: loss tolerance must be positive");
    }
    if (test_set_size < 0) {
        throw ValidationError("train config: test set size must be non-negative");
    }
    if (optimizer.kind == OptimizerKind::Adam &&
        !(optimizer.beta1 >= 0.0 && optimizer.beta1 < 1.0 && optimizer.beta2 >= 0.0 && optimizer.beta2 < 1.0 &&
          optimizer.eps > 0.0)) {
        throw ValidationError("train config: Adam needs beta1, beta2 in [0, 1) and eps > 0");
    }
    measurement_class.validate();
}

int TrainConfig::effective_test_set_size() const {
    if (test_set_size > 0) {
        return test_set_size;
    }
    return measurement_class.dim == 2 ? 10000 : 1000;
}

std::string_view to_string(Verdict v) {
    return v == Verdict::LhsFound ? "LhsFound" : "NotConverged";
}

Verdict parse_verdict(std::string_view name) {
    if (name == "LhsFound") {
        return Verdict::LhsFound;
    }
    if (name == "NotConverged") {
        return Verdict::NotConverged;
    }
    throw ValidationError("unknown verdict '" + std::string(name) + "'");
}

std::string report_to_json(const TrainReport& r) {
    nlohmann::json j;
    j["final_train_loss"] = r.final_train_loss;
    j["final_test_loss"] = r.final_test_loss;
    j["verdict"] = to_string(r.verdict);
    j["wall_time"] = r.wall_time;
    j["steps_run"] = r.steps_run;
    j["lr_halvings"] = r.lr_halvings;
    j["hidden_resets"] = r.hidden_resets;
    auto hist = nlohmann::json::array();
    for (const auto& [step, loss] : r.loss_history) {
        hist.push_back({step, loss});
    }
    j["loss_history"] = hist;
    return j.dump();
}

TrainReport report_from_json(std::string_view text) {
    try {
        auto j = nlohmann::json::parse(text);
        TrainReport r;
        r.final_train_loss = j.at("final_train_loss").get<double>();
        r.final_test_loss = j.at("final_test_loss").get<double>();
        r.verdict = parse_verdict(j.at("verdict").get<std::string>());
        r.wall_time = j.at("wall_time").get<double>();
        r.steps_run = j.at("steps_run").get<std::int64_t>();
        r.lr_halvings = j.at("lr_halvings").get<int>();
        r.hidden_resets = j.at("hidden_resets").get<int>();
        for (const auto& e : j.at("loss_history")) {
            r.loss_history.emplace_back(e.at(0).get<std::int64_t>(), e.at(1).get<double>());
        }
        return r;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("train report: ") + e.what());
    }
}

PreparedBatch prepare_batch(const LhsModel& model, const VisibilityState& state,
                            std::span<const Measurement> batch) {
    if (batch.empty()) {
        throw ValidationError("batch is empty");
    }
    if (state.dim_b != model.dim_b()) {
        throw ShapeError("state and model disagree on the trusted-side dimension");
    }
    const ResponseMode mode = model.mode();
    const FeatureMap& fm = model.features();
    const int k = static_cast<int>(batch.size());
    const int d2 = model.dim_b() * model.dim_b();
    PreparedBatch b;
    b.size = k;
    b.outcome_slots = model.o_max();
    b.features.assign(static_cast<std::size_t>(model.layout().rule_rows), RMatrix::Zero(k, fm.size()));
    b.mask = RMatrix::Zero(k, b.outcome_slots);
    b.targets.assign(static_cast<std::size_t>(b.outcome_slots), CMatrix::Zero(k, d2));
    RVector feat(fm.size());
    for (int x = 0; x < k; ++x) {
        const Measurement& m = batch[static_cast<std::size_t>(x)];
        if (m.dim != state.dim_a) {
            throw ShapeError("measurement dimension does not match the untrusted side of the state");
        }
        const int outcomes = m.n_outcomes();
        if (outcomes > b.outcome_slots) {
            throw CapacityError("measurement has " + std::to_string(outcomes) + " outcomes, model answers " +
                                std::to_string(b.outcome_slots));
        }
        if (mode == ResponseMode::SigmoidDichotomic && outcomes != 2) {
            throw CapacityError("the sigmoid mode answers dichotomic measurements only");
        }
        const int rows = mode == ResponseMode::SigmoidDichotomic ? 1 : outcomes;
        for (int a = 0; a < rows; ++a) {
            RVector in = response_input(m, a, mode);
            fm.evaluate(std::span<const double>(in.data(), static_cast<std::size_t>(in.size())),
                        std::span<double>(feat.data(), static_cast<std::size_t>(feat.size())));
            b.features[static_cast<std::size_t>(a)].row(x) = feat.transpose();
        }
        Assemblage q = quantum_assemblage(state.rho.matrix(), state.dim_a, state.dim_b, m.elements);
        const int db = state.dim_b;
        for (int a = 0; a < outcomes; ++a) {
            b.mask(x, a) = 1.0;
            for (int e = 0; e < d2; ++e) {
                b.targets[static_cast<std::size_t>(a)](x, e) = q[static_cast<std::size_t>(a)](e / db, e % db);
            }
        }
    }
    return b;
}

double batch_loss(const LhsModel& model, const PreparedBatch& batch, LossKind kind) {
    return evaluate(model, batch, kind, nullptr);
}

double batch_loss(const LhsModel& model, const VisibilityState& state, std::span<const Measurement> batch,
                  LossKind kind) {
    return batch_loss(model, prepare_batch(model, state, batch), kind);
}

LossGradient compute_gradients(const LhsModel& model, const PreparedBatch& batch) {
    LossGradient out;
    out.loss = evaluate(model, batch, LossKind::Smoothed, &out.gradient);
    return out;
}

LossGradient compute_gradients(const LhsModel& model, const VisibilityState& state,
                               std::span<const Measurement> batch) {
    return compute_gradients(model, prepare_batch(model, state, batch));
}

std::vector<Measurement> test_measurements(const TrainConfig& cfg) {
    Rng rng(cfg.seed + 1);
    return sample_batch(cfg.measurement_class, cfg.effective_test_set_size(), rng);
}

TrainResult train(const VisibilityState& state, const TrainConfig& cfg) {
    cfg.validate();
    const MeasurementClass& cls = cfg.measurement_class;
    if (cls.dim != state.dim_a) {
        throw ShapeError("measurement class dimension " + std::to_string(cls.dim) +
                         " does not match the untrusted side (" + std::to_string(state.dim_a) + ")");
    }
    const auto start = std::chrono::steady_clock::now();
    auto elapsed = [&start] {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    };

    LhsModel model = init_model(model_config_for(cls, state.dim_b, cfg.n_hidden, cfg.order, cfg.seed));
    Rng sampler(splitmix64(cfg.seed));
    Rng reset_rng(splitmix64(cfg.seed ^ 0xA5A5A5A5A5A5A5A5ULL));

    const bool fixed_batch = cls.kind == MeasurementKind::PauliTriple;
    PreparedBatch batch;
    if (fixed_batch) {
        batch = prepare_batch(model, state, pauli_triple());
    }

    TrainReport report;
    const Eigen::Index n_params = model.params().size();
    RVector m1 = RVector::Zero(n_params);
    RVector m2 = RVector::Zero(n_params);
    std::int64_t adam_t = 0;
    Snapshot snapshot{model.params(), m1, m2, adam_t};
    double initial_loss = -1.0;
    double lr_scale = 1.0;

    for (std::int64_t step = 0; step < cfg.steps; ++step) {
        for (int i = 0; i < model.n_hidden(); ++i) {
            if (!(model.hidden_state_param(i).m.squaredNorm() > tol::kMinHiddenNorm)) {
                reinitialize_hidden(model, i, reset_rng);
                ++report.hidden_resets;
                if (cfg.log != nullptr) {
                    *cfg.log << "step=" << step << " event=reinitialized_hidden index=" << i << '\n';
                }
            }
        }
        if (!fixed_batch) {
            batch = prepare_batch(model, state, sample_batch(cls, cfg.meas_per_step, sampler));
        }
        LossGradient lg = compute_gradients(model, batch);
        if (!std::isfinite(lg.loss) || !lg.gradient.allFinite()) {
            Eigen::Index bad = 0;
            for (; bad < lg.gradient.size() && std::isfinite(lg.gradient(bad)); ++bad) {
            }
            std::ostringstream ss;
            ss << "training diverged at step " << step << ": non-finite ";
            if (bad < lg.gradient.size()) {
                ss << "gradient in " << model.layout().block_name(bad);
            } else {
                ss << "loss";
            }
            throw DivergenceError(ss.str());
        }
        if (initial_loss < 0.0) {
            initial_loss = lg.loss;
        }
        if (lg.loss > 10.0 * initial_loss) {
            if (++report.lr_halvings > kMaxLrHalvings) {
                throw DivergenceError("training diverged at step " + std::to_string(step) +
                                      ": loss keeps exceeding 10x its initial value");
            }
            lr_scale *= 0.5;
            model.params() = snapshot.params;
            m1 = snapshot.m1;
            m2 = snapshot.m2;
            adam_t = snapshot.adam_t;
            if (cfg.log != nullptr) {
                *cfg.log << "step=" << step << " event=lr_halved loss=" << lg.loss << '\n';
            }
            continue;
        }

        double lr = cfg.learning_rate * lr_scale;
        if (cfg.cosine_decay) {
            lr *= 0.5 * (1.0 + std::cos(std::numbers::pi * static_cast<double>(step) / cfg.steps));
        }
        if (step % cfg.log_every == 0 || step + 1 == cfg.steps) {
            report.loss_history.emplace_back(step, lg.loss);
            if (cfg.log != nullptr) {
                *cfg.log << "step=" << step << " train_loss=" << lg.loss << " lr=" << lr
                         << " wall_time=" << elapsed() << '\n';
            }
        }

        if (cfg.optimizer.kind == OptimizerKind::Adam) {
            const auto& o = cfg.optimizer;
            ++adam_t;
            m1 = o.beta1 * m1 + (1.0 - o.beta1) * lg.gradient;
            m2 = o.beta2 * m2 + (1.0 - o.beta2) * lg.gradient.cwiseAbs2();
            double c1 = 1.0 - std::pow(o.beta1, static_cast<double>(adam_t));
            double c2 = 1.0 - std::pow(o.beta2, static_cast<double>(adam_t));
            model.params().array() -=
                lr * (m1.array() / c1) / ((m2.array() / c2).sqrt() + o.eps);
        } else {
            model.params() -= lr * lg.gradient;
        }

        if ((step + 1) % cfg.snapshot_every == 0) {
            snapshot = {model.params(), m1, m2, adam_t};
        }
        if (!cfg.checkpoint_path.empty() && cfg.checkpoint_every > 0 && (step + 1) % cfg.checkpoint_every == 0) {
            save_checkpoint(cfg.checkpoint_path, model, sampler, step + 1);
        }
        report.steps_run = step + 1;
    }

    report.final_train_loss = batch_loss(model, batch, LossKind::Exact);
    std::vector<Measurement> test = test_measurements(cfg);
    report.final_test_loss = batch_loss(model, state, test, LossKind::Exact);
    report.verdict = report.final_test_loss <= cfg.loss_tolerance ? Verdict::LhsFound : Verdict::NotConverged;
    report.wall_time = elapsed();
    if (cfg.log != nullptr) {
        *cfg.log << "done final_train_loss=" << report.final_train_loss
                 << " final_test_loss=" << report.final_test_loss << " verdict=" << to_string(report.verdict)
                 << " wall_time=" << report.wall_time << '\n';
    }
    return {std::move(model), std::move(report)};
}

Certification certify(const VisibilityState& state, const TrainConfig& cfg) {
    TrainResult r = train(state, cfg);
    Certification c;
    c.verdict = r.report.verdict;
    std::ostringstream ss;
    if (c.verdict == Verdict::LhsFound) {
        ss << "LHS model found (held-out loss " << r.report.final_test_loss << " <= " << cfg.loss_tolerance
           << "): no steering detected at this model capacity and tolerance";
    } else {
        ss << "no LHS model found (held-out loss " << r.report.final_test_loss << " > " << cfg.loss_tolerance
           << "): this does not prove steerability";
    }
    c.summary = ss.str();
    c.report = std::move(r.report);
    return c;
}

}  // namespace lhsforge

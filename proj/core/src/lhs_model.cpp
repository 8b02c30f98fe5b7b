#include "lhsforge/lhs_model.hpp"

#include <cmath>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "lhsforge/errors.hpp"
#include "lhsforge/tolerances.hpp"

namespace lhsforge {

namespace {

constexpr double kInitScale = 0.1;

double sigmoid(double z) {
    return 1.0 / (1.0 + std::exp(-z));
}

ParameterLayout make_layout(const ModelConfig& cfg, const FeatureMap& fm) {
    ParameterLayout l;
    l.n_hidden = cfg.n_hidden;
    l.rule_rows = cfg.rule_rows();
    l.n_features = fm.size();
    l.bias_cols = cfg.mode == ResponseMode::SoftmaxGeneral ? cfg.o_max : 0;
    l.dim_b = cfg.dim_b;
    return l;
}

}  // namespace

std::string_view to_string(ResponseMode m) {
    return m == ResponseMode::SigmoidDichotomic ? "sigmoid" : "softmax";
}

ResponseMode parse_response_mode(std::string_view name) {
    if (name == "sigmoid") {
        return ResponseMode::SigmoidDichotomic;
    }
    if (name == "softmax") {
        return ResponseMode::SoftmaxGeneral;
    }
    throw ValidationError("unknown response mode '" + std::string(name) + "'");
}

void ModelConfig::validate() const {
    if (n_hidden < 1 || order < 1 || dim_a < 2 || dim_b < 1 || o_max < 2) {
        throw ValidationError("model config: counts must be positive (n_hidden, order >= 1; dims >= 2; o_max >= 2)");
    }
    if (mode == ResponseMode::SigmoidDichotomic) {
        if (dim_a != 2 || o_max != 2) {
            throw ValidationError("model config: the sigmoid mode needs a qubit and two outcomes");
        }
        if (order % 2 == 0) {
            throw ValidationError("model config: the sigmoid mode needs an odd order");
        }
    } else if (o_max > dim_a * dim_a) {
        throw CapacityError("model config: o_max exceeds d^2");
    }
}

FeatureMap ModelConfig::feature_map() const {
    if (mode == ResponseMode::SigmoidDichotomic) {
        return FeatureMap::odd_harmonics(order);
    }
    return FeatureMap::monomials(order, dim_a * dim_a);
}

ModelConfig model_config_for(const MeasurementClass& cls, int dim_b, int n_hidden, int order,
                             std::uint64_t seed) {
    ModelConfig cfg;
    cfg.n_hidden = n_hidden;
    cfg.order = order;
    cfg.dim_a = cls.dim;
    cfg.dim_b = dim_b;
    cfg.seed = seed;
    if (cls.kind == MeasurementKind::PauliTriple || cls.kind == MeasurementKind::QubitPVM) {
        cfg.mode = ResponseMode::SigmoidDichotomic;
        cfg.o_max = 2;
    } else {
        cfg.mode = ResponseMode::SoftmaxGeneral;
        cfg.o_max = cls.n_outcomes;
    }
    return cfg;
}

Eigen::Index ParameterLayout::coeffs_offset(int row) const {
    return static_cast<Eigen::Index>(row) * n_hidden * n_features;
}

Eigen::Index ParameterLayout::bias_offset() const {
    return coeffs_offset(rule_rows);
}

Eigen::Index ParameterLayout::states_offset() const {
    return bias_offset() + static_cast<Eigen::Index>(n_hidden) * bias_cols;
}

Eigen::Index ParameterLayout::size() const {
    return states_offset() + 2 * static_cast<Eigen::Index>(n_hidden) * dim_b * dim_b;
}

Eigen::Map<RMatrix> ParameterLayout::coeffs(RVector& v, int row) const {
    return {v.data() + coeffs_offset(row), n_hidden, n_features};
}

Eigen::Map<const RMatrix> ParameterLayout::coeffs(const RVector& v, int row) const {
    return {v.data() + coeffs_offset(row), n_hidden, n_features};
}

Eigen::Map<RMatrix> ParameterLayout::bias(RVector& v) const {
    return {v.data() + bias_offset(), n_hidden, bias_cols};
}

Eigen::Map<const RMatrix> ParameterLayout::bias(const RVector& v) const {
    return {v.data() + bias_offset(), n_hidden, bias_cols};
}

Eigen::Map<CMatrix> ParameterLayout::states(RVector& v) const {
    return {reinterpret_cast<Complex*>(v.data() + states_offset()), n_hidden, dim_b * dim_b};
}

Eigen::Map<const CMatrix> ParameterLayout::states(const RVector& v) const {
    return {reinterpret_cast<const Complex*>(v.data() + states_offset()), n_hidden, dim_b * dim_b};
}

std::string ParameterLayout::block_name(Eigen::Index i) const {
    std::ostringstream ss;
    if (i < bias_offset()) {
        Eigen::Index per_row = static_cast<Eigen::Index>(n_hidden) * n_features;
        Eigen::Index row = i / per_row;
        Eigen::Index within = i % per_row;
        ss << "coeffs[rule " << row << "][hidden " << within % n_hidden << "][feature " << within / n_hidden << "]";
    } else if (i < states_offset()) {
        Eigen::Index within = i - bias_offset();
        ss << "bias[hidden " << within % n_hidden << "][outcome " << within / n_hidden << "]";
    } else {
        Eigen::Index within = (i - states_offset()) / 2;
        ss << "hidden_state[" << within % n_hidden << "] entry " << within / n_hidden
           << ((i - states_offset()) % 2 == 0 ? " (re)" : " (im)");
    }
    return ss.str();
}

LhsModel::LhsModel(const ModelConfig& cfg)
    : cfg_(cfg), features_((cfg.validate(), cfg.feature_map())), layout_(make_layout(cfg, features_)) {
    params_ = RVector::Zero(layout_.size());
}

HiddenVariable LhsModel::hidden_variable(int i) const {
    HiddenVariable hv;
    hv.coeffs.resize(layout_.rule_rows, layout_.n_features);
    for (int r = 0; r < layout_.rule_rows; ++r) {
        hv.coeffs.row(r) = layout_.coeffs(params_, r).row(i);
    }
    hv.bias = layout_.bias(params_).row(i).transpose();
    return hv;
}

void LhsModel::set_hidden_variable(int i, const HiddenVariable& hv) {
    if (hv.coeffs.rows() != layout_.rule_rows || hv.coeffs.cols() != layout_.n_features ||
        hv.bias.size() != layout_.bias_cols) {
        throw ShapeError("set_hidden_variable: shape does not match the model");
    }
    for (int r = 0; r < layout_.rule_rows; ++r) {
        layout_.coeffs(params_, r).row(i) = hv.coeffs.row(r);
    }
    layout_.bias(params_).row(i) = hv.bias.transpose();
}

HiddenStateParam LhsModel::hidden_state_param(int i) const {
    const int db = cfg_.dim_b;
    auto flat = layout_.states(params_).row(i);
    CMatrix m(db, db);
    for (int r = 0; r < db; ++r) {
        for (int c = 0; c < db; ++c) {
            m(r, c) = flat(r * db + c);
        }
    }
    return {m};
}

void LhsModel::set_hidden_state_param(int i, const HiddenStateParam& p) {
    const int db = cfg_.dim_b;
    if (p.m.rows() != db || p.m.cols() != db) {
        throw ShapeError("set_hidden_state_param: wrong dimension");
    }
    auto flat = layout_.states(params_).row(i);
    for (int r = 0; r < db; ++r) {
        for (int c = 0; c < db; ++c) {
            flat(r * db + c) = p.m(r, c);
        }
    }
}

namespace {

void draw_hidden(LhsModel& model, int i, Rng& rng) {
    std::normal_distribution<double> normal(0.0, kInitScale);
    const ParameterLayout& l = model.layout();
    HiddenVariable hv;
    hv.coeffs.resize(l.rule_rows, l.n_features);
    for (int r = 0; r < l.rule_rows; ++r) {
        for (int f = 0; f < l.n_features; ++f) {
            hv.coeffs(r, f) = normal(rng);
        }
    }
    hv.bias = RVector::Zero(l.bias_cols);
    model.set_hidden_variable(i, hv);
    const int db = model.dim_b();
    CMatrix m = CMatrix::Identity(db, db);
    for (int r = 0; r < db; ++r) {
        for (int c = 0; c < db; ++c) {
            double re = normal(rng);
            double im = normal(rng);
            m(r, c) += Complex(re, im);
        }
    }
    model.set_hidden_state_param(i, {m});
}

}  // namespace

LhsModel init_model(const ModelConfig& cfg) {
    LhsModel model(cfg);
    Rng rng(cfg.seed);
    for (int i = 0; i < cfg.n_hidden; ++i) {
        draw_hidden(model, i, rng);
    }
    return model;
}

void reinitialize_hidden(LhsModel& model, int i, Rng& rng) {
    draw_hidden(model, i, rng);
}

RVector response_input(const Measurement& m, int outcome, ResponseMode mode) {
    const RVector& g = m.gm_coeffs[static_cast<std::size_t>(outcome)];
    if (mode == ResponseMode::SigmoidDichotomic) {
        return g.tail(3);
    }
    return g;
}

RVector response_probs(const HiddenVariable& lambda, const Measurement& m, const FeatureMap& fm,
                       ResponseMode mode) {
    const int outcomes = m.n_outcomes();
    if (mode == ResponseMode::SigmoidDichotomic) {
        if (outcomes != 2 || m.dim != 2) {
            throw CapacityError("response_probs: the sigmoid mode answers dichotomic qubit measurements only");
        }
        RVector b = fm(response_input(m, 0, mode));
        double z = lambda.coeffs.row(0).dot(b);
        RVector p(2);
        p(0) = sigmoid(z);
        p(1) = sigmoid(-z);
        return p;
    }
    if (outcomes > lambda.coeffs.rows()) {
        throw CapacityError("response_probs: measurement has " + std::to_string(outcomes) +
                            " outcomes but the model answers at most " + std::to_string(lambda.coeffs.rows()));
    }
    RVector f(outcomes);
    for (int a = 0; a < outcomes; ++a) {
        RVector b = fm(response_input(m, a, mode));
        f(a) = lambda.coeffs.row(a).dot(b) + lambda.bias(a);
    }
    RVector p = (f.array() - f.maxCoeff()).exp();
    return p / p.sum();
}

DensityMatrix hidden_state(const HiddenStateParam& param) {
    double t = param.m.squaredNorm();
    if (!(t > tol::kMinHiddenNorm)) {
        throw DegenerateParameterError("hidden_state: Tr[M M^dagger] vanished");
    }
    CMatrix s = param.m * param.m.adjoint() / t;
    return DensityMatrix(0.5 * (s + s.adjoint()));
}

Assemblage lhs_assemblage(const LhsModel& model, const Measurement& m) {
    const int db = model.dim_b();
    Assemblage out(static_cast<std::size_t>(m.n_outcomes()), CMatrix::Zero(db, db));
    for (int i = 0; i < model.n_hidden(); ++i) {
        RVector p = response_probs(model.hidden_variable(i), m, model.features(), model.mode());
        CMatrix sigma = hidden_state(model.hidden_state_param(i)).matrix();
        for (int a = 0; a < m.n_outcomes(); ++a) {
            out[static_cast<std::size_t>(a)] += p(a) * sigma;
        }
    }
    for (auto& s : out) {
        s /= model.n_hidden();
    }
    return out;
}

CMatrix lhs_marginal(const LhsModel& model) {
    const int db = model.dim_b();
    CMatrix out = CMatrix::Zero(db, db);
    for (int i = 0; i < model.n_hidden(); ++i) {
        out += hidden_state(model.hidden_state_param(i)).matrix();
    }
    return out / model.n_hidden();
}

void save_checkpoint(std::ostream& out, const LhsModel& model, const Rng& rng, std::int64_t step) {
    const ModelConfig& cfg = model.config();
    nlohmann::json j;
    j["format"] = "lhs-forge-checkpoint";
    j["version"] = 1;
    j["step"] = step;
    j["config"] = {{"n_hidden", cfg.n_hidden}, {"order", cfg.order},           {"dim_a", cfg.dim_a},
                   {"dim_b", cfg.dim_b},       {"o_max", cfg.o_max},           {"mode", to_string(cfg.mode)},
                   {"seed", cfg.seed}};
    j["feature_map"] = {{"kind", to_string(model.features().kind())},
                        {"order", model.features().order()},
                        {"input_dim", model.features().input_dim()},
                        {"n_features", model.features().size()}};
    const RVector& p = model.params();
    j["params"] = std::vector<double>(p.data(), p.data() + p.size());
    std::ostringstream rs;
    rs << rng;
    j["rng"] = rs.str();
    out << j.dump() << '\n';
    if (!out) {
        throw IoError("save_checkpoint: write failed");
    }
}

void save_checkpoint(const std::string& path, const LhsModel& model, const Rng& rng, std::int64_t step) {
    std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::trunc);
        if (!out) {
            throw IoError("cannot write checkpoint '" + tmp + "'");
        }
        save_checkpoint(out, model, rng, step);
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0) {
        throw IoError("cannot move checkpoint into place at '" + path + "'");
    }
}

Checkpoint load_checkpoint(std::istream& in) {
    nlohmann::json j;
    try {
        in >> j;
        if (j.at("format") != "lhs-forge-checkpoint") {
            throw ValidationError("checkpoint: unrecognized format tag");
        }
        const auto& c = j.at("config");
        ModelConfig cfg;
        cfg.n_hidden = c.at("n_hidden").get<int>();
        cfg.order = c.at("order").get<int>();
        cfg.dim_a = c.at("dim_a").get<int>();
        cfg.dim_b = c.at("dim_b").get<int>();
        cfg.o_max = c.at("o_max").get<int>();
        cfg.mode = parse_response_mode(c.at("mode").get<std::string>());
        cfg.seed = c.at("seed").get<std::uint64_t>();
        LhsModel model(cfg);
        const auto& fm = j.at("feature_map");
        if (parse_feature_kind(fm.at("kind").get<std::string>()) != model.features().kind() ||
            fm.at("order").get<int>() != model.features().order() ||
            fm.at("input_dim").get<int>() != model.features().input_dim()) {
            throw ValidationError("checkpoint: feature map does not match the model config");
        }
        auto p = j.at("params").get<std::vector<double>>();
        if (static_cast<Eigen::Index>(p.size()) != model.params().size()) {
            throw ShapeError("checkpoint: parameter count does not match the model config");
        }
        model.params() = Eigen::Map<const RVector>(p.data(), static_cast<Eigen::Index>(p.size()));
        Rng rng;
        std::istringstream rs(j.at("rng").get<std::string>());
        rs >> rng;
        if (!rs) {
            throw ValidationError("checkpoint: unreadable RNG state");
        }
        return {std::move(model), rng, j.at("step").get<std::int64_t>()};
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("checkpoint: ") + e.what());
    }
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open checkpoint '" + path + "'");
    }
    return load_checkpoint(in);
}

}  // namespace lhsforge

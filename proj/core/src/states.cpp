#include "lhsforge/states.hpp"

#include <cmath>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "lhsforge/errors.hpp"
#include "lhsforge/tolerances.hpp"

namespace lhsforge {

namespace {

void require_visibility(double v, const char* who) {
    if (!(v >= 0.0 && v <= 1.0)) {
        std::ostringstream ss;
        ss << who << ": visibility must lie in [0, 1], got " << v;
        throw RangeError(ss.str());
    }
}

// v |psi><psi| + (1 - v) I / n for a normalized |psi>.
CMatrix visibility_mixture(const Eigen::VectorXcd& psi, double v) {
    auto n = psi.size();
    CMatrix proj = psi * psi.adjoint();
    return v * proj + ((1.0 - v) / static_cast<double>(n)) * CMatrix::Identity(n, n);
}

}  // namespace

std::string_view to_string(StateFamily f) {
    switch (f) {
        case StateFamily::Werner2:
            return "werner";
        case StateFamily::Isotropic3:
            return "isotropic";
        case StateFamily::Custom:
            return "custom";
    }
    return "custom";
}

StateFamily parse_state_family(std::string_view name) {
    if (name == "werner") {
        return StateFamily::Werner2;
    }
    if (name == "isotropic" || name == "isotropic3") {
        return StateFamily::Isotropic3;
    }
    if (name == "custom") {
        return StateFamily::Custom;
    }
    throw ValidationError("unknown state family '" + std::string(name) + "'");
}

VisibilityState werner(double v) {
    require_visibility(v, "werner");
    Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(4);
    psi(1) = 1.0 / std::sqrt(2.0);
    psi(2) = -1.0 / std::sqrt(2.0);
    return {StateFamily::Werner2, v, DensityMatrix(visibility_mixture(psi, v)), 2, 2};
}

VisibilityState isotropic3(double v) {
    require_visibility(v, "isotropic3");
    Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(9);
    for (int k = 0; k < 3; ++k) {
        psi(4 * k) = 1.0 / std::sqrt(3.0);
    }
    return {StateFamily::Isotropic3, v, DensityMatrix(visibility_mixture(psi, v)), 3, 3};
}

VisibilityState make_family_state(StateFamily family, double v) {
    switch (family) {
        case StateFamily::Werner2:
            return werner(v);
        case StateFamily::Isotropic3:
            return isotropic3(v);
        case StateFamily::Custom:
            break;
    }
    throw ValidationError("custom states are loaded from a file, not built from a visibility");
}

double separability_bound(StateFamily family) {
    switch (family) {
        case StateFamily::Werner2:
            return 1.0 / 3.0;
        case StateFamily::Isotropic3:
            return 1.0 / 4.0;
        case StateFamily::Custom:
            break;
    }
    throw ValidationError("no separability bound is known for custom states");
}

VisibilityState load_state(std::string_view document) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(document);
    } catch (const nlohmann::json::parse_error& e) {
        throw ValidationError(std::string("state document: ") + e.what());
    }
    for (const char* key : {"dim_a", "dim_b", "matrix_re", "matrix_im"}) {
        if (!j.contains(key)) {
            throw ValidationError(std::string("state document: missing field '") + key + "'");
        }
    }
    int dim_a = 0;
    int dim_b = 0;
    std::vector<double> re;
    std::vector<double> im;
    try {
        dim_a = j.at("dim_a").get<int>();
        dim_b = j.at("dim_b").get<int>();
        re = j.at("matrix_re").get<std::vector<double>>();
        im = j.at("matrix_im").get<std::vector<double>>();
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("state document: ") + e.what());
    }
    if (dim_a < 1 || dim_b < 1) {
        throw DimensionError("state document: dimensions must be positive");
    }
    if (dim_a > kMaxLocalDim || dim_b > kMaxLocalDim) {
        throw CapacityError("state document: local dimensions above " + std::to_string(kMaxLocalDim) +
                            " are not supported");
    }
    auto n = static_cast<std::size_t>(dim_a * dim_b);
    if (re.size() != n * n || im.size() != n * n) {
        throw ShapeError("state document: matrix_re and matrix_im must hold " + std::to_string(n * n) +
                         " row-major entries");
    }
    CMatrix m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < n; ++c) {
            m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = Complex(re[r * n + c], im[r * n + c]);
        }
    }
    return {StateFamily::Custom, std::nullopt, DensityMatrix(std::move(m), TraceRule::Unit, tol::kLoadedTrace),
            dim_a, dim_b};
}

VisibilityState load_state_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open state file '" + path + "'");
    }
    std::stringstream ss;
    ss << in.rdbuf();
    return load_state(ss.str());
}

std::string dump_state(const VisibilityState& state) {
    const CMatrix& m = state.rho.matrix();
    std::vector<double> re;
    std::vector<double> im;
    re.reserve(static_cast<std::size_t>(m.size()));
    im.reserve(static_cast<std::size_t>(m.size()));
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            re.push_back(m(r, c).real());
            im.push_back(m(r, c).imag());
        }
    }
    nlohmann::json j;
    j["dim_a"] = state.dim_a;
    j["dim_b"] = state.dim_b;
    j["matrix_re"] = re;
    j["matrix_im"] = im;
    return j.dump(2);
}

}  // namespace lhsforge

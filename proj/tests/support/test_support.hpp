#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "lhsforge/lhs_model.hpp"
#include "lhsforge/measurements.hpp"
#include "lhsforge/quantum.hpp"

namespace lhsforge::testing {

inline CMatrix random_hermitian(int d, Rng& rng, double scale = 1.0) {
    std::normal_distribution<double> n(0.0, scale);
    CMatrix a(d, d);
    for (int r = 0; r < d; ++r) {
        for (int c = 0; c < d; ++c) {
            a(r, c) = Complex(n(rng), n(rng));
        }
    }
    return 0.5 * (a + a.adjoint());
}

inline CMatrix random_density(int d, Rng& rng) {
    std::normal_distribution<double> n(0.0, 1.0);
    CMatrix w(d, d);
    for (int r = 0; r < d; ++r) {
        for (int c = 0; c < d; ++c) {
            w(r, c) = Complex(n(rng), n(rng));
        }
    }
    CMatrix rho = w * w.adjoint();
    rho /= rho.trace().real();
    return 0.5 * (rho + rho.adjoint());
}

inline Eigen::Vector3d random_unit(Rng& rng) {
    std::normal_distribution<double> n(0.0, 1.0);
    Eigen::Vector3d v(n(rng), n(rng), n(rng));
    return v.normalized();
}

inline CMatrix bloch_projector(const Eigen::Vector3d& n, double sign) {
    const Complex i1(0.0, 1.0);
    CMatrix p(2, 2);
    p(0, 0) = 0.5 * (1.0 + sign * n.z());
    p(1, 1) = 0.5 * (1.0 - sign * n.z());
    p(0, 1) = 0.5 * sign * (n.x() - i1 * n.y());
    p(1, 0) = 0.5 * sign * (n.x() + i1 * n.y());
    return p;
}

/// Analytic v = 1/2 Werner model: lambda uniform on the sphere, sigma_lambda = (I - lambda.sigma)/2,
/// outcome 0 iff n.lambda >= 0. Realized as a saturated sigmoid model on degree-one harmonics.
inline LhsModel hemisphere_model(int n_points, std::uint64_t seed) {
    ModelConfig cfg;
    cfg.n_hidden = n_points;
    cfg.order = 1;
    LhsModel model(cfg);
    Rng rng(seed);
    for (int i = 0; i < n_points; ++i) {
        Eigen::Vector3d lam = random_unit(rng);
        HiddenVariable hv;
        hv.coeffs = RMatrix(1, 3);
        hv.coeffs << 1e12 * lam.x(), 1e12 * lam.y(), 1e12 * lam.z();
        model.set_hidden_variable(i, hv);
        model.set_hidden_state_param(i, {bloch_projector(lam, -1.0)});
    }
    return model;
}

}  // namespace lhsforge::testing

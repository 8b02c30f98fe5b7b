#include "lhsforge/measurements.hpp"

#include <array>
#include <cmath>
#include <sstream>

#include "lhsforge/errors.hpp"
#include "lhsforge/tolerances.hpp"

namespace lhsforge {

namespace {

CMatrix ginibre(int d, Rng& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    CMatrix w(d, d);
    for (int c = 0; c < d; ++c) {
        for (int r = 0; r < d; ++r) {
            double re = normal(rng);
            double im = normal(rng);
            w(r, c) = Complex(re, im);
        }
    }
    return w;
}

const CMatrix& pauli(int axis) {
    static const std::array<CMatrix, 3> table = [] {
        std::array<CMatrix, 3> p;
        for (auto& m : p) {
            m = CMatrix::Zero(2, 2);
        }
        p[0](0, 1) = 1.0;
        p[0](1, 0) = 1.0;
        p[1](0, 1) = Complex(0.0, -1.0);
        p[1](1, 0) = Complex(0.0, 1.0);
        p[2](0, 0) = 1.0;
        p[2](1, 1) = -1.0;
        return p;
    }();
    return table[static_cast<std::size_t>(axis)];
}

}  // namespace

std::string_view to_string(MeasurementKind k) {
    switch (k) {
        case MeasurementKind::PauliTriple:
            return "pauli";
        case MeasurementKind::QubitPVM:
            return "pvm";
        case MeasurementKind::QuditPVM:
            return "qudit-pvm";
        case MeasurementKind::POVM:
            return "povm";
    }
    return "pvm";
}

MeasurementKind parse_measurement_kind(std::string_view name) {
    if (name == "pauli") {
        return MeasurementKind::PauliTriple;
    }
    if (name == "pvm" || name == "qubit-pvm") {
        return MeasurementKind::QubitPVM;
    }
    if (name == "qudit-pvm") {
        return MeasurementKind::QuditPVM;
    }
    if (name == "povm") {
        return MeasurementKind::POVM;
    }
    throw ValidationError("unknown measurement class '" + std::string(name) + "'");
}

MeasurementClass MeasurementClass::pauli_triple() {
    return {MeasurementKind::PauliTriple, 2, 2};
}

MeasurementClass MeasurementClass::qubit_pvm() {
    return {MeasurementKind::QubitPVM, 2, 2};
}

MeasurementClass MeasurementClass::qudit_pvm(int d) {
    return {MeasurementKind::QuditPVM, d, d};
}

MeasurementClass MeasurementClass::povm(int d, int n_outcomes) {
    return {MeasurementKind::POVM, d, n_outcomes == 0 ? d * d : n_outcomes};
}

void MeasurementClass::validate() const {
    if (dim < 2) {
        throw DimensionError("measurement class: dimension must be >= 2");
    }
    switch (kind) {
        case MeasurementKind::PauliTriple:
        case MeasurementKind::QubitPVM:
            if (dim != 2 || n_outcomes != 2) {
                throw ValidationError("measurement class: qubit PVMs have d = 2 and two outcomes");
            }
            return;
        case MeasurementKind::QuditPVM:
            if (n_outcomes != dim) {
                throw ValidationError("measurement class: a qudit PVM has exactly d outcomes");
            }
            return;
        case MeasurementKind::POVM:
            if (n_outcomes < 2 || n_outcomes > dim * dim) {
                throw ValidationError("measurement class: POVMs need between 2 and d^2 outcomes, got " +
                                      std::to_string(n_outcomes));
            }
            return;
    }
}

RVector gellmann_coeffs(const CMatrix& m, const GellMannBasis& basis) {
    const int d = basis.dim();
    if (m.rows() != d || m.cols() != d) {
        throw ShapeError("gellmann_coeffs: operator dimension does not match the basis");
    }
    if (!is_hermitian(m, tol::kHermitianInput)) {
        throw ValidationError("gellmann_coeffs: operator is not Hermitian");
    }
    const double scale = std::sqrt(d / 2.0);
    RVector g(basis.size());
    for (int mu = 0; mu < basis.size(); ++mu) {
        // Tr(M G) = sum_ij M_ij G_ji
        g(mu) = scale * (m.array() * basis[mu].transpose().array()).sum().real();
    }
    return g;
}

CMatrix from_gellmann_coeffs(const RVector& g, const GellMannBasis& basis) {
    if (g.size() != basis.size()) {
        throw ShapeError("from_gellmann_coeffs: coefficient vector has the wrong length");
    }
    const int d = basis.dim();
    CMatrix m = CMatrix::Zero(d, d);
    for (int mu = 0; mu < basis.size(); ++mu) {
        m += g(mu) * basis[mu];
    }
    return m / std::sqrt(2.0 * d);
}

Measurement Measurement::from_elements(std::vector<CMatrix> elements, bool projective) {
    if (elements.empty()) {
        throw ValidationError("measurement: no elements");
    }
    Measurement out;
    out.dim = static_cast<int>(elements.front().rows());
    const GellMannBasis& basis = cached_gellmann_basis(out.dim);
    out.gm_coeffs.reserve(elements.size());
    for (const CMatrix& e : elements) {
        out.gm_coeffs.push_back(gellmann_coeffs(e, basis));
    }
    out.elements = std::move(elements);
    out.projective = projective;
    return out;
}

void validate_measurement(const Measurement& m) {
    const int d = m.dim;
    if (m.elements.empty() || m.elements.size() != m.gm_coeffs.size()) {
        throw ValidationError("measurement: element and coefficient lists disagree");
    }
    const GellMannBasis& basis = cached_gellmann_basis(d);
    CMatrix total = CMatrix::Zero(d, d);
    for (std::size_t a = 0; a < m.elements.size(); ++a) {
        const CMatrix& e = m.elements[a];
        if (e.rows() != d || e.cols() != d) {
            throw ShapeError("measurement: element " + std::to_string(a) + " has the wrong dimension");
        }
        if (!is_hermitian(e, tol::kHermitianInput)) {
            throw ValidationError("measurement: element " + std::to_string(a) + " is not Hermitian");
        }
        double lo = min_eigenvalue(e);
        if (lo < tol::kPsd) {
            std::ostringstream ss;
            ss << "measurement: element " << a << " is not positive semidefinite (min eigenvalue " << lo << ")";
            throw ValidationError(ss.str());
        }
        if (max_abs(from_gellmann_coeffs(m.gm_coeffs[a], basis) - e) > tol::kCompleteness) {
            throw ValidationError("measurement: Gell-Mann coefficients of element " + std::to_string(a) +
                                  " do not reconstruct it");
        }
        total += e;
    }
    if (max_abs(total - CMatrix::Identity(d, d)) > tol::kCompleteness) {
        throw ValidationError("measurement: elements do not sum to the identity");
    }
    if (m.projective) {
        for (std::size_t a = 0; a < m.elements.size(); ++a) {
            const CMatrix& e = m.elements[a];
            if (max_abs(e * e - e) > tol::kProjector) {
                throw ValidationError("measurement: element " + std::to_string(a) + " is not idempotent");
            }
            for (std::size_t b = a + 1; b < m.elements.size(); ++b) {
                if (max_abs(e * m.elements[b]) > tol::kProjector) {
                    throw ValidationError("measurement: elements " + std::to_string(a) + " and " +
                                          std::to_string(b) + " are not orthogonal");
                }
            }
        }
    }
}

Measurement qubit_pvm(const Eigen::Vector3d& n) {
    CMatrix ns = n(0) * pauli(0) + n(1) * pauli(1) + n(2) * pauli(2);
    CMatrix id = CMatrix::Identity(2, 2);
    Measurement out;
    out.dim = 2;
    out.projective = true;
    out.elements = {0.5 * (id + ns), 0.5 * (id - ns)};
    // With G = (I, sigma): g^0 = (1, n), g^1 = (1, -n). Written directly so the sign flip is exact.
    RVector g0(4);
    g0 << 1.0, n(0), n(1), n(2);
    RVector g1(4);
    g1 << 1.0, -n(0), -n(1), -n(2);
    out.gm_coeffs = {g0, g1};
    return out;
}

std::vector<Measurement> pauli_triple() {
    return {qubit_pvm({1.0, 0.0, 0.0}), qubit_pvm({0.0, 1.0, 0.0}), qubit_pvm({0.0, 0.0, 1.0})};
}

Measurement sample_qubit_pvm(Rng& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    for (;;) {
        double x = normal(rng);
        double y = normal(rng);
        double z = normal(rng);
        double r = std::sqrt(x * x + y * y + z * z);
        if (r > 1e-12) {
            return qubit_pvm(Eigen::Vector3d(x / r, y / r, z / r));
        }
    }
}

CMatrix sample_haar_unitary(int d, Rng& rng) {
    if (d < 2) {
        throw DimensionError("sample_haar_unitary: dimension must be >= 2");
    }
    CMatrix z = ginibre(d, rng);
    Eigen::HouseholderQR<CMatrix> qr(z);
    CMatrix q = qr.householderQ() * CMatrix::Identity(d, d);
    CMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int k = 0; k < d; ++k) {
        Complex rk = r(k, k);
        double mag = std::abs(rk);
        Complex phase = mag > 0.0 ? rk / mag : Complex(1.0, 0.0);
        q.col(k) *= phase;
    }
    return q;
}

Measurement sample_qudit_pvm(int d, Rng& rng) {
    if (d == 2) {
        return sample_qubit_pvm(rng);
    }
    CMatrix u = sample_haar_unitary(d, rng);
    std::vector<CMatrix> elements;
    elements.reserve(static_cast<std::size_t>(d));
    for (int k = 0; k < d; ++k) {
        CMatrix p = u.col(k) * u.col(k).adjoint();
        // Exact Hermitian symmetrization keeps the coefficient extraction well inside tolerance.
        elements.push_back(0.5 * (p + p.adjoint()));
    }
    return Measurement::from_elements(std::move(elements), true);
}

Measurement sample_povm(int d, int n_outcomes, Rng& rng) {
    if (d < 2) {
        throw DimensionError("sample_povm: dimension must be >= 2");
    }
    if (n_outcomes < 2 || n_outcomes > d * d) {
        throw ValidationError("sample_povm: outcome count must lie in [2, d^2], got " + std::to_string(n_outcomes));
    }
    for (;;) {
        std::vector<CMatrix> wishart;
        wishart.reserve(static_cast<std::size_t>(n_outcomes));
        CMatrix s = CMatrix::Zero(d, d);
        for (int a = 0; a < n_outcomes; ++a) {
            CMatrix w = ginibre(d, rng);
            wishart.push_back(w * w.adjoint());
            s += wishart.back();
        }
        Eigen::SelfAdjointEigenSolver<CMatrix> solver(s);
        const RVector& lam = solver.eigenvalues();
        if (!(lam(0) > 1e-12 * lam(lam.size() - 1))) {
            continue;
        }
        const CMatrix& v = solver.eigenvectors();
        CMatrix inv_sqrt = v * lam.cwiseSqrt().cwiseInverse().asDiagonal() * v.adjoint();
        std::vector<CMatrix> elements;
        elements.reserve(wishart.size());
        CMatrix total = CMatrix::Zero(d, d);
        for (const CMatrix& a : wishart) {
            CMatrix e = inv_sqrt * a * inv_sqrt;
            e = 0.5 * (e + e.adjoint());
            total += e;
            elements.push_back(std::move(e));
        }
        // Remove the rounding residue of sum_a M_a - I from the last element.
        elements.back() -= total - CMatrix::Identity(d, d);
        return Measurement::from_elements(std::move(elements), false);
    }
}

Measurement sample_measurement(const MeasurementClass& cls, Rng& rng) {
    switch (cls.kind) {
        case MeasurementKind::PauliTriple: {
            std::uniform_int_distribution<int> pick(0, 2);
            Eigen::Vector3d n = Eigen::Vector3d::Zero();
            n(pick(rng)) = 1.0;
            return qubit_pvm(n);
        }
        case MeasurementKind::QubitPVM:
            return sample_qubit_pvm(rng);
        case MeasurementKind::QuditPVM:
            return sample_qudit_pvm(cls.dim, rng);
        case MeasurementKind::POVM:
            return sample_povm(cls.dim, cls.n_outcomes, rng);
    }
    throw ValidationError("unknown measurement kind");
}

std::vector<Measurement> sample_batch(const MeasurementClass& cls, int count, Rng& rng) {
    if (cls.kind == MeasurementKind::PauliTriple) {
        return pauli_triple();
    }
    if (count < 1) {
        throw ValidationError("sample_batch: count must be positive");
    }
    std::vector<Measurement> out;
    out.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
        out.push_back(sample_measurement(cls, rng));
    }
    return out;
}

}  // namespace lhsforge

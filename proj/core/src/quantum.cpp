#include "lhsforge/quantum.hpp"

#include <array>
#include <deque>
#include <cmath>
#include <sstream>

#include "lhsforge/errors.hpp"
#include "lhsforge/tolerances.hpp"

namespace lhsforge {

namespace {

void require_square(const CMatrix& m, const char* what) {
    if (m.rows() != m.cols() || m.rows() == 0) {
        std::ostringstream ss;
        ss << what << ": expected a non-empty square matrix, got " << m.rows() << "x" << m.cols();
        throw ShapeError(ss.str());
    }
}

void require_same_shape(const CMatrix& a, const CMatrix& b, const char* what) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        std::ostringstream ss;
        ss << what << ": shape mismatch " << a.rows() << "x" << a.cols() << " vs " << b.rows() << "x"
           << b.cols();
        throw ShapeError(ss.str());
    }
}

}  // namespace

DensityMatrix::DensityMatrix(CMatrix m, TraceRule rule, double trace_tol) : m_(std::move(m)) {
    require_square(m_, "DensityMatrix");
    double herm = hermiticity_defect(m_);
    if (!(herm <= tol::kHermitian)) {
        std::ostringstream ss;
        ss << "DensityMatrix: not Hermitian (max |M - M^dagger| = " << herm << ")";
        throw ValidationError(ss.str());
    }
    if (trace_tol < 0) {
        trace_tol = tol::kUnitTrace;
    }
    Complex tr = m_.trace();
    if (rule == TraceRule::Unit) {
        if (!(std::abs(tr - Complex(1.0, 0.0)) <= trace_tol)) {
            std::ostringstream ss;
            ss << "DensityMatrix: trace must be 1, got " << tr.real();
            throw ValidationError(ss.str());
        }
    } else if (!(tr.real() >= -trace_tol && tr.real() <= 1.0 + trace_tol)) {
        std::ostringstream ss;
        ss << "DensityMatrix: trace must lie in [0, 1], got " << tr.real();
        throw ValidationError(ss.str());
    }
    double lo = min_eigenvalue(m_);
    if (!(lo >= tol::kPsd)) {
        std::ostringstream ss;
        ss << "DensityMatrix: not positive semidefinite (min eigenvalue " << lo << ")";
        throw ValidationError(ss.str());
    }
}

HermitianEigen eigh(const CMatrix& m) {
    require_square(m, "eigh");
    Eigen::SelfAdjointEigenSolver<CMatrix> solver(m);
    if (solver.info() != Eigen::Success) {
        throw ValidationError("eigh: eigendecomposition did not converge");
    }
    return {solver.eigenvalues(), solver.eigenvectors()};
}

double max_abs(const CMatrix& m) {
    return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

double hermiticity_defect(const CMatrix& m) {
    return max_abs(m - m.adjoint());
}

bool is_hermitian(const CMatrix& m, double tol) {
    return m.rows() == m.cols() && hermiticity_defect(m) <= tol;
}

double min_eigenvalue(const CMatrix& m) {
    Eigen::SelfAdjointEigenSolver<CMatrix> solver(m, Eigen::EigenvaluesOnly);
    return solver.eigenvalues()(0);
}

CMatrix kron(const CMatrix& a, const CMatrix& b) {
    CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
        }
    }
    return out;
}

GellMannBasis::GellMannBasis(int d) : d_(d) {
    if (d < 2) {
        throw DimensionError("gellmann_basis: dimension must be >= 2, got " + std::to_string(d));
    }
    const Complex i1(0.0, 1.0);
    mats_.reserve(static_cast<std::size_t>(d * d));
    mats_.push_back(std::sqrt(2.0 / d) * CMatrix::Identity(d, d));
    for (int j = 0; j < d; ++j) {
        for (int k = j + 1; k < d; ++k) {
            CMatrix g = CMatrix::Zero(d, d);
            g(j, k) = 1.0;
            g(k, j) = 1.0;
            mats_.push_back(std::move(g));
        }
    }
    for (int j = 0; j < d; ++j) {
        for (int k = j + 1; k < d; ++k) {
            CMatrix g = CMatrix::Zero(d, d);
            g(j, k) = -i1;
            g(k, j) = i1;
            mats_.push_back(std::move(g));
        }
    }
    for (int l = 1; l < d; ++l) {
        CMatrix g = CMatrix::Zero(d, d);
        double s = std::sqrt(2.0 / (l * (l + 1.0)));
        for (int j = 0; j < l; ++j) {
            g(j, j) = s;
        }
        g(l, l) = -s * l;
        mats_.push_back(std::move(g));
    }
}

GellMannBasis gellmann_basis(int d) {
    return GellMannBasis(d);
}

const GellMannBasis& cached_gellmann_basis(int d) {
    static const std::array<GellMannBasis, 3> table{GellMannBasis(2), GellMannBasis(3), GellMannBasis(4)};
    if (d >= 2 && d <= 4) {
        return table[static_cast<std::size_t>(d - 2)];
    }
    thread_local std::deque<GellMannBasis> extra;
    for (const auto& b : extra) {
        if (b.dim() == d) {
            return b;
        }
    }
    extra.emplace_back(d);
    return extra.back();
}

CMatrix partial_trace_A(const CMatrix& rho_ab, int dim_a, int dim_b) {
    if (dim_a < 1 || dim_b < 1 || rho_ab.rows() != dim_a * dim_b || rho_ab.cols() != dim_a * dim_b) {
        std::ostringstream ss;
        ss << "partial_trace_A: operator is " << rho_ab.rows() << "x" << rho_ab.cols() << ", expected "
           << dim_a * dim_b << " square";
        throw ShapeError(ss.str());
    }
    CMatrix out = CMatrix::Zero(dim_b, dim_b);
    for (int i = 0; i < dim_a; ++i) {
        out += rho_ab.block(i * dim_b, i * dim_b, dim_b, dim_b);
    }
    return out;
}

DensityMatrix partial_trace_A(const DensityMatrix& rho_ab, int dim_a, int dim_b) {
    return DensityMatrix(partial_trace_A(rho_ab.matrix(), dim_a, dim_b), TraceRule::Unit,
                         10 * tol::kUnitTrace);
}

double trace_norm(const CMatrix& x) {
    require_square(x, "trace_norm");
    Eigen::SelfAdjointEigenSolver<CMatrix> solver(x, Eigen::EigenvaluesOnly);
    return solver.eigenvalues().cwiseAbs().sum();
}

double trace_distance(const CMatrix& a, const CMatrix& b) {
    require_square(a, "trace_distance");
    require_same_shape(a, b, "trace_distance");
    if (!is_hermitian(a, tol::kHermitianInput) || !is_hermitian(b, tol::kHermitianInput)) {
        throw ValidationError("trace_distance: inputs must be Hermitian");
    }
    return 0.5 * trace_norm(a - b);
}

double smooth_trace_norm_2x2(const Eigen::Matrix2cd& x, double eps, Eigen::Matrix2cd* gradient) {
    // X = a I + b . sigma with eigenvalues a +- |b|.
    double a = 0.5 * (x(0, 0).real() + x(1, 1).real());
    double bz = 0.5 * (x(0, 0).real() - x(1, 1).real());
    Complex q = 0.5 * (x(0, 1) + std::conj(x(1, 0)));
    double bx = q.real();
    double by = -q.imag();
    double r = std::sqrt(bx * bx + by * by + bz * bz);
    double lp = a + r;
    double lm = a - r;
    double np = std::sqrt(lp * lp + eps);
    double nm = std::sqrt(lm * lm + eps);
    if (gradient != nullptr) {
        double dp = np > 0.0 ? lp / np : 0.0;
        double dm = nm > 0.0 ? lm / nm : 0.0;
        double c0 = 0.5 * (dp + dm);
        double c1 = r > 0.0 ? 0.5 * (dp - dm) / r : 0.0;
        (*gradient)(0, 0) = c0 + c1 * bz;
        (*gradient)(1, 1) = c0 - c1 * bz;
        (*gradient)(0, 1) = Complex(c1 * bx, -c1 * by);
        (*gradient)(1, 0) = Complex(c1 * bx, c1 * by);
    }
    return np + nm;
}

SmoothTraceNorm smooth_trace_norm(const CMatrix& x, double eps) {
    auto deriv = [eps](double lam) { return lam / std::sqrt(lam * lam + eps); };
    SmoothTraceNorm out;
    if (x.rows() == 2 && x.cols() == 2) {
        Eigen::Matrix2cd g;
        out.value = smooth_trace_norm_2x2(x, eps, &g);
        out.gradient = g;
        return out;
    }
    require_square(x, "smooth_trace_norm");
    Eigen::SelfAdjointEigenSolver<CMatrix> solver(x);
    const RVector& lam = solver.eigenvalues();
    RVector w(lam.size());
    for (Eigen::Index i = 0; i < lam.size(); ++i) {
        out.value += std::sqrt(lam(i) * lam(i) + eps);
        w(i) = deriv(lam(i));
    }
    const CMatrix& v = solver.eigenvectors();
    out.gradient = v * w.asDiagonal() * v.adjoint();
    return out;
}

Assemblage quantum_assemblage(const CMatrix& rho_ab, int dim_a, int dim_b,
                              std::span<const CMatrix> elements) {
    if (rho_ab.rows() != dim_a * dim_b || rho_ab.cols() != dim_a * dim_b) {
        throw ShapeError("quantum_assemblage: state dimension does not match dim_a * dim_b");
    }
    Assemblage out;
    out.reserve(elements.size());
    for (const CMatrix& m : elements) {
        if (m.rows() != dim_a || m.cols() != dim_a) {
            throw ShapeError("quantum_assemblage: measurement element is " + std::to_string(m.rows()) +
                             "x" + std::to_string(m.cols()) + ", Alice dimension is " +
                             std::to_string(dim_a));
        }
        // tr_A[(M (x) I) rho] = sum_ij M_ji rho_(i,j) where rho_(i,j) is the (i,j) block.
        CMatrix s = CMatrix::Zero(dim_b, dim_b);
        for (int i = 0; i < dim_a; ++i) {
            for (int j = 0; j < dim_a; ++j) {
                Complex mji = m(j, i);
                if (mji != Complex(0.0, 0.0)) {
                    s += mji * rho_ab.block(i * dim_b, j * dim_b, dim_b, dim_b);
                }
            }
        }
        out.push_back(std::move(s));
    }
    return out;
}

double assemblage_distance(std::span<const CMatrix> s1, std::span<const CMatrix> s2) {
    if (s1.size() != s2.size()) {
        throw ShapeError("assemblage_distance: outcome counts differ (" + std::to_string(s1.size()) +
                         " vs " + std::to_string(s2.size()) + ")");
    }
    double total = 0.0;
    for (std::size_t a = 0; a < s1.size(); ++a) {
        total += trace_distance(s1[a], s2[a]);
    }
    return total;
}

}  // namespace lhsforge

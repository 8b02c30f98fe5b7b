#pragma once

#include <Eigen/Dense>
#include <complex>
#include <span>
#include <vector>

namespace lhsforge {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;

/// Unnormalized conditional states on the trusted side, one per outcome.
using Assemblage = std::vector<CMatrix>;

enum class TraceRule {
    /// Tr = 1 (a state).
    Unit,
    /// Tr in [0, 1] (an assemblage element).
    SubNormalized,
};

/// Hermitian, positive semidefinite matrix with a checked trace.
///
/// Construction validates every invariant and throws ValidationError naming
/// the first violated one.
class DensityMatrix {
   public:
    explicit DensityMatrix(CMatrix m, TraceRule rule = TraceRule::Unit, double trace_tol = -1.0);

    int dim() const { return static_cast<int>(m_.rows()); }
    const CMatrix& matrix() const { return m_; }
    Complex operator()(int r, int c) const { return m_(r, c); }

   private:
    CMatrix m_;
};

struct HermitianEigen {
    RVector values;  // ascending
    CMatrix vectors;  // columns are eigenvectors
};

/// Eigendecomposition of a Hermitian matrix (the lower triangle is read).
HermitianEigen eigh(const CMatrix& m);

double max_abs(const CMatrix& m);
double hermiticity_defect(const CMatrix& m);
bool is_hermitian(const CMatrix& m, double tol);
double min_eigenvalue(const CMatrix& m);
CMatrix kron(const CMatrix& a, const CMatrix& b);

/// Generalized Gell-Mann basis of d x d Hermitian matrices with Tr(G_mu G_nu) = 2 delta.
///
/// Order: G_0 = sqrt(2/d) I, then the symmetric off-diagonal generators
/// |j><k| + |k><j| for j < k (row-major over pairs), then the antisymmetric
/// ones -i|j><k| + i|k><j| in the same pair order, then the diagonal ones
/// sqrt(2/(l(l+1))) (sum_{j<l} |j><j| - l|l><l|) for l = 1..d-1. For d = 2
/// this is (I, sigma_x, sigma_y, sigma_z).
class GellMannBasis {
   public:
    explicit GellMannBasis(int d);

    int dim() const { return d_; }
    int size() const { return static_cast<int>(mats_.size()); }
    const CMatrix& operator[](int mu) const { return mats_[static_cast<std::size_t>(mu)]; }
    const std::vector<CMatrix>& matrices() const { return mats_; }

   private:
    int d_;
    std::vector<CMatrix> mats_;
};

GellMannBasis gellmann_basis(int d);

/// Shared immutable basis instance for small d (2..4); builds a fresh one otherwise.
const GellMannBasis& cached_gellmann_basis(int d);

/// tr_A of a (dim_a*dim_b)-square operator; subsystem A is the left tensor factor.
CMatrix partial_trace_A(const CMatrix& rho_ab, int dim_a, int dim_b);
DensityMatrix partial_trace_A(const DensityMatrix& rho_ab, int dim_a, int dim_b);

/// Half the trace norm of A - B. Both inputs must be Hermitian within tol::kHermitianInput.
double trace_distance(const CMatrix& a, const CMatrix& b);

/// Trace norm of a Hermitian matrix.
double trace_norm(const CMatrix& x);

/// Smoothed trace norm sum_i sqrt(lambda_i^2 + eps) and its gradient.
///
/// `gradient` is the Hermitian G with d(value) = Tr(G dX) for Hermitian dX,
/// i.e. G = V diag(lambda / sqrt(lambda^2 + eps)) V^dagger.
struct SmoothTraceNorm {
    double value = 0.0;
    CMatrix gradient;
};
SmoothTraceNorm smooth_trace_norm(const CMatrix& x, double eps);

/// Allocation-free 2x2 variant; `gradient` may be null. eps = 0 gives the exact trace norm.
double smooth_trace_norm_2x2(const Eigen::Matrix2cd& x, double eps, Eigen::Matrix2cd* gradient);

/// sigma_a = tr_A[(M_a (x) I) rho_ab] for each element M_a.
Assemblage quantum_assemblage(const CMatrix& rho_ab, int dim_a, int dim_b,
                              std::span<const CMatrix> elements);

/// sum_a D_Q(s1[a], s2[a]).
double assemblage_distance(std::span<const CMatrix> s1, std::span<const CMatrix> s2);

}  // namespace lhsforge

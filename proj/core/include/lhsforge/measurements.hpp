#pragma once

#include <random>
#include <string_view>
#include <vector>

#include "lhsforge/quantum.hpp"

namespace lhsforge {

using Rng = std::mt19937_64;

enum class MeasurementKind { PauliTriple, QubitPVM, QuditPVM, POVM };

std::string_view to_string(MeasurementKind k);
MeasurementKind parse_measurement_kind(std::string_view name);

/// Which measurements the untrusted party may perform.
struct MeasurementClass {
    MeasurementKind kind = MeasurementKind::QubitPVM;
    int dim = 2;
    int n_outcomes = 2;

    static MeasurementClass pauli_triple();
    static MeasurementClass qubit_pvm();
    static MeasurementClass qudit_pvm(int d);
    /// POVMs with `n_outcomes` elements; 0 selects the extremal maximum d^2.
    static MeasurementClass povm(int d, int n_outcomes = 0);

    /// Throws ValidationError if the kind, dimension and outcome count are inconsistent.
    void validate() const;
};

/// A measurement on the untrusted side: POVM elements plus their Gell-Mann coefficients.
///
/// gm_coeffs[a] holds g with M_a = (1/sqrt(2d)) sum_mu g_mu G_mu in the
/// ordering of GellMannBasis; g_0 is kept even when fixed by normalization.
struct Measurement {
    int dim = 0;
    std::vector<CMatrix> elements;
    std::vector<RVector> gm_coeffs;
    bool projective = false;

    int n_outcomes() const { return static_cast<int>(elements.size()); }

    /// Builds coefficients from the elements; does not validate.
    static Measurement from_elements(std::vector<CMatrix> elements, bool projective);
};

/// Checks positivity, completeness, the coefficient round trip and, for PVMs,
/// idempotency and orthogonality. Throws ValidationError naming the violation.
void validate_measurement(const Measurement& m);

/// g_mu = sqrt(d/2) Tr(M G_mu).
RVector gellmann_coeffs(const CMatrix& m, const GellMannBasis& basis);

/// (1/sqrt(2d)) sum_mu g_mu G_mu.
CMatrix from_gellmann_coeffs(const RVector& g, const GellMannBasis& basis);

/// Eigenprojectors of sigma_x, sigma_y, sigma_z; outcome 0 is the +1 eigenspace.
std::vector<Measurement> pauli_triple();

/// M_a = (I + (-1)^a n.sigma)/2 with unit `n`.
Measurement qubit_pvm(const Eigen::Vector3d& n);

/// Qubit PVM with n uniform on the unit sphere.
Measurement sample_qubit_pvm(Rng& rng);

/// Rank-one projectors onto the columns of a Haar-random unitary.
Measurement sample_qudit_pvm(int d, Rng& rng);

/// Haar-random unitary (Ginibre + QR with the phases of diag(R) divided out).
CMatrix sample_haar_unitary(int d, Rng& rng);

/// S^{-1/2} A_a S^{-1/2} with A_a = W_a W_a^dagger (W_a complex Ginibre) and S = sum_a A_a.
Measurement sample_povm(int d, int n_outcomes, Rng& rng);

/// Draws one measurement of the class. PauliTriple cycles through X, Y, Z uniformly at random.
Measurement sample_measurement(const MeasurementClass& cls, Rng& rng);

/// `count` independent draws; the Pauli class always returns exactly its three settings.
std::vector<Measurement> sample_batch(const MeasurementClass& cls, int count, Rng& rng);

}  // namespace lhsforge

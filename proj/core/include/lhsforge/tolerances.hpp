#pragma once

// Numerical tolerances shared by validators and tests.

namespace lhsforge::tol {

/// max |M - M^dagger| accepted for a density matrix.
inline constexpr double kHermitian = 1e-12;
/// max |M - M^dagger| accepted for arbitrary Hermitian inputs (trace distance, coefficients).
inline constexpr double kHermitianInput = 1e-10;
/// Smallest eigenvalue accepted for positive semidefinite operators.
inline constexpr double kPsd = -1e-10;
/// |Tr(rho) - 1| for normalized states.
inline constexpr double kUnitTrace = 1e-12;
/// Slack for loaded state files, whose entries are usually printed with finite precision.
inline constexpr double kLoadedTrace = 1e-9;
/// max |sum_a M_a - I| for measurements.
inline constexpr double kCompleteness = 1e-10;
/// max |M^2 - M| and |M_a M_b| for projective measurements.
inline constexpr double kProjector = 1e-10;
/// Round-trip of Gell-Mann coefficient vectors.
inline constexpr double kCoefficientRoundTrip = 1e-12;
/// Smoothing for |x| -> sqrt(x^2 + eps) on the differentiable trace-norm path.
inline constexpr double kTraceNormSmoothing = 1e-12;
/// Smallest Tr[M M^dagger] for which a hidden-state parameter is usable.
inline constexpr double kMinHiddenNorm = 1e-30;

}  // namespace lhsforge::tol

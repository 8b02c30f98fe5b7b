#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "lhsforge/quantum.hpp"

namespace lhsforge {

enum class StateFamily { Werner2, Isotropic3, Custom };

std::string_view to_string(StateFamily f);
StateFamily parse_state_family(std::string_view name);

/// A bipartite state shared by the untrusted party (A) and the trusted party (B).
struct VisibilityState {
    StateFamily family = StateFamily::Custom;
    /// Weight of the entangled component; empty for custom states.
    std::optional<double> visibility;
    DensityMatrix rho;
    int dim_a = 0;
    int dim_b = 0;
};

/// Largest local dimension accepted for custom states.
inline constexpr int kMaxLocalDim = 4;

/// v |psi^-><psi^-| + (1 - v) I/4 with |psi^-> = (|01> - |10>)/sqrt(2).
VisibilityState werner(double v);

/// v |psi^+><psi^+| + (1 - v) I/9 with |psi^+> = (|00> + |11> + |22>)/sqrt(3).
VisibilityState isotropic3(double v);

/// Builds a Werner2 or Isotropic3 state; Custom is rejected.
VisibilityState make_family_state(StateFamily family, double v);

/// Visibility below which the family is separable (1/3 for Werner2, 1/4 for Isotropic3).
double separability_bound(StateFamily family);

/// Parses a JSON state document with fields dim_a, dim_b, matrix_re, matrix_im (row-major).
VisibilityState load_state(std::string_view document);
VisibilityState load_state_file(const std::string& path);

/// Serializes a state into the document format read by load_state.
std::string dump_state(const VisibilityState& state);

}  // namespace lhsforge

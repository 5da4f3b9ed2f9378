#pragma once

#include "magswim/core_model.hpp"

#include <stdexcept>

namespace magswim {

/// M(α₁, α₂) in M·V = Y, where V = R_{θ}ᵀ·Ż holds the velocity of the S1 end in
/// the S1 frame followed by (θ̇, α̇₁, α̇₂).
///
/// Rows: total drag force along e1∥ and e1⊥; total torque about the free end
/// of S1; torque of S2+S3 about the S1/S2 joint; torque of S3 about the S2/S3 joint.
struct MobilityMatrix {
    Mat5 m;
    double det_m;
};

MobilityMatrix build_mobility_matrix(double alpha1, double alpha2, const SwimmerParams& params);

/// Right-hand side of M·V = Y, split by origin. Both parts are the negated
/// torques (resp. zero force rows) that the fluid must balance.
struct GeneralizedForce {
    Vec5 y;         ///< magnetic + elastic
    Vec5 magnetic;  ///< −Σ Mᵢ eᵢ∥ × H, summed per balance row
    Vec5 elastic;   ///< −spring torques per balance row
};

GeneralizedForce assemble_generalized_force(const SwimmerState& state, const ControlField& field,
                                            const SwimmerParams& params);

/// Thrown when the mobility matrix cannot be factored. M is nonsingular for
/// every admissible shape, so this indicates a broken assembly or bad input.
class SingularMobility : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Body-frame drift and control fields: V = f0 + h_par·f1 + h_perp·f2.
struct ControlVectorFields {
    Vec5 f0, f1, f2;
    Vec5 x3, x4, x5;        ///< columns 3..5 of M⁻¹
    double det_m = 0.0;
    bool ill_conditioned = false;  ///< |det M| below mobility_det_warning
};

/// Warning floor on |det M| in internal units.
inline constexpr double mobility_det_warning = 1e-14;

ControlVectorFields control_vector_fields(double alpha1, double alpha2, const SwimmerParams& params);

/// Ż = R_θ·(f0 + h_par·f1 + h_perp·f2).
Vec5 state_derivative(const SwimmerState& state, const ControlField& field,
                      const SwimmerParams& params);

} // namespace magswim

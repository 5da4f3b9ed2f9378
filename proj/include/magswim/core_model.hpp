#pragma once

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

namespace magswim {

using Vec2 = Eigen::Vector2d;
using Vec5 = Eigen::Matrix<double, 5, 1>;
using Mat2 = Eigen::Matrix2d;
using Mat5 = Eigen::Matrix<double, 5, 5>;

/// Raised when a domain object violates one of its invariants.
class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/**
 * Unit conversions between the published parameter units and the coherent
 * internal system (length in µm, time in s, force in pN).
 *
 *  - drag per unit length:  1 N·s·m⁻² = 1 pN·s·µm⁻²   (factor 1)
 *  - torque:                1 N·µm    = 1e12 pN·µm
 *  - magnetic moment:       kept in A·µm²
 *  - field:                 the internal field unit is the one for which
 *                           (A·µm²)·(field) = pN·µm, i.e. 1 µT of flux
 *                           density (1 A·µm² · 1 T = 1e6 pN·µm).
 */
namespace units {
inline constexpr double drag_N_s_per_m2_to_internal = 1.0;
inline constexpr double torque_N_um_to_internal = 1e12;
inline constexpr double field_T_to_internal = 1e6;
} // namespace units

/// Physical constants of the three-segment swimmer, in internal units.
struct SwimmerParams {
    double ell;    ///< segment length [µm]
    double xi;     ///< tangential drag coefficient [pN·s·µm⁻²]
    double eta;    ///< normal drag coefficient [pN·s·µm⁻²]
    double m1, m2, m3;  ///< magnetic moments [A·µm²]
    double kappa;  ///< spring stiffness [pN·µm]
    double alpha0; ///< rest angle of the S2-S3 spring [rad]

    /// Builds from the published units (drag in N·s·m⁻², κ in N·µm).
    static SwimmerParams from_published_units(double ell_um, double eta_N_s_per_m2,
                                              double xi_N_s_per_m2, double m1_A_um2,
                                              double m2_A_um2, double m3_A_um2,
                                              double kappa_N_um, double alpha0_rad);

    /// Reference swimmer values with the given rest angle.
    static SwimmerParams reference(double alpha0_rad);

    double kappa_N_um() const { return kappa / units::torque_N_um_to_internal; }

    /// Throws InvalidArgument describing the first violated invariant.
    void validate() const;

    bool operator==(const SwimmerParams&) const = default;
};

/// Configuration Z = (x, y, θ, α₁, α₂). θ is never wrapped.
struct SwimmerState {
    double x = 0.0;      ///< proximal end of S1 [µm]
    double y = 0.0;
    double theta = 0.0;  ///< lab x-axis to S1 [rad]
    double alpha1 = 0.0; ///< S1 to S2, clockwise [rad]
    double alpha2 = 0.0; ///< S2 to S3, clockwise [rad]

    Vec5 vector() const { return {x, y, theta, alpha1, alpha2}; }
    static SwimmerState from_vector(const Vec5& z) { return {z[0], z[1], z[2], z[3], z[4]}; }

    /// Shape angles must lie in (−π, π); outside, segments overlap.
    bool physical_shape() const;
    void validate() const;

    bool operator==(const SwimmerState&) const = default;
};

struct SegmentFrame {
    Vec2 origin;
    Vec2 tangent;
    Vec2 normal;
};

/// Frames of S1, S2, S3 with tangent angles θ, θ−α₁, θ−α₁−α₂. Origins chain
/// along the tangents; normals are the tangents turned by +π/2.
std::array<SegmentFrame, 3> segment_frames(const SwimmerState& state, const SwimmerParams& params);

/// The four joint/end points of the chain: o1, o2, o3 and the distal tip.
std::array<Vec2, 4> joint_points(const SwimmerState& state, const SwimmerParams& params);

/// Standard planar rotation by angle.
Mat2 planar_rotation(double angle);

/// 5×5 block-diagonal matrix with the planar rotation by θ on the position block
/// and the identity on (θ, α₁, α₂). Maps body-frame rates to lab-frame rates.
Mat5 rotation_block(double theta);

/// Uniform field expressed in the S1 frame: H = h_par·e1∥ + h_perp·e1⊥.
struct ControlField {
    double h_par = 0.0;
    double h_perp = 0.0;

    Vec2 to_lab(double theta) const;
    static ControlField from_lab(const Vec2& h_lab, double theta);
    double norm() const { return std::hypot(h_par, h_perp); }

    bool operator==(const ControlField&) const = default;
};

} // namespace magswim

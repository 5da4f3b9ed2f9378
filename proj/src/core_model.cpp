#include "magswim/core_model.hpp"

#include <numbers>
#include <sstream>

namespace magswim {

namespace {

void require(bool ok, const std::string& what) {
    if (!ok) throw InvalidArgument(what);
}

} // namespace

SwimmerParams SwimmerParams::from_published_units(double ell_um, double eta_N_s_per_m2,
                                                  double xi_N_s_per_m2, double m1_A_um2,
                                                  double m2_A_um2, double m3_A_um2,
                                                  double kappa_N_um, double alpha0_rad) {
    SwimmerParams p{};
    p.ell = ell_um;
    p.eta = eta_N_s_per_m2 * units::drag_N_s_per_m2_to_internal;
    p.xi = xi_N_s_per_m2 * units::drag_N_s_per_m2_to_internal;
    p.m1 = m1_A_um2;
    p.m2 = m2_A_um2;
    p.m3 = m3_A_um2;
    p.kappa = kappa_N_um * units::torque_N_um_to_internal;
    p.alpha0 = alpha0_rad;
    return p;
}

SwimmerParams SwimmerParams::reference(double alpha0_rad) {
    return from_published_units(10.0, 12.4e-3, 6.2e-3, 1.6, 2.4, 3.2, 8.3e-7, alpha0_rad);
}

void SwimmerParams::validate() const {
    require(std::isfinite(ell) && ell > 0.0, "segment length must be positive");
    require(std::isfinite(xi) && xi > 0.0, "tangential drag coefficient must be positive");
    require(std::isfinite(eta) && eta > 0.0, "normal drag coefficient must be positive");
    require(std::isfinite(kappa) && kappa > 0.0, "spring stiffness must be positive");
    require(std::isfinite(m1) && std::isfinite(m2) && std::isfinite(m3),
            "magnetic moments must be finite");
    require(std::isfinite(alpha0) && std::abs(alpha0) < std::numbers::pi,
            "rest angle must lie in (-pi, pi)");
}

bool SwimmerState::physical_shape() const {
    return std::abs(alpha1) < std::numbers::pi && std::abs(alpha2) < std::numbers::pi;
}

void SwimmerState::validate() const {
    require(std::isfinite(x) && std::isfinite(y) && std::isfinite(theta),
            "position and orientation must be finite");
    if (!physical_shape()) {
        std::ostringstream os;
        os << "shape angles (" << alpha1 << ", " << alpha2 << ") outside (-pi, pi)";
        throw InvalidArgument(os.str());
    }
}

std::array<SegmentFrame, 3> segment_frames(const SwimmerState& state, const SwimmerParams& params) {
    const std::array<double, 3> angle{state.theta, state.theta - state.alpha1,
                                      state.theta - state.alpha1 - state.alpha2};
    std::array<SegmentFrame, 3> frames;
    Vec2 origin(state.x, state.y);
    for (std::size_t i = 0; i < 3; ++i) {
        const double c = std::cos(angle[i]);
        const double s = std::sin(angle[i]);
        frames[i].origin = origin;
        frames[i].tangent = Vec2(c, s);
        frames[i].normal = Vec2(-s, c);
        origin = origin + params.ell * frames[i].tangent;
    }
    return frames;
}

std::array<Vec2, 4> joint_points(const SwimmerState& state, const SwimmerParams& params) {
    const auto frames = segment_frames(state, params);
    return {frames[0].origin, frames[1].origin, frames[2].origin,
            frames[2].origin + params.ell * frames[2].tangent};
}

Mat2 planar_rotation(double angle) {
    const double c = std::cos(angle);
    const double s = std::sin(angle);
    Mat2 r;
    r << c, -s, s, c;
    return r;
}

Mat5 rotation_block(double theta) {
    Mat5 r = Mat5::Identity();
    r.topLeftCorner<2, 2>() = planar_rotation(theta);
    return r;
}

Vec2 ControlField::to_lab(double theta) const {
    return planar_rotation(theta) * Vec2(h_par, h_perp);
}

ControlField ControlField::from_lab(const Vec2& h_lab, double theta) {
    const Vec2 body = planar_rotation(-theta) * h_lab;
    return {body[0], body[1]};
}

} // namespace magswim

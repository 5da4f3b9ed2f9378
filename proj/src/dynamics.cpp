#include "magswim/dynamics.hpp"

#include <sstream>

namespace magswim {

namespace {

using Row5 = Eigen::Matrix<double, 1, 5>;
using Map2x5 = Eigen::Matrix<double, 2, 5>;

double cross(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

Row5 cross(const Vec2& a, const Map2x5& f) { return a.x() * f.row(1) - a.y() * f.row(0); }

// Drag on one segment, as linear maps of the body velocity V. A segment point
// at arclength s moves with w + s·ω·n, so the drag density is polynomial in s
// and the integrals over [0, ℓ] are exact.
struct SegmentDrag {
    Map2x5 force;
    Row5 torque_about_origin;
};

SegmentDrag segment_drag(const Vec2& e, const Vec2& n, const Map2x5& w, const Row5& omega,
                         const SwimmerParams& p) {
    const double l = p.ell;
    const Row5 w_par = e.transpose() * w;
    const Row5 w_perp = n.transpose() * w;
    const Row5 normal_load = l * w_perp + 0.5 * l * l * omega;

    SegmentDrag d;
    d.force = -p.xi * l * e * w_par - p.eta * n * normal_load;
    // ∫ s e × f ds; only the normal part of f has a moment arm along e.
    d.torque_about_origin = -p.eta * (0.5 * l * l * w_perp + (l * l * l / 3.0) * omega);
    return d;
}

Row5 torque_about(const SegmentDrag& d, const Vec2& segment_origin, const Vec2& point) {
    return d.torque_about_origin + cross(segment_origin - point, d.force);
}

} // namespace

MobilityMatrix build_mobility_matrix(double alpha1, double alpha2, const SwimmerParams& params) {
    const double l = params.ell;
    // Everything is expressed in the S1 frame, so θ drops out. Shape angles turn
    // clockwise: S2 points along −α₁ and S3 along −(α₁+α₂).
    const Vec2 e1(1.0, 0.0), n1(0.0, 1.0);
    const Vec2 e2(std::cos(alpha1), -std::sin(alpha1)), n2(-e2.y(), e2.x());
    const double a12 = alpha1 + alpha2;
    const Vec2 e3(std::cos(a12), -std::sin(a12)), n3(-e3.y(), e3.x());

    Row5 omega1 = Row5::Zero(), omega2 = Row5::Zero(), omega3 = Row5::Zero();
    omega1 << 0, 0, 1, 0, 0;
    omega2 << 0, 0, 1, -1, 0;
    omega3 << 0, 0, 1, -1, -1;

    Map2x5 w1 = Map2x5::Zero();
    w1(0, 0) = 1.0;
    w1(1, 1) = 1.0;
    const Map2x5 w2 = w1 + l * n1 * omega1;
    const Map2x5 w3 = w2 + l * n2 * omega2;

    const Vec2 o1 = Vec2::Zero();
    const Vec2 o2 = o1 + l * e1;
    const Vec2 o3 = o2 + l * e2;

    const SegmentDrag d1 = segment_drag(e1, n1, w1, omega1, params);
    const SegmentDrag d2 = segment_drag(e2, n2, w2, omega2, params);
    const SegmentDrag d3 = segment_drag(e3, n3, w3, omega3, params);

    MobilityMatrix out;
    out.m.topRows<2>() = d1.force + d2.force + d3.force;
    out.m.row(2) = torque_about(d1, o1, o1) + torque_about(d2, o2, o1) + torque_about(d3, o3, o1);
    out.m.row(3) = torque_about(d2, o2, o2) + torque_about(d3, o3, o2);
    out.m.row(4) = torque_about(d3, o3, o3);
    out.det_m = out.m.determinant();
    return out;
}

GeneralizedForce assemble_generalized_force(const SwimmerState& state, const ControlField& field,
                                            const SwimmerParams& params) {
    const Vec2 h(field.h_par, field.h_perp);
    const double a12 = state.alpha1 + state.alpha2;
    const std::array<Vec2, 3> tangent{Vec2(1.0, 0.0),
                                      Vec2(std::cos(state.alpha1), -std::sin(state.alpha1)),
                                      Vec2(std::cos(a12), -std::sin(a12))};
    const std::array<double, 3> moment{params.m1, params.m2, params.m3};
    std::array<double, 3> tm{};
    for (std::size_t i = 0; i < 3; ++i) tm[i] = moment[i] * cross(tangent[i], h);

    // Spring torques on the distal body of each joint, about +e_z. With clockwise
    // shape angles, +κα₁ e_z is restoring.
    const double t_el2 = params.kappa * state.alpha1;
    const double t_el3 = params.kappa * (state.alpha2 - params.alpha0);

    GeneralizedForce g;
    g.magnetic << 0.0, 0.0, -(tm[0] + tm[1] + tm[2]), -(tm[1] + tm[2]), -tm[2];
    g.elastic << 0.0, 0.0, 0.0, -t_el2, -t_el3;
    g.y = g.magnetic + g.elastic;
    return g;
}

ControlVectorFields control_vector_fields(double alpha1, double alpha2, const SwimmerParams& params) {
    const MobilityMatrix mob = build_mobility_matrix(alpha1, alpha2, params);
    const Eigen::PartialPivLU<Mat5> lu(mob.m);

    const Mat5& packed = lu.matrixLU();
    for (int i = 0; i < 5; ++i) {
        const double pivot = packed(i, i);
        if (pivot == 0.0 || !std::isfinite(pivot)) {
            std::ostringstream os;
            os << "mobility matrix is singular at (alpha1, alpha2) = (" << alpha1 << ", " << alpha2
               << ")";
            throw SingularMobility(os.str());
        }
    }

    ControlVectorFields out;
    out.det_m = lu.determinant();
    out.ill_conditioned = std::abs(out.det_m) < mobility_det_warning;

    Eigen::Matrix<double, 5, 3> rhs = Eigen::Matrix<double, 5, 3>::Zero();
    rhs(2, 0) = rhs(3, 1) = rhs(4, 2) = 1.0;
    const Eigen::Matrix<double, 5, 3> cols = lu.solve(rhs);
    out.x3 = cols.col(0);
    out.x4 = cols.col(1);
    out.x5 = cols.col(2);

    const double s1 = std::sin(alpha1), c1 = std::cos(alpha1);
    const double s12 = std::sin(alpha1 + alpha2), c12 = std::cos(alpha1 + alpha2);
    const double par_lever = params.m2 * s1 + params.m3 * s12;
    const double perp_lever = params.m2 * c1 + params.m3 * c12;

    out.f0 = -params.kappa * (alpha1 * out.x4 + (alpha2 - params.alpha0) * out.x5);
    // A field along e1∥ pulls S2 and S3 back toward S1, like the first spring.
    out.f1 = -par_lever * (out.x3 + out.x4) - params.m3 * s12 * out.x5;
    out.f2 = -params.m1 * out.x3 - perp_lever * (out.x3 + out.x4) - params.m3 * c12 * out.x5;
    return out;
}

Vec5 state_derivative(const SwimmerState& state, const ControlField& field,
                      const SwimmerParams& params) {
    const ControlVectorFields cvf = control_vector_fields(state.alpha1, state.alpha2, params);
    const Vec5 body = cvf.f0 + field.h_par * cvf.f1 + field.h_perp * cvf.f2;
    return rotation_block(state.theta) * body;
}

} // namespace magswim

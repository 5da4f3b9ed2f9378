#include "magswim/dynamics.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <numbers>

using namespace magswim;
using std::numbers::pi;

namespace {

const SwimmerParams ref_params = SwimmerParams::reference(pi / 3);

} // namespace

TEST_CASE("quadrature oracle integrates polynomials exactly") {
    const auto [x, w] = oracle::gauss_legendre(32);
    double sum_w = 0.0, sum_x2 = 0.0, sum_x63 = 0.0, sum_x62 = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sum_w += w[i];
        sum_x2 += w[i] * x[i] * x[i];
        sum_x62 += w[i] * std::pow(x[i], 62);
        sum_x63 += w[i] * std::pow(x[i], 63);
    }
    CHECK(sum_w == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(sum_x2 == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
    CHECK(sum_x62 == doctest::Approx(2.0 / 63.0).epsilon(1e-12));
    CHECK(std::abs(sum_x63) < 1e-14);
}

TEST_CASE("mobility matrix matches the quadrature RFT oracle") {
    oracle::Gen g(2024);
    for (int i = 0; i < 50; ++i) {
        const double a1 = g.shape_angle(), a2 = g.shape_angle();
        const Mat5 ref = oracle::rft_mobility(a1, a2, ref_params);
        const MobilityMatrix m = build_mobility_matrix(a1, a2, ref_params);
        CHECK(oracle::max_entry_rel_error(m.m, ref) <= 1e-10);
        CHECK(m.det_m == doctest::Approx(oracle::laplace_det(ref)).epsilon(1e-10));
    }
}

TEST_CASE("mobility matrix of the straight swimmer") {
    const MobilityMatrix m = build_mobility_matrix(0.0, 0.0, ref_params);
    // Pure translation along the axis only meets tangential drag on 3ℓ.
    CHECK(m.m(0, 0) == doctest::Approx(-3.0 * ref_params.xi * ref_params.ell));
    CHECK(m.m(1, 0) == doctest::Approx(0.0));
    CHECK(m.m(1, 1) == doctest::Approx(-3.0 * ref_params.eta * ref_params.ell));
    CHECK(m.det_m < 0.0);
}

TEST_CASE("mobility matrix is independent of rest angle and field") {
    const SwimmerParams other = SwimmerParams::reference(-1.0);
    CHECK(build_mobility_matrix(0.4, -0.9, ref_params).m == build_mobility_matrix(0.4, -0.9, other).m);
}

TEST_CASE("det M is negative over the shape square") {
    const int n = 101;
    const double half = pi - 0.01;
    int violations = 0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const double a1 = -half + 2.0 * half * i / (n - 1);
            const double a2 = -half + 2.0 * half * j / (n - 1);
            if (!(build_mobility_matrix(a1, a2, ref_params).det_m < 0.0)) ++violations;
        }
    CHECK(violations == 0);
}

TEST_CASE("generalized force reproduces the elastic and perpendicular-field terms") {
    oracle::Gen g(77);
    const SwimmerParams& p = ref_params;
    for (int i = 0; i < 1000; ++i) {
        const SwimmerState s = g.state();
        const double hp = g.uniform(-1e5, 1e5), hq = g.uniform(-1e5, 1e5);
        const double s1 = std::sin(s.alpha1), s12 = std::sin(s.alpha1 + s.alpha2);
        const double c1 = std::cos(s.alpha1), c12 = std::cos(s.alpha1 + s.alpha2);

        const GeneralizedForce par = assemble_generalized_force(s, {hp, 0.0}, p);
        const GeneralizedForce perp = assemble_generalized_force(s, {0.0, hq}, p);
        const GeneralizedForce none = assemble_generalized_force(s, {0.0, 0.0}, p);
        const double tol = 1e-9 * std::max(1.0, std::abs(hp) + std::abs(hq)) * 10.0;

        CHECK(none.y[0] == 0.0);
        CHECK(none.y[1] == 0.0);
        CHECK(none.y[2] == doctest::Approx(0.0));
        CHECK(none.y[3] == doctest::Approx(-p.kappa * s.alpha1));
        CHECK(none.y[4] == doctest::Approx(-p.kappa * (s.alpha2 - p.alpha0)));

        CHECK(std::abs(perp.magnetic[2] + hq * (p.m1 + p.m2 * c1 + p.m3 * c12)) < tol);
        CHECK(std::abs(perp.magnetic[3] + hq * (p.m2 * c1 + p.m3 * c12)) < tol);
        CHECK(std::abs(perp.magnetic[4] + hq * p.m3 * c12) < tol);

        // A field along S1 pulls S2 and S3 back toward S1, the same way as the
        // straight spring, so these rows carry the opposite sign of the printed form.
        CHECK(std::abs(par.magnetic[2] + hp * (p.m2 * s1 + p.m3 * s12)) < tol);
        CHECK(std::abs(par.magnetic[3] + hp * (p.m2 * s1 + p.m3 * s12)) < tol);
        CHECK(std::abs(par.magnetic[4] + hp * p.m3 * s12) < tol);

        CHECK((par.y - par.magnetic - par.elastic).norm() <= 1e-15 * par.y.norm());
    }
}

TEST_CASE("a field along S1 restores a bent joint like the spring does") {
    const SwimmerParams p = SwimmerParams::reference(0.0);
    const SwimmerState s{0, 0, 0, 0.4, 0.0};
    const Vec5 spring = state_derivative(s, {0.0, 0.0}, p);
    const Vec5 field = state_derivative(s, {1e5, 0.0}, p) - spring;
    CHECK(spring[3] < 0.0);
    CHECK(field[3] < 0.0);
}

TEST_CASE("control vector fields match the cofactor inverse") {
    oracle::Gen g(99);
    const SwimmerParams& p = ref_params;
    for (int i = 0; i < 100; ++i) {
        const double a1 = g.shape_angle(), a2 = g.shape_angle();
        const Mat5 inv = oracle::cofactor_inverse(oracle::rft_mobility(a1, a2, p));
        const Vec5 x3 = inv.col(2), x4 = inv.col(3), x5 = inv.col(4);
        const double s1 = std::sin(a1), s12 = std::sin(a1 + a2);
        const double c1 = std::cos(a1), c12 = std::cos(a1 + a2);
        const Vec5 f0 = -p.kappa * (a1 * x4 + (a2 - p.alpha0) * x5);
        const Vec5 f1 = -(p.m2 * s1 + p.m3 * s12) * (x3 + x4) - p.m3 * s12 * x5;
        const Vec5 f2 = -p.m1 * x3 - (p.m2 * c1 + p.m3 * c12) * (x3 + x4) - p.m3 * c12 * x5;
        const double d = f1[0] * f2[1] - f1[1] * f2[0];

        const ControlVectorFields cvf = control_vector_fields(a1, a2, p);
        CHECK((cvf.x3 - x3).norm() <= 1e-10 * x3.norm());
        CHECK((cvf.f0 - f0).norm() <= 1e-10 * std::max(f0.norm(), 1e-3 * p.kappa * x4.norm()));
        CHECK((cvf.f1 - f1).norm() <= 1e-10 * std::max(f1.norm(), x3.norm()));
        CHECK((cvf.f2 - f2).norm() <= 1e-10 * f2.norm());
        CHECK(std::abs(cvf.f1[0] * cvf.f2[1] - cvf.f1[1] * cvf.f2[0] - d) <=
              1e-9 * std::max(std::abs(d), 1e-6));
        CHECK_FALSE(cvf.ill_conditioned);
    }
}

TEST_CASE("the state derivative solves the force and torque balance") {
    oracle::Gen g(3);
    for (int i = 0; i < 100; ++i) {
        const SwimmerState s = g.state();
        const ControlField h{g.uniform(-3e5, 3e5), g.uniform(-3e5, 3e5)};
        const Vec5 zdot = state_derivative(s, h, ref_params);
        // Lab-frame drag from the oracle must cancel the external torques.
        const Vec5 drag_lab = oracle::rft_balance(s.vector(), zdot, ref_params);
        Vec5 drag_body = drag_lab;
        drag_body.head<2>() = planar_rotation(-s.theta) * drag_lab.head<2>();
        const Vec5 y = assemble_generalized_force(s, h, ref_params).y;
        CHECK((drag_body - y).norm() <= 1e-9 * std::max(1.0, y.norm()));
    }
}

TEST_CASE("state derivative is invariant under translation and equivariant under rotation") {
    oracle::Gen g(1234);
    const SwimmerParams p = SwimmerParams::reference(0.8);
    for (int i = 0; i < 1000; ++i) {
        const SwimmerState s = g.state();
        const ControlField h{g.uniform(-2e5, 2e5), g.uniform(-2e5, 2e5)};
        const Vec5 base = state_derivative(s, h, p);
        const double scale = base.norm();

        SwimmerState moved = s;
        moved.x += g.uniform(-100, 100);
        moved.y += g.uniform(-100, 100);
        CHECK((state_derivative(moved, h, p) - base).norm() <= 1e-12 * scale);

        const double phi = g.uniform(-pi, pi);
        SwimmerState turned = s;
        turned.theta += phi;
        const Vec5 rot = state_derivative(turned, h, p);
        Vec5 expect = base;
        expect.head<2>() = planar_rotation(phi) * base.head<2>();
        CHECK((rot - expect).norm() <= 1e-12 * scale);
    }
}

TEST_CASE("equilibria have zero drift") {
    const SwimmerParams p = SwimmerParams::reference(pi / 4);
    CHECK(state_derivative({3, -2, 1.1, 0.0, pi / 4}, {}, p).norm() == 0.0);
    CHECK(state_derivative({3, -2, 1.1, 0.1, pi / 4}, {}, p).norm() > 0.0);
}

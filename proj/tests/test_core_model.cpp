#include "magswim/core_model.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <numbers>

using namespace magswim;
using std::numbers::pi;

TEST_CASE("published units convert to the internal system") {
    const SwimmerParams p = SwimmerParams::reference(pi / 3);
    CHECK(p.ell == 10.0);
    CHECK(p.eta == doctest::Approx(12.4e-3).epsilon(1e-15));
    CHECK(p.xi == doctest::Approx(6.2e-3).epsilon(1e-15));
    CHECK(p.m1 == 1.6);
    CHECK(p.m2 == 2.4);
    CHECK(p.m3 == 3.2);
    CHECK(p.kappa == doctest::Approx(8.3e5).epsilon(1e-15));
    CHECK(p.kappa_N_um() == doctest::Approx(8.3e-7).epsilon(1e-15));
    CHECK(p.alpha0 == pi / 3);
    CHECK_NOTHROW(p.validate());
}

TEST_CASE("parameter invariants are enforced") {
    SwimmerParams p = SwimmerParams::reference(0.5);
    SUBCASE("segment length") { p.ell = 0.0; }
    SUBCASE("normal drag") { p.eta = -1.0; }
    SUBCASE("tangential drag") { p.xi = 0.0; }
    SUBCASE("stiffness") { p.kappa = 0.0; }
    SUBCASE("moment") { p.m2 = std::nan(""); }
    SUBCASE("rest angle") { p.alpha0 = pi; }
    CHECK_THROWS_AS(p.validate(), InvalidArgument);
}

TEST_CASE("state vector round trip and shape validity") {
    const SwimmerState s{1.5, -2.0, 7.0, 0.3, -1.2};
    CHECK(SwimmerState::from_vector(s.vector()) == s);
    CHECK(s.physical_shape());
    CHECK_NOTHROW(s.validate());
    CHECK_FALSE(SwimmerState{0, 0, 0, pi, 0}.physical_shape());
    CHECK_THROWS_AS((SwimmerState{0, 0, 0, 0, -3.2}.validate()), InvalidArgument);
    CHECK_THROWS_AS((SwimmerState{std::nan(""), 0, 0, 0, 0}.validate()), InvalidArgument);
}

TEST_CASE("segment frames of the straight swimmer") {
    const SwimmerParams p = SwimmerParams::reference(0.0);
    const auto f = segment_frames({0, 0, 0, 0, 0}, p);
    for (int i = 0; i < 3; ++i) {
        CHECK(f[i].tangent.isApprox(Vec2(1, 0)));
        CHECK(f[i].normal.isApprox(Vec2(0, 1)));
        CHECK(f[i].origin.isApprox(Vec2(10.0 * i, 0)));
    }
}

TEST_CASE("segment frames at the bent equilibrium turn S3 clockwise by alpha0") {
    const double a0 = pi / 3;
    const SwimmerParams p = SwimmerParams::reference(a0);
    const auto f = segment_frames({0, 0, 0, 0, a0}, p);
    CHECK((f[2].tangent - Vec2(std::cos(a0), -std::sin(a0))).norm() < 1e-15);
    CHECK((f[1].tangent - Vec2(1, 0)).norm() < 1e-15);
}

TEST_CASE("joint points are spaced by the segment length") {
    oracle::Gen g(11);
    const SwimmerParams p = SwimmerParams::reference(0.7);
    for (int i = 0; i < 200; ++i) {
        const SwimmerState s = g.state();
        const auto pts = joint_points(s, p);
        CHECK(pts[0].isApprox(Vec2(s.x, s.y)));
        for (int k = 0; k < 3; ++k) CHECK((pts[k + 1] - pts[k]).norm() == doctest::Approx(p.ell));
        const auto f = segment_frames(s, p);
        for (int k = 0; k < 3; ++k) {
            CHECK(f[k].tangent.dot(f[k].normal) == doctest::Approx(0.0).epsilon(1e-15));
            CHECK(oracle::cross(f[k].tangent, f[k].normal) == doctest::Approx(1.0));
        }
    }
}

TEST_CASE("rotation helpers") {
    CHECK(planar_rotation(pi / 2).isApprox((Mat2() << 0, -1, 1, 0).finished()));
    const Mat5 r = rotation_block(0.4);
    CHECK(r.topLeftCorner<2, 2>().isApprox(planar_rotation(0.4)));
    CHECK(r.bottomRightCorner<3, 3>().isIdentity());
    CHECK(r.topRightCorner<2, 3>().isZero());
}

TEST_CASE("field frame conversion") {
    const ControlField h{3.0, -4.0};
    CHECK(h.norm() == doctest::Approx(5.0));
    CHECK(h.to_lab(0.0).isApprox(Vec2(3.0, -4.0)));
    const Vec2 q = h.to_lab(pi / 2);
    CHECK(q.x() == doctest::Approx(4.0));
    CHECK(q.y() == doctest::Approx(3.0));

    oracle::Gen g(5);
    for (int i = 0; i < 500; ++i) {
        const ControlField f{g.uniform(-1e5, 1e5), g.uniform(-1e5, 1e5)};
        const double th = g.uniform(-20, 20);
        const ControlField back = ControlField::from_lab(f.to_lab(th), th);
        CHECK(back.h_par == doctest::Approx(f.h_par).epsilon(1e-12));
        CHECK(back.h_perp == doctest::Approx(f.h_perp).epsilon(1e-12));
        CHECK(f.to_lab(th).norm() == doctest::Approx(f.norm()).epsilon(1e-12));
    }
}

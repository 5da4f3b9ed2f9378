#include "magswim/integrators.hpp"
#include "magswim/open_loop.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace magswim;
using namespace magswim::ode;

namespace {

IntegratorOptions with(Method m, double tol = 1e-9) {
    IntegratorOptions o;
    o.method = m;
    o.abs_tol = o.rel_tol = tol;
    o.h_init = 1e-3;
    o.h_max = 0.1;
    return o;
}

Vector scalar(double v) { return Vector::Constant(1, v); }

const Method both[] = {Method::adaptive_explicit_rk45, Method::trapezoidal_adaptive};

} // namespace

TEST_CASE("method names round trip") {
    for (Method m : both) CHECK(method_from_string(to_string(m)) == m);
    CHECK_THROWS_AS(method_from_string("ode45"), std::invalid_argument);
}

TEST_CASE("options are validated") {
    IntegratorOptions o;
    CHECK_NOTHROW(o.validate());
    o.h_min = 1.0;
    CHECK_THROWS_AS(o.validate(), std::invalid_argument);
    o = {};
    o.abs_tol = 0.0;
    CHECK_THROWS_AS(o.validate(), std::invalid_argument);
    o = {};
    o.max_steps = 0;
    CHECK_THROWS_AS(o.validate(), std::invalid_argument);
}

TEST_CASE("zero field keeps the state exactly") {
    for (Method m : both) {
        Vector z0(3);
        z0 << 1.5, -2.25, 1e8;
        const Solution sol = integrate([](double, const Vector& z) { return Vector::Zero(z.size()); },
                                       z0, 0.0, 5.0, with(m));
        CHECK(sol.ok());
        CHECK(sol.z_final == z0);
    }
}

TEST_CASE("exponential decay reaches exp(-1)") {
    for (Method m : both) {
        const Solution sol = integrate([](double, const Vector& z) { return Vector(-z); },
                                       scalar(1.0), 0.0, 1.0, with(m));
        CAPTURE(to_string(m));
        CHECK(sol.ok());
        CHECK(sol.t_final == 1.0);
        // Trapezoidal steps are controlled on local error only, and about 400 of
        // them accumulate to roughly 2e-7 at this tolerance.
        const double bound = m == Method::adaptive_explicit_rk45 ? 1e-8 : 1e-6;
        CHECK(std::abs(sol.z_final[0] - std::exp(-1.0)) <= bound);
    }
}

TEST_CASE("tighter tolerances do not make the endpoint worse") {
    for (Method m : both) {
        double previous = 1.0;
        for (double tol = 1e-4; tol >= 1e-10; tol /= 2.0) {
            const Solution sol = integrate([](double, const Vector& z) { return Vector(-z); },
                                           scalar(1.0), 0.0, 1.0, with(m, tol));
            const double err = std::abs(sol.z_final[0] - std::exp(-1.0));
            CAPTURE(tol);
            CHECK(err <= 4.0 * previous);
            previous = std::max(err, 1e-16);
        }
    }
}

TEST_CASE("dense output hits requested times") {
    for (Method m : both) {
        const double times[] = {0.0, 0.1, 0.35, 0.5, 1.0};
        const Solution sol = integrate([](double t, const Vector&) { return scalar(std::cos(t)); },
                                       scalar(0.0), 0.0, 1.0, with(m, 1e-11), times);
        REQUIRE(sol.sample_t.size() == 5);
        for (std::size_t i = 0; i < 5; ++i) {
            CHECK(sol.sample_t[i] == times[i]);
            CHECK(sol.sample_z[i][0] == doctest::Approx(std::sin(times[i])).epsilon(1e-8));
        }
    }
}

TEST_CASE("Hermite dense output is exact for cubic solutions") {
    // z(t) = t³ is reproduced by every accepted step endpoint, so the cubic
    // interpolant between them is exact.
    const double times[] = {0.123, 0.5, 0.77};
    IntegratorOptions o = with(Method::adaptive_explicit_rk45, 1e-12);
    o.h_init = o.h_max = 0.25;
    const Solution sol = integrate([](double t, const Vector&) { return scalar(3.0 * t * t); },
                                   scalar(0.0), 0.0, 1.0, o, times);
    for (std::size_t i = 0; i < 3; ++i)
        CHECK(sol.sample_z[i][0] == doctest::Approx(std::pow(times[i], 3)).epsilon(1e-13));
}

TEST_CASE("stiff linear system is handled by both methods") {
    const double lambda = -1e6;
    for (Method m : both) {
        IntegratorOptions o = with(m);
        o.h_init = 1e-8;
        const Solution sol = integrate(
            [&](double t, const Vector& z) { return scalar(lambda * (z[0] - std::cos(t))); },
            scalar(0.0), 0.0, 0.01, o);
        CHECK(sol.ok());
        CHECK(sol.z_final[0] == doctest::Approx(std::cos(0.01)).epsilon(1e-6));
    }
}

TEST_CASE("early stop ends at the last accepted step") {
    for (Method m : both) {
        const Solution sol = integrate(
            [](double, const Vector& z) -> Vector {
                if (z[0] > 0.5) throw EarlyStop("limit reached");
                return scalar(1.0);
            },
            scalar(0.0), 0.0, 1.0, with(m));
        CHECK(sol.status == Status::stopped_early);
        CHECK(sol.message == "limit reached");
        CHECK(sol.t_final < 1.0);
        CHECK(sol.z_final[0] <= 0.5);
        CHECK_FALSE(sol.ok());
    }
}

TEST_CASE("failures are reported, not thrown") {
    SUBCASE("step size collapse") {
        IntegratorOptions o = with(Method::adaptive_explicit_rk45);
        o.h_min = 1e-4;
        o.h_init = 1e-4;
        const Solution sol = integrate([](double t, const Vector&) { return scalar(1.0 / (0.5 - t)); },
                                       scalar(0.0), 0.0, 1.0, o);
        CHECK(sol.status == Status::step_size_collapse);
        CHECK(sol.t_final < 0.5);
    }
    SUBCASE("max steps") {
        IntegratorOptions o = with(Method::trapezoidal_adaptive);
        o.max_steps = 3;
        o.h_max = 1e-3;
        const Solution sol = integrate([](double, const Vector& z) { return Vector(-z); },
                                       scalar(1.0), 0.0, 1.0, o);
        CHECK(sol.status == Status::max_steps_exceeded);
        CHECK(sol.accepted_steps == 3);
    }
}

TEST_CASE("runs are deterministic") {
    for (Method m : both) {
        auto run = [&] {
            return integrate(
                [](double t, const Vector& z) {
                    Vector d(2);
                    d << z[1], -z[0] + std::sin(3.0 * t);
                    return d;
                },
                Vector::Ones(2), 0.0, 4.0, with(m));
        };
        const Solution a = run(), b = run();
        CHECK(a.z_final == b.z_final);
        CHECK(a.accepted_steps == b.accepted_steps);
    }
}

TEST_CASE("open-loop relaxation agrees across methods") {
    const double a0 = std::numbers::pi / 3;
    const SwimmerParams p = SwimmerParams::reference(a0);
    const SwimmerState start{0, 0, 0, 0.3, a0 + 0.4};
    const FieldProgram zero = [](double, const SwimmerState&) { return ControlField{}; };

    IntegratorOptions rk, tr;
    rk.method = Method::adaptive_explicit_rk45;
    tr.method = Method::trapezoidal_adaptive;
    const OpenLoopResult a = simulate_open_loop(start, zero, p, 1e-3, rk);
    const OpenLoopResult b = simulate_open_loop(start, zero, p, 1e-3, tr);
    REQUIRE(a.solver.ok());
    REQUIRE(b.solver.ok());
    CHECK(std::abs(a.solver.z_final[3] - b.solver.z_final[3]) <= 1e-6);
    CHECK(std::abs(a.solver.z_final[4] - b.solver.z_final[4]) <= 1e-6);
    CHECK((a.solver.z_final - b.solver.z_final).cwiseAbs().maxCoeff() <= 1e-6);
    CHECK(std::abs(a.solver.z_final[3]) <= 1e-6);
    CHECK(std::abs(a.solver.z_final[4] - a0) <= 1e-6);
}

#include "magswim/controllability.hpp"
#include "magswim/dynamics.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <numbers>

using namespace magswim;
using std::numbers::pi;

namespace {

Eigen::VectorXd drift(const Eigen::VectorXd& z, const SwimmerParams& p) {
    return state_derivative(SwimmerState::from_vector(z), {}, p);
}

const double sweep[] = {pi / 6, -pi / 6, pi / 4, -pi / 4, pi / 3, -pi / 3, 2 * pi / 5, -2 * pi / 5};

} // namespace

TEST_CASE("linearization matches central finite differences") {
    const double a0s[] = {pi / 3, -pi / 4, 0.0};
    const double thetas[] = {0.0, 1.3, -2.2};
    for (int i = 0; i < 3; ++i) {
        const SwimmerParams p = SwimmerParams::reference(a0s[i]);
        const SwimmerState eq{4.0, -1.0, thetas[i], 0.0, a0s[i]};
        const LinearizedSystem lin = linearize(eq, p);

        const Eigen::MatrixXd a_fd = oracle::central_jacobian(
            [&](const Eigen::VectorXd& z) { return drift(z, p); }, eq.vector(), 1e-6);
        CHECK(oracle::max_entry_rel_error(lin.a, a_fd, 1e-9) <= 1e-6);

        const Eigen::MatrixXd b_fd = oracle::central_jacobian(
            [&](const Eigen::VectorXd& h) {
                return Eigen::VectorXd(state_derivative(eq, {h[0], h[1]}, p));
            },
            Eigen::Vector2d::Zero(), 1.0);
        CHECK(oracle::max_entry_rel_error(lin.b, b_fd, 1e-9) <= 1e-9);
    }
}

TEST_CASE("linearize rejects non-equilibria") {
    const SwimmerParams p = SwimmerParams::reference(0.5);
    CHECK_THROWS_AS(linearize({0, 0, 0, 0.1, 0.5}, p), NotAnEquilibrium);
    CHECK_THROWS_AS(linearize({0, 0, 0, 0.0, 0.0}, p), NotAnEquilibrium);
}

TEST_CASE("the shape block of A is stable") {
    const SwimmerParams p = SwimmerParams::reference(pi / 3);
    const LinearizedSystem lin = linearize({0, 0, 0, 0, pi / 3}, p);
    const Eigen::Matrix2d shape = lin.a.bottomRightCorner<2, 2>();
    const Eigen::Vector2cd ev = shape.eigenvalues();
    CHECK(ev[0].real() < 0.0);
    CHECK(ev[1].real() < 0.0);
    CHECK(lin.a.leftCols<3>().isZero());
}

TEST_CASE("Kalman matrix stacks powers of A times B") {
    oracle::Gen g(8);
    Mat5 a;
    Eigen::Matrix<double, 5, 2> b;
    for (int i = 0; i < 5; ++i) {
        for (int j = 0; j < 5; ++j) a(i, j) = g.uniform(-1, 1);
        for (int j = 0; j < 2; ++j) b(i, j) = g.uniform(-1, 1);
    }
    const KalmanMatrix k = kalman_matrix(a, b);
    Mat5 power = Mat5::Identity();
    for (int j = 0; j < 5; ++j) {
        CHECK(k.middleCols<2>(2 * j).isApprox(power * b, 1e-13));
        power = power * a;
    }
}

TEST_CASE("closed-form submatrix determinant matches the numeric Kalman entries") {
    for (double a0 : sweep) {
        const SwimmerParams p = SwimmerParams::reference(a0);
        const double closed = bent_submatrix_determinant(a0, p);
        const double numeric = numeric_submatrix_determinant(p);
        CAPTURE(a0);
        CHECK(std::abs(closed - numeric) <= 1e-8 * std::abs(numeric));
        CHECK(closed * a0 < 0.0);
        CHECK(bent_determinant_denominator_factor(a0, p) > 0.0);
    }
    const SwimmerParams straight = SwimmerParams::reference(0.0);
    CHECK(bent_submatrix_determinant(0.0, straight) == 0.0);
}

TEST_CASE("closed form holds for other drag and stiffness values") {
    oracle::Gen g(61);
    for (int i = 0; i < 20; ++i) {
        const double a0 = g.uniform(0.1, 2.5) * (i % 2 ? 1.0 : -1.0);
        const SwimmerParams p = SwimmerParams::from_published_units(
            g.uniform(1, 20), g.uniform(1e-3, 3e-2), g.uniform(1e-3, 3e-2), g.uniform(-3, 3),
            g.uniform(-3, 3), g.uniform(0.5, 4), g.uniform(1e-8, 1e-6), a0);
        const double closed = bent_submatrix_determinant(a0, p);
        const double numeric = numeric_submatrix_determinant(p);
        CHECK(std::abs(closed - numeric) <= 1e-8 * std::abs(numeric));
    }
}

TEST_CASE("partial controllability truth table") {
    for (double a0 : sweep) {
        const SwimmerParams p = SwimmerParams::reference(a0);
        const auto pc = partial_controllability(kalman_matrix(linearize({0, 0, 0, 0, a0}, p)), 2);
        CAPTURE(a0);
        CHECK(pc.controllable);
        CHECK(pc.rank == 2);
    }
    const SwimmerParams p = SwimmerParams::reference(0.0);
    const KalmanMatrix k = kalman_matrix(linearize({0, 0, 0, 0, 0}, p));
    CHECK(k.row(0).isZero(0.0));
    const auto pc = partial_controllability(k, 2);
    CHECK_FALSE(pc.controllable);
    CHECK(pc.rank == 1);
}

TEST_CASE("rank tolerance is a relative singular-value cutoff") {
    KalmanMatrix k = KalmanMatrix::Zero();
    k(0, 0) = 1.0;
    k(1, 1) = 1e-11;
    CHECK(partial_controllability(k, 2, 1e-10).rank == 1);
    CHECK(partial_controllability(k, 2, 1e-12).rank == 2);
    CHECK(partial_controllability(KalmanMatrix::Zero(), 2).rank == 0);
    CHECK_THROWS_AS(partial_controllability(k, 0), InvalidArgument);
    CHECK_THROWS_AS(partial_controllability(k, 6), InvalidArgument);
}

TEST_CASE("controllability does not depend on the equilibrium pose") {
    const SwimmerParams p = SwimmerParams::reference(pi / 5);
    const auto base = partial_controllability(kalman_matrix(linearize({0, 0, 0, 0, pi / 5}, p)), 2);
    const auto moved =
        partial_controllability(kalman_matrix(linearize({7, -3, 2.0, 0, pi / 5}, p)), 2);
    CHECK(base.rank == moved.rank);
    CHECK(base.singular_values.isApprox(moved.singular_values, 1e-10));
}

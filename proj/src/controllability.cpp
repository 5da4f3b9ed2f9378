#include "magswim/controllability.hpp"

#include "magswim/dynamics.hpp"

#include <sstream>

namespace magswim {

LinearizedSystem linearize(const SwimmerState& equilibrium, const SwimmerParams& params) {
    if (std::abs(equilibrium.alpha1) > equilibrium_shape_tolerance ||
        std::abs(equilibrium.alpha2 - params.alpha0) > equilibrium_shape_tolerance) {
        std::ostringstream os;
        os << "linearization requires shape (0, alpha0) = (0, " << params.alpha0 << "), got ("
           << equilibrium.alpha1 << ", " << equilibrium.alpha2 << ")";
        throw NotAnEquilibrium(os.str());
    }

    const ControlVectorFields cvf =
        control_vector_fields(equilibrium.alpha1, equilibrium.alpha2, params);
    const Mat5 rot = rotation_block(equilibrium.theta);

    // Z ↦ R_θ f0(α₁, α₂) with f0 = −κ(α₁x4 + (α₂−α₀)x5). At the equilibrium f0 = 0,
    // so ∂/∂θ vanishes and the product rule leaves ∂f0/∂α₁ = −κx4, ∂f0/∂α₂ = −κx5.
    LinearizedSystem lin;
    lin.equilibrium = equilibrium;
    lin.a = Mat5::Zero();
    lin.a.col(3) = -params.kappa * (rot * cvf.x4);
    lin.a.col(4) = -params.kappa * (rot * cvf.x5);
    lin.b.col(0) = rot * cvf.f1;
    lin.b.col(1) = rot * cvf.f2;
    return lin;
}

KalmanMatrix kalman_matrix(const Mat5& a, const Eigen::Matrix<double, 5, 2>& b) {
    KalmanMatrix k;
    Eigen::Matrix<double, 5, 2> block = b;
    for (int j = 0; j < 5; ++j) {
        k.middleCols<2>(2 * j) = block;
        block = a * block;
    }
    return k;
}

KalmanMatrix kalman_matrix(const LinearizedSystem& lin) { return kalman_matrix(lin.a, lin.b); }

PartialControllability partial_controllability(const KalmanMatrix& k, int p,
                                               double relative_tolerance) {
    if (p < 1 || p > 5) throw InvalidArgument("row count p must lie in [1, 5]");
    const Eigen::MatrixXd rows = k.topRows(p);
    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(rows);

    PartialControllability out;
    out.singular_values = svd.singularValues();
    const double sigma_max = out.singular_values.size() > 0 ? out.singular_values[0] : 0.0;
    const double cutoff = relative_tolerance * sigma_max;
    for (Eigen::Index i = 0; i < out.singular_values.size(); ++i) {
        if (sigma_max > 0.0 && out.singular_values[i] > cutoff) ++out.rank;
    }
    out.controllable = out.rank == p;
    return out;
}

double bent_determinant_denominator_factor(double alpha0, const SwimmerParams& params) {
    const double eta = params.eta, xi = params.xi;
    return eta * eta + 34.0 * eta * xi + 28.0 * xi * xi -
           (eta * eta - 11.0 * eta * xi + 28.0 * xi * xi) * std::cos(2.0 * alpha0);
}

double bent_submatrix_determinant(double alpha0, const SwimmerParams& params) {
    const double eta = params.eta, xi = params.xi;
    const double c2 = std::cos(2.0 * alpha0);
    const double big_xi = eta * eta + 19.0 * eta * xi + 7.0 * xi * xi -
                          (eta * eta - 8.0 * eta * xi + 7.0 * xi * xi) * c2;
    const double s = std::sin(alpha0);
    const double numerator =
        108.0 * params.m3 * params.m3 * params.kappa *
        (-9.0 * eta * xi * (19.0 * eta + 54.0 * xi) * std::cos(alpha0) -
         2.0 * big_xi * (eta + 2.0 * xi)) *
        s * s * s;
    const double q = bent_determinant_denominator_factor(alpha0, params);
    const double denominator = std::pow(params.ell, 7) * eta * eta * q * q;
    return numerator / denominator;
}

double numeric_submatrix_determinant(const SwimmerParams& params) {
    const SwimmerState eq{0.0, 0.0, 0.0, 0.0, params.alpha0};
    const KalmanMatrix k = kalman_matrix(linearize(eq, params));
    // Columns 0 and 2 of K are the first columns of B and AB.
    return k(0, 0) * k(1, 2) - k(0, 2) * k(1, 0);
}

} // namespace magswim

#pragma once

#include "magswim/core_model.hpp"

#include <stdexcept>

namespace magswim {

/// Ż ≈ A·(Z − Z_eq) + B·H around a zero-field equilibrium.
struct LinearizedSystem {
    Mat5 a;
    Eigen::Matrix<double, 5, 2> b;
    SwimmerState equilibrium;
};

/// Raised when linearize() is handed a state that is not an equilibrium.
class NotAnEquilibrium : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Shape tolerance used to accept a state as (·, ·, ·, 0, α₀).
inline constexpr double equilibrium_shape_tolerance = 1e-12;

LinearizedSystem linearize(const SwimmerState& equilibrium, const SwimmerParams& params);

using KalmanMatrix = Eigen::Matrix<double, 5, 10>;

/// [B, AB, A²B, A³B, A⁴B].
KalmanMatrix kalman_matrix(const LinearizedSystem& lin);
KalmanMatrix kalman_matrix(const Mat5& a, const Eigen::Matrix<double, 5, 2>& b);

struct PartialControllability {
    bool controllable = false;
    int rank = 0;
    Eigen::VectorXd singular_values;
};

/// Default relative singular-value cutoff for numerical rank.
inline constexpr double default_rank_tolerance = 1e-10;

/// Rank test on the first p rows of K: rank = #{σ > tol·σ_max}.
PartialControllability partial_controllability(const KalmanMatrix& k, int p,
                                               double relative_tolerance = default_rank_tolerance);

/// Closed-form determinant of the 2×2 matrix built from the position entries
/// of the first columns of B and AB at the equilibrium (0, 0, 0, 0, α₀).
double bent_submatrix_determinant(double alpha0, const SwimmerParams& params);

/// The same determinant evaluated numerically from linearize()/kalman_matrix().
double numeric_submatrix_determinant(const SwimmerParams& params);

/// Denominator factor η²+34ηξ+28ξ² − (η²−11ηξ+28ξ²)cos 2α₀ of the closed form.
double bent_determinant_denominator_factor(double alpha0, const SwimmerParams& params);

} // namespace magswim

#pragma once

#include "magswim/core_model.hpp"
#include "magswim/integrators.hpp"
#include "magswim/sim_record.hpp"
#include "magswim/trajectory.hpp"

#include <string>
#include <vector>

namespace magswim {

/// Default floor on |D| below which the position feedback is abandoned.
inline constexpr double default_eps_d = 1e-8;

/// Determinant of the position block [F1x F2x; F1y F2y] of the control fields.
double tracking_determinant(double alpha1, double alpha2, const SwimmerParams& params);

struct DeterminantScan {
    int grid_n = 0;
    std::vector<double> axis;     ///< shared α₁ / α₂ grid coordinates
    std::vector<double> values;   ///< D(axis[i], axis[j]) at index i·grid_n + j
    double d_at_origin = 0.0;
    double exclusion_radius = 0.0;
    double min_abs_off_origin = 0.0;  ///< over grid points farther than exclusion_radius
    double argmin_alpha1 = 0.0, argmin_alpha2 = 0.0;
};

/// D on a uniform grid over [−π+margin, π−margin]². The centre of an odd grid is
/// exactly (0, 0).
DeterminantScan scan_determinant(const SwimmerParams& params, int grid_n,
                                 double exclusion_radius = 0.05, double margin = 0.01);

/// Thrown when |D| ≤ eps_d, where the position feedback has no solution.
/// Derives from EarlyStop so closed-loop integration ends gracefully.
class SingularTracking : public ode::EarlyStop {
public:
    SingularTracking(double d, const SwimmerState& state);
    double d() const { return d_; }
    const SwimmerState& state() const { return state_; }

private:
    double d_;
    SwimmerState state_;
};

struct FeedbackEvaluation {
    ControlField field;
    double d = 0.0;
    Vec5 z_dot;         ///< closed-loop state derivative
    Vec2 residual;      ///< of the 2×2 control system
};

/// Field making (ẋ, ẏ) equal `demand` exactly at this state, with the resulting Ż.
FeedbackEvaluation evaluate_tracking_feedback(const SwimmerState& state, const Vec2& demand,
                                              const SwimmerParams& params,
                                              double eps_d = default_eps_d);

/// (H∥, H⊥) solving the position rows of the control system for the demanded
/// lab-frame velocity (f′, g′).
ControlField solve_tracking_controls(const SwimmerState& state, double fprime, double gprime,
                                     const SwimmerParams& params, double eps_d = default_eps_d);

enum class TrackingOutcome { completed, singular_abort, integrator_failure };

std::string to_string(TrackingOutcome o);

struct TrackingStatus {
    TrackingOutcome outcome = TrackingOutcome::completed;
    double t_stop = 0.0;
    double min_abs_d = 0.0;       ///< over every feedback evaluation, including trial stages
    double max_field_norm = 0.0;  ///< over accepted steps
    std::string message;
};

struct ClosedLoopOptions {
    ode::IntegratorOptions integrator;
    double eps_d = default_eps_d;
    /// Uniform output samples over [0, T]; 0 records every accepted step instead.
    int samples = 201;
    /// Explicit output times in [0, T]; when non-empty, overrides `samples`.
    std::vector<double> sample_times;
};

/// Per accepted step diagnostics.
struct StepTrace {
    double t;
    double field_norm;
    double abs_d;
    double tracking_error;  ///< ‖(x, y) − (f, g)‖
    double residual;        ///< ‖2×2 residual‖
    double velocity_error;  ///< ‖(ẋ, ẏ) − (f′, g′)‖
};

struct ClosedLoopResult {
    SimRecord record;
    TrackingStatus status;
    std::vector<StepTrace> steps;
    double max_tracking_error = 0.0;
    double max_feedback_residual = 0.0;
    double median_field_norm = 0.0;
    ode::Solution solver;
};

/// Integrates Ż = R_θ(F0 + H∥F1 + H⊥F2) with the tracking feedback in the loop.
/// The initial position must equal the trajectory start within 1e-9 µm.
ClosedLoopResult simulate_closed_loop(const SwimmerState& initial, const Trajectory& trajectory,
                                      const SwimmerParams& params, const ClosedLoopOptions& opts);

} // namespace magswim

#include "magswim/tracking.hpp"

#include "magswim/dynamics.hpp"

#include <algorithm>
#include <limits>
#include <numbers>
#include <sstream>

namespace magswim {

double tracking_determinant(double alpha1, double alpha2, const SwimmerParams& params) {
    const ControlVectorFields cvf = control_vector_fields(alpha1, alpha2, params);
    return cvf.f1[0] * cvf.f2[1] - cvf.f1[1] * cvf.f2[0];
}

DeterminantScan scan_determinant(const SwimmerParams& params, int grid_n, double exclusion_radius,
                                 double margin) {
    if (grid_n < 2) throw InvalidArgument("determinant scan needs grid_n >= 2");
    DeterminantScan scan;
    scan.grid_n = grid_n;
    scan.exclusion_radius = exclusion_radius;
    const double half = std::numbers::pi - margin;
    const auto n = static_cast<std::size_t>(grid_n);
    scan.axis.resize(n);
    for (std::size_t i = 0; i < n; ++i)
        scan.axis[i] = half * (2.0 * static_cast<double>(i) - static_cast<double>(n - 1)) /
                       static_cast<double>(n - 1);

    scan.values.resize(n * n);
    scan.min_abs_off_origin = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const double a1 = scan.axis[i], a2 = scan.axis[j];
            const double d = tracking_determinant(a1, a2, params);
            scan.values[i * n + j] = d;
            if (std::hypot(a1, a2) > exclusion_radius && std::abs(d) < scan.min_abs_off_origin) {
                scan.min_abs_off_origin = std::abs(d);
                scan.argmin_alpha1 = a1;
                scan.argmin_alpha2 = a2;
            }
        }
    }
    scan.d_at_origin = tracking_determinant(0.0, 0.0, params);
    return scan;
}

namespace {

std::string singular_message(double d, const SwimmerState& s) {
    std::ostringstream os;
    os << "tracking determinant |D| = " << std::abs(d) << " at (alpha1, alpha2) = (" << s.alpha1
       << ", " << s.alpha2 << "): the position feedback cannot be inverted";
    return os.str();
}

class ShapeLimit : public ode::EarlyStop {
public:
    using ode::EarlyStop::EarlyStop;
};

} // namespace

SingularTracking::SingularTracking(double d, const SwimmerState& state)
    : ode::EarlyStop(singular_message(d, state)), d_(d), state_(state) {}

FeedbackEvaluation evaluate_tracking_feedback(const SwimmerState& state, const Vec2& demand,
                                              const SwimmerParams& params, double eps_d) {
    const ControlVectorFields cvf = control_vector_fields(state.alpha1, state.alpha2, params);
    Mat2 g;
    g << cvf.f1[0], cvf.f2[0], cvf.f1[1], cvf.f2[1];
    const double d = g(0, 0) * g(1, 1) - g(0, 1) * g(1, 0);
    if (!(std::abs(d) > eps_d)) throw SingularTracking(d, state);

    // Body-frame velocity of the S1 end that realises the lab-frame demand.
    const Vec2 rhs = planar_rotation(-state.theta) * demand - cvf.f0.head<2>();
    const double h_par = (rhs[0] * g(1, 1) - g(0, 1) * rhs[1]) / d;
    const double h_perp = (g(0, 0) * rhs[1] - g(1, 0) * rhs[0]) / d;

    FeedbackEvaluation out;
    out.field = {h_par, h_perp};
    out.d = d;
    out.residual = g * Vec2(h_par, h_perp) - rhs;
    out.z_dot = rotation_block(state.theta) * (cvf.f0 + h_par * cvf.f1 + h_perp * cvf.f2);
    return out;
}

ControlField solve_tracking_controls(const SwimmerState& state, double fprime, double gprime,
                                     const SwimmerParams& params, double eps_d) {
    return evaluate_tracking_feedback(state, Vec2(fprime, gprime), params, eps_d).field;
}

std::string to_string(TrackingOutcome o) {
    switch (o) {
    case TrackingOutcome::completed: return "completed";
    case TrackingOutcome::singular_abort: return "singular_abort";
    case TrackingOutcome::integrator_failure: return "integrator_failure";
    }
    return "unknown";
}

namespace {

SimRow make_row(double t, const SwimmerState& s, const Trajectory& traj,
                const SwimmerParams& params) {
    SimRow row{t, s.x, s.y, s.theta, s.alpha1, s.alpha2};
    try {
        const FeedbackEvaluation fb = evaluate_tracking_feedback(s, traj.velocity(t), params, 0.0);
        row.h_par = fb.field.h_par;
        row.h_perp = fb.field.h_perp;
        row.d_value = fb.d;
    } catch (const SingularTracking& e) {
        row.h_par = row.h_perp = std::numeric_limits<double>::quiet_NaN();
        row.d_value = e.d();
    }
    return row;
}

} // namespace

ClosedLoopResult simulate_closed_loop(const SwimmerState& initial, const Trajectory& trajectory,
                                      const SwimmerParams& params, const ClosedLoopOptions& opts) {
    params.validate();
    initial.validate();
    opts.integrator.validate();
    const Vec2 start = trajectory.position(0.0);
    if ((Vec2(initial.x, initial.y) - start).norm() > 1e-9) {
        std::ostringstream os;
        os << "initial position (" << initial.x << ", " << initial.y
           << ") does not match the trajectory start (" << start.x() << ", " << start.y() << ")";
        throw InvalidArgument(os.str());
    }

    ClosedLoopResult result;
    double min_abs_d = std::numeric_limits<double>::infinity();
    bool singular_hit = false;

    const ode::Rhs rhs = [&](double t, const ode::Vector& z) -> ode::Vector {
        const SwimmerState s = SwimmerState::from_vector(z);
        if (!s.physical_shape()) throw ShapeLimit("shape angles left (-pi, pi)");
        try {
            const FeedbackEvaluation fb =
                evaluate_tracking_feedback(s, trajectory.velocity(t), params, opts.eps_d);
            min_abs_d = std::min(min_abs_d, std::abs(fb.d));
            return fb.z_dot;
        } catch (const SingularTracking& e) {
            min_abs_d = std::min(min_abs_d, std::abs(e.d()));
            singular_hit = true;
            throw;
        }
    };

    const double horizon = trajectory.horizon();
    std::vector<double> sample_times = opts.sample_times;
    if (sample_times.empty() && opts.samples > 0)
        sample_times = uniform_sample_times(horizon, opts.samples);
    const bool every_step = sample_times.empty();

    const ode::StepObserver observer = [&](const ode::AcceptedStep& step) {
        const SwimmerState s = SwimmerState::from_vector(step.z);
        const Vec2 demand = trajectory.velocity(step.t);
        const FeedbackEvaluation fb = evaluate_tracking_feedback(s, demand, params, 0.0);
        StepTrace tr;
        tr.t = step.t;
        tr.field_norm = fb.field.norm();
        tr.abs_d = std::abs(fb.d);
        tr.tracking_error = (Vec2(s.x, s.y) - trajectory.position(step.t)).norm();
        tr.residual = fb.residual.norm();
        tr.velocity_error = (fb.z_dot.head<2>() - demand).norm();
        result.steps.push_back(tr);
        if (every_step) result.record.rows.push_back(make_row(step.t, s, trajectory, params));
    };

    result.solver = ode::integrate(rhs, initial.vector(), 0.0, horizon, opts.integrator,
                                   sample_times, observer);
    const ode::Solution& sol = result.solver;

    if (!every_step) {
        for (std::size_t i = 0; i < sol.sample_t.size(); ++i)
            result.record.rows.push_back(make_row(
                sol.sample_t[i], SwimmerState::from_vector(sol.sample_z[i]), trajectory, params));
        if (!sol.ok() && (result.record.rows.empty() || result.record.rows.back().t < sol.t_final))
            result.record.rows.push_back(make_row(
                sol.t_final, SwimmerState::from_vector(sol.z_final), trajectory, params));
    }
    emit_lab_frame_controls(result.record);

    TrackingStatus& st = result.status;
    st.t_stop = sol.t_final;
    st.min_abs_d = min_abs_d;
    st.message = sol.message;
    if (sol.ok()) {
        st.outcome = TrackingOutcome::completed;
    } else if (sol.status == ode::Status::stopped_early && singular_hit) {
        st.outcome = TrackingOutcome::singular_abort;
    } else {
        st.outcome = TrackingOutcome::integrator_failure;
    }

    std::vector<double> norms;
    norms.reserve(result.steps.size());
    for (const StepTrace& tr : result.steps) {
        st.max_field_norm = std::max(st.max_field_norm, tr.field_norm);
        result.max_tracking_error = std::max(result.max_tracking_error, tr.tracking_error);
        result.max_feedback_residual = std::max(result.max_feedback_residual, tr.residual);
        norms.push_back(tr.field_norm);
    }
    if (!norms.empty()) {
        const auto mid = norms.begin() + static_cast<std::ptrdiff_t>(norms.size() / 2);
        std::nth_element(norms.begin(), mid, norms.end());
        result.median_field_norm = *mid;
    }
    return result;
}

} // namespace magswim

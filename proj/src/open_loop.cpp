#include "magswim/open_loop.hpp"

#include "magswim/dynamics.hpp"
#include "magswim/tracking.hpp"

namespace magswim {

namespace {

class ShapeLimit : public ode::EarlyStop {
public:
    using ode::EarlyStop::EarlyStop;
};

} // namespace

OpenLoopResult simulate_open_loop(const SwimmerState& initial, const FieldProgram& program,
                                  const SwimmerParams& params, double duration,
                                  const ode::IntegratorOptions& opts, int samples) {
    return simulate_open_loop(initial, program, params, duration, opts,
                              samples > 0 ? uniform_sample_times(duration, samples)
                                          : std::vector<double>{});
}

OpenLoopResult simulate_open_loop(const SwimmerState& initial, const FieldProgram& program,
                                  const SwimmerParams& params, double duration,
                                  const ode::IntegratorOptions& opts,
                                  const std::vector<double>& sample_times) {
    params.validate();
    initial.validate();
    if (!(duration > 0.0)) throw InvalidArgument("open-loop duration must be positive");

    const ode::Rhs rhs = [&](double t, const ode::Vector& z) -> ode::Vector {
        const SwimmerState s = SwimmerState::from_vector(z);
        if (!s.physical_shape()) throw ShapeLimit("shape angles left (-pi, pi)");
        return state_derivative(s, program(t, s), params);
    };

    OpenLoopResult out;
    auto push_row = [&](double t, const ode::Vector& z) {
        const SwimmerState s = SwimmerState::from_vector(z);
        const ControlField h = program(t, s);
        out.record.rows.push_back(SimRow{t, s.x, s.y, s.theta, s.alpha1, s.alpha2, h.h_par,
                                         h.h_perp, 0.0, 0.0,
                                         tracking_determinant(s.alpha1, s.alpha2, params)});
    };

    const bool every_step = sample_times.empty();
    ode::StepObserver observer;
    if (every_step) observer = [&](const ode::AcceptedStep& step) { push_row(step.t, step.z); };

    out.solver = ode::integrate(rhs, initial.vector(), 0.0, duration, opts, sample_times, observer);
    if (!every_step) {
        for (std::size_t i = 0; i < out.solver.sample_t.size(); ++i)
            push_row(out.solver.sample_t[i], out.solver.sample_z[i]);
        if (!out.solver.ok() &&
            (out.record.rows.empty() || out.record.rows.back().t < out.solver.t_final))
            push_row(out.solver.t_final, out.solver.z_final);
    }
    emit_lab_frame_controls(out.record);
    return out;
}

} // namespace magswim

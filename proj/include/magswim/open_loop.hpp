#pragma once

#include "magswim/core_model.hpp"
#include "magswim/integrators.hpp"
#include "magswim/sim_record.hpp"

#include <functional>
#include <vector>

namespace magswim {

/// Prescribed field as a function of time and current state.
using FieldProgram = std::function<ControlField(double t, const SwimmerState& state)>;

struct OpenLoopResult {
    SimRecord record;
    ode::Solution solver;
};

/// Integrates Ż = R_θ(F0 + H∥F1 + H⊥F2) with H given by `program`, over [0, duration].
OpenLoopResult simulate_open_loop(const SwimmerState& initial, const FieldProgram& program,
                                  const SwimmerParams& params, double duration,
                                  const ode::IntegratorOptions& opts, int samples = 201);

/// As above, with explicit output times in [0, duration]; an empty list records
/// every accepted step.
OpenLoopResult simulate_open_loop(const SwimmerState& initial, const FieldProgram& program,
                                  const SwimmerParams& params, double duration,
                                  const ode::IntegratorOptions& opts,
                                  const std::vector<double>& sample_times);

} // namespace magswim

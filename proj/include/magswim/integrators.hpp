#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace magswim::ode {

enum class Method {
    adaptive_explicit_rk45,  ///< Dormand–Prince 5(4), embedded error estimate
    trapezoidal_adaptive,    ///< implicit trapezoidal rule, step-doubling estimate
};

std::string to_string(Method m);
Method method_from_string(const std::string& name);

struct IntegratorOptions {
    Method method = Method::adaptive_explicit_rk45;
    double abs_tol = 1e-9;
    double rel_tol = 1e-9;
    double h_init = 1e-6;   ///< [s]
    double h_min = 1e-15;   ///< [s]
    double h_max = 1e-2;    ///< [s]
    std::int64_t max_steps = 20'000'000;

    /// Throws std::invalid_argument unless 0 < h_min ≤ h_init ≤ h_max and tolerances > 0.
    void validate() const;

    bool operator==(const IntegratorOptions&) const = default;
};

/// Thrown by a right-hand side to end the integration at the last accepted step.
/// This is not a failure: the solver reports Status::stopped_early.
class EarlyStop : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

using Vector = Eigen::VectorXd;
using Rhs = std::function<Vector(double t, const Vector& z)>;

struct AcceptedStep {
    double t;
    const Vector& z;
    const Vector& dz;
};
using StepObserver = std::function<void(const AcceptedStep&)>;

enum class Status { completed, stopped_early, step_size_collapse, max_steps_exceeded };

std::string to_string(Status s);

struct Solution {
    Status status = Status::completed;
    std::string message;
    double t_final = 0.0;
    Vector z_final;
    std::vector<double> sample_t;   ///< requested times reached before the run ended
    std::vector<Vector> sample_z;
    std::int64_t accepted_steps = 0;
    std::int64_t rejected_steps = 0;
    std::int64_t rhs_evaluations = 0;

    bool ok() const { return status == Status::completed; }
};

/**
 * Adaptive integration of ż = rhs(t, z) over [t0, t1].
 *
 * The local error of every accepted step satisfies
 * |err_i| ≤ abs_tol + rel_tol·|z_i| componentwise. Values at `sample_times`
 * (sorted, inside [t0, t1]) come from cubic Hermite interpolation over the
 * accepted step that contains them.
 */
Solution integrate(const Rhs& rhs, const Vector& z0, double t0, double t1,
                   const IntegratorOptions& opts, std::span<const double> sample_times = {},
                   const StepObserver& observer = {});

} // namespace magswim::ode

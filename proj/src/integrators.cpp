#include "magswim/integrators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>

namespace magswim::ode {

std::string to_string(Method m) {
    switch (m) {
    case Method::adaptive_explicit_rk45: return "adaptive_explicit_rk45";
    case Method::trapezoidal_adaptive: return "trapezoidal_adaptive";
    }
    return "unknown";
}

Method method_from_string(const std::string& name) {
    if (name == "adaptive_explicit_rk45") return Method::adaptive_explicit_rk45;
    if (name == "trapezoidal_adaptive") return Method::trapezoidal_adaptive;
    throw std::invalid_argument("unknown integration method '" + name + "'");
}

std::string to_string(Status s) {
    switch (s) {
    case Status::completed: return "completed";
    case Status::stopped_early: return "stopped_early";
    case Status::step_size_collapse: return "step_size_collapse";
    case Status::max_steps_exceeded: return "max_steps_exceeded";
    }
    return "unknown";
}

void IntegratorOptions::validate() const {
    if (!(abs_tol > 0.0) || !(rel_tol > 0.0))
        throw std::invalid_argument("integrator tolerances must be positive");
    if (!(h_min > 0.0) || !(h_min <= h_init) || !(h_init <= h_max) || !std::isfinite(h_max))
        throw std::invalid_argument("integrator steps must satisfy 0 < h_min <= h_init <= h_max");
    if (max_steps <= 0) throw std::invalid_argument("max_steps must be positive");
}

namespace {

double error_norm(const Vector& err, const Vector& z_old, const Vector& z_new,
                  const IntegratorOptions& opts) {
    double worst = 0.0;
    for (Eigen::Index i = 0; i < err.size(); ++i) {
        const double scale =
            opts.abs_tol + opts.rel_tol * std::max(std::abs(z_old[i]), std::abs(z_new[i]));
        worst = std::max(worst, std::abs(err[i]) / scale);
    }
    return std::isfinite(worst) ? worst : std::numeric_limits<double>::infinity();
}

Vector hermite(double t0, const Vector& z0, const Vector& f0, double t1, const Vector& z1,
               const Vector& f1, double t) {
    const double h = t1 - t0;
    const double s = (t - t0) / h;
    const double h10 = s * (1 - s) * (1 - s);
    const double h01 = s * s * (3 - 2 * s);
    const double h11 = s * s * (s - 1);
    // h00 = 1 − h01, written as an increment so a constant state stays exact.
    return z0 + h01 * (z1 - z0) + h * (h10 * f0 + h11 * f1);
}

struct Trial {
    Vector z;
    Vector f;    // rhs at the new point
    double err;  // weighted norm, ≤ 1 means acceptable
    double order;
};

class Stepper {
public:
    Stepper(const Rhs& rhs, const IntegratorOptions& opts, std::int64_t& evals)
        : rhs_(rhs), opts_(opts), evals_(evals) {}

    Vector eval(double t, const Vector& z) {
        ++evals_;
        return rhs_(t, z);
    }

    // Returns nullopt when the attempt could not produce a candidate (Newton failure).
    std::optional<Trial> attempt(double t, const Vector& z, const Vector& f, double h) {
        return opts_.method == Method::adaptive_explicit_rk45 ? dormand_prince(t, z, f, h)
                                                               : trapezoid_doubling(t, z, f, h);
    }

private:
    Trial dormand_prince(double t, const Vector& z, const Vector& k1, double h) {
        static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
        static constexpr double a21 = 1.0 / 5;
        static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
        static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
        static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                                a53 = 64448.0 / 6561, a54 = -212.0 / 729;
        static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                                a64 = 49.0 / 176, a65 = -5103.0 / 18656;
        static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                                b5 = -2187.0 / 6784, b6 = 11.0 / 84;
        // Difference between the 5th- and 4th-order weights.
        static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                                e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

        const Vector k2 = eval(t + c2 * h, z + h * (a21 * k1));
        const Vector k3 = eval(t + c3 * h, z + h * (a31 * k1 + a32 * k2));
        const Vector k4 = eval(t + c4 * h, z + h * (a41 * k1 + a42 * k2 + a43 * k3));
        const Vector k5 = eval(t + c5 * h, z + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
        const Vector k6 =
            eval(t + h, z + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
        Trial out;
        out.z = z + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
        out.f = eval(t + h, out.z);
        const Vector err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * out.f);
        out.err = error_norm(err, z, out.z, opts_);
        out.order = 5.0;
        return out;
    }

    Eigen::MatrixXd jacobian(double t, const Vector& z, const Vector& f) {
        const Eigen::Index n = z.size();
        Eigen::MatrixXd j(n, n);
        Vector zp = z;
        for (Eigen::Index i = 0; i < n; ++i) {
            const double dz = 1e-8 * std::max(1.0, std::abs(z[i]));
            zp[i] = z[i] + dz;
            j.col(i) = (eval(t, zp) - f) / dz;
            zp[i] = z[i];
        }
        return j;
    }

    // z1 = z + h/2 (f(t, z) + f(t+h, z1)), solved by Newton with a frozen Jacobian.
    std::optional<std::pair<Vector, Vector>> trapezoid(double t, const Vector& z, const Vector& f,
                                                       double h, const Eigen::MatrixXd& jac) {
        const Eigen::Index n = z.size();
        const Eigen::MatrixXd iter =
            Eigen::MatrixXd::Identity(n, n) - 0.5 * h * jac;
        const Eigen::PartialPivLU<Eigen::MatrixXd> lu(iter);
        Vector z1 = z + h * f;
        Vector f1 = eval(t + h, z1);
        for (int it = 0; it < 12; ++it) {
            const Vector residual = z1 - z - 0.5 * h * (f + f1);
            const Vector delta = lu.solve(-residual);
            z1 += delta;
            if (!z1.allFinite()) return std::nullopt;
            f1 = eval(t + h, z1);
            if (error_norm(delta, z, z1, opts_) <= 1e-3) return std::make_pair(z1, f1);
        }
        return std::nullopt;
    }

    std::optional<Trial> trapezoid_doubling(double t, const Vector& z, const Vector& f, double h) {
        const Eigen::MatrixXd jac = jacobian(t, z, f);
        const auto full = trapezoid(t, z, f, h, jac);
        if (!full) return std::nullopt;
        const auto half = trapezoid(t, z, f, 0.5 * h, jac);
        if (!half) return std::nullopt;
        const auto second = trapezoid(t + 0.5 * h, half->first, half->second, 0.5 * h, jac);
        if (!second) return std::nullopt;

        Trial out;
        out.z = second->first;
        out.f = second->second;
        out.err = error_norm((second->first - full->first) / 3.0, z, out.z, opts_);
        out.order = 3.0;
        return out;
    }

    const Rhs& rhs_;
    const IntegratorOptions& opts_;
    std::int64_t& evals_;
};

} // namespace

Solution integrate(const Rhs& rhs, const Vector& z0, double t0, double t1,
                   const IntegratorOptions& opts, std::span<const double> sample_times,
                   const StepObserver& observer) {
    opts.validate();
    if (!(t1 >= t0)) throw std::invalid_argument("integration interval must satisfy t0 <= t1");
    for (std::size_t i = 0; i < sample_times.size(); ++i) {
        if (sample_times[i] < t0 || sample_times[i] > t1 ||
            (i > 0 && sample_times[i] < sample_times[i - 1]))
            throw std::invalid_argument("sample times must be sorted and lie in [t0, t1]");
    }

    Solution sol;
    Stepper stepper(rhs, opts, sol.rhs_evaluations);
    std::size_t next_sample = 0;

    double t = t0;
    Vector z = z0;
    sol.t_final = t;
    sol.z_final = z;

    auto emit_samples_upto = [&](double t_end, bool inclusive, const auto& value_at) {
        while (next_sample < sample_times.size() &&
               (sample_times[next_sample] < t_end ||
                (inclusive && sample_times[next_sample] == t_end))) {
            sol.sample_t.push_back(sample_times[next_sample]);
            sol.sample_z.push_back(value_at(sample_times[next_sample]));
            ++next_sample;
        }
    };

    Vector f;
    try {
        f = stepper.eval(t, z);
    } catch (const EarlyStop& stop) {
        sol.status = Status::stopped_early;
        sol.message = stop.what();
        return sol;
    }
    emit_samples_upto(t, true, [&](double) { return z; });
    if (observer) observer({t, z, f});

    double h = std::min(opts.h_init, opts.h_max);
    while (t < t1) {
        if (sol.accepted_steps >= opts.max_steps) {
            sol.status = Status::max_steps_exceeded;
            std::ostringstream os;
            os << "exceeded " << opts.max_steps << " steps at t = " << t;
            sol.message = os.str();
            break;
        }
        const bool last = t + h >= t1 || t1 - (t + h) < opts.h_min;
        const double step = last ? t1 - t : h;

        std::optional<Trial> trial;
        try {
            trial = stepper.attempt(t, z, f, step);
        } catch (const EarlyStop& stop) {
            sol.status = Status::stopped_early;
            sol.message = stop.what();
            break;
        }

        if (trial && trial->err <= 1.0 && trial->z.allFinite()) {
            const double t_new = last ? t1 : t + step;
            emit_samples_upto(t_new, true, [&](double ts) {
                if (ts == t_new) return trial->z;
                return hermite(t, z, f, t_new, trial->z, trial->f, ts);
            });
            t = t_new;
            z = trial->z;
            f = trial->f;
            ++sol.accepted_steps;
            if (observer) observer({t, z, f});

            const double grow =
                trial->err == 0.0 ? 5.0 : 0.9 * std::pow(trial->err, -1.0 / trial->order);
            h = std::min(opts.h_max, step * std::clamp(grow, 0.2, 5.0));
            h = std::max(h, opts.h_min);
            continue;
        }

        ++sol.rejected_steps;
        double shrink = 0.25;
        if (trial && std::isfinite(trial->err))
            shrink = std::clamp(0.9 * std::pow(trial->err, -1.0 / trial->order), 0.1, 0.5);
        h = step * shrink;
        if (h < opts.h_min) {
            sol.status = Status::step_size_collapse;
            std::ostringstream os;
            os << "step size fell below h_min = " << opts.h_min << " at t = " << t;
            sol.message = os.str();
            break;
        }
    }

    sol.t_final = t;
    sol.z_final = z;
    return sol;
}

} // namespace magswim::ode

#pragma once

#include "magswim/core_model.hpp"

#include <functional>
#include <vector>

namespace magswim {

/// Prescribed C¹ path t ↦ (f(t), g(t)) on [0, horizon].
class Trajectory {
public:
    using PathFn = std::function<Vec2(double)>;

    /// Without an analytic derivative, velocity() uses central differences with
    /// step 1e-6·horizon (one-sided at the interval ends).
    Trajectory(PathFn position, double horizon, PathFn velocity = {});

    Vec2 position(double t) const { return position_(t); }
    Vec2 velocity(double t) const;
    double horizon() const { return horizon_; }
    bool has_analytic_velocity() const { return static_cast<bool>(velocity_); }

private:
    PathFn position_;
    PathFn velocity_;
    double horizon_;
};

/// Straight line from `start` along `heading_rad` at constant speed.
Trajectory line_trajectory(const Vec2& start, double heading_rad, double speed_um_per_s,
                           double duration_s);

/// Circle around `center`, starting at angle `phase_rad`; horizon = 2π·turns/|ω|.
Trajectory circle_trajectory(const Vec2& center, double radius_um, double angular_rate_rad_per_s,
                             double turns, double phase_rad);

/// Stationary point held for `duration_s`.
Trajectory constant_trajectory(const Vec2& point, double duration_s);

/// Cubic spline through (times[i], points[i]) with prescribed end velocities.
/// times must start at 0 and increase strictly.
Trajectory waypoint_spline(const std::vector<double>& times, const std::vector<Vec2>& points,
                           const Vec2& start_velocity = Vec2::Zero(),
                           const Vec2& end_velocity = Vec2::Zero());

} // namespace magswim

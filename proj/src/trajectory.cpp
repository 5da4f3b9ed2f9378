#include "magswim/trajectory.hpp"

#include <algorithm>
#include <memory>
#include <numbers>

namespace magswim {

Trajectory::Trajectory(PathFn position, double horizon, PathFn velocity)
    : position_(std::move(position)), velocity_(std::move(velocity)), horizon_(horizon) {
    if (!position_) throw InvalidArgument("trajectory needs a position function");
    if (!(horizon_ > 0.0) || !std::isfinite(horizon_))
        throw InvalidArgument("trajectory horizon must be positive");
}

Vec2 Trajectory::velocity(double t) const {
    if (velocity_) return velocity_(t);
    const double h = 1e-6 * horizon_;
    const double lo = std::max(0.0, t - h);
    const double hi = std::min(horizon_, t + h);
    return (position_(hi) - position_(lo)) / (hi - lo);
}

Trajectory line_trajectory(const Vec2& start, double heading_rad, double speed_um_per_s,
                           double duration_s) {
    const Vec2 v = speed_um_per_s * Vec2(std::cos(heading_rad), std::sin(heading_rad));
    return Trajectory([start, v](double t) -> Vec2 { return start + t * v; }, duration_s,
                      [v](double) -> Vec2 { return v; });
}

Trajectory circle_trajectory(const Vec2& center, double radius_um, double angular_rate_rad_per_s,
                             double turns, double phase_rad) {
    if (!(radius_um > 0.0)) throw InvalidArgument("circle radius must be positive");
    if (angular_rate_rad_per_s == 0.0 || !(turns > 0.0))
        throw InvalidArgument("circle needs a nonzero angular rate and positive turns");
    const double horizon = 2.0 * std::numbers::pi * turns / std::abs(angular_rate_rad_per_s);
    const double r = radius_um, w = angular_rate_rad_per_s, p = phase_rad;
    return Trajectory(
        [=](double t) -> Vec2 {
            return center + r * Vec2(std::cos(p + w * t), std::sin(p + w * t));
        },
        horizon,
        [=](double t) -> Vec2 {
            return r * w * Vec2(-std::sin(p + w * t), std::cos(p + w * t));
        });
}

Trajectory constant_trajectory(const Vec2& point, double duration_s) {
    return Trajectory([point](double) -> Vec2 { return point; }, duration_s,
                      [](double) -> Vec2 { return Vec2::Zero(); });
}

namespace {

// Clamped cubic spline in one coordinate: second derivatives from the standard
// tridiagonal system, then Hermite-form evaluation on each interval.
struct ClampedSpline {
    std::vector<double> t, y, m;  // m: second derivatives at knots

    ClampedSpline(std::vector<double> times, std::vector<double> values, double d0, double dn)
        : t(std::move(times)), y(std::move(values)), m(t.size(), 0.0) {
        const std::size_t n = t.size();
        std::vector<double> diag(n), upper(n, 0.0), lower(n, 0.0), rhs(n);
        const double h0 = t[1] - t[0], hl = t[n - 1] - t[n - 2];
        diag[0] = 2.0 * h0;
        upper[0] = h0;
        rhs[0] = 6.0 * ((y[1] - y[0]) / h0 - d0);
        for (std::size_t i = 1; i + 1 < n; ++i) {
            const double hp = t[i] - t[i - 1], hn = t[i + 1] - t[i];
            lower[i] = hp;
            diag[i] = 2.0 * (hp + hn);
            upper[i] = hn;
            rhs[i] = 6.0 * ((y[i + 1] - y[i]) / hn - (y[i] - y[i - 1]) / hp);
        }
        lower[n - 1] = hl;
        diag[n - 1] = 2.0 * hl;
        rhs[n - 1] = 6.0 * (dn - (y[n - 1] - y[n - 2]) / hl);

        // Thomas algorithm; the system is strictly diagonally dominant.
        for (std::size_t i = 1; i < n; ++i) {
            const double w = lower[i] / diag[i - 1];
            diag[i] -= w * upper[i - 1];
            rhs[i] -= w * rhs[i - 1];
        }
        m[n - 1] = rhs[n - 1] / diag[n - 1];
        for (std::size_t i = n - 1; i-- > 0;) m[i] = (rhs[i] - upper[i] * m[i + 1]) / diag[i];
    }

    std::size_t interval(double s) const {
        const auto it = std::upper_bound(t.begin(), t.end(), s);
        const std::size_t k = static_cast<std::size_t>(std::max<std::ptrdiff_t>(it - t.begin(), 1));
        return std::min(k, t.size() - 1) - 1;
    }

    double value(double s) const {
        const std::size_t i = interval(s);
        const double h = t[i + 1] - t[i];
        const double a = (t[i + 1] - s) / h, b = (s - t[i]) / h;
        return a * y[i] + b * y[i + 1] +
               ((a * a * a - a) * m[i] + (b * b * b - b) * m[i + 1]) * h * h / 6.0;
    }

    double derivative(double s) const {
        const std::size_t i = interval(s);
        const double h = t[i + 1] - t[i];
        const double a = (t[i + 1] - s) / h, b = (s - t[i]) / h;
        return (y[i + 1] - y[i]) / h +
               (-(3.0 * a * a - 1.0) * m[i] + (3.0 * b * b - 1.0) * m[i + 1]) * h / 6.0;
    }
};

} // namespace

Trajectory waypoint_spline(const std::vector<double>& times, const std::vector<Vec2>& points,
                           const Vec2& start_velocity, const Vec2& end_velocity) {
    if (times.size() < 2 || times.size() != points.size())
        throw InvalidArgument("waypoint spline needs at least two (time, point) pairs");
    if (times.front() != 0.0) throw InvalidArgument("waypoint times must start at 0");
    for (std::size_t i = 1; i < times.size(); ++i)
        if (!(times[i] > times[i - 1]))
            throw InvalidArgument("waypoint times must increase strictly");

    std::vector<double> xs, ys;
    for (const Vec2& p : points) {
        xs.push_back(p.x());
        ys.push_back(p.y());
    }
    auto sx = std::make_shared<ClampedSpline>(times, xs, start_velocity.x(), end_velocity.x());
    auto sy = std::make_shared<ClampedSpline>(times, ys, start_velocity.y(), end_velocity.y());
    return Trajectory([sx, sy](double t) -> Vec2 { return {sx->value(t), sy->value(t)}; },
                      times.back(),
                      [sx, sy](double t) -> Vec2 { return {sx->derivative(t), sy->derivative(t)}; });
}

} // namespace magswim

#include "magswim/scenario.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numbers>
#include <set>
#include <sstream>

namespace magswim {

using Json = nlohmann::ordered_json;

std::string to_string(ScenarioMode m) {
    switch (m) {
    case ScenarioMode::open_loop: return "open_loop";
    case ScenarioMode::closed_loop: return "closed_loop";
    case ScenarioMode::controllability: return "controllability";
    case ScenarioMode::determinant_scan: return "determinant_scan";
    }
    return "unknown";
}

SwimmerParams SwimmerSpec::params() const {
    return SwimmerParams::from_published_units(ell_um, eta_N_s_per_m2, xi_N_s_per_m2, m1_A_um2,
                                               m2_A_um2, m3_A_um2, kappa_N_um, alpha0_rad);
}

Trajectory build_trajectory(const TrajectorySpec& spec) {
    struct Visitor {
        Trajectory operator()(const LineSpec& s) const {
            return line_trajectory(Vec2(s.start_x_um, s.start_y_um), s.heading_rad,
                                   s.speed_um_per_s, s.duration_s);
        }
        Trajectory operator()(const CircleSpec& s) const {
            return circle_trajectory(Vec2(s.center_x_um, s.center_y_um), s.radius_um,
                                     s.angular_rate_rad_per_s, s.turns, s.phase_rad);
        }
        Trajectory operator()(const WaypointSplineSpec& s) const {
            std::vector<Vec2> pts;
            for (const auto& p : s.points_um) pts.emplace_back(p[0], p[1]);
            return waypoint_spline(
                s.times_s, pts, Vec2(s.start_velocity_um_per_s[0], s.start_velocity_um_per_s[1]),
                Vec2(s.end_velocity_um_per_s[0], s.end_velocity_um_per_s[1]));
        }
        Trajectory operator()(const ConstantSpec& s) const {
            return constant_trajectory(Vec2(s.x_um, s.y_um), s.duration_s);
        }
    };
    return std::visit(Visitor{}, spec);
}

double Waveform::at(double t) const {
    if (amplitude_uT == 0.0) return offset_uT;
    return offset_uT +
           amplitude_uT * std::sin(2.0 * std::numbers::pi * frequency_hz * t + phase_rad);
}

FieldProgram build_field_program(const FieldProgramSpec& spec) {
    return [spec](double t, const SwimmerState& s) -> ControlField {
        if (spec.pieces.empty()) return {};
        std::size_t k = 0;
        while (k + 1 < spec.pieces.size() && spec.pieces[k + 1].start_s <= t) ++k;
        const FieldPiece& piece = spec.pieces[k];
        const double a = piece.first.at(t), b = piece.second.at(t);
        if (spec.frame == FieldFrame::body) return {a, b};
        return ControlField::from_lab(Vec2(a, b), s.theta);
    };
}

namespace {

// ---------------------------------------------------------------------------
// Error helpers

[[noreturn]] void fail(const std::string& path, const std::string& detail) {
    throw ScenarioValidationError("validation error at " + path + ": " + detail, path, 0);
}

void require(bool ok, const std::string& path, const std::string& detail) {
    if (!ok) fail(path, detail);
}

std::string join(const std::string& path, const std::string& key) {
    return path.empty() ? key : path + "." + key;
}

std::string indexed(const std::string& path, std::size_t i) {
    return path + "[" + std::to_string(i) + "]";
}

// Best-effort line of a field path in the source text: each key is searched for
// in turn, starting after the previous match.
int locate_line(const std::string& text, const std::string& path) {
    std::size_t pos = 0;
    bool found_any = false;
    std::size_t start = 0;
    while (start <= path.size()) {
        std::size_t end = path.find('.', start);
        if (end == std::string::npos) end = path.size();
        std::string key = path.substr(start, end - start);
        key = key.substr(0, key.find('['));
        if (!key.empty()) {
            const std::size_t hit = text.find("\"" + key + "\"", pos);
            if (hit == std::string::npos) break;
            pos = hit;
            found_any = true;
        }
        start = end + 1;
    }
    if (!found_any) return 0;
    return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(pos), '\n'));
}

// ---------------------------------------------------------------------------
// Typed access with key bookkeeping

class ObjectReader {
public:
    ObjectReader(const Json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) fail(path_.empty() ? "<root>" : path_, "expected an object");
    }

    const std::string& path() const { return path_; }
    std::string at(const std::string& key) const { return join(path_, key); }

    const Json* find(const std::string& key) {
        used_.insert(key);
        const auto it = j_.find(key);
        return it == j_.end() ? nullptr : &*it;
    }

    const Json& get(const std::string& key) {
        const Json* v = find(key);
        if (!v) fail(at(key), "required field is missing");
        return *v;
    }

    double number(const std::string& key) { return as_number(get(key), at(key)); }

    double number_or(const std::string& key, double fallback) {
        const Json* v = find(key);
        return v ? as_number(*v, at(key)) : fallback;
    }

    std::int64_t integer_or(const std::string& key, std::int64_t fallback) {
        const Json* v = find(key);
        if (!v) return fallback;
        if (!v->is_number_integer()) fail(at(key), "expected an integer");
        return v->get<std::int64_t>();
    }

    std::string string(const std::string& key) {
        const Json& v = get(key);
        if (!v.is_string()) fail(at(key), "expected a string");
        return v.get<std::string>();
    }

    std::string string_or(const std::string& key, const std::string& fallback) {
        const Json* v = find(key);
        if (!v) return fallback;
        if (!v->is_string()) fail(at(key), "expected a string");
        return v->get<std::string>();
    }

    void finish() const {
        for (auto it = j_.begin(); it != j_.end(); ++it) {
            if (!used_.count(it.key())) {
                const std::string p = join(path_, it.key());
                throw UnknownKeyError("unknown key " + p, p, 0);
            }
        }
    }

    static double as_number(const Json& v, const std::string& path) {
        if (!v.is_number()) fail(path, "expected a number");
        return v.get<double>();
    }

private:
    const Json& j_;
    std::string path_;
    std::set<std::string> used_;
};

std::vector<double> number_list(const Json& v, const std::string& path) {
    if (!v.is_array()) fail(path, "expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) out.push_back(ObjectReader::as_number(v[i], indexed(path, i)));
    return out;
}

std::array<double, 2> pair(const Json& v, const std::string& path) {
    const std::vector<double> xs = number_list(v, path);
    if (xs.size() != 2) fail(path, "expected [x, y]");
    return {xs[0], xs[1]};
}

// ---------------------------------------------------------------------------
// Readers per section

SwimmerSpec read_swimmer(ObjectReader r) {
    SwimmerSpec s;
    s.ell_um = r.number("ell_um");
    s.eta_N_s_per_m2 = r.number("eta_N_s_per_m2");
    s.xi_N_s_per_m2 = r.number("xi_N_s_per_m2");
    s.m1_A_um2 = r.number("m1_A_um2");
    s.m2_A_um2 = r.number("m2_A_um2");
    s.m3_A_um2 = r.number("m3_A_um2");
    s.kappa_N_um = r.number("kappa_N_um");
    s.alpha0_rad = r.number("alpha0_rad");
    r.finish();
    return s;
}

SwimmerState read_state(ObjectReader r) {
    SwimmerState s;
    s.x = r.number("x_um");
    s.y = r.number("y_um");
    s.theta = r.number("theta_rad");
    s.alpha1 = r.number("alpha1_rad");
    s.alpha2 = r.number("alpha2_rad");
    r.finish();
    return s;
}

TrajectorySpec read_trajectory(ObjectReader r) {
    const std::string type = r.string("type");
    TrajectorySpec out;
    if (type == "line") {
        LineSpec s;
        const auto start = pair(r.get("start_um"), r.at("start_um"));
        s.start_x_um = start[0];
        s.start_y_um = start[1];
        s.heading_rad = r.number("heading_rad");
        s.speed_um_per_s = r.number("speed_um_per_s");
        s.duration_s = r.number("duration_s");
        out = s;
    } else if (type == "circle") {
        CircleSpec s;
        const auto c = pair(r.get("center_um"), r.at("center_um"));
        s.center_x_um = c[0];
        s.center_y_um = c[1];
        s.radius_um = r.number("radius_um");
        s.angular_rate_rad_per_s = r.number("angular_rate_rad_per_s");
        s.turns = r.number_or("turns", 1.0);
        s.phase_rad = r.number_or("phase_rad", 0.0);
        out = s;
    } else if (type == "waypoint_spline") {
        WaypointSplineSpec s;
        s.times_s = number_list(r.get("times_s"), r.at("times_s"));
        const Json& pts = r.get("points_um");
        if (!pts.is_array()) fail(r.at("points_um"), "expected an array of [x, y] pairs");
        for (std::size_t i = 0; i < pts.size(); ++i)
            s.points_um.push_back(pair(pts[i], indexed(r.at("points_um"), i)));
        if (const Json* v = r.find("start_velocity_um_per_s"))
            s.start_velocity_um_per_s = pair(*v, r.at("start_velocity_um_per_s"));
        if (const Json* v = r.find("end_velocity_um_per_s"))
            s.end_velocity_um_per_s = pair(*v, r.at("end_velocity_um_per_s"));
        out = s;
    } else if (type == "constant") {
        ConstantSpec s;
        const auto p = pair(r.get("point_um"), r.at("point_um"));
        s.x_um = p[0];
        s.y_um = p[1];
        s.duration_s = r.number("duration_s");
        out = s;
    } else {
        fail(r.at("type"), "unknown trajectory type '" + type +
                               "' (expected line, circle, waypoint_spline or constant)");
    }
    r.finish();
    return out;
}

Waveform read_waveform(const Json& v, const std::string& path) {
    Waveform w;
    if (v.is_number()) {
        w.offset_uT = v.get<double>();
        return w;
    }
    ObjectReader r(v, path);
    w.offset_uT = r.number_or("offset_uT", 0.0);
    w.amplitude_uT = r.number_or("amplitude_uT", 0.0);
    w.frequency_hz = r.number_or("frequency_hz", 0.0);
    w.phase_rad = r.number_or("phase_rad", 0.0);
    r.finish();
    return w;
}

std::pair<const char*, const char*> component_keys(FieldFrame f) {
    return f == FieldFrame::body ? std::pair{"h_par_uT", "h_perp_uT"}
                                 : std::pair{"h_x_uT", "h_y_uT"};
}

FieldProgramSpec read_field_program(ObjectReader r) {
    FieldProgramSpec s;
    const std::string frame = r.string_or("frame", "body");
    if (frame == "body") {
        s.frame = FieldFrame::body;
    } else if (frame == "lab") {
        s.frame = FieldFrame::lab;
    } else {
        fail(r.at("frame"), "expected 'body' or 'lab'");
    }
    s.duration_s = r.number("duration_s");
    const auto [k1, k2] = component_keys(s.frame);
    if (const Json* pieces = r.find("pieces")) {
        if (!pieces->is_array()) fail(r.at("pieces"), "expected an array");
        for (std::size_t i = 0; i < pieces->size(); ++i) {
            ObjectReader pr((*pieces)[i], indexed(r.at("pieces"), i));
            FieldPiece piece;
            piece.start_s = pr.number_or("start_s", 0.0);
            if (const Json* v = pr.find(k1)) piece.first = read_waveform(*v, pr.at(k1));
            if (const Json* v = pr.find(k2)) piece.second = read_waveform(*v, pr.at(k2));
            pr.finish();
            s.pieces.push_back(piece);
        }
    }
    r.finish();
    return s;
}

ode::IntegratorOptions read_integrator(ObjectReader r) {
    ode::IntegratorOptions o;
    if (const Json* m = r.find("method")) {
        if (!m->is_string()) fail(r.at("method"), "expected a string");
        try {
            o.method = ode::method_from_string(m->get<std::string>());
        } catch (const std::invalid_argument& e) {
            fail(r.at("method"), e.what());
        }
    }
    o.abs_tol = r.number_or("abs_tol", o.abs_tol);
    o.rel_tol = r.number_or("rel_tol", o.rel_tol);
    o.h_init = r.number_or("h_init_s", o.h_init);
    o.h_min = r.number_or("h_min_s", o.h_min);
    o.h_max = r.number_or("h_max_s", o.h_max);
    o.max_steps = r.integer_or("max_steps", o.max_steps);
    r.finish();
    return o;
}

ScenarioMode read_mode(ObjectReader& r) {
    const std::string m = r.string("mode");
    if (m == "open_loop") return ScenarioMode::open_loop;
    if (m == "closed_loop") return ScenarioMode::closed_loop;
    if (m == "controllability") return ScenarioMode::controllability;
    if (m == "determinant_scan") return ScenarioMode::determinant_scan;
    fail("mode", "unknown mode '" + m +
                     "' (expected open_loop, closed_loop, controllability or determinant_scan)");
}

int narrow_int(std::int64_t v, const std::string& path) {
    if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max())
        fail(path, "integer out of range");
    return static_cast<int>(v);
}

Scenario read_scenario(const Json& root) {
    ObjectReader r(root, "");
    Scenario scn;
    scn.name = r.string_or("name", "");
    scn.mode = read_mode(r);
    scn.swimmer = read_swimmer(ObjectReader(r.get("swimmer"), "swimmer"));
    if (const Json* v = r.find("initial_state"))
        scn.initial_state = read_state(ObjectReader(*v, "initial_state"));
    if (const Json* v = r.find("trajectory"))
        scn.trajectory = read_trajectory(ObjectReader(*v, "trajectory"));
    if (const Json* v = r.find("field_program"))
        scn.field_program = read_field_program(ObjectReader(*v, "field_program"));
    if (const Json* v = r.find("integrator"))
        scn.integrator = read_integrator(ObjectReader(*v, "integrator"));
    if (const Json* v = r.find("tracking")) {
        ObjectReader tr(*v, "tracking");
        scn.eps_d = tr.number_or("eps_d", scn.eps_d);
        tr.finish();
    }
    if (const Json* v = r.find("output")) {
        ObjectReader o(*v, "output");
        scn.output.samples = narrow_int(o.integer_or("samples", scn.output.samples), o.at("samples"));
        if (const Json* t = o.find("snapshot_times_s"))
            scn.output.snapshot_times_s = number_list(*t, o.at("snapshot_times_s"));
        o.finish();
    }
    if (const Json* v = r.find("controllability")) {
        ObjectReader c(*v, "controllability");
        scn.controllability.p = narrow_int(c.integer_or("p", scn.controllability.p), c.at("p"));
        scn.controllability.rank_rel_tol =
            c.number_or("rank_rel_tol", scn.controllability.rank_rel_tol);
        c.finish();
    }
    if (const Json* v = r.find("scan")) {
        ObjectReader s(*v, "scan");
        scn.scan.grid_n = narrow_int(s.integer_or("grid_n", scn.scan.grid_n), s.at("grid_n"));
        scn.scan.exclusion_radius_rad =
            s.number_or("exclusion_radius_rad", scn.scan.exclusion_radius_rad);
        scn.scan.margin_rad = s.number_or("margin_rad", scn.scan.margin_rad);
        s.finish();
    }
    r.finish();
    return scn;
}

// ---------------------------------------------------------------------------
// Validation

bool finite(double v) { return std::isfinite(v); }

void positive(double v, const std::string& path) {
    require(finite(v) && v > 0.0, path, "must be a positive finite number");
}

void finite_at(double v, const std::string& path) { require(finite(v), path, "must be finite"); }

void validate_swimmer(const SwimmerSpec& s) {
    positive(s.ell_um, "swimmer.ell_um");
    positive(s.eta_N_s_per_m2, "swimmer.eta_N_s_per_m2");
    positive(s.xi_N_s_per_m2, "swimmer.xi_N_s_per_m2");
    finite_at(s.m1_A_um2, "swimmer.m1_A_um2");
    finite_at(s.m2_A_um2, "swimmer.m2_A_um2");
    finite_at(s.m3_A_um2, "swimmer.m3_A_um2");
    positive(s.kappa_N_um, "swimmer.kappa_N_um");
    require(finite(s.alpha0_rad) && std::abs(s.alpha0_rad) < std::numbers::pi,
            "swimmer.alpha0_rad", "must lie in (-pi, pi)");
}

void validate_state(const SwimmerState& s) {
    finite_at(s.x, "initial_state.x_um");
    finite_at(s.y, "initial_state.y_um");
    finite_at(s.theta, "initial_state.theta_rad");
    require(finite(s.alpha1) && std::abs(s.alpha1) < std::numbers::pi, "initial_state.alpha1_rad",
            "must lie in (-pi, pi)");
    require(finite(s.alpha2) && std::abs(s.alpha2) < std::numbers::pi, "initial_state.alpha2_rad",
            "must lie in (-pi, pi)");
}

double validate_trajectory(const TrajectorySpec& spec) {
    const std::string p = "trajectory";
    if (const auto* s = std::get_if<LineSpec>(&spec)) {
        finite_at(s->start_x_um, p + ".start_um");
        finite_at(s->start_y_um, p + ".start_um");
        finite_at(s->heading_rad, p + ".heading_rad");
        require(finite(s->speed_um_per_s) && s->speed_um_per_s >= 0.0, p + ".speed_um_per_s",
                "must be finite and non-negative");
        positive(s->duration_s, p + ".duration_s");
        return s->duration_s;
    }
    if (const auto* s = std::get_if<CircleSpec>(&spec)) {
        finite_at(s->center_x_um, p + ".center_um");
        finite_at(s->center_y_um, p + ".center_um");
        positive(s->radius_um, p + ".radius_um");
        require(finite(s->angular_rate_rad_per_s) && s->angular_rate_rad_per_s != 0.0,
                p + ".angular_rate_rad_per_s", "must be finite and nonzero");
        positive(s->turns, p + ".turns");
        finite_at(s->phase_rad, p + ".phase_rad");
        return 2.0 * std::numbers::pi * s->turns / std::abs(s->angular_rate_rad_per_s);
    }
    if (const auto* s = std::get_if<WaypointSplineSpec>(&spec)) {
        require(s->times_s.size() >= 2, p + ".times_s", "needs at least two waypoints");
        require(s->times_s.size() == s->points_um.size(), p + ".points_um",
                "must have one point per entry of times_s");
        require(s->times_s.front() == 0.0, p + ".times_s", "must start at 0");
        for (std::size_t i = 0; i < s->times_s.size(); ++i) {
            finite_at(s->times_s[i], indexed(p + ".times_s", i));
            if (i > 0)
                require(s->times_s[i] > s->times_s[i - 1], indexed(p + ".times_s", i),
                        "times must increase strictly");
            finite_at(s->points_um[i][0], indexed(p + ".points_um", i));
            finite_at(s->points_um[i][1], indexed(p + ".points_um", i));
        }
        for (double v : s->start_velocity_um_per_s) finite_at(v, p + ".start_velocity_um_per_s");
        for (double v : s->end_velocity_um_per_s) finite_at(v, p + ".end_velocity_um_per_s");
        return s->times_s.back();
    }
    const auto& s = std::get<ConstantSpec>(spec);
    finite_at(s.x_um, p + ".point_um");
    finite_at(s.y_um, p + ".point_um");
    positive(s.duration_s, p + ".duration_s");
    return s.duration_s;
}

void validate_waveform(const Waveform& w, const std::string& path) {
    finite_at(w.offset_uT, path + ".offset_uT");
    finite_at(w.amplitude_uT, path + ".amplitude_uT");
    require(finite(w.frequency_hz) && w.frequency_hz >= 0.0, path + ".frequency_hz",
            "must be finite and non-negative");
    finite_at(w.phase_rad, path + ".phase_rad");
}

double validate_field_program(const FieldProgramSpec& s) {
    positive(s.duration_s, "field_program.duration_s");
    const auto [k1, k2] = component_keys(s.frame);
    for (std::size_t i = 0; i < s.pieces.size(); ++i) {
        const std::string p = indexed("field_program.pieces", i);
        if (i == 0)
            require(s.pieces[0].start_s == 0.0, p + ".start_s", "the first piece must start at 0");
        else
            require(s.pieces[i].start_s > s.pieces[i - 1].start_s, p + ".start_s",
                    "pieces must start in strictly increasing order");
        require(finite(s.pieces[i].start_s) && s.pieces[i].start_s < s.duration_s, p + ".start_s",
                "must lie before the program duration");
        validate_waveform(s.pieces[i].first, p + "." + k1);
        validate_waveform(s.pieces[i].second, p + "." + k2);
    }
    return s.duration_s;
}

} // namespace

void validate_scenario(const Scenario& scn) {
    validate_swimmer(scn.swimmer);
    if (scn.initial_state) validate_state(*scn.initial_state);

    const bool simulates =
        scn.mode == ScenarioMode::open_loop || scn.mode == ScenarioMode::closed_loop;
    const std::string mode = to_string(scn.mode);
    if (scn.mode == ScenarioMode::closed_loop) {
        require(scn.trajectory.has_value(), "trajectory", "closed_loop mode requires a trajectory");
    } else {
        require(!scn.trajectory, "trajectory", "is not used in " + mode + " mode");
    }
    if (scn.mode == ScenarioMode::open_loop) {
        require(scn.field_program.has_value(), "field_program",
                "open_loop mode requires a field_program");
    } else {
        require(!scn.field_program, "field_program", "is not used in " + mode + " mode");
    }
    if (simulates)
        require(scn.initial_state.has_value(), "initial_state", mode + " mode requires an initial_state");

    double horizon = 0.0;
    if (scn.trajectory) {
        horizon = validate_trajectory(*scn.trajectory);
        const Vec2 start = build_trajectory(*scn.trajectory).position(0.0);
        const SwimmerState& s = *scn.initial_state;
        if ((Vec2(s.x, s.y) - start).norm() > 1e-9) {
            std::ostringstream os;
            os.precision(17);
            os << "position (" << s.x << ", " << s.y << ") must equal the trajectory start ("
               << start.x() << ", " << start.y() << ")";
            fail("initial_state", os.str());
        }
    }
    if (scn.field_program) horizon = validate_field_program(*scn.field_program);

    if (scn.mode == ScenarioMode::controllability && scn.initial_state) {
        const SwimmerState& s = *scn.initial_state;
        require(std::abs(s.alpha1) <= equilibrium_shape_tolerance &&
                    std::abs(s.alpha2 - scn.swimmer.alpha0_rad) <= equilibrium_shape_tolerance,
                "initial_state", "must be an equilibrium shape (alpha1 = 0, alpha2 = alpha0_rad)");
    }

    try {
        scn.integrator.validate();
    } catch (const std::invalid_argument& e) {
        fail("integrator", e.what());
    }
    require(finite(scn.eps_d) && scn.eps_d >= 0.0, "tracking.eps_d",
            "must be finite and non-negative");

    require(scn.output.samples == 0 || scn.output.samples >= 2, "output.samples",
            "must be 0 (every accepted step) or at least 2");
    if (!scn.output.snapshot_times_s.empty())
        require(scn.output.samples > 0, "output.snapshot_times_s",
                "needs output.samples > 0 (snapshot times are added to the sample grid)");
    for (std::size_t i = 0; i < scn.output.snapshot_times_s.size(); ++i) {
        const double t = scn.output.snapshot_times_s[i];
        const std::string p = indexed("output.snapshot_times_s", i);
        require(simulates, p, "snapshots need a simulation mode");
        require(finite(t) && t >= 0.0 && t <= horizon, p, "must lie within the run horizon");
        if (i > 0)
            require(t > scn.output.snapshot_times_s[i - 1], p, "times must increase strictly");
    }

    require(scn.controllability.p >= 1 && scn.controllability.p <= 5, "controllability.p",
            "must lie in 1..5");
    require(finite(scn.controllability.rank_rel_tol) && scn.controllability.rank_rel_tol > 0.0 &&
                scn.controllability.rank_rel_tol < 1.0,
            "controllability.rank_rel_tol", "must lie in (0, 1)");

    require(scn.scan.grid_n >= 2 && scn.scan.grid_n <= 4001, "scan.grid_n", "must lie in 2..4001");
    require(finite(scn.scan.exclusion_radius_rad) && scn.scan.exclusion_radius_rad >= 0.0,
            "scan.exclusion_radius_rad", "must be finite and non-negative");
    require(finite(scn.scan.margin_rad) && scn.scan.margin_rad > 0.0 &&
                scn.scan.margin_rad < std::numbers::pi,
            "scan.margin_rad", "must lie in (0, pi)");
}

Scenario parse_scenario(const std::string& text, const std::string& source) {
    Json root;
    try {
        root = Json::parse(text, nullptr, true, true);
    } catch (const Json::parse_error& e) {
        const std::size_t byte = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
        const auto before = text.begin() + static_cast<std::ptrdiff_t>(byte);
        const int line = 1 + static_cast<int>(std::count(text.begin(), before, '\n'));
        const std::size_t nl = text.rfind('\n', byte == 0 ? 0 : byte - 1);
        const std::size_t col = nl == std::string::npos || byte == 0 ? byte + 1 : byte - nl;
        std::string detail = e.what();
        const std::size_t colon = detail.find(": ");
        if (colon != std::string::npos) detail = detail.substr(colon + 2);
        throw ScenarioParseError(source + ":" + std::to_string(line) + ":" + std::to_string(col) +
                                     ": parse error: " + detail,
                                 "", line);
    }

    auto where = [&](const ScenarioError& e) {
        const int line = locate_line(text, e.path());
        return std::make_pair(source + (line > 0 ? ":" + std::to_string(line) : "") + ": " + e.what(),
                              line);
    };
    try {
        Scenario scn = read_scenario(root);
        validate_scenario(scn);
        return scn;
    } catch (const UnknownKeyError& e) {
        const auto [msg, line] = where(e);
        throw UnknownKeyError(msg, e.path(), line);
    } catch (const ScenarioValidationError& e) {
        const auto [msg, line] = where(e);
        throw ScenarioValidationError(msg, e.path(), line);
    }
}

Scenario load_scenario(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open scenario file " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_scenario(buf.str(), path.string());
}

namespace {

Json waveform_json(const Waveform& w) {
    Json j;
    j["offset_uT"] = w.offset_uT;
    j["amplitude_uT"] = w.amplitude_uT;
    j["frequency_hz"] = w.frequency_hz;
    j["phase_rad"] = w.phase_rad;
    return j;
}

Json pair_json(double a, double b) { return Json::array({a, b}); }

Json trajectory_json(const TrajectorySpec& spec) {
    Json j;
    if (const auto* s = std::get_if<LineSpec>(&spec)) {
        j["type"] = "line";
        j["start_um"] = pair_json(s->start_x_um, s->start_y_um);
        j["heading_rad"] = s->heading_rad;
        j["speed_um_per_s"] = s->speed_um_per_s;
        j["duration_s"] = s->duration_s;
    } else if (const auto* s = std::get_if<CircleSpec>(&spec)) {
        j["type"] = "circle";
        j["center_um"] = pair_json(s->center_x_um, s->center_y_um);
        j["radius_um"] = s->radius_um;
        j["angular_rate_rad_per_s"] = s->angular_rate_rad_per_s;
        j["turns"] = s->turns;
        j["phase_rad"] = s->phase_rad;
    } else if (const auto* s = std::get_if<WaypointSplineSpec>(&spec)) {
        j["type"] = "waypoint_spline";
        j["times_s"] = s->times_s;
        Json pts = Json::array();
        for (const auto& p : s->points_um) pts.push_back(pair_json(p[0], p[1]));
        j["points_um"] = pts;
        j["start_velocity_um_per_s"] =
            pair_json(s->start_velocity_um_per_s[0], s->start_velocity_um_per_s[1]);
        j["end_velocity_um_per_s"] =
            pair_json(s->end_velocity_um_per_s[0], s->end_velocity_um_per_s[1]);
    } else {
        const auto& c = std::get<ConstantSpec>(spec);
        j["type"] = "constant";
        j["point_um"] = pair_json(c.x_um, c.y_um);
        j["duration_s"] = c.duration_s;
    }
    return j;
}

} // namespace

std::string write_scenario(const Scenario& scn) {
    Json j;
    j["name"] = scn.name;
    j["mode"] = to_string(scn.mode);
    const SwimmerSpec& s = scn.swimmer;
    j["swimmer"] = {{"ell_um", s.ell_um},
                    {"eta_N_s_per_m2", s.eta_N_s_per_m2},
                    {"xi_N_s_per_m2", s.xi_N_s_per_m2},
                    {"m1_A_um2", s.m1_A_um2},
                    {"m2_A_um2", s.m2_A_um2},
                    {"m3_A_um2", s.m3_A_um2},
                    {"kappa_N_um", s.kappa_N_um},
                    {"alpha0_rad", s.alpha0_rad}};
    if (scn.initial_state) {
        const SwimmerState& z = *scn.initial_state;
        j["initial_state"] = {{"x_um", z.x},
                              {"y_um", z.y},
                              {"theta_rad", z.theta},
                              {"alpha1_rad", z.alpha1},
                              {"alpha2_rad", z.alpha2}};
    }
    if (scn.trajectory) j["trajectory"] = trajectory_json(*scn.trajectory);
    if (scn.field_program) {
        const FieldProgramSpec& f = *scn.field_program;
        const auto [k1, k2] = component_keys(f.frame);
        Json pieces = Json::array();
        for (const FieldPiece& p : f.pieces)
            pieces.push_back(
                {{"start_s", p.start_s}, {k1, waveform_json(p.first)}, {k2, waveform_json(p.second)}});
        j["field_program"] = {{"frame", f.frame == FieldFrame::body ? "body" : "lab"},
                              {"duration_s", f.duration_s},
                              {"pieces", pieces}};
    }
    const ode::IntegratorOptions& o = scn.integrator;
    j["integrator"] = {{"method", ode::to_string(o.method)},
                       {"abs_tol", o.abs_tol},
                       {"rel_tol", o.rel_tol},
                       {"h_init_s", o.h_init},
                       {"h_min_s", o.h_min},
                       {"h_max_s", o.h_max},
                       {"max_steps", o.max_steps}};
    j["tracking"] = {{"eps_d", scn.eps_d}};
    j["output"] = {{"samples", scn.output.samples},
                   {"snapshot_times_s", scn.output.snapshot_times_s}};
    j["controllability"] = {{"p", scn.controllability.p},
                            {"rank_rel_tol", scn.controllability.rank_rel_tol}};
    j["scan"] = {{"grid_n", scn.scan.grid_n},
                 {"exclusion_radius_rad", scn.scan.exclusion_radius_rad},
                 {"margin_rad", scn.scan.margin_rad}};
    return j.dump(2) + "\n";
}

std::string scenario_hash(const Scenario& scn) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : write_scenario(scn)) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

} // namespace magswim

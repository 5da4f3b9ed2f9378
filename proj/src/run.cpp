#include "magswim/controllability.hpp"
#include "magswim/dynamics.hpp"
#include "magswim/scenario.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <limits>
#include <set>
#include <sstream>

namespace magswim {

using Json = nlohmann::ordered_json;

namespace {

// An empty out_dir means report only, write nothing.
void write_file(const std::filesystem::path& out_dir, const std::filesystem::path& rel,
                const std::string& content, RunReport& report) {
    if (out_dir.empty()) return;
    const std::filesystem::path path = out_dir / rel;
    std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out << content;
    if (!out) throw std::runtime_error("failed writing " + path.string());
    report.files.push_back(path);
}

Json matrix_json(const Eigen::MatrixXd& m) {
    Json rows = Json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        Json row = Json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(row);
    }
    return rows;
}

Json state_json(const SwimmerState& s) {
    return {{"x_um", s.x},
            {"y_um", s.y},
            {"theta_rad", s.theta},
            {"alpha1_rad", s.alpha1},
            {"alpha2_rad", s.alpha2}};
}

Json params_json(const Scenario& scn) {
    const SwimmerSpec& s = scn.swimmer;
    const SwimmerParams p = s.params();
    return {{"ell_um", s.ell_um},
            {"eta_N_s_per_m2", s.eta_N_s_per_m2},
            {"xi_N_s_per_m2", s.xi_N_s_per_m2},
            {"m1_A_um2", s.m1_A_um2},
            {"m2_A_um2", s.m2_A_um2},
            {"m3_A_um2", s.m3_A_um2},
            {"kappa_N_um", s.kappa_N_um},
            {"alpha0_rad", s.alpha0_rad},
            {"internal",
             {{"eta_pN_s_per_um2", p.eta}, {"xi_pN_s_per_um2", p.xi}, {"kappa_pN_um", p.kappa}}}};
}

std::string format_matrix(const Eigen::MatrixXd& m) {
    const Eigen::IOFormat fmt(6, 0, "  ", "\n", "    [", "]");
    std::ostringstream os;
    os << m.format(fmt) << "\n";
    return os.str();
}

double median(std::vector<double> v) {
    if (v.empty()) return 0.0;
    const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
    std::nth_element(v.begin(), mid, v.end());
    return *mid;
}

// Shapes along the record where |det M| drops below the warning floor.
void check_mobility(const SimRecord& rec, const SwimmerParams& params, RunReport& report) {
    for (const SimRow& r : rec.rows) {
        if (!std::isfinite(r.alpha1) || !std::isfinite(r.alpha2)) continue;
        const double det = build_mobility_matrix(r.alpha1, r.alpha2, params).det_m;
        if (std::abs(det) < mobility_det_warning) {
            std::ostringstream os;
            os << "mobility matrix ill-conditioned at t = " << r.t << " s (|det M| = "
               << std::abs(det) << ")";
            report.warnings.push_back(os.str());
            return;
        }
    }
}

std::vector<double> output_times(const Scenario& scn, double horizon) {
    if (scn.output.samples == 0) return {};
    std::set<double> times;
    for (double t : uniform_sample_times(horizon, scn.output.samples)) times.insert(t);
    for (double t : scn.output.snapshot_times_s) times.insert(t);
    return {times.begin(), times.end()};
}

void write_snapshots(const Scenario& scn, const SimRecord& rec, const SwimmerParams& params,
                     const std::filesystem::path& out_dir, RunReport& report, Json& summary) {
    if (scn.output.snapshot_times_s.empty()) return;
    Json written = Json::array();
    for (std::size_t i = 0; i < scn.output.snapshot_times_s.size(); ++i) {
        const double t = scn.output.snapshot_times_s[i];
        const auto it = std::find_if(rec.rows.begin(), rec.rows.end(),
                                     [t](const SimRow& r) { return r.t == t; });
        if (it == rec.rows.end()) {
            std::ostringstream os;
            os << "snapshot at t = " << t << " s skipped: the run ended before it";
            report.warnings.push_back(os.str());
            continue;
        }
        const SwimmerState s{it->x, it->y, it->theta, it->alpha1, it->alpha2};
        const auto pts = joint_points(s, params);
        std::ostringstream os;
        os.precision(17);
        os << "t,point,x,y\n";
        for (std::size_t k = 0; k < pts.size(); ++k)
            os << t << "," << k << "," << pts[k].x() << "," << pts[k].y() << "\n";
        char name[32];
        std::snprintf(name, sizeof name, "snapshot_%03zu.csv", i);
        write_file(out_dir, std::filesystem::path("snapshots") / name, os.str(), report);
        written.push_back({{"t_s", t}, {"file", std::string("snapshots/") + name}});
    }
    summary["snapshots"] = written;
}

void run_closed_loop(const Scenario& scn, const std::filesystem::path& out_dir, RunReport& report,
                     Json& summary) {
    const SwimmerParams params = scn.swimmer.params();
    const Trajectory traj = build_trajectory(*scn.trajectory);
    ClosedLoopOptions opts;
    opts.integrator = scn.integrator;
    opts.eps_d = scn.eps_d;
    opts.samples = scn.output.samples;
    opts.sample_times = output_times(scn, traj.horizon());

    const ClosedLoopResult res = simulate_closed_loop(*scn.initial_state, traj, params, opts);
    report.status = to_string(res.status.outcome);
    switch (res.status.outcome) {
    case TrackingOutcome::completed: report.exit_code = exit_code::completed; break;
    case TrackingOutcome::singular_abort: report.exit_code = exit_code::singular_abort; break;
    case TrackingOutcome::integrator_failure:
        report.exit_code = exit_code::integrator_failure;
        break;
    }
    check_mobility(res.record, params, report);
    write_file(out_dir, "timeseries.csv", to_csv(res.record), report);

    const SwimmerState fin = SwimmerState::from_vector(res.solver.z_final);
    const SwimmerState& init = *scn.initial_state;
    summary["status"] = report.status;
    summary["message"] = res.status.message;
    summary["t_stop_s"] = res.status.t_stop;
    summary["horizon_s"] = traj.horizon();
    summary["min_abs_d"] = res.status.min_abs_d;
    summary["max_field_norm_uT"] = res.status.max_field_norm;
    summary["median_field_norm_uT"] = res.median_field_norm;
    summary["max_tracking_error_um"] = res.max_tracking_error;
    summary["max_feedback_residual"] = res.max_feedback_residual;
    summary["final_target_distance_um"] =
        (Vec2(fin.x, fin.y) - traj.position(res.status.t_stop)).norm();
    summary["final_return_distance_um"] = (Vec2(fin.x, fin.y) - Vec2(init.x, init.y)).norm();
    summary["final_state"] = state_json(fin);
    summary["solver"] = {{"method", ode::to_string(scn.integrator.method)},
                         {"status", ode::to_string(res.solver.status)},
                         {"accepted_steps", res.solver.accepted_steps},
                         {"rejected_steps", res.solver.rejected_steps},
                         {"rhs_evaluations", res.solver.rhs_evaluations}};
    write_snapshots(scn, res.record, params, out_dir, report, summary);

    std::ostringstream os;
    os << "status: " << report.status << "  (t_stop = " << res.status.t_stop << " s of "
       << traj.horizon() << " s)\n";
    if (!res.status.message.empty()) os << "  " << res.status.message << "\n";
    os << "min |D| = " << res.status.min_abs_d << ", max |H| = " << res.status.max_field_norm
       << " uT, median |H| = " << res.median_field_norm << " uT\n"
       << "max tracking error = " << res.max_tracking_error << " um\n";
    report.console = os.str();
}

void run_open_loop(const Scenario& scn, const std::filesystem::path& out_dir, RunReport& report,
                   Json& summary) {
    const SwimmerParams params = scn.swimmer.params();
    const FieldProgramSpec& prog = *scn.field_program;
    const OpenLoopResult res =
        simulate_open_loop(*scn.initial_state, build_field_program(prog), params, prog.duration_s,
                           scn.integrator, output_times(scn, prog.duration_s));
    const bool ok = res.solver.ok();
    report.status = ok ? "completed" : "integrator_failure";
    report.exit_code = ok ? exit_code::completed : exit_code::integrator_failure;
    check_mobility(res.record, params, report);
    write_file(out_dir, "timeseries.csv", to_csv(res.record), report);

    double min_abs_d = std::numeric_limits<double>::infinity(), max_h = 0.0;
    std::vector<double> norms;
    for (const SimRow& r : res.record.rows) {
        min_abs_d = std::min(min_abs_d, std::abs(r.d_value));
        const double n = std::hypot(r.h_par, r.h_perp);
        max_h = std::max(max_h, n);
        norms.push_back(n);
    }
    const SwimmerState fin = SwimmerState::from_vector(res.solver.z_final);
    const double alpha0 = scn.swimmer.alpha0_rad;
    summary["status"] = report.status;
    summary["message"] = res.solver.message;
    summary["t_stop_s"] = res.solver.t_final;
    summary["horizon_s"] = prog.duration_s;
    summary["min_abs_d"] = min_abs_d;
    summary["max_field_norm_uT"] = max_h;
    summary["median_field_norm_uT"] = median(norms);
    summary["final_state"] = state_json(fin);
    summary["final_shape_distance_to_equilibrium"] = std::hypot(fin.alpha1, fin.alpha2 - alpha0);
    summary["solver"] = {{"method", ode::to_string(scn.integrator.method)},
                         {"status", ode::to_string(res.solver.status)},
                         {"accepted_steps", res.solver.accepted_steps},
                         {"rejected_steps", res.solver.rejected_steps},
                         {"rhs_evaluations", res.solver.rhs_evaluations}};
    write_snapshots(scn, res.record, params, out_dir, report, summary);

    std::ostringstream os;
    os << "status: " << report.status << "  (t_stop = " << res.solver.t_final << " s)\n";
    if (!res.solver.message.empty()) os << "  " << res.solver.message << "\n";
    os << "final shape (" << fin.alpha1 << ", " << fin.alpha2 << "), equilibrium (0, " << alpha0
       << ")\n";
    report.console = os.str();
}

void run_controllability(const Scenario& scn, RunReport& report, Json& summary) {
    const SwimmerParams params = scn.swimmer.params();
    const SwimmerState eq = scn.initial_state.value_or(SwimmerState{0, 0, 0, 0, params.alpha0});
    const LinearizedSystem lin = linearize(eq, params);
    const KalmanMatrix k = kalman_matrix(lin);
    const PartialControllability pc =
        partial_controllability(k, scn.controllability.p, scn.controllability.rank_rel_tol);

    const double closed = bent_submatrix_determinant(params.alpha0, params);
    const double numeric = numeric_submatrix_determinant(params);
    const double scale = std::max(std::abs(closed), std::abs(numeric));
    const double rel = scale == 0.0 ? 0.0 : std::abs(closed - numeric) / scale;
    const double k_max = k.cwiseAbs().maxCoeff();
    const double row0_max = k.row(0).cwiseAbs().maxCoeff();
    const bool row0_zero = row0_max <= scn.controllability.rank_rel_tol * k_max;

    report.status = "completed";
    report.exit_code = exit_code::completed;
    summary["status"] = report.status;
    summary["equilibrium"] = state_json(eq);
    summary["p"] = scn.controllability.p;
    summary["controllable"] = pc.controllable;
    summary["rank"] = pc.rank;
    summary["rank_rel_tol"] = scn.controllability.rank_rel_tol;
    summary["singular_values"] = std::vector<double>(pc.singular_values.data(),
                                                     pc.singular_values.data() + pc.singular_values.size());
    summary["first_row_max_abs"] = row0_max;
    summary["first_row_zero"] = row0_zero;
    summary["closed_form_determinant"] = closed;
    summary["numeric_determinant"] = numeric;
    summary["determinant_relative_difference"] = rel;
    summary["A"] = matrix_json(lin.a);
    summary["B"] = matrix_json(lin.b);
    summary["K"] = matrix_json(k);

    std::ostringstream os;
    os << std::setprecision(10);
    os << "linearization at (x, y, theta, alpha1, alpha2) = (" << eq.x << ", " << eq.y << ", "
       << eq.theta << ", " << eq.alpha1 << ", " << eq.alpha2 << ")\n";
    os << "A =\n" << format_matrix(lin.a) << "B =\n" << format_matrix(lin.b);
    os << "K = [B AB A^2B A^3B A^4B] =\n" << format_matrix(k);
    os << "rank of the first " << scn.controllability.p << " rows of K: " << pc.rank
       << (pc.controllable ? "  -> partially controllable\n" : "  -> NOT partially controllable\n");
    if (row0_zero) os << "first row of K is identically zero\n";
    os << "2x2 submatrix determinant: closed form " << closed << ", numeric " << numeric
       << ", relative difference " << rel << "\n";
    report.console = os.str();
}

void run_scan(const Scenario& scn, const std::filesystem::path& out_dir, RunReport& report,
              Json& summary) {
    const SwimmerParams params = scn.swimmer.params();
    const DeterminantScan scan =
        scan_determinant(params, scn.scan.grid_n, scn.scan.exclusion_radius_rad, scn.scan.margin_rad);
    const std::size_t n = static_cast<std::size_t>(scan.grid_n);

    std::string csv = "alpha1,alpha2,d,det_m\n";
    double det_m_max = -std::numeric_limits<double>::infinity();
    std::int64_t det_m_nonnegative = 0;
    char buf[128];
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const double det = build_mobility_matrix(scan.axis[i], scan.axis[j], params).det_m;
            det_m_max = std::max(det_m_max, det);
            if (!(det < 0.0)) ++det_m_nonnegative;
            std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g\n", scan.axis[i], scan.axis[j],
                          scan.values[i * n + j], det);
            csv += buf;
        }
    }
    write_file(out_dir, "determinant_grid.csv", csv, report);

    report.status = "completed";
    report.exit_code = exit_code::completed;
    summary["status"] = report.status;
    summary["grid_n"] = scan.grid_n;
    summary["d_at_origin"] = scan.d_at_origin;
    summary["exclusion_radius_rad"] = scan.exclusion_radius;
    summary["min_abs_d_off_origin"] = scan.min_abs_off_origin;
    summary["argmin_alpha1_rad"] = scan.argmin_alpha1;
    summary["argmin_alpha2_rad"] = scan.argmin_alpha2;
    summary["det_m_max"] = det_m_max;
    summary["det_m_nonnegative_count"] = det_m_nonnegative;

    std::ostringstream os;
    os << std::setprecision(10) << "D(0, 0) = " << scan.d_at_origin << "\n"
       << "min |D| outside radius " << scan.exclusion_radius << " = " << scan.min_abs_off_origin
       << " at (" << scan.argmin_alpha1 << ", " << scan.argmin_alpha2 << ")\n"
       << "max det M over the grid = " << det_m_max << " (" << det_m_nonnegative
       << " non-negative points)\n";
    report.console = os.str();
}

} // namespace

RunReport run_scenario(const Scenario& scn, const std::filesystem::path& out_dir) {
    validate_scenario(scn);
    const auto start = std::chrono::steady_clock::now();

    RunReport report;
    Json summary;
    summary["scenario"] = scn.name;
    summary["scenario_hash"] = scenario_hash(scn);
    summary["mode"] = to_string(scn.mode);

    Json body;
    switch (scn.mode) {
    case ScenarioMode::closed_loop: run_closed_loop(scn, out_dir, report, body); break;
    case ScenarioMode::open_loop: run_open_loop(scn, out_dir, report, body); break;
    case ScenarioMode::controllability: run_controllability(scn, report, body); break;
    case ScenarioMode::determinant_scan: run_scan(scn, out_dir, report, body); break;
    }
    summary["exit_code"] = report.exit_code;
    for (auto it = body.begin(); it != body.end(); ++it) summary[it.key()] = it.value();
    summary["params"] = params_json(scn);
    summary["warnings"] = report.warnings;
    summary["wall_time_s"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    report.summary_json = summary.dump(2) + "\n";
    write_file(out_dir, "summary.json", report.summary_json, report);
    return report;
}

} // namespace magswim

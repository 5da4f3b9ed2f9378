#pragma once

#include "magswim/controllability.hpp"
#include "magswim/core_model.hpp"
#include "magswim/integrators.hpp"
#include "magswim/open_loop.hpp"
#include "magswim/tracking.hpp"
#include "magswim/trajectory.hpp"

#include <array>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace magswim {

enum class ScenarioMode { open_loop, closed_loop, controllability, determinant_scan };

std::string to_string(ScenarioMode m);

/// Swimmer constants exactly as written in the file (published units).
struct SwimmerSpec {
    double ell_um = 10.0;
    double eta_N_s_per_m2 = 12.4e-3;
    double xi_N_s_per_m2 = 6.2e-3;
    double m1_A_um2 = 1.6;
    double m2_A_um2 = 2.4;
    double m3_A_um2 = 3.2;
    double kappa_N_um = 8.3e-7;
    double alpha0_rad = 0.0;

    SwimmerParams params() const;
    bool operator==(const SwimmerSpec&) const = default;
};

struct LineSpec {
    double start_x_um = 0.0, start_y_um = 0.0;
    double heading_rad = 0.0;
    double speed_um_per_s = 0.0;
    double duration_s = 0.0;
    bool operator==(const LineSpec&) const = default;
};

struct CircleSpec {
    double center_x_um = 0.0, center_y_um = 0.0;
    double radius_um = 0.0;
    double angular_rate_rad_per_s = 0.0;
    double turns = 1.0;
    double phase_rad = 0.0;
    bool operator==(const CircleSpec&) const = default;
};

struct WaypointSplineSpec {
    std::vector<double> times_s;
    std::vector<std::array<double, 2>> points_um;
    std::array<double, 2> start_velocity_um_per_s{0.0, 0.0};
    std::array<double, 2> end_velocity_um_per_s{0.0, 0.0};
    bool operator==(const WaypointSplineSpec&) const = default;
};

struct ConstantSpec {
    double x_um = 0.0, y_um = 0.0;
    double duration_s = 0.0;
    bool operator==(const ConstantSpec&) const = default;
};

using TrajectorySpec = std::variant<LineSpec, CircleSpec, WaypointSplineSpec, ConstantSpec>;

Trajectory build_trajectory(const TrajectorySpec& spec);

/// offset + amplitude·sin(2π·frequency·t + phase), in µT.
struct Waveform {
    double offset_uT = 0.0;
    double amplitude_uT = 0.0;
    double frequency_hz = 0.0;
    double phase_rad = 0.0;

    double at(double t) const;
    bool operator==(const Waveform&) const = default;
};

/// Active from start_s until the next piece starts. In the body frame the two
/// components are (H∥, H⊥); in the lab frame they are (Hx, Hy).
struct FieldPiece {
    double start_s = 0.0;
    Waveform first;
    Waveform second;
    bool operator==(const FieldPiece&) const = default;
};

enum class FieldFrame { body, lab };

struct FieldProgramSpec {
    FieldFrame frame = FieldFrame::body;
    double duration_s = 0.0;
    std::vector<FieldPiece> pieces;  ///< empty means zero field throughout
    bool operator==(const FieldProgramSpec&) const = default;
};

FieldProgram build_field_program(const FieldProgramSpec& spec);

struct OutputSpec {
    int samples = 201;  ///< 0 records every accepted step
    std::vector<double> snapshot_times_s;
    bool operator==(const OutputSpec&) const = default;
};

struct ControllabilitySpec {
    int p = 2;
    double rank_rel_tol = default_rank_tolerance;
    bool operator==(const ControllabilitySpec&) const = default;
};

struct ScanSpec {
    int grid_n = 101;
    double exclusion_radius_rad = 0.05;
    double margin_rad = 0.01;
    bool operator==(const ScanSpec&) const = default;
};

struct Scenario {
    std::string name;
    ScenarioMode mode = ScenarioMode::closed_loop;
    SwimmerSpec swimmer;
    std::optional<SwimmerState> initial_state;
    std::optional<TrajectorySpec> trajectory;
    std::optional<FieldProgramSpec> field_program;
    ode::IntegratorOptions integrator;
    double eps_d = default_eps_d;
    OutputSpec output;
    ControllabilitySpec controllability;
    ScanSpec scan;

    bool operator==(const Scenario&) const = default;
};

/// Base of every scenario loading error. path names the offending field
/// ("swimmer.kappa_N_um"); line is 1-based and set for parse errors only.
class ScenarioError : public std::runtime_error {
public:
    ScenarioError(const std::string& what, std::string path, int line)
        : std::runtime_error(what), path_(std::move(path)), line_(line) {}
    const std::string& path() const { return path_; }
    int line() const { return line_; }

private:
    std::string path_;
    int line_;
};

class ScenarioParseError : public ScenarioError {
public:
    using ScenarioError::ScenarioError;
};

class ScenarioValidationError : public ScenarioError {
public:
    using ScenarioError::ScenarioError;
};

class UnknownKeyError : public ScenarioError {
public:
    using ScenarioError::ScenarioError;
};

/// Parses and fully validates scenario text. `source` prefixes error messages.
Scenario parse_scenario(const std::string& text, const std::string& source = "<scenario>");
Scenario load_scenario(const std::filesystem::path& path);

/// Checks every cross-field invariant; throws ScenarioValidationError.
void validate_scenario(const Scenario& scn);

/// Canonical text: fixed key order, two-space indent, shortest round-trip numbers.
std::string write_scenario(const Scenario& scn);

/// FNV-1a 64-bit hash of write_scenario(scn), as 16 hex digits.
std::string scenario_hash(const Scenario& scn);

/// Exit codes of a scenario run.
namespace exit_code {
inline constexpr int completed = 0;
inline constexpr int singular_abort = 2;
inline constexpr int integrator_failure = 3;
inline constexpr int config_error = 4;
} // namespace exit_code

struct RunReport {
    int exit_code = exit_code::completed;
    std::string status;                 ///< completed / singular_abort / integrator_failure
    std::string summary_json;           ///< contents of summary.json
    std::string console;                ///< human-readable report for the terminal
    std::vector<std::string> warnings;
    std::vector<std::filesystem::path> files;  ///< everything written
};

/// Runs the scenario and writes its outputs into out_dir (created if needed):
/// summary.json always; timeseries.csv and snapshots/ for simulations;
/// determinant_grid.csv for scans. An empty out_dir writes nothing.
RunReport run_scenario(const Scenario& scn, const std::filesystem::path& out_dir);

} // namespace magswim

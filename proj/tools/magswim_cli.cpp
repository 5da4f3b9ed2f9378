// Command-line front end: runs scenario files and writes CSV/JSON outputs.

#include "magswim/scenario.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <iostream>
#include <thread>

namespace fs = std::filesystem;
using namespace magswim;

namespace {

struct Outcome {
    int code = 0;
    std::string text;
};

Outcome run_one(const Scenario& scn, const fs::path& out_dir) {
    Outcome o;
    const RunReport report = run_scenario(scn, out_dir);
    o.code = report.exit_code;
    o.text = report.console;
    for (const std::string& w : report.warnings) o.text += "warning: " + w + "\n";
    if (!out_dir.empty()) o.text += "outputs written to " + out_dir.string() + "\n";
    return o;
}

// Loads and runs one file; errors are turned into exit codes.
Outcome load_and_run(const std::string& path, const fs::path& out_dir,
                     const std::function<void(Scenario&)>& adjust) {
    try {
        Scenario scn = load_scenario(path);
        if (adjust) adjust(scn);
        return run_one(scn, out_dir);
    } catch (const ScenarioError& e) {
        return {exit_code::config_error, std::string("error: ") + e.what() + "\n"};
    } catch (const std::exception& e) {
        return {exit_code::config_error, std::string("error: ") + path + ": " + e.what() + "\n"};
    }
}

int simulate(const std::vector<std::string>& files, const fs::path& out, unsigned jobs) {
    if (files.size() == 1) {
        const Outcome o = load_and_run(files[0], out, {});
        (o.code == exit_code::config_error ? std::cerr : std::cout) << o.text;
        return o.code;
    }

    // Batch: one subdirectory per scenario, named after the file stem.
    std::vector<fs::path> dirs;
    for (const std::string& f : files) {
        fs::path d = out / fs::path(f).stem();
        if (std::find(dirs.begin(), dirs.end(), d) != dirs.end())
            d = out / (fs::path(f).stem().string() + "_" + std::to_string(dirs.size()));
        dirs.push_back(d);
    }
    std::vector<Outcome> results(files.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i; (i = next++) < files.size();) results[i] = load_and_run(files[i], dirs[i], {});
    };
    std::vector<std::thread> pool;
    const unsigned n = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(files.size())));
    for (unsigned t = 0; t < n; ++t) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();

    int worst = 0;
    for (std::size_t i = 0; i < files.size(); ++i) {
        std::cout << "== " << files[i] << " (exit " << results[i].code << ")\n" << results[i].text;
        worst = std::max(worst, results[i].code);
    }
    return worst;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Three-segment magnetic microswimmer simulator"};
    app.require_subcommand(1);

    std::vector<std::string> sim_files;
    std::string sim_out = "out";
    unsigned jobs = 1;
    auto* sim = app.add_subcommand("simulate", "Run scenario files (several files run as a batch)");
    sim->add_option("scenario", sim_files, "Scenario file(s)")->required()->check(CLI::ExistingFile);
    sim->add_option("-o,--out", sim_out, "Output directory")->capture_default_str();
    sim->add_option("-j,--jobs", jobs, "Concurrent scenarios in batch mode")->capture_default_str();

    std::string scan_file, scan_out = "out";
    int grid_n = 0;
    auto* scan = app.add_subcommand("scan-determinant", "Tabulate D(alpha1, alpha2) over a grid");
    scan->add_option("scenario", scan_file, "Scenario file")->required()->check(CLI::ExistingFile);
    scan->add_option("-o,--out", scan_out, "Output directory")->capture_default_str();
    scan->add_option("-n,--grid", grid_n, "Grid points per axis (overrides the scenario)");

    std::string ctrl_file, ctrl_out;
    auto* ctrl = app.add_subcommand("check-controllability",
                                    "Linearize at the bent equilibrium and test partial controllability");
    ctrl->add_option("scenario", ctrl_file, "Scenario file")->required()->check(CLI::ExistingFile);
    ctrl->add_option("-o,--out", ctrl_out, "Also write summary.json here");

    std::vector<std::string> val_files;
    bool canonical = false;
    auto* val = app.add_subcommand("validate", "Load and validate scenario files");
    val->add_option("scenario", val_files, "Scenario file(s)")->required()->check(CLI::ExistingFile);
    val->add_flag("--canonical", canonical, "Print the canonical form of each scenario");

    CLI11_PARSE(app, argc, argv);

    if (*sim) return simulate(sim_files, sim_out, jobs);

    if (*scan) {
        const Outcome o = load_and_run(scan_file, scan_out, [&](Scenario& s) {
            s.mode = ScenarioMode::determinant_scan;
            s.trajectory.reset();
            s.field_program.reset();
            s.output.snapshot_times_s.clear();
            if (grid_n > 0) s.scan.grid_n = grid_n;
        });
        (o.code == exit_code::config_error ? std::cerr : std::cout) << o.text;
        return o.code;
    }

    if (*ctrl) {
        const Outcome o = load_and_run(ctrl_file, ctrl_out, [](Scenario& s) {
            if (s.mode != ScenarioMode::controllability) s.initial_state.reset();
            s.mode = ScenarioMode::controllability;
            s.trajectory.reset();
            s.field_program.reset();
            s.output.snapshot_times_s.clear();
        });
        (o.code == exit_code::config_error ? std::cerr : std::cout) << o.text;
        return o.code;
    }

    int worst = 0;
    for (const std::string& f : val_files) {
        try {
            const Scenario scn = load_scenario(f);
            (canonical ? std::cerr : std::cout) << "ok " << f << " (" << to_string(scn.mode)
                                                  << ", hash " << scenario_hash(scn) << ")\n";
            if (canonical) std::cout << write_scenario(scn);
        } catch (const ScenarioError& e) {
            std::cerr << "error: " << e.what() << "\n";
            worst = exit_code::config_error;
        } catch (const std::exception& e) {
            std::cerr << "error: " << f << ": " << e.what() << "\n";
            worst = exit_code::config_error;
        }
    }
    return worst;
}

#pragma once
#include <map>
#include <string>
#include <vector>

#include "blowuplab/ansatz.hpp"

namespace blowup {

struct RunConfig {
    std::string subcommand = "profiles";  // profiles ansatz residual nonlocal abel simulate report
    BlowupParams params;
    std::string output_dir = "blowuplab_out";
    std::string run_dir;  // report: directory to summarise (default output_dir)
    unsigned long seed = 0;
    bool override_constraints = false;

    // grid controls
    double y_max = 50.0;
    double profile_h = 0.025;
    std::size_t x_intervals = 400;
    std::size_t time_samples = 400;

    // abel
    std::string abel_input;           // t,h table; empty uses built-in smooth data
    std::string abel_mode = "auto";   // auto, invert, reduced
    double abel_tolerance = 1e-2;

    // nonlocal probes
    int probe_t_levels = 8;
    std::size_t probe_x_points = 20;

    // simulate
    std::string sim_data = "gaussian";  // gaussian or glued
    double sim_amplitude = 5.0;
    double sim_r_max = 10.0;            // gaussian domain; glued data uses 10√T
    std::size_t sim_intervals = 400;
    double threshold = 1e8;
    double horizon = 100.0;
    double cfl = 0.4;
    double reaction = 0.1;
    double core_nodes = 8.0;

    // failing constraint ids, filled when the override is set
    std::vector<std::string> warnings;
};

// key=value lines, '#' comments. Unknown keys and bad values throw ConfigError;
// a failing exponent inequality throws ConstraintError unless override_constraints.
RunConfig parse_config(const std::string& text);
// applies one "key=value" on top of an existing config (same checks)
void apply_setting(RunConfig& cfg, const std::string& line);
// re-validates after overrides
void finalize_config(RunConfig& cfg);
// every key with its value, in a fixed order
std::string config_text(const RunConfig& cfg);
// documented keys and defaults
std::vector<std::pair<std::string, std::string>> config_keys();

// Writes the artifacts of cfg.subcommand under cfg.output_dir and returns the
// list of files written (relative names, sorted).
std::vector<std::string> run_subcommand(const RunConfig& cfg);

// 0 success, 2 config error, 3 numerical failure, 4 constraint violation
int exit_code_of_current_exception();

}  // namespace blowup

#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "qmetro/errors.hpp"

namespace qmetro::experiment {

enum class Scenario { qfi_b, qfi_omega, detuned_sweep, adaptive, crossing_demo, convergence };

enum class OutputFormat { csv, json };

/// One experiment run: a scenario, its physical parameters, sweep grids and
/// an output destination. Parsed from a JSON config file.
struct ExperimentConfig {
    Scenario scenario = Scenario::qfi_b;
    double B = 1.0;
    std::vector<double> omegas;     // qfi-b: rotation frequencies to sweep
    std::vector<double> omega_cs;   // qfi-omega / detuned-sweep: trial frequencies
    std::vector<double> T_grid;     // strictly increasing evolution times
    int steps_per_unit = 4096;
    long N = 10000;                 // adaptive: measurements per round
    long shots = 100000;            // sampling scenarios
    int rounds = 3;
    int replicas = 200;
    double I0 = 4.0;
    std::uint64_t seed = 1;
    std::vector<long> pulse_l = {0};// crossing-demo: area indices
    double pulse_window = 0.05;
    std::string output = "out.csv";
    OutputFormat format = OutputFormat::csv;
    int threads = 0;                // 0 = hardware concurrency; QFI_THREADS overrides

    void validate() const;  // throws ConfigError
};

Scenario scenario_from_string(const std::string& name);
std::string scenario_to_string(Scenario s);

/// Parse a JSON config document. Unknown keys are rejected.
ExperimentConfig parse_config_text(const std::string& json_text);
ExperimentConfig load_config(const std::string& path);

/// Runs the scenario and writes its table to cfg.output. Returns the rendered
/// table so callers (and tests) can inspect it without touching the fs.
std::string run(const ExperimentConfig& cfg);

/// Machine-readable description of the config schema.
std::string schema();

/// Effective worker count: QFI_THREADS env var, then cfg.threads, then
/// hardware concurrency.
int effective_threads(const ExperimentConfig& cfg);

}  // namespace qmetro::experiment

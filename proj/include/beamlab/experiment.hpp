#pragma once

// Experiment configuration, orchestration, and file output.
//
// One JSON document describes one experiment:
//
//   {
//     "N": 12, "T": 16.0,
//     "nonlinearity": {"kind": "cubic"},
//     "forcing":      {"j": 1, "alpha": 50.0, "gamma": "4/3"},
//     "initial":      {"pattern": {"j": 2, "amplitude": 6.2, "residual": 0.01}},
//     "solver":       {"atol": 1e-9, "rtol": 1e-9, "dt_sample": 1e-3},
//     "detector":     {"eta": 0.1, "T_W": 1.0},
//     "threshold":    {"bracket": [5.0, 8.0], "step": 0.05}
//   }
//
// "kind" is one of cubic, positive_cubic, positive_part (the latter takes
// "mu").  "forcing" and "threshold" are optional.  "initial" takes either the
// pattern form above, which expands to u0 = M sin(jx) + δ Σ_{n≠j} sin(nx) and
// u1 = 0, or explicit arrays {"u0": [...], "u1": [...]}.  Real-valued fields
// accept either JSON numbers or expression strings such as
// "8*sqrt(19)/(4+sqrt(19))".  Defaults: solver tolerances 1e-9, dt_sample
// 1e-3, T_W 1, eta 0.1 (0.999 when forcing is present).
//
// Runners write their outputs atomically (temp file + rename) into an output
// directory and identify the originating config by a 64-bit FNV-1a digest of
// its resolved canonical serialization.

#include <filesystem>
#include <string>

#include <json.hpp>

#include "beamlab/certificates.hpp"

namespace beamlab {

struct ExperimentConfig {
    int N = 0;
    double T = 0.0;
    NonlinearitySpec f;
    ModalForcing forcing;
    ModeVector u0, v0; // always explicit after parsing
    SolverOptions solver;
    double eta = 0.1;
    double T_W = 1.0;
    bool has_pattern = false; // initial data given in pattern form
    int pattern_j = 0;
    double pattern_amplitude = 0.0;
    double pattern_residual = 0.01;
    bool has_bracket = false;
    std::pair<double, double> bracket{0.0, 0.0};
    double bracket_step = 0.05;
};

// Read a real-valued field that is either a JSON number or an expression
// string; anything else raises ConfigError.
double real_field(const nlohmann::json& value, const std::string& name);

ExperimentConfig parse_config(const nlohmann::json& doc);
ExperimentConfig load_config(const std::filesystem::path& path);

// Fully explicit re-serialization: pattern initial data expanded to arrays,
// expression strings evaluated, defaults materialized.  Idempotent under
// parse_config ∘ resolved_config_json.
nlohmann::json resolved_config_json(const ExperimentConfig& cfg);

// FNV-1a 64-bit hash of the canonical (sorted-key) dump, as 16 hex digits.
std::string config_digest(const nlohmann::json& doc);

// Write text to path atomically: temp file in the same directory, then rename.
void write_file_atomic(const std::filesystem::path& path, const std::string& text);

ModalState initial_state(const ExperimentConfig& cfg);

// Subcommand runners; each writes its artifacts under out_dir and throws on
// failure (ConfigError, SolverError, NoPrevailingModeError, ...).
void run_simulate(const ExperimentConfig& cfg, const std::filesystem::path& out_dir);
void run_detect(const ExperimentConfig& cfg, const std::filesystem::path& out_dir);
void run_threshold(const ExperimentConfig& cfg, const std::filesystem::path& out_dir);
void run_certify(const ExperimentConfig& cfg, const std::filesystem::path& out_dir);

// Canned studies: two-row amplitude table, threshold table over prevailing
// modes (filtered by `modes`, empty = all), the certified small-amplitude
// example, and the two forced asymmetric scenarios.  Each writes report.json
// plus per-run CSVs; sub-run failures are recorded in the report without
// aborting siblings.
void run_reproduce(const std::string& target, const std::vector<int>& modes,
                   const std::filesystem::path& out_dir);

} // namespace beamlab

#pragma once

#include "plap/integrate.hpp"

#include <cstdint>
#include <string>

namespace plap {

/// Raised on malformed configuration text, unknown keys, or invalid values.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Parsed run configuration. The format is strict line-oriented
/// `key = value` with dotted sections; unknown keys are an error.
struct RunConfig {
    ProblemSpec problem;

    double grid_R = 8.0;
    int grid_m = 65;

    StepConfig step;

    // simulate | validate | contract | absorb | compact | attractor
    std::string experiment;

    double run_T = 1.0;
    int run_checkpoints = 16;
    double run_burn_in = 4.0;
    int run_snapshots = 4;

    int ensemble_size = 10;
    double ensemble_norm_min = 1.0;
    double ensemble_norm_max = 1.0;
    bool ensemble_rho_scaled = false;  // interpret norms as multiples of rho
    double attractor_tol = 1e-6;

    std::string io_dir = "out";
    int io_snapshot_every = 0;  // steps between snapshots; 0 = final only
    std::string io_ledger = "ledger.csv";
    std::string io_restart;  // optional snapshot to resume from

    std::uint64_t seed = 1;

    std::string raw_text;  // exact bytes the config was parsed from
};

RunConfig parse_config_text(const std::string& text);
RunConfig parse_config_file(const std::string& path);

/// FNV-1a 64 over the raw config bytes, as a fixed-width hex string.
std::string config_hash_hex(const RunConfig& cfg);

/// Canonical text form of the configuration; parse_config_text of the result
/// reproduces the same settings (serialization is a fixed point).
std::string serialize_config(const RunConfig& cfg);

} // namespace plap

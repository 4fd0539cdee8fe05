#pragma once

#include "plap/integrate.hpp"

#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace plap {

/// Shared setup for multi-trajectory experiments. The problem, grid and
/// stepping are shared read-only; trajectories evolve independently (and
/// concurrently) with deterministic, index-ordered aggregation.
struct EnsembleRun {
    const ProblemSpec* problem = nullptr;
    const Grid* grid = nullptr;
    StepConfig cfg;
    GradientMode mode = GradientMode::isotropic;
    std::vector<Field> initials;
    double horizon = 1.0;
    std::vector<double> checkpoint_times;  // sorted, <= horizon

    void validate() const;
};

// --- contraction -------------------------------------------------------------

struct ContractionReport {
    double c_used = 0.0;
    double initial_distance = 0.0;
    std::vector<std::pair<double, double>> ratios;  // (t, ||u-v|| / (e^{ct} d0))
    double max_ratio = 0.0;
    bool pass = false;
};

/// Co-evolves two trajectories with identical stepping and reports the
/// normalized separation against the e^{ct} envelope at every checkpoint.
/// Throws on coincident initial data (the ratio is undefined).
ContractionReport contraction_test(const ProblemSpec& spec, const Grid& grid, const Field& u0,
                                   const Field& v0, double T, const StepConfig& cfg,
                                   int checkpoints = 16,
                                   GradientMode mode = GradientMode::isotropic);

// --- absorbing set -----------------------------------------------------------

/// Constants of the discrete dissipation inequality
///   d/dt ||u||^2 + c1 ||u||^2 <= c2 ||g||^2 + 2,
/// derived from the estimated embedding constant Ch:
///   c1 = min(1, Ch^-2)/2,  c2 = 2/c1,  rho^2 = (c2 ||g||^2 + 2)/c1 + 1.
/// The derivation is documented in the README.
struct DissipativeConstants {
    double embedding = 0.0;  // Ch
    double c1 = 0.0;
    double c2 = 0.0;
    double g_l2_sq = 0.0;
    double rho_sq = 0.0;
};

DissipativeConstants absorbing_constants(const Grid& grid, double p,
                                         int estimator_trials = 200, int estimator_steps = 50);

struct AbsorbEntry {
    double u0_l2 = 0.0;
    bool entered = false;
    double entry_time = -1.0;
    bool exited = false;
    bool has_rate = false;
    double rate = 0.0;  // fitted decay of log ||u||^2 while ||u||^2 > 2 rho^2
};

struct AbsorbReport {
    DissipativeConstants constants;
    std::vector<AbsorbEntry> entries;
    bool has_c1_emp = false;
    double c1_emp = 0.0;  // most conservative fitted rate across trajectories
    bool pass = false;    // all entered, none exited, c1_emp >= c1 when measured
};

AbsorbReport absorbing_test(const ProblemSpec& spec, const Grid& grid,
                            const std::vector<Field>& initials, double T, const StepConfig& cfg,
                            GradientMode mode = GradientMode::isotropic);

// --- asymptotic compactness diagnostics --------------------------------------

/// The quantitative separation envelope
///   env(T, eps) = 2 c1^2 eps/(T-eps) + c5/(T-eps) * { log(T/(2 eps))            p = 2
///                                                   { (p-1)/(p-2) (T^((p-2)/(p-1)) - (2 eps)^((p-2)/(p-1)))  p > 2
/// defined for T >= 2 eps.
double compactness_envelope(double p, double T, double eps, double c1, double c5);

struct CompactReport {
    std::vector<double> times;
    std::vector<double> diameters;                    // D(t) = max pairwise L2 distance
    std::vector<std::vector<double>> distance_matrices;  // row-major per checkpoint
    bool shrinkage_pass = false;  // D(last) < D(first), or fully collapsed
    double epsilon = 0.0;
    double c1_bound = 0.0;  // post-absorption L2 bound used in the envelope (rho)
    double c5 = 0.0;        // least-squares fit over the early window
    double late_min_dsq = 0.0;
    double env_at_late_min = 0.0;
    bool envelope_pass = false;
    bool pass = false;
};

/// Diameter-shrinkage diagnostic: this is a quantitative trend check on a
/// finite ensemble, not a compactness proof (finite grids are always locally
/// compact); reports label it accordingly.
CompactReport compactness_probe(const EnsembleRun& run);

// --- attractor sampling -------------------------------------------------------

/// Evolves the ensemble past T_burn and returns n_snapshots per trajectory
/// (trajectory-major order) as an empirical attractor sample.
std::vector<Field> attractor_sample(const ProblemSpec& spec, const Grid& grid,
                                    const std::vector<Field>& initials, double T_burn,
                                    int n_snapshots, const StepConfig& cfg,
                                    GradientMode mode = GradientMode::isotropic);

// --- report serialization (schema: spec_hash, rho_sq, c1_h, c1_emp, entries,
//     contraction, diameters, envelope) ---------------------------------------

std::string to_report_json(const ContractionReport& r, std::string_view spec_hash);
std::string to_report_json(const AbsorbReport& r, std::string_view spec_hash);
std::string to_report_json(const CompactReport& r, std::string_view spec_hash);
/// Attractor runs report snapshot norms and the cluster spread.
std::string attractor_report_json(const Grid& grid, const std::vector<Field>& snapshots,
                                  double spread, double tolerance, bool pass,
                                  std::string_view spec_hash);

} // namespace plap

#include "plap/dynamics.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <stdexcept>

namespace plap {

namespace {

using ordered_json = nlohmann::ordered_json;

std::vector<double> uniform_checkpoints(double T, int count) {
    std::vector<double> ts(count);
    for (int k = 1; k <= count; ++k) ts[k - 1] = T * k / count;
    return ts;
}

// Snapshots of one trajectory at the given sorted times (plus returned rows).
struct TrajectoryResult {
    std::vector<Field> snapshots;
    EnergyLedger ledger;
};

TrajectoryResult evolve_trajectory(const ProblemSpec& spec, const DiscreteOperator& op,
                                   const Field& u0, const std::vector<double>& times,
                                   const StepConfig& cfg) {
    TrajectoryResult out;
    State s{u0, 0.0};
    auto sink = out.ledger.sink();
    for (double t : times) {
        s = run_to_time(std::move(s), t, cfg, op, spec.nonlinearity, spec.c_mono, sink);
        out.snapshots.push_back(s.u);
    }
    return out;
}

std::vector<TrajectoryResult> evolve_ensemble(const ProblemSpec& spec, const DiscreteOperator& op,
                                              const std::vector<Field>& initials,
                                              const std::vector<double>& times,
                                              const StepConfig& cfg) {
    std::vector<std::future<TrajectoryResult>> futures;
    futures.reserve(initials.size());
    for (const Field& u0 : initials)
        futures.push_back(std::async(std::launch::async, [&spec, &op, &u0, &times, &cfg] {
            return evolve_trajectory(spec, op, u0, times, cfg);
        }));
    std::vector<TrajectoryResult> results;
    results.reserve(initials.size());
    for (auto& f : futures) results.push_back(f.get());  // index order, not completion order
    return results;
}

double distance_l2(const Grid& g, const Field& a, const Field& b) {
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
    return std::sqrt(s * g.cell_volume());
}

} // namespace

void EnsembleRun::validate() const {
    if (!problem || !grid) throw std::invalid_argument("EnsembleRun: missing problem/grid");
    if (initials.empty()) throw std::invalid_argument("EnsembleRun: no initial fields");
    for (const Field& u : initials)
        if (u.size() != grid->interior_count())
            throw std::invalid_argument("EnsembleRun: initial field shape mismatch");
    if (!std::is_sorted(checkpoint_times.begin(), checkpoint_times.end()))
        throw std::invalid_argument("EnsembleRun: checkpoint times must be sorted");
    if (!checkpoint_times.empty() && checkpoint_times.back() > horizon + 1e-12)
        throw std::invalid_argument("EnsembleRun: checkpoints must not exceed the horizon");
}

ContractionReport contraction_test(const ProblemSpec& spec, const Grid& grid, const Field& u0,
                                   const Field& v0, double T, const StepConfig& cfg,
                                   int checkpoints, GradientMode mode) {
    const double d0 = distance_l2(grid, u0, v0);
    if (d0 == 0.0)
        throw std::invalid_argument("contraction_test: coincident initial data (ratio undefined)");

    const DiscreteOperator op(grid, spec.p, mode);
    const auto times = uniform_checkpoints(T, checkpoints);

    ContractionReport rep;
    rep.c_used = spec.c_mono;
    rep.initial_distance = d0;

    State a{u0, 0.0}, b{v0, 0.0};
    rep.max_ratio = 0.0;
    for (double t : times) {
        a = run_to_time(std::move(a), t, cfg, op, spec.nonlinearity, spec.c_mono);
        b = run_to_time(std::move(b), t, cfg, op, spec.nonlinearity, spec.c_mono);
        const double ratio = distance_l2(grid, a.u, b.u) / (std::exp(rep.c_used * t) * d0);
        rep.ratios.emplace_back(t, ratio);
        rep.max_ratio = std::max(rep.max_ratio, ratio);
    }
    rep.pass = rep.max_ratio <= 1.0 + 1e-8;
    return rep;
}

DissipativeConstants absorbing_constants(const Grid& grid, double p, int estimator_trials,
                                         int estimator_steps) {
    DissipativeConstants c;
    c.embedding = estimate_embedding_constant(grid, p, estimator_trials, estimator_steps);
    c.c1 = 0.5 * std::min(1.0, 1.0 / (c.embedding * c.embedding));
    c.c2 = 2.0 / c.c1;
    double gsq = 0.0;
    for (double g : grid.g_nodes) gsq += g * g;
    c.g_l2_sq = gsq * grid.cell_volume();
    c.rho_sq = (c.c2 * c.g_l2_sq + 2.0) / c.c1 + 1.0;
    return c;
}

AbsorbReport absorbing_test(const ProblemSpec& spec, const Grid& grid,
                            const std::vector<Field>& initials, double T, const StepConfig& cfg,
                            GradientMode mode) {
    AbsorbReport rep;
    rep.constants = absorbing_constants(grid, spec.p);
    const DiscreteOperator op(grid, spec.p, mode);

    const std::vector<double> times{T};
    const auto results = evolve_ensemble(spec, op, initials, times, cfg);

    bool all_entered = true, none_exited = true;
    rep.has_c1_emp = false;
    for (std::size_t i = 0; i < initials.size(); ++i) {
        AbsorbEntry e;
        e.u0_l2 = l2_norm(grid, initials[i]);

        // l2^2 trace: initial point plus one sample per accepted step
        std::vector<std::pair<double, double>> trace;
        trace.emplace_back(0.0, e.u0_l2 * e.u0_l2);
        for (const LedgerRow& row : results[i].ledger.rows) trace.emplace_back(row.t, row.l2_sq);

        for (const auto& [t, nsq] : trace) {
            if (!e.entered && nsq <= rep.constants.rho_sq) {
                e.entered = true;
                e.entry_time = t;
            } else if (e.entered && nsq > rep.constants.rho_sq) {
                e.exited = true;
            }
        }

        // decay-rate fit on the window above 2 rho^2
        std::vector<std::pair<double, double>> window;
        for (const auto& [t, nsq] : trace) {
            if (nsq > 2.0 * rep.constants.rho_sq)
                window.emplace_back(t, std::log(nsq));
            else
                break;
        }
        if (window.size() >= 3) {
            double st = 0, sy = 0, stt = 0, sty = 0;
            for (const auto& [t, y] : window) {
                st += t;
                sy += y;
                stt += t * t;
                sty += t * y;
            }
            const double n = static_cast<double>(window.size());
            const double slope = (n * sty - st * sy) / (n * stt - st * st);
            e.has_rate = true;
            e.rate = -slope;
            if (!rep.has_c1_emp || e.rate < rep.c1_emp) {
                rep.has_c1_emp = true;
                rep.c1_emp = e.rate;
            }
        }

        all_entered = all_entered && e.entered;
        none_exited = none_exited && !e.exited;
        rep.entries.push_back(e);
    }

    rep.pass = all_entered && none_exited &&
               (!rep.has_c1_emp || rep.c1_emp >= rep.constants.c1);
    return rep;
}

double compactness_envelope(double p, double T, double eps, double c1, double c5) {
    if (!(eps > 0.0) || !(T >= 2.0 * eps))
        throw std::invalid_argument("compactness_envelope: need 0 < 2 eps <= T");
    const double base = 2.0 * c1 * c1 * eps / (T - eps);
    double shape;
    if (p == 2.0) {
        shape = std::log(T / (2.0 * eps));
    } else {
        const double e = (p - 2.0) / (p - 1.0);
        shape = (p - 1.0) / (p - 2.0) * (std::pow(T, e) - std::pow(2.0 * eps, e));
    }
    return base + c5 * shape / (T - eps);
}

CompactReport compactness_probe(const EnsembleRun& run) {
    run.validate();
    if (run.initials.size() < 3)
        throw std::invalid_argument("compactness_probe: need at least 3 trajectories");

    const ProblemSpec& spec = *run.problem;
    const Grid& grid = *run.grid;
    const DiscreteOperator op(grid, spec.p, run.mode);

    CompactReport rep;
    rep.times = run.checkpoint_times.empty() ? uniform_checkpoints(run.horizon, 16)
                                             : run.checkpoint_times;
    const auto results = evolve_ensemble(spec, op, run.initials, rep.times, run.cfg);

    const std::size_t K = run.initials.size();
    for (std::size_t c = 0; c < rep.times.size(); ++c) {
        std::vector<double> dm(K * K, 0.0);
        double diam = 0.0;
        for (std::size_t i = 0; i < K; ++i)
            for (std::size_t j = i + 1; j < K; ++j) {
                const double d = distance_l2(grid, results[i].snapshots[c], results[j].snapshots[c]);
                dm[i * K + j] = dm[j * K + i] = d;
                diam = std::max(diam, d);
            }
        rep.distance_matrices.push_back(std::move(dm));
        rep.diameters.push_back(diam);
    }

    rep.shrinkage_pass =
        rep.diameters.back() < rep.diameters.front() || rep.diameters.back() == 0.0;

    // envelope: eps = T/8, c1 = rho (post-absorption L2 bound), c5 fitted by
    // least squares on the early half of the admissible window, tested on the
    // late half (liminf-style: one late checkpoint inside the envelope).
    rep.epsilon = run.horizon / 8.0;
    rep.c1_bound = std::sqrt(absorbing_constants(grid, spec.p).rho_sq);

    std::vector<std::size_t> admissible;
    for (std::size_t c = 0; c < rep.times.size(); ++c)
        if (rep.times[c] >= 2.0 * rep.epsilon) admissible.push_back(c);
    if (admissible.size() < 2) throw std::invalid_argument("compactness_probe: too few checkpoints");
    const std::size_t half = admissible.size() / 2;

    double sw2 = 0.0, swy = 0.0;
    for (std::size_t k = 0; k < half; ++k) {
        const std::size_t c = admissible[k];
        const double t = rep.times[c];
        const double base = compactness_envelope(spec.p, t, rep.epsilon, rep.c1_bound, 0.0);
        const double w = compactness_envelope(spec.p, t, rep.epsilon, 0.0, 1.0);
        const double y = rep.diameters[c] * rep.diameters[c] - base;
        sw2 += w * w;
        swy += w * y;
    }
    rep.c5 = sw2 > 0.0 ? std::max(0.0, swy / sw2) : 0.0;

    rep.late_min_dsq = std::numeric_limits<double>::infinity();
    rep.envelope_pass = false;
    for (std::size_t k = half; k < admissible.size(); ++k) {
        const std::size_t c = admissible[k];
        const double dsq = rep.diameters[c] * rep.diameters[c];
        const double env =
            compactness_envelope(spec.p, rep.times[c], rep.epsilon, rep.c1_bound, rep.c5);
        if (dsq < rep.late_min_dsq) {
            rep.late_min_dsq = dsq;
            rep.env_at_late_min = env;
        }
        if (dsq <= env) rep.envelope_pass = true;
    }

    rep.pass = rep.shrinkage_pass && rep.envelope_pass;
    return rep;
}

std::vector<Field> attractor_sample(const ProblemSpec& spec, const Grid& grid,
                                    const std::vector<Field>& initials, double T_burn,
                                    int n_snapshots, const StepConfig& cfg, GradientMode mode) {
    if (n_snapshots < 1) throw std::invalid_argument("attractor_sample: need n_snapshots >= 1");
    const DiscreteOperator op(grid, spec.p, mode);

    std::vector<double> times;
    const double interval = T_burn / (4.0 * n_snapshots);
    for (int j = 1; j <= n_snapshots; ++j) times.push_back(T_burn + j * interval);

    const auto results = evolve_ensemble(spec, op, initials, times, cfg);
    std::vector<Field> snaps;
    for (const auto& r : results)
        for (const Field& s : r.snapshots) snaps.push_back(s);
    return snaps;
}

// --- JSON ---------------------------------------------------------------------

namespace {

ordered_json report_skeleton(std::string_view spec_hash) {
    ordered_json j;
    j["spec_hash"] = std::string(spec_hash);
    j["rho_sq"] = nullptr;
    j["c1_h"] = nullptr;
    j["c1_emp"] = nullptr;
    j["entries"] = ordered_json::array();
    j["contraction"] = ordered_json::array();
    j["diameters"] = ordered_json::array();
    j["envelope"] = nullptr;
    return j;
}

} // namespace

std::string to_report_json(const ContractionReport& r, std::string_view spec_hash) {
    ordered_json j = report_skeleton(spec_hash);
    for (const auto& [t, ratio] : r.ratios)
        j["contraction"].push_back({{"t", t}, {"ratio", ratio}});
    j["contraction_c"] = r.c_used;
    j["initial_distance"] = r.initial_distance;
    j["max_ratio"] = r.max_ratio;
    j["pass"] = r.pass;
    return j.dump(2);
}

std::string to_report_json(const AbsorbReport& r, std::string_view spec_hash) {
    ordered_json j = report_skeleton(spec_hash);
    j["rho_sq"] = r.constants.rho_sq;
    j["c1_h"] = r.constants.c1;
    if (r.has_c1_emp) j["c1_emp"] = r.c1_emp;
    j["c2_h"] = r.constants.c2;
    j["embedding_constant"] = r.constants.embedding;
    for (const AbsorbEntry& e : r.entries) {
        ordered_json je;
        je["u0_l2"] = e.u0_l2;
        je["entry_time"] = e.entered ? ordered_json(e.entry_time) : ordered_json(nullptr);
        je["exited"] = e.exited;
        if (e.has_rate) je["rate"] = e.rate;
        j["entries"].push_back(je);
    }
    j["pass"] = r.pass;
    return j.dump(2);
}

std::string to_report_json(const CompactReport& r, std::string_view spec_hash) {
    ordered_json j = report_skeleton(spec_hash);
    for (std::size_t c = 0; c < r.times.size(); ++c)
        j["diameters"].push_back({r.times[c], r.diameters[c]});
    ordered_json env;
    env["epsilon"] = r.epsilon;
    env["c1"] = r.c1_bound;
    env["c5"] = r.c5;
    env["late_min_dsq"] = r.late_min_dsq;
    env["env_value"] = r.env_at_late_min;
    env["pass"] = r.envelope_pass;
    env["note"] = "diameter-shrinkage diagnostic with fitted envelope, not a compactness proof";
    j["envelope"] = env;
    j["shrinkage_pass"] = r.shrinkage_pass;
    j["pass"] = r.pass;
    return j.dump(2);
}

std::string attractor_report_json(const Grid& grid, const std::vector<Field>& snapshots,
                                  double spread, double tolerance, bool pass,
                                  std::string_view spec_hash) {
    ordered_json j = report_skeleton(spec_hash);
    ordered_json norms = ordered_json::array();
    for (const Field& s : snapshots) norms.push_back(l2_norm(grid, s));
    j["snapshot_norms"] = norms;
    j["cluster_spread"] = spread;
    j["cluster_tolerance"] = tolerance;
    j["pass"] = pass;
    return j.dump(2);
}

} // namespace plap

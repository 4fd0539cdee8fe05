#include "plap/config.hpp"
#include "plap/dynamics.hpp"
#include "plap/snapshot.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;
using namespace plap;

namespace {

constexpr int kExitPass = 0;
constexpr int kExitCriterionFail = 1;
constexpr int kExitConfigError = 2;
constexpr int kExitSolverFail = 3;

struct CliOptions {
    std::string config_path;
    std::string out_dir;  // overrides io.dir when given
    std::uint64_t seed = 0;
    bool seed_given = false;
    bool strict_paper = false;
};

struct LoadedRun {
    RunConfig cfg;
    Grid grid;
    std::string hash;
    fs::path out;
};

LoadedRun load(const CliOptions& opt, const std::string& subcommand) {
    RunConfig cfg = parse_config_file(opt.config_path);
    if (!cfg.experiment.empty() && cfg.experiment != subcommand)
        throw ConfigError("config: experiment '" + cfg.experiment +
                          "' does not match subcommand '" + subcommand + "'");
    cfg.experiment = subcommand;
    if (opt.seed_given) cfg.seed = opt.seed;
    if (!opt.out_dir.empty()) cfg.io_dir = opt.out_dir;
    cfg.problem.check_basic(opt.strict_paper);

    LoadedRun run{std::move(cfg), Grid{}, "", {}};
    run.grid = Grid::build(run.cfg.problem, run.cfg.grid_R, run.cfg.grid_m);
    run.hash = config_hash_hex(run.cfg);
    run.out = fs::path(run.cfg.io_dir);
    fs::create_directories(run.out);
    return run;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("cannot write '" + path.string() + "'");
    os << text;
}

std::vector<Field> seeded_initials(const Grid& grid, std::uint64_t seed, int count,
                                   double norm_min, double norm_max) {
    Rng rng(seed);
    std::vector<Field> fields;
    for (int k = 0; k < count; ++k) {
        const double target =
            count > 1 ? norm_min * std::pow(norm_max / norm_min, double(k) / (count - 1))
                      : norm_min;
        fields.push_back(random_smooth_field(grid, rng, target));
    }
    return fields;
}

int dump_failure(const LoadedRun& run, const IntegratorFailure& err) {
    const fs::path dump = run.out / "failure_dump.plap";
    const fs::path note = run.out / "failure_dump.txt";
    try {
        write_snapshot(dump.string(), run.grid, err.last_state);
        write_text(note, std::string(err.what()) + "\n" + err.diagnostic + "\n");
    } catch (const std::exception&) {
        // the dump is best-effort; the exit code still reports the failure
    }
    std::cerr << "solver failure: " << err.what() << "\ndiagnostic dump: " << dump.string()
              << std::endl;
    return kExitSolverFail;
}

int cmd_validate(const CliOptions& opt) {
    // parse without building the grid: admissibility becomes a reported check
    RunConfig cfg = parse_config_file(opt.config_path);
    if (!cfg.experiment.empty() && cfg.experiment != "validate")
        throw ConfigError("config: experiment '" + cfg.experiment + "' does not match 'validate'");
    if (opt.seed_given) cfg.seed = opt.seed;
    if (!opt.out_dir.empty()) cfg.io_dir = opt.out_dir;
    cfg.problem.check_basic(opt.strict_paper);
    const fs::path out(cfg.io_dir);
    fs::create_directories(out);

    auto reports = validate_all(cfg.problem, cfg.problem.r0, opt.strict_paper);
    ValidationReport grid_check;
    grid_check.condition = "grid admissibility";
    try {
        Grid::build(cfg.problem, cfg.grid_R, cfg.grid_m);
        grid_check.pass = true;
        grid_check.details = "coefficient samples finite, sigma/beta nonnegative";
    } catch (const std::exception& e) {
        grid_check.pass = false;
        grid_check.details = e.what();
    }
    reports.push_back(grid_check);

    nlohmann::ordered_json j;
    j["spec_hash"] = config_hash_hex(cfg);
    bool all_pass = true;
    for (const auto& rep : reports) {
        nlohmann::ordered_json item;
        item["condition"] = rep.condition;
        item["pass"] = rep.pass;
        item["metric"] = rep.metric;
        item["details"] = rep.details;
        j["checks"].push_back(item);
        all_pass = all_pass && rep.pass;
        if (!rep.pass) std::cerr << "validation failed: " << rep.condition << std::endl;
    }
    j["pass"] = all_pass;
    write_text(out / "validate_report.json", j.dump(2));
    return all_pass ? kExitPass : kExitCriterionFail;
}

int cmd_simulate(const CliOptions& opt) {
    const LoadedRun run = load(opt, "simulate");
    const ProblemSpec& spec = run.cfg.problem;
    const DiscreteOperator op(run.grid, spec.p);

    State state;
    if (!run.cfg.io_restart.empty()) {
        const SnapshotData snap = read_snapshot(run.cfg.io_restart);
        if (snap.n != run.grid.n || snap.m != run.grid.m || snap.R != run.grid.R)
            throw ConfigError("restart snapshot does not match the configured grid");
        state = State{snap.u, snap.t};
    } else {
        Rng rng(run.cfg.seed);
        state = State{run.cfg.ensemble_norm_min > 0.0
                          ? random_smooth_field(run.grid, rng, run.cfg.ensemble_norm_min)
                          : Field(run.grid.interior_count(), 0.0),
                      0.0};
    }

    EnergyLedger ledger;
    long step_index = 0;

    // snapshot cadence requires the state, so step manually instead of run_to_time
    try {
        const double T = run.cfg.run_T;
        const double eps_t = 1e-9 * run.cfg.step.dt;
        while (T - state.t > eps_t) {
            StepConfig local = run.cfg.step;
            const double remaining = T - state.t;
            local.dt = remaining < run.cfg.step.dt * (1.0 + 1e-9) ? remaining : run.cfg.step.dt;
            auto [next, row] = run.cfg.step.scheme == StepConfig::Scheme::implicit
                                   ? step_implicit(state, op, spec.nonlinearity, local, spec.c_mono)
                                   : step_explicit(state, op, spec.nonlinearity, local);
            state = std::move(next);
            ledger.append(row);
            ++step_index;
            if (run.cfg.io_snapshot_every > 0 && step_index % run.cfg.io_snapshot_every == 0) {
                char name[64];
                std::snprintf(name, sizeof name, "snapshot_%06ld.plap", step_index);
                write_snapshot((run.out / name).string(), run.grid, state);
            }
        }
    } catch (const IntegratorFailure& err) {
        return dump_failure(run, err);
    }

    std::ofstream csv(run.out / run.cfg.io_ledger, std::ios::binary | std::ios::trunc);
    ledger.write_csv(csv);
    write_snapshot((run.out / "final.plap").string(), run.grid, state);
    write_field_csv((run.out / "final.csv").string(), run.grid, state.u);

    char final_norm[64];
    std::snprintf(final_norm, sizeof final_norm, "%.17g", l2_norm(run.grid, state.u));
    std::cout << final_norm << std::endl;
    return kExitPass;
}

int cmd_contract(const CliOptions& opt) {
    const LoadedRun run = load(opt, "contract");
    const auto initials =
        seeded_initials(run.grid, run.cfg.seed, 2, run.cfg.ensemble_norm_min,
                        std::max(run.cfg.ensemble_norm_min, run.cfg.ensemble_norm_max));
    try {
        const ContractionReport rep =
            contraction_test(run.cfg.problem, run.grid, initials[0], initials[1], run.cfg.run_T,
                             run.cfg.step, run.cfg.run_checkpoints);
        write_text(run.out / "contract_report.json", to_report_json(rep, run.hash));
        return rep.pass ? kExitPass : kExitCriterionFail;
    } catch (const IntegratorFailure& err) {
        return dump_failure(run, err);
    }
}

int cmd_absorb(const CliOptions& opt) {
    const LoadedRun run = load(opt, "absorb");
    try {
        double norm_min = run.cfg.ensemble_norm_min, norm_max = run.cfg.ensemble_norm_max;
        if (run.cfg.ensemble_rho_scaled) {
            const double rho =
                std::sqrt(absorbing_constants(run.grid, run.cfg.problem.p).rho_sq);
            norm_min *= rho;
            norm_max *= rho;
        }
        const auto initials =
            seeded_initials(run.grid, run.cfg.seed, run.cfg.ensemble_size, norm_min, norm_max);
        const AbsorbReport rep =
            absorbing_test(run.cfg.problem, run.grid, initials, run.cfg.run_T, run.cfg.step);
        write_text(run.out / "absorb_report.json", to_report_json(rep, run.hash));
        return rep.pass ? kExitPass : kExitCriterionFail;
    } catch (const IntegratorFailure& err) {
        return dump_failure(run, err);
    }
}

int cmd_compact(const CliOptions& opt) {
    const LoadedRun run = load(opt, "compact");
    try {
        EnsembleRun ens;
        ens.problem = &run.cfg.problem;
        ens.grid = &run.grid;
        ens.cfg = run.cfg.step;
        ens.initials = seeded_initials(run.grid, run.cfg.seed, run.cfg.ensemble_size,
                                       run.cfg.ensemble_norm_min, run.cfg.ensemble_norm_max);
        ens.horizon = run.cfg.run_T;
        for (int k = 1; k <= run.cfg.run_checkpoints; ++k)
            ens.checkpoint_times.push_back(run.cfg.run_T * k / run.cfg.run_checkpoints);
        const CompactReport rep = compactness_probe(ens);
        write_text(run.out / "compact_report.json", to_report_json(rep, run.hash));
        return rep.pass ? kExitPass : kExitCriterionFail;
    } catch (const IntegratorFailure& err) {
        return dump_failure(run, err);
    }
}

int cmd_attractor(const CliOptions& opt) {
    const LoadedRun run = load(opt, "attractor");
    try {
        const auto initials = seeded_initials(run.grid, run.cfg.seed, run.cfg.ensemble_size,
                                              run.cfg.ensemble_norm_min, run.cfg.ensemble_norm_max);
        const auto snaps = attractor_sample(run.cfg.problem, run.grid, initials,
                                            run.cfg.run_burn_in, run.cfg.run_snapshots,
                                            run.cfg.step);
        // cluster criterion: every snapshot within tolerance of the mean
        Field mean(run.grid.interior_count(), 0.0);
        for (const Field& s : snaps)
            for (std::size_t k = 0; k < mean.size(); ++k) mean[k] += s[k] / snaps.size();
        double spread = 0.0;
        for (const Field& s : snaps) {
            Field d = s;
            for (std::size_t k = 0; k < d.size(); ++k) d[k] -= mean[k];
            spread = std::max(spread, l2_norm(run.grid, d));
        }
        const bool pass = spread <= run.cfg.attractor_tol;
        write_text(run.out / "attractor_report.json",
                   attractor_report_json(run.grid, snaps, spread, run.cfg.attractor_tol, pass,
                                         run.hash));
        for (std::size_t i = 0; i < snaps.size(); ++i) {
            char name[64];
            std::snprintf(name, sizeof name, "attractor_%03zu.plap", i);
            write_snapshot((run.out / name).string(), run.grid, State{snaps[i], run.cfg.run_burn_in});
        }
        return pass ? kExitPass : kExitCriterionFail;
    } catch (const IntegratorFailure& err) {
        return dump_failure(run, err);
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"parabolic p-Laplacian solver and dynamics diagnostics"};
    app.require_subcommand(1);

    CliOptions opt;
    const auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", opt.config_path, "configuration file")->required();
        sub->add_option("--out", opt.out_dir, "output directory (overrides io.dir)");
        sub->add_option("--seed", opt.seed, "seed override")->each([&](const std::string&) {
            opt.seed_given = true;
        });
        sub->add_flag("--strict-paper", opt.strict_paper, "enforce dim >= 2");
    };

    std::map<std::string, int (*)(const CliOptions&)> handlers{
        {"validate", cmd_validate}, {"simulate", cmd_simulate},   {"contract", cmd_contract},
        {"absorb", cmd_absorb},     {"compact", cmd_compact},     {"attractor", cmd_attractor}};
    for (const auto& entry : handlers) add_common(app.add_subcommand(entry.first));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfigError;
    }

    const std::string sub = app.get_subcommands().front()->get_name();
    try {
        return handlers.at(sub)(opt);
    } catch (const ConfigError& e) {
        std::cerr << e.what() << std::endl;
        return kExitConfigError;
    } catch (const std::invalid_argument& e) {
        std::cerr << e.what() << std::endl;
        return kExitConfigError;
    } catch (const IntegratorFailure& e) {
        std::cerr << e.what() << std::endl;
        return kExitSolverFail;
    } catch (const ExplicitStabilityViolation& e) {
        std::cerr << e.what() << std::endl;
        return kExitSolverFail;
    } catch (const std::exception& e) {
        std::cerr << e.what() << std::endl;
        return kExitCriterionFail;
    }
}

#include "plap/config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <sstream>
#include <vector>

namespace plap {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

double parse_double(const std::string& key, const std::string& v) {
    std::size_t pos = 0;
    double x;
    try {
        x = std::stod(v, &pos);
    } catch (const std::exception&) {
        throw ConfigError("config: bad number for '" + key + "': " + v);
    }
    if (pos != v.size()) throw ConfigError("config: trailing junk in number for '" + key + "'");
    return x;
}

int parse_int(const std::string& key, const std::string& v) {
    const double x = parse_double(key, v);
    const int i = static_cast<int>(x);
    if (static_cast<double>(i) != x) throw ConfigError("config: '" + key + "' must be an integer");
    return i;
}

std::uint64_t parse_u64(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const std::uint64_t x = std::stoull(v, &pos);
        if (pos != v.size()) throw ConfigError("config: trailing junk in '" + key + "'");
        return x;
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception&) {
        throw ConfigError("config: bad unsigned integer for '" + key + "': " + v);
    }
}

bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw ConfigError("config: '" + key + "' must be true/false");
}

std::vector<double> parse_double_list(const std::string& key, const std::string& v) {
    std::vector<double> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(parse_double(key, trim(item)));
    return out;
}

using KvMap = std::map<std::string, std::string>;

// consume key if present; erasing marks it as recognized
bool take(KvMap& kv, const std::string& key, std::string& out) {
    const auto it = kv.find(key);
    if (it == kv.end()) return false;
    out = it->second;
    kv.erase(it);
    return true;
}

CoefficientProfile parse_profile(KvMap& kv, const std::string& prefix, double fallback_constant) {
    std::string kind;
    if (!take(kv, prefix + ".kind", kind)) return CoefficientProfile::constant(fallback_constant);

    std::string v;
    if (kind == "constant") {
        double value = fallback_constant;
        if (take(kv, prefix + ".value", v)) value = parse_double(prefix + ".value", v);
        return CoefficientProfile::constant(value);
    }
    if (kind == "power_law") {
        if (!take(kv, prefix + ".alpha", v))
            throw ConfigError("config: " + prefix + ".alpha required for power_law");
        const double alpha = parse_double(prefix + ".alpha", v);
        double amplitude = 1.0, offset = 0.0;
        if (take(kv, prefix + ".amplitude", v)) amplitude = parse_double(prefix + ".amplitude", v);
        if (take(kv, prefix + ".offset", v)) offset = parse_double(prefix + ".offset", v);
        return CoefficientProfile::power_law(amplitude, alpha, offset);
    }
    if (kind == "two_power") {
        std::string va, vg;
        if (!take(kv, prefix + ".alpha", va) || !take(kv, prefix + ".gamma", vg))
            throw ConfigError("config: " + prefix + ".alpha and .gamma required for two_power");
        return CoefficientProfile::two_power(parse_double(prefix + ".alpha", va),
                                             parse_double(prefix + ".gamma", vg));
    }
    if (kind == "radial_table") {
        if (!take(kv, prefix + ".table", v))
            throw ConfigError("config: " + prefix + ".table required for radial_table");
        std::vector<double> radii, values;
        std::stringstream ss(v);
        std::string pair;
        while (std::getline(ss, pair, ';')) {
            const auto colon = pair.find(':');
            if (colon == std::string::npos)
                throw ConfigError("config: " + prefix + ".table entries must be r:value");
            radii.push_back(parse_double(prefix + ".table", trim(pair.substr(0, colon))));
            values.push_back(parse_double(prefix + ".table", trim(pair.substr(colon + 1))));
        }
        return CoefficientProfile::radial_table(std::move(radii), std::move(values));
    }
    if (kind == "gaussian_bump") {
        double amplitude = 1.0, width = 1.0, offset = 0.0;
        std::vector<double> center;
        if (take(kv, prefix + ".amplitude", v)) amplitude = parse_double(prefix + ".amplitude", v);
        if (take(kv, prefix + ".width", v)) width = parse_double(prefix + ".width", v);
        if (take(kv, prefix + ".offset", v)) offset = parse_double(prefix + ".offset", v);
        if (take(kv, prefix + ".center", v)) center = parse_double_list(prefix + ".center", v);
        return CoefficientProfile::gaussian_bump(amplitude, std::move(center), width, offset);
    }
    throw ConfigError("config: unknown profile kind '" + kind + "' for " + prefix);
}

NonlinearityModel parse_nonlinearity(KvMap& kv) {
    std::string kind;
    if (!take(kv, "f.kind", kind)) return NonlinearityModel::zero();
    std::string v;
    if (kind == "zero") return NonlinearityModel::zero();
    if (kind == "odd_power") {
        double q = 3.0;
        if (take(kv, "f.q", v)) q = parse_double("f.q", v);
        return NonlinearityModel::odd_power(q);
    }
    if (kind == "cubic_minus_linear") {
        double a = 1.0, b = 0.0;
        if (take(kv, "f.a", v)) a = parse_double("f.a", v);
        if (take(kv, "f.b", v)) b = parse_double("f.b", v);
        return NonlinearityModel::cubic_minus_linear(a, b);
    }
    if (kind == "exp_growth") return NonlinearityModel::exp_growth();
    throw ConfigError("config: unknown f.kind '" + kind + "'");
}

} // namespace

RunConfig parse_config_text(const std::string& text) {
    KvMap kv;
    std::stringstream ss(text);
    std::string line;
    int lineno = 0;
    while (std::getline(ss, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config: line " + std::to_string(lineno) + " is not key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty() || value.empty())
            throw ConfigError("config: empty key or value at line " + std::to_string(lineno));
        if (kv.count(key)) throw ConfigError("config: duplicate key '" + key + "'");
        kv[key] = value;
    }

    RunConfig cfg;
    cfg.raw_text = text;
    std::string v;

    if (take(kv, "p", v)) cfg.problem.p = parse_double("p", v);
    if (take(kv, "dim", v)) cfg.problem.dim = parse_int("dim", v);
    cfg.problem.sigma = parse_profile(kv, "sigma", 1.0);
    cfg.problem.beta = parse_profile(kv, "beta", 1.0);
    cfg.problem.source_g = parse_profile(kv, "g", 0.0);
    cfg.problem.nonlinearity = parse_nonlinearity(kv);
    if (take(kv, "beta0", v)) cfg.problem.beta0 = parse_double("beta0", v);
    if (take(kv, "r0", v)) cfg.problem.r0 = parse_double("r0", v);
    if (take(kv, "c_mono", v)) cfg.problem.c_mono = parse_double("c_mono", v);

    if (take(kv, "grid.R", v)) cfg.grid_R = parse_double("grid.R", v);
    if (take(kv, "grid.m_per_axis", v)) cfg.grid_m = parse_int("grid.m_per_axis", v);

    if (take(kv, "step.dt", v)) cfg.step.dt = parse_double("step.dt", v);
    if (take(kv, "step.scheme", v)) {
        if (v == "implicit")
            cfg.step.scheme = StepConfig::Scheme::implicit;
        else if (v == "explicit")
            cfg.step.scheme = StepConfig::Scheme::explicit_euler;
        else
            throw ConfigError("config: step.scheme must be implicit or explicit");
    }
    if (take(kv, "step.nonlinear_tol", v)) cfg.step.nonlinear_tol = parse_double("step.nonlinear_tol", v);
    if (take(kv, "step.max_picard", v)) cfg.step.max_picard = parse_int("step.max_picard", v);
    if (take(kv, "step.max_newton", v)) cfg.step.max_newton = parse_int("step.max_newton", v);
    if (take(kv, "step.damping", v)) cfg.step.damping = parse_double("step.damping", v);
    if (take(kv, "step.explicit_safety", v))
        cfg.step.explicit_safety = parse_double("step.explicit_safety", v);

    if (take(kv, "experiment", v)) {
        static const char* known[] = {"simulate", "validate", "contract",
                                      "absorb",   "compact",  "attractor"};
        if (std::find(std::begin(known), std::end(known), v) == std::end(known))
            throw ConfigError("config: unknown experiment '" + v + "'");
        cfg.experiment = v;
    }

    if (take(kv, "run.T", v)) cfg.run_T = parse_double("run.T", v);
    if (take(kv, "run.checkpoints", v)) cfg.run_checkpoints = parse_int("run.checkpoints", v);
    if (take(kv, "run.burn_in", v)) cfg.run_burn_in = parse_double("run.burn_in", v);
    if (take(kv, "run.snapshots", v)) cfg.run_snapshots = parse_int("run.snapshots", v);

    if (take(kv, "ensemble.size", v)) cfg.ensemble_size = parse_int("ensemble.size", v);
    if (take(kv, "ensemble.norm_min", v)) cfg.ensemble_norm_min = parse_double("ensemble.norm_min", v);
    if (take(kv, "ensemble.norm_max", v)) cfg.ensemble_norm_max = parse_double("ensemble.norm_max", v);
    if (take(kv, "ensemble.rho_scaled", v))
        cfg.ensemble_rho_scaled = parse_bool("ensemble.rho_scaled", v);
    if (take(kv, "attractor.tol", v)) cfg.attractor_tol = parse_double("attractor.tol", v);

    if (take(kv, "io.dir", v)) cfg.io_dir = v;
    if (take(kv, "io.snapshot_every", v)) cfg.io_snapshot_every = parse_int("io.snapshot_every", v);
    if (take(kv, "io.ledger", v)) cfg.io_ledger = v;
    if (take(kv, "io.restart", v)) cfg.io_restart = v;

    if (take(kv, "seed", v)) cfg.seed = parse_u64("seed", v);

    if (!kv.empty()) throw ConfigError("config: unknown key '" + kv.begin()->first + "'");
    return cfg;
}

RunConfig parse_config_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("config: cannot open '" + path + "'");
    std::ostringstream os;
    os << in.rdbuf();
    return parse_config_text(os.str());
}

std::string serialize_config(const RunConfig& cfg) {
    std::ostringstream os;
    char buf[64];
    const auto num = [&](double x) {
        std::snprintf(buf, sizeof buf, "%.17g", x);
        return std::string(buf);
    };
    const auto emit = [&](const std::string& key, const std::string& value) {
        os << key << " = " << value << '\n';
    };

    emit("p", num(cfg.problem.p));
    emit("dim", std::to_string(cfg.problem.dim));
    for (const auto& [k, v] : cfg.problem.sigma.config_entries("sigma")) emit(k, v);
    for (const auto& [k, v] : cfg.problem.beta.config_entries("beta")) emit(k, v);
    for (const auto& [k, v] : cfg.problem.source_g.config_entries("g")) emit(k, v);
    for (const auto& [k, v] : cfg.problem.nonlinearity.config_entries()) emit(k, v);
    emit("beta0", num(cfg.problem.beta0));
    emit("r0", num(cfg.problem.r0));
    emit("c_mono", num(cfg.problem.c_mono));

    emit("grid.R", num(cfg.grid_R));
    emit("grid.m_per_axis", std::to_string(cfg.grid_m));

    emit("step.dt", num(cfg.step.dt));
    emit("step.scheme",
         cfg.step.scheme == StepConfig::Scheme::implicit ? "implicit" : "explicit");
    emit("step.nonlinear_tol", num(cfg.step.nonlinear_tol));
    emit("step.max_picard", std::to_string(cfg.step.max_picard));
    emit("step.max_newton", std::to_string(cfg.step.max_newton));
    emit("step.damping", num(cfg.step.damping));
    emit("step.explicit_safety", num(cfg.step.explicit_safety));

    if (!cfg.experiment.empty()) emit("experiment", cfg.experiment);
    emit("run.T", num(cfg.run_T));
    emit("run.checkpoints", std::to_string(cfg.run_checkpoints));
    emit("run.burn_in", num(cfg.run_burn_in));
    emit("run.snapshots", std::to_string(cfg.run_snapshots));

    emit("ensemble.size", std::to_string(cfg.ensemble_size));
    emit("ensemble.norm_min", num(cfg.ensemble_norm_min));
    emit("ensemble.norm_max", num(cfg.ensemble_norm_max));
    emit("ensemble.rho_scaled", cfg.ensemble_rho_scaled ? "true" : "false");
    emit("attractor.tol", num(cfg.attractor_tol));

    emit("io.dir", cfg.io_dir);
    emit("io.snapshot_every", std::to_string(cfg.io_snapshot_every));
    emit("io.ledger", cfg.io_ledger);
    if (!cfg.io_restart.empty()) emit("io.restart", cfg.io_restart);
    emit("seed", std::to_string(cfg.seed));
    return os.str();
}

std::string config_hash_hex(const RunConfig& cfg) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : cfg.raw_text) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

} // namespace plap

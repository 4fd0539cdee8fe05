#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "plap/config.hpp"
#include "plap/snapshot.hpp"

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace plap;

namespace {

const char* kCanonicalConfig = R"(# canonical fixture
p = 3.0
dim = 1
sigma.kind = power_law
sigma.alpha = 1.0
beta.kind = constant
beta.value = 1.0
beta0 = 0.5
r0 = 1.0
f.kind = odd_power
f.q = 3
c_mono = 1.0
g.kind = constant
g.value = 0.0

grid.R = 4.0
grid.m_per_axis = 33

step.dt = 0.01
step.scheme = implicit
step.nonlinear_tol = 1e-10
step.damping = 0.7

experiment = simulate
run.T = 0.5
seed = 42
io.dir = out_test
)";

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

} // namespace

TEST_CASE("canonical config parses with the documented field names") {
    const RunConfig cfg = parse_config_text(kCanonicalConfig);
    CHECK(cfg.problem.p == 3.0);
    CHECK(cfg.problem.dim == 1);
    CHECK(cfg.problem.sigma.kind() == CoefficientProfile::Kind::power_law);
    CHECK(cfg.problem.sigma.alpha() == 1.0);
    CHECK(cfg.problem.beta0 == 0.5);
    CHECK(cfg.problem.r0 == 1.0);
    CHECK(cfg.problem.nonlinearity.kind() == NonlinearityModel::Kind::odd_power);
    CHECK(cfg.problem.c_mono == 1.0);
    CHECK(cfg.grid_R == 4.0);
    CHECK(cfg.grid_m == 33);
    CHECK(cfg.step.dt == 0.01);
    CHECK(cfg.step.damping == 0.7);
    CHECK(cfg.experiment == "simulate");
    CHECK(cfg.run_T == 0.5);
    CHECK(cfg.seed == 42);
    CHECK(cfg.io_dir == "out_test");
}

TEST_CASE("strict parsing: unknown keys, duplicates and malformed values error") {
    CHECK_THROWS_AS(parse_config_text("p = 2\nnot_a_key = 1\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_text("p = 2\np = 3\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_text("p = banana\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_text("p 2\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_text("experiment = dance\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_text("sigma.kind = power_law\n"), ConfigError);  // alpha missing
    CHECK_THROWS_AS(parse_config_text("dim = 1.5\n"), ConfigError);
    CHECK_NOTHROW(parse_config_text("p = 2 # trailing comment\n"));
}

TEST_CASE("profile table parsing") {
    const RunConfig cfg = parse_config_text(
        "beta.kind = radial_table\nbeta.table = 0:0; 1:1; 2:1; 10:1\n");
    std::array<double, 1> pt{0.5};
    CHECK(cfg.problem.beta(pt) == doctest::Approx(0.5));
    CHECK_THROWS_AS(parse_config_text("beta.kind = radial_table\nbeta.table = 0:0; 1\n"),
                    ConfigError);
}

TEST_CASE("serialization round-trips through the parser") {
    const RunConfig cfg = parse_config_text(kCanonicalConfig);
    const std::string text1 = serialize_config(cfg);
    const RunConfig cfg2 = parse_config_text(text1);
    const std::string text2 = serialize_config(cfg2);
    CHECK(text1 == text2);  // serialization is a fixed point of parse∘serialize
    CHECK(cfg2.problem.p == cfg.problem.p);
    CHECK(cfg2.problem.sigma.alpha() == cfg.problem.sigma.alpha());
    CHECK(cfg2.seed == cfg.seed);
    CHECK(cfg2.step.dt == cfg.step.dt);

    // table profiles round-trip too
    const RunConfig t1 = parse_config_text("beta.kind = radial_table\nbeta.table = 0:0; 1:1; 2:4; 3:4\n");
    const RunConfig t2 = parse_config_text(serialize_config(t1));
    const std::array<double, 1> pt{1.5};
    CHECK(t1.problem.beta(pt) == t2.problem.beta(pt));
}

TEST_CASE("config hash is stable and content-sensitive") {
    const RunConfig a = parse_config_text(kCanonicalConfig);
    const RunConfig b = parse_config_text(kCanonicalConfig);
    CHECK(config_hash_hex(a) == config_hash_hex(b));
    CHECK(config_hash_hex(a).size() == 16);
    const RunConfig c = parse_config_text(std::string(kCanonicalConfig) + "\n# changed\n");
    CHECK(config_hash_hex(a) != config_hash_hex(c));
}

TEST_CASE("snapshot round-trip is byte-identical") {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "plap_snap_test";
    fs::create_directories(dir);

    ProblemSpec spec;
    spec.dim = 2;
    const Grid g = Grid::build(spec, 2.0, 9);
    Rng rng(101);
    State s{random_smooth_field(g, rng, 1.5), 0.75};

    const fs::path p1 = dir / "a.plap";
    const fs::path p2 = dir / "b.plap";
    write_snapshot(p1.string(), g, s);
    const SnapshotData snap = read_snapshot(p1.string());
    CHECK(snap.n == 2);
    CHECK(snap.m == 9);
    CHECK(snap.R == 2.0);
    CHECK(snap.t == 0.75);
    CHECK(snap.u == s.u);

    write_snapshot(p2.string(), g, State{snap.u, snap.t});
    CHECK(slurp(p1) == slurp(p2));

    // magic validation
    std::ofstream bad((dir / "bad.plap").string(), std::ios::binary);
    bad << "NOPE";
    bad.close();
    CHECK_THROWS_AS(read_snapshot((dir / "bad.plap").string()), std::runtime_error);
    fs::remove_all(dir);
}

TEST_CASE("field CSV export has full precision") {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "plap_csv_test";
    fs::create_directories(dir);
    ProblemSpec spec;
    const Grid g = Grid::build(spec, 1.0, 5);
    Field u{1.0 / 3.0, 2.0 / 3.0, 1.0};
    write_field_csv((dir / "f.csv").string(), g, u);
    const std::string text = slurp(dir / "f.csv");
    CHECK(text.find("x,u") == 0);
    CHECK(text.find("0.33333333333333331") != std::string::npos);
    fs::remove_all(dir);
}

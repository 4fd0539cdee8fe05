#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "plap/integrate.hpp"

#include "oracles.hpp"

#include <cmath>
#include <sstream>

using namespace plap;

namespace {

ProblemSpec spec_1d(CoefficientProfile sigma, double beta_const, NonlinearityModel f,
                    double c_mono = 1.0) {
    ProblemSpec spec;
    spec.dim = 1;
    spec.sigma = std::move(sigma);
    spec.beta = CoefficientProfile::constant(beta_const);
    spec.nonlinearity = std::move(f);
    spec.c_mono = c_mono;
    return spec;
}

StepConfig tight_cfg(double dt, double tol = 1e-13) {
    StepConfig cfg;
    cfg.dt = dt;
    cfg.nonlinear_tol = tol;
    return cfg;
}

} // namespace

TEST_CASE("step config validation") {
    StepConfig cfg;
    cfg.dt = 0.0;
    CHECK_THROWS_AS(cfg.validate(1.0), std::invalid_argument);
    cfg.dt = 2.0;
    CHECK_THROWS_AS(cfg.validate(1.0), std::invalid_argument);  // dt >= 1/c_mono
    cfg.dt = 0.5;
    CHECK_NOTHROW(cfg.validate(1.0));
    cfg.nonlinear_tol = 1e-3;
    CHECK_THROWS_AS(cfg.validate(1.0), std::invalid_argument);
}

TEST_CASE("implicit step: zero state is a fixed point") {
    const auto spec = spec_1d(CoefficientProfile::constant(1.0), 1.0, NonlinearityModel::zero());
    const Grid g = Grid::build(spec, 4.0, 33);
    const DiscreteOperator op(g, 2.0);
    const State s{Field(g.interior_count(), 0.0), 0.0};
    const auto [next, row] = step_implicit(s, op, spec.nonlinearity, tight_cfg(0.1), spec.c_mono);
    for (double v : next.u) CHECK(v == 0.0);
    CHECK(next.t == doctest::Approx(0.1));
    CHECK(row.l2_sq == 0.0);
}

TEST_CASE("implicit step: discrete sine mode decays by 1/(1 + dt(lambda + mu_h))") {
    const auto spec = spec_1d(CoefficientProfile::constant(1.0), 1.0, NonlinearityModel::zero());
    const Grid g = Grid::build(spec, 4.0, 65);
    const DiscreteOperator op(g, 2.0);
    const double mu = oracles::lowest_mode_eigenvalue(g.R, g.m);
    const Field u0 = oracles::lowest_mode(g);

    const double dt = 1e-3;
    const State s{u0, 0.0};
    const auto [next, row] = step_implicit(s, op, spec.nonlinearity, tight_cfg(dt), spec.c_mono);
    const double factor = 1.0 / (1.0 + dt * (1.0 + mu));
    for (std::size_t k = 0; k < u0.size(); ++k)
        CHECK(next.u[k] == doctest::Approx(factor * u0[k]).epsilon(1e-12));
}

TEST_CASE("explicit step: growth factor, fixed point, and stability guard") {
    const auto spec = spec_1d(CoefficientProfile::constant(1.0), 1.0, NonlinearityModel::zero());
    const Grid g = Grid::build(spec, 4.0, 65);
    const DiscreteOperator op(g, 2.0);
    const double mu = oracles::lowest_mode_eigenvalue(g.R, g.m);
    const Field u0 = oracles::lowest_mode(g);

    StepConfig cfg = tight_cfg(1e-4);
    cfg.scheme = StepConfig::Scheme::explicit_euler;
    const auto [next, row] = step_explicit(State{u0, 0.0}, op, spec.nonlinearity, cfg);
    const double factor = 1.0 - cfg.dt * (1.0 + mu);
    for (std::size_t k = 0; k < u0.size(); ++k)
        CHECK(next.u[k] == doctest::Approx(factor * u0[k]).epsilon(1e-12));

    const State z{Field(g.interior_count(), 0.0), 0.0};
    const auto [zn, zrow] = step_explicit(z, op, spec.nonlinearity, cfg);
    for (double v : zn.u) CHECK(v == 0.0);

    cfg.dt = 1.0;  // far beyond the stability limit h^2-ish scale
    CHECK_THROWS_AS(step_explicit(State{u0, 0.0}, op, spec.nonlinearity, cfg),
                    ExplicitStabilityViolation);
}

TEST_CASE("implicit step in 2-D: axiswise product mode decays by the eigenvalue sum") {
    ProblemSpec spec;
    spec.dim = 2;
    spec.sigma = CoefficientProfile::constant(1.0);
    spec.beta = CoefficientProfile::constant(1.0);
    const Grid g = Grid::build(spec, 2.0, 17);
    const DiscreteOperator op(g, 2.0, GradientMode::axiswise);

    const double mu = oracles::lowest_mode_eigenvalue(g.R, g.m);
    const std::size_t M = static_cast<std::size_t>(g.interior_per_axis());
    Field u0(g.interior_count());
    const double L = 2.0 * g.R;
    for (std::size_t i = 0; i < M; ++i)
        for (std::size_t j = 0; j < M; ++j) {
            const double x = g.axis_coords[1 + i], y = g.axis_coords[1 + j];
            u0[i * M + j] = std::sin(M_PI * (x + g.R) / L) * std::sin(M_PI * (y + g.R) / L);
        }

    const double dt = 1e-3;
    const auto [next, row] =
        step_implicit(State{u0, 0.0}, op, spec.nonlinearity, tight_cfg(dt), spec.c_mono);
    const double factor = 1.0 / (1.0 + dt * (1.0 + 2.0 * mu));  // beta + both axis modes
    for (std::size_t k = 0; k < u0.size(); ++k)
        CHECK(next.u[k] == doctest::Approx(factor * u0[k]).epsilon(1e-11));
}

TEST_CASE("2-D dissipation with the degenerate isotropic operator") {
    ProblemSpec spec;
    spec.dim = 2;
    spec.p = 3.0;
    spec.sigma = CoefficientProfile::power_law(1.0, 1.0);
    spec.beta = CoefficientProfile::constant(1.0);
    spec.nonlinearity = NonlinearityModel::odd_power(3.0);
    const Grid g = Grid::build(spec, 2.0, 17);
    const DiscreteOperator op(g, spec.p);
    Rng rng(314);
    State s{random_smooth_field(g, rng, 3.0), 0.0};

    StepConfig cfg = tight_cfg(0.05, 1e-10);
    double prev = l2_norm(g, s.u);
    for (int step = 0; step < 20; ++step) {
        auto [next, row] = step_implicit(s, op, spec.nonlinearity, cfg, spec.c_mono);
        const double cur = std::sqrt(row.l2_sq);
        CHECK(cur <= prev * (1.0 + 1e-9));
        CHECK(row.fu_u >= 0.0);
        prev = cur;
        s = std::move(next);
    }
    CHECK(prev < 0.5);  // strong decay over t = 1
}

TEST_CASE("implicit and explicit trajectories agree to O(dt)") {
    const auto spec = spec_1d(CoefficientProfile::constant(1.0), 1.0, NonlinearityModel::zero());
    const Grid g = Grid::build(spec, 4.0, 33);
    const DiscreteOperator op(g, 2.0);
    const Field u0 = oracles::lowest_mode(g);
    const double T = 0.25;

    const auto diff_at = [&](double dt) {
        StepConfig ci = tight_cfg(dt);
        StepConfig ce = ci;
        ce.scheme = StepConfig::Scheme::explicit_euler;
        const State si = run_to_time(State{u0, 0.0}, T, ci, op, spec.nonlinearity, spec.c_mono);
        const State se = run_to_time(State{u0, 0.0}, T, ce, op, spec.nonlinearity, spec.c_mono);
        double d = 0.0;
        for (std::size_t k = 0; k < u0.size(); ++k) d = std::max(d, std::abs(si.u[k] - se.u[k]));
        return d;
    };
    const double d1 = diff_at(2e-3);
    const double d2 = diff_at(1e-3);
    CHECK(d1 / d2 == doctest::Approx(2.0).epsilon(0.25));  // first-order gap
}

TEST_CASE("manufactured steady state attracts the flow") {
    auto spec = spec_1d(CoefficientProfile::power_law(1.0, 1.0), 1.0,
                        NonlinearityModel::odd_power(3.0));
    Grid g = Grid::build(spec, 4.0, 65);
    DiscreteOperator op(g, 3.0);

    Field star(g.interior_count());
    for (std::size_t k = 0; k < star.size(); ++k) {
        const double x = g.axis_coords[1 + k];
        star[k] = std::exp(-x * x);
    }
    const Field astar = op.apply(star);
    for (std::size_t k = 0; k < star.size(); ++k)
        g.g_nodes[k] = astar[k] + spec.nonlinearity.f(star[k]);
    const DiscreteOperator op2(g, 3.0);

    Field u0 = star;
    for (double& x : u0) x *= 2.0;
    Field d0(star.size());
    for (std::size_t k = 0; k < star.size(); ++k) d0[k] = u0[k] - star[k];
    const double dist0 = l2_norm(g, d0);

    StepConfig cfg = tight_cfg(0.05, 1e-11);
    const State sT = run_to_time(State{u0, 0.0}, 8.0, cfg, op2, spec.nonlinearity, spec.c_mono);
    Field dT(star.size());
    for (std::size_t k = 0; k < star.size(); ++k) dT[k] = sT.u[k] - star[k];
    const double distT = l2_norm(g, dT);

    CHECK(distT < 1e-3 * dist0);
    const double kappa = -std::log(distT / dist0) / 8.0;
    CHECK(kappa > 0.0);
}

TEST_CASE("dissipation: implicit steps with g = 0 never grow the L2 norm") {
    auto spec = spec_1d(CoefficientProfile::power_law(1.0, 1.0), 1.0,
                        NonlinearityModel::odd_power(3.0));
    const Grid g = Grid::build(spec, 4.0, 65);
    const DiscreteOperator op(g, 3.0);
    Rng rng(12);
    State s{random_smooth_field(g, rng, 5.0), 0.0};

    StepConfig cfg = tight_cfg(0.02, 1e-11);
    double prev = l2_norm(g, s.u);
    double fu_cum = 0.0, ut_cum_late = 0.0;
    for (int step = 0; step < 100; ++step) {
        auto [next, row] = step_implicit(s, op, spec.nonlinearity, cfg, spec.c_mono);
        const double cur = std::sqrt(row.l2_sq);
        CHECK(cur <= prev * (1.0 + 1e-9));
        CHECK(row.fu_u >= 0.0);
        fu_cum += cfg.dt * row.fu_u;
        if (step >= 10) ut_cum_late += cfg.dt * row.ut_l2_sq;  // away from t = 0
        CHECK(std::isfinite(fu_cum));
        prev = cur;
        s = std::move(next);
    }
    CHECK(fu_cum >= 0.0);
    CHECK(std::isfinite(ut_cum_late));  // time-derivative energy stays bounded past the transient
}

TEST_CASE("balance residual is first order in dt") {
    auto spec = spec_1d(CoefficientProfile::constant(1.0), 1.0, NonlinearityModel::odd_power(3.0));
    const Grid g = Grid::build(spec, 4.0, 33);
    const DiscreteOperator op(g, 3.0);
    Rng rng(3);
    const Field u0 = random_smooth_field(g, rng, 2.0);

    const auto mean_residual = [&](double dt) {
        StepConfig cfg = tight_cfg(dt, 1e-12);
        EnergyLedger ledger;
        run_to_time(State{u0, 0.0}, 0.4, cfg, op, spec.nonlinearity, spec.c_mono, ledger.sink());
        double sum = 0.0;
        for (const auto& row : ledger.rows) sum += row.balance_residual;
        return sum / ledger.rows.size();
    };
    const double r1 = mean_residual(0.02);
    const double r2 = mean_residual(0.01);
    CHECK(r1 / r2 == doctest::Approx(2.0).epsilon(0.3));
}

TEST_CASE("run_to_time: identity run and ledger streaming") {
    const auto spec = spec_1d(CoefficientProfile::constant(1.0), 1.0, NonlinearityModel::zero());
    const Grid g = Grid::build(spec, 4.0, 33);
    const DiscreteOperator op(g, 2.0);
    Rng rng(9);
    const State s{random_smooth_field(g, rng, 1.0), 0.5};

    EnergyLedger ledger;
    const State same =
        run_to_time(s, 0.5, tight_cfg(0.1), op, spec.nonlinearity, spec.c_mono, ledger.sink());
    CHECK(same.u == s.u);
    CHECK(ledger.rows.empty());

    const State out =
        run_to_time(s, 1.0, tight_cfg(0.125), op, spec.nonlinearity, spec.c_mono, ledger.sink());
    CHECK(ledger.rows.size() == 4);
    CHECK(out.t == doctest::Approx(1.0));
    CHECK_THROWS_AS(
        run_to_time(s, 0.0, tight_cfg(0.1), op, spec.nonlinearity, spec.c_mono),
        std::invalid_argument);
}

TEST_CASE("hard failure carries a diagnostic after dt halvings") {
    const auto spec =
        spec_1d(CoefficientProfile::constant(1.0), 1.0, NonlinearityModel::exp_growth());
    const Grid g = Grid::build(spec, 4.0, 33);
    const DiscreteOperator op(g, 2.0);
    Field u0(g.interior_count(), 0.0);
    u0[10] = 50.0;  // beyond the evaluable range of s exp(s^2)

    try {
        step_implicit(State{u0, 0.0}, op, spec.nonlinearity, tight_cfg(0.01), spec.c_mono);
        FAIL("expected IntegratorFailure");
    } catch (const IntegratorFailure& e) {
        CHECK(std::string(e.diagnostic).find("dt_final") != std::string::npos);
        CHECK(e.last_state.u == u0);
    }
}

TEST_CASE("dt halving rescues a starved solver when possible") {
    auto spec = spec_1d(CoefficientProfile::constant(1.0), 1.0, NonlinearityModel::odd_power(3.0));
    const Grid g = Grid::build(spec, 4.0, 33);
    const DiscreteOperator op(g, 3.0);
    Rng rng(21);
    const Field u0 = random_smooth_field(g, rng, 3.0);

    StepConfig cfg = tight_cfg(0.5, 1e-5);
    cfg.max_picard = 1;
    cfg.max_newton = 1;
    cfg.damping = 1.0;
    const auto [next, row] = step_implicit(State{u0, 0.0}, op, spec.nonlinearity, cfg, spec.c_mono);
    CHECK(next.t > 0.0);
    CHECK(next.t < 0.5);  // at least one halving happened before acceptance
}

TEST_CASE("ledger CSV header and formatting") {
    CHECK(std::string(EnergyLedger::csv_header()) ==
          "t,l2_sq,grad_p_energy,beta_energy,fu_u,F_total,g_pair,ut_l2_sq,balance_residual");
    EnergyLedger ledger;
    ledger.append(LedgerRow{0.25, 1.0, 0.5, 0.25, 0.0, 0.125, 0.0, 2.0, 1e-12});
    std::ostringstream a, b;
    ledger.write_csv(a);
    ledger.write_csv(b);
    CHECK(a.str() == b.str());
    CHECK(a.str().find("0.25,1,0.5") != std::string::npos);
}

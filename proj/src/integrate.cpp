#include "plap/integrate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>

namespace plap {

void StepConfig::validate(double c_mono) const {
    if (!(dt > 0.0)) throw std::invalid_argument("StepConfig: dt must be > 0");
    if (!(nonlinear_tol > 0.0 && nonlinear_tol <= 1e-4))
        throw std::invalid_argument("StepConfig: nonlinear_tol must be in (0, 1e-4]");
    if (!(damping > 0.0 && damping <= 1.0))
        throw std::invalid_argument("StepConfig: damping must be in (0, 1]");
    if (!(explicit_safety > 0.0 && explicit_safety < 1.0))
        throw std::invalid_argument("StepConfig: explicit_safety must be in (0, 1)");
    if (c_mono > 0.0 && !(dt < 1.0 / c_mono))
        throw std::invalid_argument("StepConfig: need dt < 1/c_mono for a monotone implicit solve");
}

const char* EnergyLedger::csv_header() {
    return "t,l2_sq,grad_p_energy,beta_energy,fu_u,F_total,g_pair,ut_l2_sq,balance_residual";
}

void EnergyLedger::write_csv(std::ostream& os) const {
    os << csv_header() << '\n';
    char buf[512];
    for (const LedgerRow& r : rows) {
        std::snprintf(buf, sizeof buf,
                      "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", r.t, r.l2_sq,
                      r.grad_p_energy, r.beta_energy, r.fu_u, r.F_total, r.g_pair, r.ut_l2_sq,
                      r.balance_residual);
        os << buf;
    }
}

namespace {

double dot_h(const Grid& g, std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
    return s * g.cell_volume();
}

double norm_h(const Grid& g, std::span<const double> a) { return std::sqrt(dot_h(g, a, a)); }

// Solves c x + f(x) = rhs for the strictly increasing left side (c > c_mono).
// Safeguarded Newton with a bisection fallback on a sign-change bracket.
double scalar_monotone_solve(double c, const NonlinearityModel& f, double rhs) {
    const auto phi = [&](double x) { return c * x + f.f(x) - rhs; };
    double x0 = rhs / c;
    double lo = std::min(x0, 0.0), hi = std::max(x0, 0.0);
    double flo = phi(lo), fhi = phi(hi);
    double expand = std::max(1.0, std::abs(x0));
    for (int it = 0; it < 200 && fhi < 0.0; ++it) {
        hi += expand;
        expand *= 2.0;
        fhi = phi(hi);
    }
    for (int it = 0; it < 200 && flo > 0.0; ++it) {
        lo -= expand;
        expand *= 2.0;
        flo = phi(lo);
    }
    const double tol = 1e-15 * (1.0 + std::abs(rhs));
    double x = std::clamp(x0, lo, hi);
    for (int it = 0; it < 100; ++it) {
        const double fx = phi(x);
        if (std::abs(fx) <= tol) return x;
        if (fx > 0.0)
            hi = x;
        else
            lo = x;
        const double der = c + f.f_prime(x);
        double xn = der > 0.0 ? x - fx / der : 0.5 * (lo + hi);
        if (!(xn > lo && xn < hi)) xn = 0.5 * (lo + hi);
        if (xn == x) return x;
        x = xn;
    }
    return x;
}

struct ImplicitProblem {
    const DiscreteOperator& op;
    const NonlinearityModel& f;
    const Field& u_old;
    double dt;

    // (v - u)/dt + A v + f(v) - g
    Field residual(std::span<const double> v) const {
        const Grid& g = op.grid();
        Field r = op.apply(v);
        for (std::size_t k = 0; k < r.size(); ++k)
            r[k] += (v[k] - u_old[k]) / dt + f.f(v[k]) - g.g_nodes[k];
        return r;
    }
};

// Matrix-free CG on the SPD Newton system J w = b with
// J w = w/dt + Hess(w) + (beta + f'(v)) w.
Field newton_cg(const Grid& g, const DiscreteOperator::Linearization& lin,
                std::span<const double> react_diag, double dt, const Field& b, double tol_abs,
                int max_iters) {
    const std::size_t N = b.size();
    Field x(N, 0.0), r = b, p = b, Jp(N);
    double rho = dot_h(g, r, r);
    if (std::sqrt(rho) <= tol_abs) return x;
    for (int it = 0; it < max_iters; ++it) {
        lin.hessian_apply(p, Jp);
        for (std::size_t k = 0; k < N; ++k) Jp[k] += p[k] / dt + react_diag[k] * p[k];
        const double pJp = dot_h(g, p, Jp);
        if (!(pJp > 0.0)) break;  // roundoff-level curvature loss
        const double alpha = rho / pJp;
        for (std::size_t k = 0; k < N; ++k) {
            x[k] += alpha * p[k];
            r[k] -= alpha * Jp[k];
        }
        const double rho_new = dot_h(g, r, r);
        if (std::sqrt(rho_new) <= tol_abs) break;
        const double beta = rho_new / rho;
        rho = rho_new;
        for (std::size_t k = 0; k < N; ++k) p[k] = r[k] + beta * p[k];
    }
    return x;
}

struct SolveOutcome {
    bool converged = false;
    Field v;
    double rel_residual = std::numeric_limits<double>::infinity();
    int picard_iters = 0;
    int newton_iters = 0;
};

SolveOutcome solve_implicit(const ImplicitProblem& prob, const StepConfig& cfg) {
    const Grid& g = prob.op.grid();
    const std::size_t N = prob.u_old.size();

    const double denom =
        norm_h(g, prob.u_old) / prob.dt + norm_h(g, std::span<const double>(g.g_nodes)) + 1e-300;
    const double target = cfg.nonlinear_tol * denom;

    SolveOutcome out;
    out.v = prob.u_old;

    const auto res_norm = [&](std::span<const double> v) { return norm_h(g, prob.residual(v)); };

    double rn;
    try {
        rn = res_norm(out.v);
    } catch (const NonlinearityOverflow&) {
        return out;  // state outside the evaluable range: reject
    }
    if (rn <= target) {
        out.converged = true;
        out.rel_residual = rn / denom;
        return out;
    }

    // rhs of the semilinear fixed-point form v/dt + P v + beta v + f(v) = q
    Field q(N);
    for (std::size_t k = 0; k < N; ++k) q[k] = prob.u_old[k] / prob.dt + g.g_nodes[k];

    Field v_hat(N), Pv(N);
    for (int pic = 0; pic < cfg.max_picard && rn > target; ++pic, ++out.picard_iters) {
        const DiscreteOperator::Linearization lin(prob.op, out.v, 0.0);
        const Field& D = lin.frozen_diagonal();
        v_hat = out.v;
        const double inner_target = std::max(0.25 * target, 1e-15 * denom);
        for (int sweep = 0; sweep < 200; ++sweep) {
            lin.frozen_apply(v_hat, Pv);
            double inner_res = 0.0;
            for (std::size_t k = 0; k < N; ++k) {
                const double r =
                    v_hat[k] / prob.dt + Pv[k] + g.beta_nodes[k] * v_hat[k] + prob.f.f(v_hat[k]) - q[k];
                inner_res += r * r;
            }
            if (std::sqrt(inner_res * g.cell_volume()) <= inner_target) break;
            for (std::size_t k = 0; k < N; ++k) {
                const double off = Pv[k] - D[k] * v_hat[k];
                const double c_lin = 1.0 / prob.dt + g.beta_nodes[k] + D[k];
                v_hat[k] = scalar_monotone_solve(c_lin, prob.f, q[k] - off);
            }
        }
        for (std::size_t k = 0; k < N; ++k)
            out.v[k] += cfg.damping * (v_hat[k] - out.v[k]);
        rn = res_norm(out.v);
    }

    // Newton polish with epsilon-regularized Hessian
    Field react(N);
    for (int nw = 0; nw < cfg.max_newton && rn > target; ++nw, ++out.newton_iters) {
        double umax = 0.0;
        for (double x : out.v) umax = std::max(umax, std::abs(x));
        const double eps =
            prob.op.epsilon_reg() > 0.0 ? prob.op.epsilon_reg() : 1e-8 * (1.0 + umax / g.h);
        const DiscreteOperator::Linearization lin(prob.op, out.v, eps);
        for (std::size_t k = 0; k < N; ++k)
            react[k] = g.beta_nodes[k] + prob.f.f_prime(out.v[k]);

        Field rhs = prob.residual(out.v);
        for (double& x : rhs) x = -x;
        const double cg_tol = std::max(0.05 * target, 1e-4 * rn);
        const Field delta =
            newton_cg(g, lin, react, prob.dt, rhs, cg_tol, static_cast<int>(2 * N) + 50);

        bool advanced = false;
        Field trial(N);
        for (double s = 1.0; s >= 1e-6; s *= 0.5) {
            for (std::size_t k = 0; k < N; ++k) trial[k] = out.v[k] + s * delta[k];
            double rt;
            try {
                rt = res_norm(trial);
            } catch (const NonlinearityOverflow&) {
                continue;
            }
            if (rt < rn * (1.0 - 0.25 * s) || rt <= target) {
                out.v = trial;
                rn = rt;
                advanced = true;
                break;
            }
        }
        if (!advanced) break;  // stagnation: let the caller halve dt
    }

    out.rel_residual = rn / denom;
    out.converged = rn <= target;
    return out;
}

} // namespace

LedgerRow make_ledger_row(const DiscreteOperator& op, const NonlinearityModel& f,
                          std::span<const double> u_old, std::span<const double> v, double t_new,
                          double dt) {
    const Grid& g = op.grid();
    LedgerRow row;
    row.t = t_new;
    const double l2v = l2_norm(g, v);
    row.l2_sq = l2v * l2v;
    const EnergyTerms e = op.energy_pairing(v);
    row.grad_p_energy = e.grad_p;
    row.beta_energy = e.beta_sq;
    double fu = 0.0, Ftot = 0.0, gp = 0.0, ut = 0.0;
    for (std::size_t k = 0; k < v.size(); ++k) {
        fu += f.f(v[k]) * v[k];
        Ftot += f.F(v[k]);
        gp += g.g_nodes[k] * v[k];
        const double du = (v[k] - u_old[k]) / dt;
        ut += du * du;
    }
    const double hv = g.cell_volume();
    row.fu_u = fu * hv;
    row.F_total = Ftot * hv;
    row.g_pair = gp * hv;
    row.ut_l2_sq = ut * hv;
    const double l2u = l2_norm(g, u_old);
    row.balance_residual =
        std::abs(0.5 * (row.l2_sq - l2u * l2u) / dt + e.pairing + row.fu_u - row.g_pair);
    return row;
}

std::pair<State, LedgerRow> step_implicit(const State& s, const DiscreteOperator& op,
                                          const NonlinearityModel& f, const StepConfig& cfg,
                                          double c_mono) {
    cfg.validate(c_mono);
    require_finite(s.u, "step_implicit state");

    double dt = cfg.dt;
    SolveOutcome last;
    for (int attempt = 0; attempt <= 10; ++attempt) {
        const ImplicitProblem prob{op, f, s.u, dt};
        try {
            last = solve_implicit(prob, cfg);
        } catch (const NonlinearityOverflow&) {
            last = SolveOutcome{};  // iterate left the evaluable range: reject and halve
            last.v = s.u;
        }
        if (last.converged) {
            require_finite(last.v, "step_implicit result");
            State next{std::move(last.v), s.t + dt};
            LedgerRow row = make_ledger_row(op, f, s.u, next.u, next.t, dt);
            return {std::move(next), row};
        }
        dt *= 0.5;  // step rejected: retry smaller
    }

    std::ostringstream diag;
    diag << "implicit solve stagnated: t=" << s.t << " dt_final=" << dt * 2.0
         << " rel_residual=" << last.rel_residual << " picard=" << last.picard_iters
         << " newton=" << last.newton_iters;
    throw IntegratorFailure("implicit step failed after 10 dt halvings", State{s.u, s.t},
                            diag.str());
}

std::pair<State, LedgerRow> step_explicit(const State& s, const DiscreteOperator& op,
                                          const NonlinearityModel& f, const StepConfig& cfg) {
    require_finite(s.u, "step_explicit state");
    const Grid& g = op.grid();

    double fp_max = 0.0;
    for (double x : s.u) fp_max = std::max(fp_max, f.f_prime(x));
    double beta_max = 0.0;
    for (double b : g.beta_nodes) beta_max = std::max(beta_max, b);
    const double rate = 2.0 * g.n * op.p() * op.max_face_coefficient(s.u) / (g.h * g.h) +
                        beta_max + std::max(0.0, fp_max);
    if (rate > 0.0 && cfg.dt > cfg.explicit_safety / rate) {
        std::ostringstream msg;
        msg << "explicit step refused: dt=" << cfg.dt << " exceeds stability bound "
            << cfg.explicit_safety / rate;
        throw ExplicitStabilityViolation(msg.str());
    }

    const Field rhs = op.full_rhs(s.u, f);
    State next{Field(s.u.size()), s.t + cfg.dt};
    for (std::size_t k = 0; k < s.u.size(); ++k) next.u[k] = s.u[k] + cfg.dt * rhs[k];
    require_finite(next.u, "step_explicit result");
    LedgerRow row = make_ledger_row(op, f, s.u, next.u, next.t, cfg.dt);
    return {std::move(next), row};
}

State run_to_time(State s, double T_final, const StepConfig& cfg, const DiscreteOperator& op,
                  const NonlinearityModel& f, double c_mono, const LedgerSink& sink) {
    if (T_final < s.t - 1e-12 * std::max(1.0, std::abs(T_final)))
        throw std::invalid_argument("run_to_time: T_final must be >= state.t");
    const double eps_t = 1e-9 * cfg.dt;
    while (T_final - s.t > eps_t) {
        StepConfig local = cfg;
        const double remaining = T_final - s.t;
        local.dt = remaining < cfg.dt * (1.0 + 1e-9) ? remaining : cfg.dt;
        auto [next, row] = cfg.scheme == StepConfig::Scheme::implicit
                               ? step_implicit(s, op, f, local, c_mono)
                               : step_explicit(s, op, f, local);
        s = std::move(next);
        if (sink) sink(row);
    }
    return s;
}

} // namespace plap

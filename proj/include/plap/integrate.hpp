#pragma once

#include "plap/operators.hpp"

#include <functional>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace plap {

struct StepConfig {
    enum class Scheme { implicit, explicit_euler };

    double dt = 1e-2;
    Scheme scheme = Scheme::implicit;
    double nonlinear_tol = 1e-10;  // relative residual target of the implicit solve
    int max_picard = 30;
    int max_newton = 25;
    double damping = 0.7;          // Picard damping factor in (0, 1]
    double explicit_safety = 0.5;  // fraction of the explicit stability limit

    /// dt > 0, tol in (0, 1e-4], damping in (0,1], safety in (0,1), and
    /// dt < 1/c_mono so the implicit nodewise relations stay strictly monotone.
    void validate(double c_mono) const;
};

/// One accepted step's record of every term in the L2 energy balance.
struct LedgerRow {
    double t = 0.0;
    double l2_sq = 0.0;
    double grad_p_energy = 0.0;
    double beta_energy = 0.0;
    double fu_u = 0.0;
    double F_total = 0.0;
    double g_pair = 0.0;
    double ut_l2_sq = 0.0;
    double balance_residual = 0.0;
};

using LedgerSink = std::function<void(const LedgerRow&)>;

struct EnergyLedger {
    std::vector<LedgerRow> rows;

    static const char* csv_header();  // "t,l2_sq,...,balance_residual"
    void append(const LedgerRow& r) { rows.push_back(r); }
    void write_csv(std::ostream& os) const;
    LedgerSink sink() {
        return [this](const LedgerRow& r) { rows.push_back(r); };
    }
};

/// Hard integrator failure: carries the last state and a diagnostic text for
/// the dump the caller is expected to write.
class IntegratorFailure : public std::runtime_error {
public:
    IntegratorFailure(std::string msg, State last, std::string diag)
        : std::runtime_error(std::move(msg)), last_state(std::move(last)),
          diagnostic(std::move(diag)) {}
    State last_state;
    std::string diagnostic;
};

/// Thrown by the explicit scheme when dt violates its stability guard.
class ExplicitStabilityViolation : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// One backward Euler step: solves (u' - u)/dt + A u' + f(u') = g by damped
/// Picard on the lagged gradient coefficient (frozen-coefficient semilinear
/// solves via diagonally preconditioned relaxation with nodewise scalar
/// solves) followed by a Newton-CG polish with epsilon-regularized Hessian.
/// On stagnation the step is retried with dt halved (up to 10 times), then
/// IntegratorFailure is thrown.
std::pair<State, LedgerRow> step_implicit(const State& s, const DiscreteOperator& op,
                                          const NonlinearityModel& f, const StepConfig& cfg,
                                          double c_mono);

/// Forward Euler cross-check step; refuses to step when dt exceeds
/// explicit_safety times the stability limit.
std::pair<State, LedgerRow> step_explicit(const State& s, const DiscreteOperator& op,
                                          const NonlinearityModel& f, const StepConfig& cfg);

/// Repeated stepping to T_final (>= s.t) with ledger streaming; the final
/// partial step is shortened so the trajectory lands exactly on T_final.
State run_to_time(State s, double T_final, const StepConfig& cfg, const DiscreteOperator& op,
                  const NonlinearityModel& f, double c_mono, const LedgerSink& sink = {});

/// Ledger bookkeeping for an accepted step u -> v over dt (exposed for tests).
LedgerRow make_ledger_row(const DiscreteOperator& op, const NonlinearityModel& f,
                          std::span<const double> u_old, std::span<const double> v, double t_new,
                          double dt);

} // namespace plap

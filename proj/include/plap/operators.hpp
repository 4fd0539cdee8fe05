#pragma once

#include "plap/grid.hpp"
#include "plap/nonlinearity.hpp"

#include <span>

namespace plap {

struct EnergyTerms {
    double grad_p = 0.0;   // sum sigma |grad u|^p (face quadrature)
    double beta_sq = 0.0;  // sum beta u^2
    double pairing = 0.0;  // <A u, u>_h
};

/// Discrete monotone operator A u = -div(sigma |grad u|^{p-2} grad u) + beta u
/// in conservation form: the principal part is the exact gradient of the
/// face-quadrature energy (1/(n p)) sum_f sigma_f |grad u|_f^p h^n, so
/// monotonicity and the summation-by-parts identity hold to roundoff for all
/// inputs. epsilon_reg smooths the gradient magnitude inside the Newton
/// linearization only, never in apply/energies.
class DiscreteOperator {
public:
    DiscreteOperator(const Grid& grid, double p, GradientMode mode = GradientMode::isotropic,
                     double epsilon_reg = 0.0);

    const Grid& grid() const { return *grid_; }
    double p() const { return p_; }
    GradientMode mode() const { return mode_; }
    double epsilon_reg() const { return epsilon_reg_; }

    /// A u. Throws on non-finite input or output.
    Field apply(std::span<const double> u) const;

    /// (grad energy, beta energy, <A u, u>_h); asserts the summation-by-parts
    /// identity pairing = grad_p + beta_sq to 1e-10 relative.
    EnergyTerms energy_pairing(std::span<const double> u) const;

    /// <A u - A v, u - v>_h; >= 0 up to roundoff for all inputs.
    double monotonicity_probe(std::span<const double> u, std::span<const double> v) const;

    /// g - A u - f(u): the time derivative of the evolution.
    Field full_rhs(std::span<const double> u, const NonlinearityModel& f) const;

    /// Largest face coefficient sigma_f |grad u|_f^{p-2}; explicit stability guard input.
    double max_face_coefficient(std::span<const double> u) const;

    /// Per-iterate linearization data for the implicit solver: frozen face
    /// coefficients for Picard, exact (epsilon-smoothed) Hessian action for
    /// Newton. Holds references into the operator; rebuild per iterate.
    class Linearization {
    public:
        Linearization(const DiscreteOperator& op, std::span<const double> u, double epsilon);

        /// Principal part with frozen coefficients applied to w (no beta term).
        void frozen_apply(std::span<const double> w, Field& out) const;
        /// Diagonal of the frozen principal part (no beta term).
        const Field& frozen_diagonal() const { return diag_; }
        /// Exact Hessian of the (epsilon-smoothed) gradient energy applied to w.
        void hessian_apply(std::span<const double> w, Field& out) const;

    private:
        const DiscreteOperator* op_;
        detail::FaceData fd_u_;                        // face data of the expansion point
        std::vector<std::vector<double>> coeff_;       // (1/n) sigma_f G_eps^{p-2}
        std::vector<std::vector<double>> curv_;        // (1/n) sigma_f (p-2) G_eps^{p-4}
        Field diag_;
    };

private:
    const Grid* grid_;
    double p_;
    GradientMode mode_;
    double epsilon_reg_;
};

} // namespace plap

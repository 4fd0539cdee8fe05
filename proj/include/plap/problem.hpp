#pragma once

#include "plap/nonlinearity.hpp"
#include "plap/profiles.hpp"

#include <string>
#include <vector>

namespace plap {

/// Continuous problem data: exponents, coefficient profiles, reaction term
/// and the structural constants they must satisfy. Immutable after
/// construction; safe to share across workers.
struct ProblemSpec {
    double p = 2.0;             // diffusion exponent, >= 2
    int dim = 1;                // spatial dimension (1 or 2 at desk scale)
    CoefficientProfile sigma = CoefficientProfile::constant(1.0);
    CoefficientProfile beta = CoefficientProfile::constant(1.0);
    CoefficientProfile source_g = CoefficientProfile::constant(0.0);
    NonlinearityModel nonlinearity = NonlinearityModel::zero();
    double beta0 = 1.0;         // lower bound of beta outside radius r0
    double r0 = 1.0;            // radius beyond which beta >= beta0
    double c_mono = 1.0;        // f' > -c_mono

    /// Basic invariants (p >= 2, beta0 > 0, r0 > 0, c_mono > 0, dim in {1,2});
    /// with strict_dim the dimension must be >= 2.
    void check_basic(bool strict_dim = false) const;
};

struct ValidationReport {
    std::string condition;   // which structural hypothesis was probed
    bool pass = false;
    double metric = 0.0;     // estimated integral / worst margin, see condition
    std::string details;
};

/// Exponent of the negative power of sigma whose local integrability the
/// weight must satisfy: 2n / (n(p-2) + 2p).
double weight_integrability_exponent(double p, int n);

/// Probes local integrability of sigma^{-2n/(n(p-2)+2p)} over B(0, probe_radius)
/// by a midpoint radial (x angular in 2-D) quadrature under 5 dyadic
/// refinements. Divergent when a refinement grows the estimate by more than
/// 10x, when total growth across refinements exceeds 10x, or when a sample is
/// not finite (sigma vanishing on a sampled set). Throws on radial tables
/// with fewer than 4 samples inside the probe radius ("insufficient data").
ValidationReport validate_weight_integrability(const CoefficientProfile& sigma, double p, int n,
                                               double probe_radius);

/// Checks beta >= beta0 on {r0 <= |x| <= 8 r0} and finiteness of the samples.
ValidationReport validate_damping_floor(const CoefficientProfile& beta, double beta0, double r0,
                                        int sample_budget);

/// Checks f(s) s >= 0 and f'(s) > -c_mono on sampled [-S, S]; the metric is
/// the worst margin min(f(s)s, f'(s) + c_mono) over the samples.
ValidationReport validate_nonlinearity_sign(const NonlinearityModel& f, double c_mono,
                                            double sample_range, int sample_budget);

/// All three structural validators plus the basic invariants.
std::vector<ValidationReport> validate_all(const ProblemSpec& spec, double probe_radius,
                                           bool strict_dim = false);

} // namespace plap

#include "plap/problem.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace plap {

void ProblemSpec::check_basic(bool strict_dim) const {
    if (!(p >= 2.0)) throw std::invalid_argument("ProblemSpec: p must be >= 2");
    if (dim != 1 && dim != 2) throw std::invalid_argument("ProblemSpec: dim must be 1 or 2");
    if (strict_dim && dim < 2)
        throw std::invalid_argument("ProblemSpec: dim must be >= 2 in strict mode");
    if (!(beta0 > 0.0)) throw std::invalid_argument("ProblemSpec: beta0 must be > 0");
    if (!(r0 > 0.0)) throw std::invalid_argument("ProblemSpec: r0 must be > 0");
    if (!(c_mono > 0.0)) throw std::invalid_argument("ProblemSpec: c_mono must be > 0");
}

double weight_integrability_exponent(double p, int n) {
    return 2.0 * n / (n * (p - 2.0) + 2.0 * p);
}

namespace {

// Midpoint quadrature of sigma^{-kappa} over B(0, radius) with n_r radial
// cells (x 16 angular midpoints in 2-D). Returns +inf when a sample is not
// finite or sigma <= 0 at a sample.
double shell_quadrature(const CoefficientProfile& sigma, double kappa, int n, double radius,
                        int n_r) {
    const double dr = radius / n_r;
    double total = 0.0;
    constexpr int n_theta = 16;
    for (int i = 0; i < n_r; ++i) {
        const double r = (i + 0.5) * dr;
        if (n == 1) {
            for (double sgn : {-1.0, 1.0}) {
                const std::array<double, 1> pt{sgn * r};
                const double s = sigma(pt);
                if (!std::isfinite(s) || s <= 0.0) return std::numeric_limits<double>::infinity();
                total += std::pow(s, -kappa) * dr;
            }
        } else {
            const double dtheta = 2.0 * std::numbers::pi / n_theta;
            for (int k = 0; k < n_theta; ++k) {
                const double th = (k + 0.5) * dtheta;
                const std::array<double, 2> pt{r * std::cos(th), r * std::sin(th)};
                const double s = sigma(pt);
                if (!std::isfinite(s) || s <= 0.0) return std::numeric_limits<double>::infinity();
                total += std::pow(s, -kappa) * r * dr * dtheta;
            }
        }
    }
    return total;
}

} // namespace

ValidationReport validate_weight_integrability(const CoefficientProfile& sigma, double p, int n,
                                               double probe_radius) {
    if (!(probe_radius > 0.0))
        throw std::invalid_argument("validate_weight_integrability: probe_radius must be > 0");
    if (sigma.kind() == CoefficientProfile::Kind::radial_table && sigma.table_size() < 4)
        throw std::runtime_error(
            "insufficient data: radial table too sparse for the integrability probe");

    const double kappa = weight_integrability_exponent(p, n);
    ValidationReport rep;
    rep.condition = "weight integrability";

    constexpr int refinements = 5;
    constexpr double growth_factor = 10.0;
    int n_r = 32;
    std::vector<double> levels;
    for (int lev = 0; lev <= refinements; ++lev, n_r *= 2)
        levels.push_back(shell_quadrature(sigma, kappa, n, probe_radius, n_r));

    std::ostringstream details;
    bool divergent = false;
    for (std::size_t i = 0; i < levels.size(); ++i) {
        if (!std::isfinite(levels[i])) {
            divergent = true;
            details << "non-finite integrand sample at refinement " << i << "; ";
            break;
        }
        if (i > 0 && levels[i] > growth_factor * levels[i - 1]) {
            divergent = true;
            details << "refinement " << i << " grew the estimate more than 10x; ";
            break;
        }
    }
    if (!divergent && levels.front() > 0.0 && levels.back() > growth_factor * levels.front()) {
        divergent = true;
        details << "cumulative growth across refinements exceeds 10x; ";
    }

    rep.pass = !divergent;
    rep.metric = levels.back();
    details << "estimate=" << levels.back() << " kappa=" << kappa;
    rep.details = details.str();
    return rep;
}

ValidationReport validate_damping_floor(const CoefficientProfile& beta, double beta0, double r0,
                                        int sample_budget) {
    if (sample_budget < 1)
        throw std::invalid_argument("validate_damping_floor: sample_budget must be >= 1");
    ValidationReport rep;
    rep.condition = "damping floor";

    const double r_max = 8.0 * r0;
    const int n_r = std::max(1, sample_budget);
    double min_sample = std::numeric_limits<double>::infinity();
    double max_sample = -std::numeric_limits<double>::infinity();
    bool finite = true;
    constexpr int n_theta = 8;
    for (int i = 0; i < n_r; ++i) {
        const double r = r0 + (r_max - r0) * i / std::max(1, n_r - 1);
        for (int k = 0; k < n_theta; ++k) {
            const double th = 2.0 * std::numbers::pi * (k + 0.5) / n_theta;
            const std::array<double, 2> pt{r * std::cos(th), r * std::sin(th)};
            const std::array<double, 1> pt1{k % 2 == 0 ? r : -r};
            const double b = beta(std::span<const double>(pt.data(), 2));
            const double b1 = beta(std::span<const double>(pt1.data(), 1));
            for (double v : {b, b1}) {
                if (!std::isfinite(v)) finite = false;
                min_sample = std::min(min_sample, v);
                max_sample = std::max(max_sample, v);
            }
        }
    }
    rep.pass = finite && min_sample >= beta0;
    rep.metric = min_sample;
    std::ostringstream details;
    details << "min=" << min_sample << " max=" << max_sample << " over [" << r0 << "," << r_max
            << "]";
    if (!finite) details << " (non-finite sample)";
    rep.details = details.str();
    return rep;
}

ValidationReport validate_nonlinearity_sign(const NonlinearityModel& f, double c_mono,
                                            double sample_range, int sample_budget) {
    if (!(sample_range > 0.0))
        throw std::invalid_argument("validate_nonlinearity_sign: sample_range must be > 0");
    ValidationReport rep;
    rep.condition = "nonlinearity sign/monotonicity";

    const int n = std::max(3, sample_budget);
    double worst_sign = std::numeric_limits<double>::infinity();
    double worst_slope = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i) {
        const double s = -sample_range + 2.0 * sample_range * i / (n - 1);
        const double fs = f.f(s);
        worst_sign = std::min(worst_sign, fs * s);
        worst_slope = std::min(worst_slope, f.f_prime(s) + c_mono);
    }
    rep.pass = worst_sign >= 0.0 && worst_slope > 0.0;
    rep.metric = std::min(worst_sign, worst_slope);
    std::ostringstream details;
    details << "worst f(s)s=" << worst_sign << " worst f'(s)+c=" << worst_slope << " on [-"
            << sample_range << "," << sample_range << "]";
    rep.details = details.str();
    return rep;
}

std::vector<ValidationReport> validate_all(const ProblemSpec& spec, double probe_radius,
                                           bool strict_dim) {
    spec.check_basic(strict_dim);
    std::vector<ValidationReport> reports;
    reports.push_back(validate_weight_integrability(spec.sigma, spec.p, spec.dim, probe_radius));
    reports.push_back(validate_damping_floor(spec.beta, spec.beta0, spec.r0, 64));
    reports.push_back(validate_nonlinearity_sign(spec.nonlinearity, spec.c_mono, 10.0, 2001));
    return reports;
}

} // namespace plap

#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace plap {

/// Thrown when the reaction term is evaluated outside its safe range
/// (s*exp(s^2) overflows past |s| ~ 26.5; never silently clamped).
class NonlinearityOverflow : public std::domain_error {
public:
    explicit NonlinearityOverflow(double s)
        : std::domain_error("nonlinearity overflow: |u| = " + std::to_string(s) +
                            " exceeds safe evaluation range (26)") {}
};

/// Pointwise reaction term f with derivative and antiderivative F, F(0) = 0.
/// The admissible models satisfy f(s)s >= 0; cubic_minus_linear with b > 0
/// violates it near 0 and exists for negative testing of the validator.
class NonlinearityModel {
public:
    enum class Kind { zero, odd_power, cubic_minus_linear, exp_growth };

    static NonlinearityModel zero();
    /// f(s) = |s|^{q-1} s, q >= 1
    static NonlinearityModel odd_power(double q);
    /// f(s) = a s^3 - b s (derived monotonicity constant = b)
    static NonlinearityModel cubic_minus_linear(double a, double b);
    /// f(s) = s exp(s^2); no polynomial upper bound
    static NonlinearityModel exp_growth();

    Kind kind() const { return kind_; }

    double f(double s) const;
    double f_prime(double s) const;
    /// Closed-form antiderivative of f with F(0) = 0.
    double F(double s) const;

    /// Monotonicity constant implied by the model parameters (b for
    /// cubic_minus_linear, 0 otherwise: the other models have f' >= 0).
    double derived_monotonicity_constant() const;

    std::string describe() const;

    /// Configuration lines ("f.kind = ..." etc.) that parse back to this model.
    std::vector<std::pair<std::string, std::string>> config_entries() const;

private:
    Kind kind_ = Kind::zero;
    double q_ = 3.0;
    double a_ = 1.0;
    double b_ = 0.0;
};

/// f(s) + c s; nondecreasing in s whenever f' > -c holds.
double shifted_nonlinearity(const NonlinearityModel& f, double c, double s);

} // namespace plap

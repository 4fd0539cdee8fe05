#pragma once

#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace plap {

/// Spatial coefficient profile: a pure map from a point in R^n to a real.
/// All shapes are radially symmetric except gaussian_bump, whose center may
/// be off the origin. Diffusion/damping profiles must be nonnegative; the
/// source profile may be signed.
class CoefficientProfile {
public:
    enum class Kind { constant, power_law, two_power, radial_table, gaussian_bump };

    static CoefficientProfile constant(double value);
    // amplitude * |x|^alpha + offset
    static CoefficientProfile power_law(double amplitude, double alpha, double offset = 0.0);
    // |x|^alpha + |x|^gamma
    static CoefficientProfile two_power(double alpha, double gamma);
    // piecewise-linear in radius; clamped to the end values outside the table
    static CoefficientProfile radial_table(std::vector<double> radii, std::vector<double> values);
    // amplitude * exp(-|x - center|^2 / (2 width^2)) + offset
    static CoefficientProfile gaussian_bump(double amplitude, std::vector<double> center,
                                            double width, double offset = 0.0);

    Kind kind() const { return kind_; }

    /// Evaluate at a point (dimension = point.size()).
    double operator()(std::span<const double> point) const;

    /// Evaluate at radius r along the first axis (radial profiles only need r).
    double at_radius(double r) const;

    bool is_radial() const { return kind_ != Kind::gaussian_bump || center_is_origin_; }

    // power_law / two_power exponent at the origin, for singularity bookkeeping
    double alpha() const { return alpha_; }

    std::size_t table_size() const { return radii_.size(); }
    std::string describe() const;

    /// Configuration lines ("<prefix>.kind = ..." etc.) that parse back to
    /// this profile.
    std::vector<std::pair<std::string, std::string>> config_entries(
        const std::string& prefix) const;

private:
    CoefficientProfile() = default;

    Kind kind_ = Kind::constant;
    double value_ = 0.0;
    double amplitude_ = 1.0;
    double alpha_ = 0.0;
    double gamma_ = 0.0;
    double offset_ = 0.0;
    double width_ = 1.0;
    std::vector<double> center_;
    bool center_is_origin_ = true;
    std::vector<double> radii_;
    std::vector<double> values_;
};

} // namespace plap

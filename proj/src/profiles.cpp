#include "plap/profiles.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace plap {

CoefficientProfile CoefficientProfile::constant(double value) {
    CoefficientProfile p;
    p.kind_ = Kind::constant;
    p.value_ = value;
    return p;
}

CoefficientProfile CoefficientProfile::power_law(double amplitude, double alpha, double offset) {
    CoefficientProfile p;
    p.kind_ = Kind::power_law;
    p.amplitude_ = amplitude;
    p.alpha_ = alpha;
    p.offset_ = offset;
    return p;
}

CoefficientProfile CoefficientProfile::two_power(double alpha, double gamma) {
    CoefficientProfile p;
    p.kind_ = Kind::two_power;
    p.alpha_ = alpha;
    p.gamma_ = gamma;
    return p;
}

CoefficientProfile CoefficientProfile::radial_table(std::vector<double> radii,
                                                    std::vector<double> values) {
    if (radii.size() != values.size() || radii.empty())
        throw std::invalid_argument("radial_table: radii/values size mismatch or empty");
    if (!std::is_sorted(radii.begin(), radii.end()))
        throw std::invalid_argument("radial_table: radii must be sorted");
    CoefficientProfile p;
    p.kind_ = Kind::radial_table;
    p.radii_ = std::move(radii);
    p.values_ = std::move(values);
    return p;
}

CoefficientProfile CoefficientProfile::gaussian_bump(double amplitude, std::vector<double> center,
                                                     double width, double offset) {
    if (width <= 0.0) throw std::invalid_argument("gaussian_bump: width must be > 0");
    CoefficientProfile p;
    p.kind_ = Kind::gaussian_bump;
    p.amplitude_ = amplitude;
    p.width_ = width;
    p.offset_ = offset;
    p.center_is_origin_ =
        std::all_of(center.begin(), center.end(), [](double c) { return c == 0.0; });
    p.center_ = std::move(center);
    return p;
}

double CoefficientProfile::operator()(std::span<const double> point) const {
    double r2 = 0.0;
    if (kind_ == Kind::gaussian_bump) {
        for (std::size_t i = 0; i < point.size(); ++i) {
            const double c = i < center_.size() ? center_[i] : 0.0;
            r2 += (point[i] - c) * (point[i] - c);
        }
        return amplitude_ * std::exp(-r2 / (2.0 * width_ * width_)) + offset_;
    }
    for (double x : point) r2 += x * x;
    return at_radius(std::sqrt(r2));
}

double CoefficientProfile::at_radius(double r) const {
    switch (kind_) {
        case Kind::constant:
            return value_;
        case Kind::power_law:
            return amplitude_ * std::pow(r, alpha_) + offset_;
        case Kind::two_power:
            return std::pow(r, alpha_) + std::pow(r, gamma_);
        case Kind::radial_table: {
            if (r <= radii_.front()) return values_.front();
            if (r >= radii_.back()) return values_.back();
            const auto it = std::upper_bound(radii_.begin(), radii_.end(), r);
            const std::size_t hi = static_cast<std::size_t>(it - radii_.begin());
            const std::size_t lo = hi - 1;
            const double t = (r - radii_[lo]) / (radii_[hi] - radii_[lo]);
            return values_[lo] + t * (values_[hi] - values_[lo]);
        }
        case Kind::gaussian_bump:
            return amplitude_ * std::exp(-r * r / (2.0 * width_ * width_)) + offset_;
    }
    return 0.0;
}

namespace {

std::string num(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

} // namespace

std::vector<std::pair<std::string, std::string>> CoefficientProfile::config_entries(
    const std::string& prefix) const {
    std::vector<std::pair<std::string, std::string>> out;
    switch (kind_) {
        case Kind::constant:
            out.emplace_back(prefix + ".kind", "constant");
            out.emplace_back(prefix + ".value", num(value_));
            break;
        case Kind::power_law:
            out.emplace_back(prefix + ".kind", "power_law");
            out.emplace_back(prefix + ".alpha", num(alpha_));
            out.emplace_back(prefix + ".amplitude", num(amplitude_));
            out.emplace_back(prefix + ".offset", num(offset_));
            break;
        case Kind::two_power:
            out.emplace_back(prefix + ".kind", "two_power");
            out.emplace_back(prefix + ".alpha", num(alpha_));
            out.emplace_back(prefix + ".gamma", num(gamma_));
            break;
        case Kind::radial_table: {
            out.emplace_back(prefix + ".kind", "radial_table");
            std::string table;
            for (std::size_t i = 0; i < radii_.size(); ++i) {
                if (i) table += "; ";
                table += num(radii_[i]) + ":" + num(values_[i]);
            }
            out.emplace_back(prefix + ".table", std::move(table));
            break;
        }
        case Kind::gaussian_bump: {
            out.emplace_back(prefix + ".kind", "gaussian_bump");
            out.emplace_back(prefix + ".amplitude", num(amplitude_));
            out.emplace_back(prefix + ".width", num(width_));
            out.emplace_back(prefix + ".offset", num(offset_));
            if (!center_.empty()) {
                std::string c;
                for (std::size_t i = 0; i < center_.size(); ++i) {
                    if (i) c += ",";
                    c += num(center_[i]);
                }
                out.emplace_back(prefix + ".center", std::move(c));
            }
            break;
        }
    }
    return out;
}

std::string CoefficientProfile::describe() const {
    std::ostringstream os;
    switch (kind_) {
        case Kind::constant: os << "constant(" << value_ << ")"; break;
        case Kind::power_law:
            os << "power_law(" << amplitude_ << "*r^" << alpha_ << "+" << offset_ << ")";
            break;
        case Kind::two_power: os << "two_power(r^" << alpha_ << "+r^" << gamma_ << ")"; break;
        case Kind::radial_table: os << "radial_table[" << radii_.size() << "]"; break;
        case Kind::gaussian_bump: os << "gaussian_bump(w=" << width_ << ")"; break;
    }
    return os.str();
}

} // namespace plap

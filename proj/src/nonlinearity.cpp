#include "plap/nonlinearity.hpp"

#include <cmath>

namespace plap {

namespace {
constexpr double kExpSafeRange = 26.0;
}

NonlinearityModel NonlinearityModel::zero() { return NonlinearityModel{}; }

NonlinearityModel NonlinearityModel::odd_power(double q) {
    if (q < 1.0) throw std::invalid_argument("odd_power: exponent must be >= 1");
    NonlinearityModel m;
    m.kind_ = Kind::odd_power;
    m.q_ = q;
    return m;
}

NonlinearityModel NonlinearityModel::cubic_minus_linear(double a, double b) {
    NonlinearityModel m;
    m.kind_ = Kind::cubic_minus_linear;
    m.a_ = a;
    m.b_ = b;
    return m;
}

NonlinearityModel NonlinearityModel::exp_growth() {
    NonlinearityModel m;
    m.kind_ = Kind::exp_growth;
    return m;
}

double NonlinearityModel::f(double s) const {
    switch (kind_) {
        case Kind::zero: return 0.0;
        case Kind::odd_power: return std::pow(std::abs(s), q_ - 1.0) * s;
        case Kind::cubic_minus_linear: return a_ * s * s * s - b_ * s;
        case Kind::exp_growth:
            if (std::abs(s) > kExpSafeRange) throw NonlinearityOverflow(s);
            return s * std::exp(s * s);
    }
    return 0.0;
}

double NonlinearityModel::f_prime(double s) const {
    switch (kind_) {
        case Kind::zero: return 0.0;
        case Kind::odd_power: return q_ * std::pow(std::abs(s), q_ - 1.0);
        case Kind::cubic_minus_linear: return 3.0 * a_ * s * s - b_;
        case Kind::exp_growth:
            if (std::abs(s) > kExpSafeRange) throw NonlinearityOverflow(s);
            return std::exp(s * s) * (1.0 + 2.0 * s * s);
    }
    return 0.0;
}

double NonlinearityModel::F(double s) const {
    switch (kind_) {
        case Kind::zero: return 0.0;
        case Kind::odd_power: return std::pow(std::abs(s), q_ + 1.0) / (q_ + 1.0);
        case Kind::cubic_minus_linear:
            return 0.25 * a_ * s * s * s * s - 0.5 * b_ * s * s;
        case Kind::exp_growth:
            if (std::abs(s) > kExpSafeRange) throw NonlinearityOverflow(s);
            return 0.5 * (std::exp(s * s) - 1.0);
    }
    return 0.0;
}

double NonlinearityModel::derived_monotonicity_constant() const {
    return kind_ == Kind::cubic_minus_linear ? b_ : 0.0;
}

std::vector<std::pair<std::string, std::string>> NonlinearityModel::config_entries() const {
    std::vector<std::pair<std::string, std::string>> out;
    char buf[40];
    switch (kind_) {
        case Kind::zero:
            out.emplace_back("f.kind", "zero");
            break;
        case Kind::odd_power:
            out.emplace_back("f.kind", "odd_power");
            std::snprintf(buf, sizeof buf, "%.17g", q_);
            out.emplace_back("f.q", buf);
            break;
        case Kind::cubic_minus_linear:
            out.emplace_back("f.kind", "cubic_minus_linear");
            std::snprintf(buf, sizeof buf, "%.17g", a_);
            out.emplace_back("f.a", buf);
            std::snprintf(buf, sizeof buf, "%.17g", b_);
            out.emplace_back("f.b", buf);
            break;
        case Kind::exp_growth:
            out.emplace_back("f.kind", "exp_growth");
            break;
    }
    return out;
}

std::string NonlinearityModel::describe() const {
    switch (kind_) {
        case Kind::zero: return "zero";
        case Kind::odd_power: return "odd_power(q=" + std::to_string(q_) + ")";
        case Kind::cubic_minus_linear:
            return "cubic_minus_linear(a=" + std::to_string(a_) + ",b=" + std::to_string(b_) + ")";
        case Kind::exp_growth: return "exp_growth";
    }
    return "?";
}

double shifted_nonlinearity(const NonlinearityModel& f, double c, double s) {
    return f.f(s) + c * s;
}

} // namespace plap

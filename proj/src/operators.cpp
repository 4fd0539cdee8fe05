#include "plap/operators.hpp"

#include <cmath>
#include <stdexcept>

namespace plap {

namespace {

double magnitude_power(double g2, double expo) {
    if (expo == 0.0) return 1.0;
    if (g2 <= 0.0) return 0.0;
    return std::pow(g2, expo);
}

} // namespace

DiscreteOperator::DiscreteOperator(const Grid& grid, double p, GradientMode mode,
                                   double epsilon_reg)
    : grid_(&grid), p_(p), mode_(mode), epsilon_reg_(epsilon_reg) {
    if (!(p >= 2.0)) throw std::invalid_argument("DiscreteOperator: p must be >= 2");
    if (epsilon_reg < 0.0) throw std::invalid_argument("DiscreteOperator: epsilon_reg must be >= 0");
}

Field DiscreteOperator::apply(std::span<const double> u) const {
    require_finite(u, "apply_A input");
    const Grid& g = *grid_;
    std::vector<double> full;
    detail::to_full(g, u, full);
    detail::FaceData fd;
    detail::compute_face_data(g, full, mode_, fd);

    const double half_pm2 = 0.5 * (p_ - 2.0);
    const double face_norm = mode_ == GradientMode::isotropic ? g.n : 1.0;
    std::vector<std::vector<double>> a(fd.d.size()), b(fd.d.size());
    for (std::size_t ax = 0; ax < fd.d.size(); ++ax) {
        a[ax].resize(fd.d[ax].size());
        b[ax].resize(fd.d[ax].size());
        for (std::size_t f = 0; f < fd.d[ax].size(); ++f) {
            const double d = fd.d[ax][f];
            const double tau = fd.tau[ax][f];
            const double c = g.sigma_faces[ax][f] *
                             magnitude_power(d * d + tau * tau, half_pm2) / face_norm;
            a[ax][f] = c * d;
            b[ax][f] = c * tau;
        }
    }
    Field out(g.interior_count(), 0.0);
    detail::scatter_face_pairs(g, a, b, out);
    for (std::size_t k = 0; k < out.size(); ++k) out[k] += g.beta_nodes[k] * u[k];
    require_finite(out, "apply_A output");
    return out;
}

EnergyTerms DiscreteOperator::energy_pairing(std::span<const double> u) const {
    const Grid& g = *grid_;
    EnergyTerms e;
    {
        const double wgp = weighted_grad_p_norm(g, u, p_, mode_);
        e.grad_p = std::pow(wgp, p_);
    }
    {
        const double bl2 = beta_l2_norm(g, u);
        e.beta_sq = bl2 * bl2;
    }
    const Field au = apply(u);
    double pairing = 0.0;
    for (std::size_t k = 0; k < u.size(); ++k) pairing += au[k] * u[k];
    e.pairing = pairing * g.cell_volume();

    const double lhs = e.pairing, rhs = e.grad_p + e.beta_sq;
    const double scale = std::max({std::abs(lhs), std::abs(rhs), 1e-300});
    if (std::abs(lhs - rhs) > 1e-10 * scale)
        throw std::logic_error("energy_pairing: summation-by-parts identity violated");
    return e;
}

double DiscreteOperator::monotonicity_probe(std::span<const double> u,
                                            std::span<const double> v) const {
    if (u.size() != v.size())
        throw std::invalid_argument("monotonicity_probe: shape mismatch");
    const Field au = apply(u);
    const Field av = apply(v);
    double s = 0.0;
    for (std::size_t k = 0; k < u.size(); ++k) s += (au[k] - av[k]) * (u[k] - v[k]);
    return s * grid_->cell_volume();
}

Field DiscreteOperator::full_rhs(std::span<const double> u, const NonlinearityModel& f) const {
    const Grid& g = *grid_;
    Field rhs = apply(u);
    for (std::size_t k = 0; k < rhs.size(); ++k) rhs[k] = g.g_nodes[k] - rhs[k] - f.f(u[k]);
    return rhs;
}

double DiscreteOperator::max_face_coefficient(std::span<const double> u) const {
    const Grid& g = *grid_;
    std::vector<double> full;
    detail::to_full(g, u, full);
    detail::FaceData fd;
    detail::compute_face_data(g, full, mode_, fd);
    const double half_pm2 = 0.5 * (p_ - 2.0);
    double mx = 0.0;
    for (std::size_t ax = 0; ax < fd.d.size(); ++ax)
        for (std::size_t f = 0; f < fd.d[ax].size(); ++f) {
            const double d = fd.d[ax][f];
            const double tau = fd.tau[ax][f];
            mx = std::max(mx, g.sigma_faces[ax][f] *
                                  magnitude_power(d * d + tau * tau, half_pm2));
        }
    return mx;
}

DiscreteOperator::Linearization::Linearization(const DiscreteOperator& op,
                                               std::span<const double> u, double epsilon)
    : op_(&op) {
    const Grid& g = op.grid();
    std::vector<double> full;
    detail::to_full(g, u, full);
    detail::compute_face_data(g, full, op.mode(), fd_u_);

    const double p = op.p();
    const double face_norm = op.mode() == GradientMode::isotropic ? g.n : 1.0;
    const double eps2 = epsilon * epsilon;
    coeff_.resize(fd_u_.d.size());
    curv_.resize(fd_u_.d.size());
    for (std::size_t ax = 0; ax < fd_u_.d.size(); ++ax) {
        coeff_[ax].resize(fd_u_.d[ax].size());
        curv_[ax].resize(fd_u_.d[ax].size());
        for (std::size_t f = 0; f < fd_u_.d[ax].size(); ++f) {
            const double d = fd_u_.d[ax][f];
            const double tau = fd_u_.tau[ax][f];
            const double g2 = d * d + tau * tau + eps2;
            const double s = g.sigma_faces[ax][f] / face_norm;
            coeff_[ax][f] = s * magnitude_power(g2, 0.5 * (p - 2.0));
            curv_[ax][f] = p == 2.0 ? 0.0 : s * (p - 2.0) * magnitude_power(g2, 0.5 * (p - 4.0));
        }
    }

    // diagonal of the frozen principal part
    const std::size_t mm = static_cast<std::size_t>(g.m);
    const std::size_t M = static_cast<std::size_t>(g.interior_per_axis());
    const double inv_h2 = 1.0 / (g.h * g.h);
    diag_.assign(g.interior_count(), 0.0);
    if (g.n == 1) {
        for (std::size_t k = 0; k < M; ++k)
            diag_[k] = (coeff_[0][k] + coeff_[0][k + 1]) * inv_h2;
    } else {
        for (std::size_t i = 1; i + 1 < mm; ++i)
            for (std::size_t j = 1; j + 1 < mm; ++j) {
                double d = 0.0;
                d += (coeff_[0][(i - 1) * mm + j] + coeff_[0][i * mm + j]) * inv_h2;
                d += (coeff_[1][i * (mm - 1) + (j - 1)] + coeff_[1][i * (mm - 1) + j]) * inv_h2;
                if (op.mode() == GradientMode::isotropic) {
                    const double inv_16h2 = inv_h2 / 16.0;
                    for (std::size_t fi : {i - 1, i})
                        for (std::size_t jp : {j - 1, j + 1})
                            if (jp >= 1 && jp + 1 < mm) d += coeff_[0][fi * mm + jp] * inv_16h2;
                    for (std::size_t ip : {i - 1, i + 1})
                        if (ip >= 1 && ip + 1 < mm)
                            for (std::size_t fj : {j - 1, j})
                                d += coeff_[1][ip * (mm - 1) + fj] * inv_16h2;
                }
                diag_[(i - 1) * M + (j - 1)] = d;
            }
    }
}

void DiscreteOperator::Linearization::frozen_apply(std::span<const double> w, Field& out) const {
    const Grid& g = op_->grid();
    std::vector<double> full;
    detail::to_full(g, w, full);
    detail::FaceData fd;
    detail::compute_face_data(g, full, op_->mode(), fd);
    std::vector<std::vector<double>> a(fd.d.size()), b(fd.d.size());
    for (std::size_t ax = 0; ax < fd.d.size(); ++ax) {
        a[ax].resize(fd.d[ax].size());
        b[ax].resize(fd.d[ax].size());
        for (std::size_t f = 0; f < fd.d[ax].size(); ++f) {
            a[ax][f] = coeff_[ax][f] * fd.d[ax][f];
            b[ax][f] = coeff_[ax][f] * fd.tau[ax][f];
        }
    }
    out.assign(g.interior_count(), 0.0);
    detail::scatter_face_pairs(g, a, b, out);
}

void DiscreteOperator::Linearization::hessian_apply(std::span<const double> w, Field& out) const {
    const Grid& g = op_->grid();
    std::vector<double> full;
    detail::to_full(g, w, full);
    detail::FaceData fd;
    detail::compute_face_data(g, full, op_->mode(), fd);
    std::vector<std::vector<double>> a(fd.d.size()), b(fd.d.size());
    for (std::size_t ax = 0; ax < fd.d.size(); ++ax) {
        a[ax].resize(fd.d[ax].size());
        b[ax].resize(fd.d[ax].size());
        for (std::size_t f = 0; f < fd.d[ax].size(); ++f) {
            const double du = fd_u_.d[ax][f], tu = fd_u_.tau[ax][f];
            const double dw = fd.d[ax][f], tw = fd.tau[ax][f];
            const double dot = du * dw + tu * tw;
            a[ax][f] = coeff_[ax][f] * dw + curv_[ax][f] * dot * du;
            b[ax][f] = coeff_[ax][f] * tw + curv_[ax][f] * dot * tu;
        }
    }
    out.assign(g.interior_count(), 0.0);
    detail::scatter_face_pairs(g, a, b, out);
}

} // namespace plap

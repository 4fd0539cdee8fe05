#include "plap/grid.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

namespace plap {

std::size_t Grid::interior_count() const {
    std::size_t M = static_cast<std::size_t>(interior_per_axis());
    return n == 1 ? M : M * M;
}

std::size_t Grid::face_count(int axis) const {
    const std::size_t mm = static_cast<std::size_t>(m);
    if (n == 1) return mm - 1;
    return axis == 0 ? (mm - 1) * mm : mm * (mm - 1);
}

double Grid::cell_volume() const { return n == 1 ? h : h * h; }

void Grid::interior_coords(std::size_t flat, double* out) const {
    const std::size_t M = static_cast<std::size_t>(interior_per_axis());
    if (n == 1) {
        out[0] = axis_coords[1 + flat];
    } else {
        out[0] = axis_coords[1 + flat / M];
        out[1] = axis_coords[1 + flat % M];
    }
}

Grid Grid::build(const ProblemSpec& spec, double R, int m_per_axis) {
    if (!(R > 0.0)) throw std::invalid_argument("Grid: R must be > 0");
    if (m_per_axis < 3) throw std::invalid_argument("Grid: need at least 3 nodes per axis");
    Grid g;
    g.n = spec.dim;
    g.R = R;
    g.m = m_per_axis;
    g.h = 2.0 * R / (m_per_axis - 1);

    g.axis_coords.resize(m_per_axis);
    for (int i = 0; i < m_per_axis; ++i) g.axis_coords[i] = -R + g.h * i;

    const auto sample = [&](const CoefficientProfile& prof, std::span<const double> pt) {
        return prof(pt);
    };

    g.sigma_faces.resize(g.n == 1 ? 1 : 2);
    if (g.n == 1) {
        g.sigma_faces[0].resize(g.face_count(0));
        for (int i = 0; i + 1 < g.m; ++i) {
            const std::array<double, 1> mid{0.5 * (g.axis_coords[i] + g.axis_coords[i + 1])};
            g.sigma_faces[0][i] = sample(spec.sigma, mid);
        }
    } else {
        g.sigma_faces[0].resize(g.face_count(0));
        g.sigma_faces[1].resize(g.face_count(1));
        for (int i = 0; i + 1 < g.m; ++i)
            for (int j = 0; j < g.m; ++j) {
                const std::array<double, 2> mid{0.5 * (g.axis_coords[i] + g.axis_coords[i + 1]),
                                                g.axis_coords[j]};
                g.sigma_faces[0][static_cast<std::size_t>(i) * g.m + j] = sample(spec.sigma, mid);
            }
        for (int i = 0; i < g.m; ++i)
            for (int j = 0; j + 1 < g.m; ++j) {
                const std::array<double, 2> mid{g.axis_coords[i],
                                                0.5 * (g.axis_coords[j] + g.axis_coords[j + 1])};
                g.sigma_faces[1][static_cast<std::size_t>(i) * (g.m - 1) + j] =
                    sample(spec.sigma, mid);
            }
    }
    for (const auto& ax : g.sigma_faces)
        for (double s : ax)
            if (!std::isfinite(s) || s < 0.0)
                throw std::invalid_argument("Grid: sigma must be finite and nonnegative at faces");

    g.beta_nodes.resize(g.interior_count());
    g.g_nodes.resize(g.interior_count());
    std::array<double, 2> pt{};
    for (std::size_t k = 0; k < g.interior_count(); ++k) {
        g.interior_coords(k, pt.data());
        const std::span<const double> sp(pt.data(), static_cast<std::size_t>(g.n));
        g.beta_nodes[k] = sample(spec.beta, sp);
        g.g_nodes[k] = sample(spec.source_g, sp);
        if (!std::isfinite(g.beta_nodes[k]) || g.beta_nodes[k] < 0.0)
            throw std::invalid_argument("Grid: beta must be finite and nonnegative at nodes");
        if (!std::isfinite(g.g_nodes[k]))
            throw std::invalid_argument("Grid: g must be finite at nodes");
    }
    return g;
}

void require_finite(std::span<const double> v, const char* what) {
    for (double x : v)
        if (!std::isfinite(x)) throw std::runtime_error(std::string(what) + ": non-finite entry");
}

namespace detail {

void to_full(const Grid& g, std::span<const double> interior, std::vector<double>& full) {
    if (interior.size() != g.interior_count())
        throw std::invalid_argument("field shape does not match the grid");
    const std::size_t mm = static_cast<std::size_t>(g.m);
    const std::size_t M = static_cast<std::size_t>(g.interior_per_axis());
    full.assign(g.n == 1 ? mm : mm * mm, 0.0);
    if (g.n == 1) {
        for (std::size_t k = 0; k < M; ++k) full[1 + k] = interior[k];
    } else {
        for (std::size_t i = 0; i < M; ++i)
            for (std::size_t j = 0; j < M; ++j) full[(i + 1) * mm + (j + 1)] = interior[i * M + j];
    }
}

void compute_face_data(const Grid& g, const std::vector<double>& full, GradientMode mode,
                       FaceData& fd) {
    const std::size_t mm = static_cast<std::size_t>(g.m);
    const double inv_h = 1.0 / g.h;
    fd.d.resize(g.n == 1 ? 1 : 2);
    fd.tau.resize(g.n == 1 ? 1 : 2);
    if (g.n == 1) {
        fd.d[0].resize(g.face_count(0));
        fd.tau[0].assign(g.face_count(0), 0.0);
        for (std::size_t i = 0; i + 1 < mm; ++i) fd.d[0][i] = (full[i + 1] - full[i]) * inv_h;
        return;
    }
    fd.d[0].resize(g.face_count(0));
    fd.d[1].resize(g.face_count(1));
    fd.tau[0].assign(g.face_count(0), 0.0);
    fd.tau[1].assign(g.face_count(1), 0.0);
    for (std::size_t i = 0; i + 1 < mm; ++i)
        for (std::size_t j = 0; j < mm; ++j)
            fd.d[0][i * mm + j] = (full[(i + 1) * mm + j] - full[i * mm + j]) * inv_h;
    for (std::size_t i = 0; i < mm; ++i)
        for (std::size_t j = 0; j + 1 < mm; ++j)
            fd.d[1][i * (mm - 1) + j] = (full[i * mm + j + 1] - full[i * mm + j]) * inv_h;
    if (mode == GradientMode::axiswise) return;

    // centered cross-derivatives at nodes; zero where no centered stencil fits
    const auto dy_node = [&](std::size_t i, std::size_t j) -> double {
        if (j == 0 || j + 1 >= mm) return 0.0;
        return (full[i * mm + j + 1] - full[i * mm + j - 1]) * (0.5 * inv_h);
    };
    const auto dx_node = [&](std::size_t i, std::size_t j) -> double {
        if (i == 0 || i + 1 >= mm) return 0.0;
        return (full[(i + 1) * mm + j] - full[(i - 1) * mm + j]) * (0.5 * inv_h);
    };
    for (std::size_t i = 0; i + 1 < mm; ++i)
        for (std::size_t j = 0; j < mm; ++j)
            fd.tau[0][i * mm + j] = 0.5 * (dy_node(i, j) + dy_node(i + 1, j));
    for (std::size_t i = 0; i < mm; ++i)
        for (std::size_t j = 0; j + 1 < mm; ++j)
            fd.tau[1][i * (mm - 1) + j] = 0.5 * (dx_node(i, j) + dx_node(i, j + 1));
}

void scatter_face_pairs(const Grid& g, const std::vector<std::vector<double>>& a,
                        const std::vector<std::vector<double>>& b, std::vector<double>& out) {
    const std::size_t mm = static_cast<std::size_t>(g.m);
    const std::size_t M = static_cast<std::size_t>(g.interior_per_axis());
    const double inv_h = 1.0 / g.h;
    const double inv_4h = 0.25 * inv_h;

    if (g.n == 1) {
        for (std::size_t i = 0; i + 1 < mm; ++i) {
            const double af = a[0][i] * inv_h;
            if (i + 1 >= 1 && i + 1 <= M) out[i] += af;      // node i+1 (interior index i)
            if (i >= 1 && i <= M) out[i - 1] -= af;          // node i
        }
        return;
    }

    const auto add = [&](std::size_t i, std::size_t j, double v) {
        if (i >= 1 && i <= M && j >= 1 && j <= M) out[(i - 1) * M + (j - 1)] += v;
    };
    // x-faces: normal slot couples (i,j)/(i+1,j); tangential slot couples the
    // j+-1 columns of whichever endpoints admit a centered cross-derivative.
    for (std::size_t i = 0; i + 1 < mm; ++i)
        for (std::size_t j = 0; j < mm; ++j) {
            const std::size_t f = i * mm + j;
            const double af = a[0][f] * inv_h;
            if (af != 0.0) {
                add(i + 1, j, af);
                add(i, j, -af);
            }
            const double bf = b.empty() ? 0.0 : b[0][f] * inv_4h;
            if (bf != 0.0 && j >= 1 && j + 1 < mm) {
                add(i, j + 1, bf);
                add(i, j - 1, -bf);
                add(i + 1, j + 1, bf);
                add(i + 1, j - 1, -bf);
            }
        }
    for (std::size_t i = 0; i < mm; ++i)
        for (std::size_t j = 0; j + 1 < mm; ++j) {
            const std::size_t f = i * (mm - 1) + j;
            const double af = a[1][f] * inv_h;
            if (af != 0.0) {
                add(i, j + 1, af);
                add(i, j, -af);
            }
            const double bf = b.empty() ? 0.0 : b[1][f] * inv_4h;
            if (bf != 0.0 && i >= 1 && i + 1 < mm) {
                add(i + 1, j, bf);
                add(i - 1, j, -bf);
                add(i + 1, j + 1, bf);
                add(i - 1, j + 1, -bf);
            }
        }
}

} // namespace detail

double l2_norm(const Grid& g, std::span<const double> u) {
    if (u.size() != g.interior_count())
        throw std::invalid_argument("field shape does not match the grid");
    double s = 0.0;
    for (double x : u) s += x * x;
    return std::sqrt(s * g.cell_volume());
}

double beta_l2_norm(const Grid& g, std::span<const double> u) {
    if (u.size() != g.interior_count())
        throw std::invalid_argument("field shape does not match the grid");
    double s = 0.0;
    for (std::size_t k = 0; k < u.size(); ++k) s += g.beta_nodes[k] * u[k] * u[k];
    return std::sqrt(s * g.cell_volume());
}

double weighted_grad_p_norm(const Grid& g, std::span<const double> u, double p,
                            GradientMode mode) {
    std::vector<double> full;
    detail::to_full(g, u, full);
    detail::FaceData fd;
    detail::compute_face_data(g, full, mode, fd);
    double sum = 0.0;
    for (std::size_t ax = 0; ax < fd.d.size(); ++ax)
        for (std::size_t f = 0; f < fd.d[ax].size(); ++f) {
            const double g2 = fd.d[ax][f] * fd.d[ax][f] + fd.tau[ax][f] * fd.tau[ax][f];
            sum += g.sigma_faces[ax][f] * std::pow(g2, 0.5 * p);
        }
    // isotropic faces each sample the full gradient, so the n face families
    // overcount by n; axiswise faces carry one component each.
    sum *= g.cell_volume() / (mode == GradientMode::isotropic ? g.n : 1);
    return std::pow(sum, 1.0 / p);
}

double energy_norm(const Grid& g, std::span<const double> u, double p, GradientMode mode) {
    return weighted_grad_p_norm(g, u, p, mode) + beta_l2_norm(g, u);
}

Field truncate(std::span<const double> u, double k) {
    if (!(k > 0.0)) throw std::invalid_argument("truncate: bound must be > 0");
    Field out(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) out[i] = std::clamp(u[i], -k, k);
    return out;
}

namespace {

// Bump parameter block: center[n], width, amplitude.
Field field_from_bump_params(const Grid& g, std::span<const double> params) {
    const std::size_t block = static_cast<std::size_t>(g.n) + 2;
    const std::size_t nb = params.size() / block;
    Field u(g.interior_count(), 0.0);
    std::array<double, 2> pt{};
    for (std::size_t k = 0; k < u.size(); ++k) {
        g.interior_coords(k, pt.data());
        double v = 0.0;
        for (std::size_t b = 0; b < nb; ++b) {
            const double* blk = params.data() + b * block;
            double r2 = 0.0;
            for (int d = 0; d < g.n; ++d) r2 += (pt[d] - blk[d]) * (pt[d] - blk[d]);
            const double w = std::max(std::abs(blk[g.n]), 0.5 * g.h);
            v += blk[g.n + 1] * std::exp(-r2 / (2.0 * w * w));
        }
        u[k] = v;
    }
    return u;
}

std::vector<double> draw_bump_params(const Grid& g, Rng& rng, std::uint64_t max_bumps) {
    const std::uint64_t nb = rng.uniform_int(1, max_bumps);
    std::vector<double> params;
    for (std::uint64_t b = 0; b < nb; ++b) {
        for (int d = 0; d < g.n; ++d) params.push_back(rng.uniform(-0.5 * g.R, 0.5 * g.R));
        params.push_back(rng.uniform(g.R / 16.0, g.R / 4.0));
        params.push_back(rng.uniform(-1.0, 1.0));
    }
    return params;
}

} // namespace

Field random_smooth_field(const Grid& g, Rng& rng, double target_l2) {
    for (int attempt = 0; attempt < 64; ++attempt) {
        const auto params = draw_bump_params(g, rng, 5);
        Field u = field_from_bump_params(g, params);
        const double nrm = l2_norm(g, u);
        if (nrm <= 0.0) continue;  // degenerate draw: resample
        const double scale = target_l2 / nrm;
        for (double& x : u) x *= scale;
        return u;
    }
    throw std::runtime_error("random_smooth_field: degenerate draws exhausted retries");
}

double estimate_embedding_constant(const Grid& g, double p, int trials, int optimizer_steps,
                                   std::uint64_t seed) {
    Rng rng(seed);
    double best = 0.0;
    std::vector<double> best_params;
    const auto ratio_of = [&](const Field& u) -> double {
        const double den = energy_norm(g, u, p);
        if (!(den > 0.0)) return 0.0;
        return l2_norm(g, u) / den;
    };
    int accepted = 0;
    while (accepted < trials) {
        const auto params = draw_bump_params(g, rng, 3);
        Field u = field_from_bump_params(g, params);
        if (l2_norm(g, u) <= 0.0) continue;  // resample degenerate draws
        ++accepted;
        const double r = ratio_of(u);
        if (r > best) {
            best = r;
            best_params = params;
        }
    }
    if (best_params.empty()) throw std::runtime_error("estimate_embedding_constant: no usable trial");

    // derivative-free coordinate ascent on the best trial's bump parameters
    double step = g.h;
    std::vector<double> params = best_params;
    for (int it = 0; it < optimizer_steps; ++it) {
        bool improved = false;
        for (std::size_t k = 0; k < params.size(); ++k) {
            for (double s : {step, -step}) {
                auto q = params;
                q[k] += s;
                const Field u = field_from_bump_params(g, q);
                const double r = ratio_of(u);
                if (r > best) {
                    best = r;
                    params = q;
                    improved = true;
                }
            }
        }
        if (!improved) step *= 0.5;
        if (step < 1e-6 * g.h) break;
    }
    if (!(best < 1e6))
        throw std::runtime_error("estimate_embedding_constant: ratio grows unboundedly");
    return best;
}

double estimate_cutoff_constant(const Grid& g, double r, int trials, std::uint64_t seed) {
    if (g.n != 2)
        throw std::invalid_argument("estimate_cutoff_constant: defined for n = 2 only");
    if (!(r > 0.0) || 2.0 * r > g.R)
        throw std::invalid_argument("estimate_cutoff_constant: need 0 < 2r <= R");

    const std::size_t mm = static_cast<std::size_t>(g.m);
    const double hv = g.cell_volume();
    const auto ratio_of = [&](const Field& u) -> double {
        std::vector<double> full;
        detail::to_full(g, u, full);
        detail::FaceData fd;
        detail::compute_face_data(g, full, GradientMode::isotropic, fd);
        double grad_l1 = 0.0;
        for (std::size_t i = 0; i + 1 < mm; ++i)
            for (std::size_t j = 0; j < mm; ++j) {
                const double mx = 0.5 * (g.axis_coords[i] + g.axis_coords[i + 1]);
                const double my = g.axis_coords[j];
                if (mx * mx + my * my >= 4.0 * r * r) continue;
                const std::size_t f = i * mm + j;
                grad_l1 += std::hypot(fd.d[0][f], fd.tau[0][f]) * hv / g.n;
            }
        for (std::size_t i = 0; i < mm; ++i)
            for (std::size_t j = 0; j + 1 < mm; ++j) {
                const double mx = g.axis_coords[i];
                const double my = 0.5 * (g.axis_coords[j] + g.axis_coords[j + 1]);
                if (mx * mx + my * my >= 4.0 * r * r) continue;
                const std::size_t f = i * (mm - 1) + j;
                grad_l1 += std::hypot(fd.d[1][f], fd.tau[1][f]) * hv / g.n;
            }
        double out_l2_sq = 0.0, l2_sq = 0.0;
        std::array<double, 2> pt{};
        for (std::size_t k = 0; k < u.size(); ++k) {
            g.interior_coords(k, pt.data());
            l2_sq += u[k] * u[k] * hv;
            if (pt[0] * pt[0] + pt[1] * pt[1] > r * r) out_l2_sq += u[k] * u[k] * hv;
        }
        if (!(l2_sq > 0.0)) return std::numeric_limits<double>::infinity();
        return (grad_l1 * grad_l1 + out_l2_sq) / l2_sq;
    };

    Rng rng(seed);
    double worst = std::numeric_limits<double>::infinity();
    int accepted = 0;
    while (accepted < trials) {
        Field u;
        if (accepted % 4 == 3) {  // rough draws exercise the gradient term
            u.assign(g.interior_count(), 0.0);
            for (double& x : u) x = rng.uniform(-1.0, 1.0);
        } else {
            const auto params = draw_bump_params(g, rng, 3);
            u = field_from_bump_params(g, params);
            if (l2_norm(g, u) <= 0.0) continue;
        }
        ++accepted;
        worst = std::min(worst, ratio_of(u));
    }
    if (!(worst > 0.0) || !std::isfinite(worst))
        throw std::runtime_error("estimate_cutoff_constant: no positive constant observed");
    return 0.5 * worst;  // documented safety margin on the observed minimum
}

} // namespace plap

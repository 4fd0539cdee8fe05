#pragma once

#include "plap/problem.hpp"
#include "plap/rng.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace plap {

using Field = std::vector<double>;

/// How the gradient magnitude at a face is assembled.
///   isotropic: normal difference plus averaged tangential differences (2-D);
///              the operator is the exact gradient of the face-energy sum.
///   axiswise:  normal difference only (cross-check mode).
enum class GradientMode { isotropic, axiswise };

/// Uniform Cartesian discretization of [-R, R]^n with homogeneous Dirichlet
/// data on the boundary. Fields live on interior nodes; sigma is sampled at
/// face midpoints (so power-law weights never get evaluated exactly at their
/// origin singularity), beta and g at interior nodes. Immutable after build.
struct Grid {
    int n = 1;
    double R = 1.0;
    int m = 3;       // nodes per axis, boundary included
    double h = 1.0;  // 2R/(m-1)

    std::vector<double> axis_coords;               // size m
    std::vector<std::vector<double>> sigma_faces;  // per axis, see face_count()
    std::vector<double> beta_nodes;                // interior, row-major
    std::vector<double> g_nodes;                   // interior, row-major

    static Grid build(const ProblemSpec& spec, double R, int m_per_axis);

    int interior_per_axis() const { return m - 2; }
    std::size_t interior_count() const;
    /// Faces along `axis`: between full-grid nodes i and i+e_axis.
    /// 1-D: m-1 faces. 2-D axis 0: (m-1) x m faces, row-major (fi*m + j);
    /// axis 1: m x (m-1), row-major (i*(m-1) + fj).
    std::size_t face_count(int axis) const;
    double cell_volume() const;  // h^n

    /// Interior flat index -> physical coordinates.
    void interior_coords(std::size_t flat, double* out) const;
};

/// Discrete solution field with its timestamp.
struct State {
    Field u;
    double t = 0.0;
};

/// Throws std::runtime_error when any entry is NaN/Inf.
void require_finite(std::span<const double> v, const char* what);

// --- weighted norms (face quadrature, boundary faces included) -------------

double l2_norm(const Grid& g, std::span<const double> u);
double beta_l2_norm(const Grid& g, std::span<const double> u);
/// (sum over faces of sigma_f |grad u|_f^p h^n / n)^(1/p)
double weighted_grad_p_norm(const Grid& g, std::span<const double> u, double p,
                            GradientMode mode = GradientMode::isotropic);
/// weighted_grad_p_norm + beta_l2_norm: the natural energy norm.
double energy_norm(const Grid& g, std::span<const double> u, double p,
                   GradientMode mode = GradientMode::isotropic);

// --- truncation -------------------------------------------------------------

/// Elementwise clamp to [-k, k]; pointwise 1-Lipschitz, fixes fields with
/// max|u| <= k.
Field truncate(std::span<const double> u, double k);

// --- random smooth fields and constant estimators ---------------------------

/// Sum of 1..5 Gaussian bumps with seeded centers/widths/amplitudes, scaled
/// to the target L2 norm (left unscaled when the draw is degenerate zero).
Field random_smooth_field(const Grid& g, Rng& rng, double target_l2);

/// Estimated discrete embedding constant: the maximum of
/// l2_norm(u)/energy_norm(u) over seeded random smooth trials improved by
/// coordinate-wise ascent (step h) on the bump parameters of the best trial.
double estimate_embedding_constant(const Grid& g, double p, int trials, int optimizer_steps,
                                   std::uint64_t seed = 0x5eed5eedULL);

/// Certified discrete constant C > 0 with
///   ||grad u||_{L^1(B(0,2r))}^2 + ||u||_{L^2 outside B(0,r)}^2 >= C ||u||^2
/// on the sampled trial family (returns half the observed minimum ratio as a
/// documented margin). 2-D only: for n = 1 the exponent 2n/(n+2) < 1 makes
/// the left norm a quasi-norm and the probe is not defined.
double estimate_cutoff_constant(const Grid& g, double r, int trials,
                                std::uint64_t seed = 0xc07e57ULL);

// --- face-level machinery shared with the operator module -------------------

namespace detail {

struct FaceData {
    // per axis, laid out as Grid::face_count(axis)
    std::vector<std::vector<double>> d;    // normal difference / h
    std::vector<std::vector<double>> tau;  // averaged tangential differences (empty slots in 1-D)
};

/// Interior field -> full node array (boundary zeros), size m^n.
void to_full(const Grid& g, std::span<const double> interior, std::vector<double>& full);

void compute_face_data(const Grid& g, const std::vector<double>& full, GradientMode mode,
                       FaceData& fd);

/// Accumulates into `out` (interior layout) the exact adjoint of the face
/// maps: coefficient a_f against the normal-difference slot and b_f against
/// the tangential slot. Passing (a,b) = c_f (d,tau) yields the conservative
/// flux divergence of the face energy.
void scatter_face_pairs(const Grid& g, const std::vector<std::vector<double>>& a,
                        const std::vector<std::vector<double>>& b, std::vector<double>& out);

} // namespace detail

} // namespace plap

/*
 * Copyright 2026 The meshvec Authors. All rights reserved.
 * This file is licensed to you under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License. You may obtain a copy
 * of the License at http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software distributed under
 * the License is distributed on an "AS IS" BASIS, WITHOUT WARRANTIES OR REPRESENTATIONS
 * OF ANY KIND, either express or implied. See the License for the specific language
 * governing permissions and limitations under the License.
 */
#pragma once

#include <meshvec/fields.hpp>
#include <meshvec/spectral.hpp>

#include <Eigen/Core>

#include <cmath>
#include <limits>
#include <span>
#include <vector>

namespace meshvec {

inline constexpr double infinite_smoothness = std::numeric_limits<double>::infinity();

/// Intrinsic dimension of the surfaces the kernels live on.
inline constexpr int intrinsic_dimension = 2;

/// Hodge-compositional Matern hyperparameters. Variances, not standard deviations.
struct KernelParams
{
    double nu = 1.5;
    double kappa_d = 1.0;
    double kappa_c = 1.0;
    double sigma_d2 = 0.0;
    double sigma_c2 = 1.0;
    double sigma_h2 = 0.0;
    int truncation = default_truncation;

    void validate() const
    {
        if (!(nu > 0.0)) fail(ErrorCode::InvalidInput, "nu must be positive");
        if (!(kappa_d > 0.0) || !(kappa_c > 0.0)) fail(ErrorCode::InvalidInput, "kappa must be positive");
        if (sigma_d2 < 0.0 || sigma_c2 < 0.0 || sigma_h2 < 0.0) {
            fail(ErrorCode::InvalidInput, "variances must be non-negative");
        }
        if (!(sigma_d2 > 0.0 || sigma_c2 > 0.0 || sigma_h2 > 0.0)) {
            fail(ErrorCode::InvalidInput, "at least one component variance must be positive");
        }
    }
};

/// Matern (finite nu) or squared-exponential (nu = inf) spectral scaling.
inline double phi(double lambda, double nu, double kappa)
{
    if (std::isinf(nu)) return std::exp(-0.5 * kappa * kappa * lambda);
    return std::pow(2.0 * nu / (kappa * kappa) + lambda, -nu - 0.5 * intrinsic_dimension);
}

/// C = (1/A) sum_n phi(lambda_n).
inline double normalization(std::span<const double> eigenvalues, double nu, double kappa, double area)
{
    if (!(area > 0.0)) fail(ErrorCode::InvalidInput, "area must be positive");
    double sum = 0.0;
    for (double l : eigenvalues) sum += phi(l, nu, kappa);
    return sum / area;
}

inline double normalization(const Eigen::VectorXd& eigenvalues, double nu, double kappa, double area)
{
    return normalization(std::span<const double>(eigenvalues.data(), eigenvalues.size()), nu, kappa, area);
}

/// Square-root factor B of the scalar kernel, K = B B^T = (sigma^2/C) F Phi F^T.
inline Eigen::MatrixXd scalar_kernel_factor(const SpectralBasis& basis, double nu, double kappa, double sigma2,
                                            double area)
{
    const double c = normalization(basis.eigenvalues, nu, kappa, area);
    Eigen::VectorXd scale(basis.num_modes());
    for (int n = 0; n < basis.num_modes(); ++n) scale[n] = std::sqrt(sigma2 * phi(basis.eigenvalues[n], nu, kappa) / c);
    return basis.eigenvectors * scale.asDiagonal();
}

/// Dense V x V scalar covariance; the normalization area is trace(star0).
inline Eigen::MatrixXd scalar_kernel(const SpectralBasis& basis, double nu, double kappa, double sigma2,
                                     const Eigen::VectorXd& star0)
{
    if (star0.size() != basis.eigenvectors.rows()) {
        fail(ErrorCode::DimensionMismatch, "mass diagonal does not match the basis");
    }
    const Eigen::MatrixXd b = scalar_kernel_factor(basis, nu, kappa, sigma2, star0.sum());
    return b * b.transpose();
}

/// Inverse of the scalar kernel for a complete basis (L + 1 = V):
/// Q = (C / sigma^2) M F Phi^-1 F^T M, since F^-1 = F^T M.
inline Eigen::MatrixXd scalar_precision(const SpectralBasis& basis, double nu, double kappa, double sigma2,
                                        const Eigen::VectorXd& star0)
{
    const Eigen::Index nv = basis.eigenvectors.rows();
    if (star0.size() != nv) fail(ErrorCode::DimensionMismatch, "mass diagonal does not match the basis");
    if (basis.num_modes() != nv) {
        fail(ErrorCode::IncompleteBasis, "precision needs all V eigenpairs, got " + std::to_string(basis.num_modes()));
    }
    const double c = normalization(basis.eigenvalues, nu, kappa, star0.sum());
    Eigen::VectorXd inv_phi(nv);
    for (Eigen::Index n = 0; n < nv; ++n) inv_phi[n] = 1.0 / phi(basis.eigenvalues[n], nu, kappa);
    const Eigen::MatrixXd mf = star0.asDiagonal() * basis.eigenvectors;
    return (c / sigma2) * mf * inv_phi.asDiagonal() * mf.transpose();
}

/// Low-rank latitude-dependent length-scale:
/// kappa(s) = floor + softplus(sum_b w_b exp(-(s - c_b)^2 / (2 l^2))).
struct KappaField
{
    Eigen::VectorXd weights;
    Eigen::VectorXd centers;
    double basis_lengthscale = 1.0;
    double floor = 1.0;

    /// `count` centers equally spaced on [lo, hi]; the RBF width defaults to the spacing.
    static KappaField equally_spaced(int count, double lo, double hi, double lengthscale = -1.0)
    {
        KappaField k;
        k.centers = Eigen::VectorXd::LinSpaced(count, lo, hi);
        k.weights = Eigen::VectorXd::Zero(count);
        k.basis_lengthscale = lengthscale > 0.0 ? lengthscale : (count > 1 ? (hi - lo) / (count - 1) : 1.0);
        return k;
    }

    int size() const { return static_cast<int>(centers.size()); }

    double operator()(double s) const
    {
        double z = 0.0;
        for (Eigen::Index b = 0; b < centers.size(); ++b) {
            const double d = (s - centers[b]) / basis_lengthscale;
            z += weights[b] * std::exp(-0.5 * d * d);
        }
        const double softplus = z > 30.0 ? z : std::log1p(std::exp(z));
        return floor + softplus;
    }
};

inline double kappa_eval(const KappaField& field, double s)
{
    return field(s);
}

/// Rows (3 per listed vertex) of sqrt(Phi/C)-scaled mode fields, with a
/// length-scale per vertex; C is evaluated per vertex from the same modes.
/// `kappa_per_vertex` is indexed by the entries of `vertices`.
inline Eigen::MatrixXd mode_factor(const ModeFields& modes, double nu, const Eigen::VectorXd& kappa_per_vertex,
                                   double area, std::span<const int> vertices)
{
    const int count = modes.count();
    Eigen::MatrixXd out(3 * vertices.size(), count);
    Eigen::VectorXd scale(count);
    double last_kappa = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t k = 0; k < vertices.size(); ++k) {
        const int v = vertices[k];
        const double kappa = kappa_per_vertex[v];
        if (kappa != last_kappa) {
            double c = 0.0;
            for (int n = 0; n < count; ++n) {
                scale[n] = phi(modes.eigenvalues[n], nu, kappa);
                c += scale[n];
            }
            c /= area;
            scale = (scale / c).cwiseSqrt();
            last_kappa = kappa;
        }
        out.middleRows(3 * k, 3) = modes.fields.middleRows(3 * v, 3) * scale.asDiagonal();
    }
    return out;
}

inline std::vector<int> all_vertices(int count)
{
    std::vector<int> v(count);
    for (int i = 0; i < count; ++i) v[i] = i;
    return v;
}

enum class KernelComponent { diverging, curling, harmonic };

/// K^v = sigma_d^2 K^d + sigma_c^2 K^c + sigma_h^2 K^h, stored by unit-variance
/// square-root factors per component.
struct VectorKernel
{
    Eigen::MatrixXd diverging;  ///< 3V x Ld, K^d = D D^T
    Eigen::MatrixXd curling;    ///< 3V x Lc, K^c = C C^T
    Eigen::MatrixXd harmonic;   ///< 3V x H,  K^h = H H^T
    double sigma_d2 = 0.0;
    double sigma_c2 = 0.0;
    double sigma_h2 = 0.0;

    Eigen::Index dimension() const { return diverging.rows(); }

    const Eigen::MatrixXd& block(KernelComponent c) const
    {
        switch (c) {
        case KernelComponent::diverging: return diverging;
        case KernelComponent::curling: return curling;
        default: return harmonic;
        }
    }

    Eigen::MatrixXd component(KernelComponent c) const
    {
        const auto& b = block(c);
        return b * b.transpose();
    }

    /// Square-root factor of K^v with zero-variance components dropped.
    Eigen::MatrixXd factor() const
    {
        const Eigen::Index cols = (sigma_d2 > 0 ? diverging.cols() : 0) + (sigma_c2 > 0 ? curling.cols() : 0) +
                                  (sigma_h2 > 0 ? harmonic.cols() : 0);
        Eigen::MatrixXd f(dimension(), cols);
        Eigen::Index at = 0;
        auto put = [&](const Eigen::MatrixXd& b, double s2) {
            if (s2 > 0.0 && b.cols() > 0) {
                f.middleCols(at, b.cols()) = std::sqrt(s2) * b;
                at += b.cols();
            }
        };
        put(diverging, sigma_d2);
        put(curling, sigma_c2);
        put(harmonic, sigma_h2);
        return f;
    }

    Eigen::MatrixXd dense() const
    {
        Eigen::MatrixXd k = Eigen::MatrixXd::Zero(dimension(), dimension());
        if (sigma_d2 > 0.0) k.noalias() += sigma_d2 * (diverging * diverging.transpose());
        if (sigma_c2 > 0.0) k.noalias() += sigma_c2 * (curling * curling.transpose());
        if (sigma_h2 > 0.0) k.noalias() += sigma_h2 * (harmonic * harmonic.transpose());
        return k;
    }
};

namespace detail {

inline void check_bases(const VectorBases& bases, const KernelParams& params)
{
    params.validate();
    const bool any = (params.sigma_d2 > 0 && bases.diverging.count() > 0) ||
                     (params.sigma_c2 > 0 && bases.curling.count() > 0) ||
                     (params.sigma_h2 > 0 && bases.harmonic.cols() > 0);
    if (!any) fail(ErrorCode::EmptyBases, "no component has both positive variance and basis fields");
}

inline Eigen::MatrixXd empty_block(const VectorBases& bases)
{
    return Eigen::MatrixXd(3 * bases.num_vertices, 0);
}

} // namespace detail

/// Stationary Hodge-compositional kernel; `area` is the normalization area.
inline VectorKernel vector_kernel(const VectorBases& bases, const KernelParams& params, double area)
{
    detail::check_bases(bases, params);
    const int nv = bases.num_vertices;
    const auto vertices = all_vertices(nv);
    VectorKernel k;
    k.sigma_d2 = params.sigma_d2;
    k.sigma_c2 = params.sigma_c2;
    k.sigma_h2 = params.sigma_h2;
    k.diverging = bases.diverging.count() > 0
                      ? mode_factor(bases.diverging, params.nu, Eigen::VectorXd::Constant(nv, params.kappa_d), area, vertices)
                      : detail::empty_block(bases);
    k.curling = bases.curling.count() > 0
                    ? mode_factor(bases.curling, params.nu, Eigen::VectorXd::Constant(nv, params.kappa_c), area, vertices)
                    : detail::empty_block(bases);
    k.harmonic = bases.harmonic.cols() > 0 ? bases.harmonic : detail::empty_block(bases);
    return k;
}

enum class NonstationaryTarget { curling, diverging, both };

/// Kernel whose length-scale follows kappa_field(coordinate of each vertex)
/// in the targeted components. Mode n contributes
/// sqrt(Phi_n(s_i)/C(s_i)) sqrt(Phi_n(s_j)/C(s_j)) f_n(i) f_n(j)^T.
inline VectorKernel nonstationary_vector_kernel(const VectorBases& bases, const KernelParams& params, double area,
                                                const KappaField& kappa_field,
                                                std::span<const double> vertex_coords,
                                                NonstationaryTarget target = NonstationaryTarget::both)
{
    detail::check_bases(bases, params);
    const int nv = bases.num_vertices;
    if (static_cast<int>(vertex_coords.size()) != nv) {
        fail(ErrorCode::DimensionMismatch, "one coordinate per vertex is required");
    }
    Eigen::VectorXd kappa(nv);
    for (int v = 0; v < nv; ++v) kappa[v] = kappa_field(vertex_coords[v]);
    const auto vertices = all_vertices(nv);
    const bool on_d = target != NonstationaryTarget::curling;
    const bool on_c = target != NonstationaryTarget::diverging;

    VectorKernel k;
    k.sigma_d2 = params.sigma_d2;
    k.sigma_c2 = params.sigma_c2;
    k.sigma_h2 = params.sigma_h2;
    k.diverging = bases.diverging.count() > 0
                      ? mode_factor(bases.diverging, params.nu,
                                    on_d ? kappa : Eigen::VectorXd::Constant(nv, params.kappa_d), area, vertices)
                      : detail::empty_block(bases);
    k.curling = bases.curling.count() > 0
                    ? mode_factor(bases.curling, params.nu,
                                  on_c ? kappa : Eigen::VectorXd::Constant(nv, params.kappa_c), area, vertices)
                    : detail::empty_block(bases);
    k.harmonic = bases.harmonic.cols() > 0 ? bases.harmonic : detail::empty_block(bases);
    return k;
}

} // namespace meshvec

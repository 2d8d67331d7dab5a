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
#include <meshvec/generators.hpp>
#include <meshvec/kernels.hpp>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include <cmath>
#include <map>
#include <numbers>
#include <random>
#include <span>
#include <vector>

namespace meshvec {

/// Default per-component observation noise variance.
inline constexpr double default_noise_variance = 1e-4;

/// Observed ambient vectors at distinct vertices.
struct Observations
{
    std::vector<int> vertex_ids;
    VertexField values;  ///< one row per observed vertex
    double noise_variance = default_noise_variance;

    int size() const { return static_cast<int>(vertex_ids.size()); }

    /// Stacked observation vector y (3 entries per vertex).
    Eigen::VectorXd y() const { return stacked(values); }

    void validate(int num_vertices) const
    {
        if (values.rows() != size()) fail(ErrorCode::DimensionMismatch, "one value row per observed vertex required");
        if (!(noise_variance > 0.0)) fail(ErrorCode::InvalidInput, "noise variance must be positive");
        std::vector<char> seen(num_vertices, 0);
        for (int v : vertex_ids) {
            if (v < 0 || v >= num_vertices) fail(ErrorCode::InvalidInput, "observed vertex out of range: " + std::to_string(v));
            if (seen[v]) fail(ErrorCode::InvalidInput, "vertex observed twice: " + std::to_string(v));
            seen[v] = 1;
        }
    }
};

/// Builds observations, projecting each value onto its vertex tangent plane.
inline Observations make_observations(const VertexGeometry& geom, std::vector<int> ids, VertexField values,
                                      double noise_variance = default_noise_variance)
{
    Observations obs;
    obs.vertex_ids = std::move(ids);
    obs.values = std::move(values);
    obs.noise_variance = noise_variance;
    obs.validate(static_cast<int>(geom.normals.size()));
    for (int k = 0; k < obs.size(); ++k) {
        const Vec3& n = geom.normals[obs.vertex_ids[k]];
        const Vec3 x = obs.values.row(k).transpose();
        obs.values.row(k) = (x - n.dot(x) * n).transpose();
    }
    return obs;
}

/// Row indices (3 per vertex) into stacked 3V vectors.
inline std::vector<Eigen::Index> component_rows(std::span<const int> vertices)
{
    std::vector<Eigen::Index> rows;
    rows.reserve(3 * vertices.size());
    for (int v : vertices)
        for (int c = 0; c < 3; ++c) rows.push_back(3 * static_cast<Eigen::Index>(v) + c);
    return rows;
}

// ---------------------------------------------------------------------------
// East/north frames and lat/lon lookup
// ---------------------------------------------------------------------------

struct TangentFrame
{
    Vec3 east;
    Vec3 north;
};

inline TangentFrame east_north_frame(const Vec3& normal)
{
    const Vec3 e = Vec3::UnitZ().cross(normal);
    const double len = e.norm();
    if (len < 1e-9) fail(ErrorCode::PoleFrameUndefined, "east/north frame undefined at a pole");
    TangentFrame f;
    f.east = e / len;
    f.north = normal.cross(f.east);
    return f;
}

inline Vec3 uv_to_vector(const Vec3& normal, double u, double v)
{
    const auto f = east_north_frame(normal);
    return u * f.east + v * f.north;
}

inline std::array<double, 2> vector_to_uv(const Vec3& normal, const Vec3& x)
{
    const auto f = east_north_frame(normal);
    return {x.dot(f.east), x.dot(f.north)};
}

/// Maps (lat, lon) in degrees to vertex ids; poles collapse and longitudes wrap.
class LatLonIndex
{
public:
    LatLonIndex() = default;

    explicit LatLonIndex(const std::vector<std::array<double, 2>>& vertex_latlon)
    {
        for (std::size_t v = 0; v < vertex_latlon.size(); ++v) {
            m_index[key(vertex_latlon[v][0], vertex_latlon[v][1])] = static_cast<int>(v);
        }
    }

    /// Vertex at (lat, lon), or -1.
    int find(double lat_deg, double lon_deg) const
    {
        auto it = m_index.find(key(lat_deg, lon_deg));
        return it == m_index.end() ? -1 : it->second;
    }

private:
    static std::pair<long long, long long> key(double lat, double lon)
    {
        const bool pole = std::abs(std::abs(lat) - 90.0) < 1e-9;
        const double plat = pole ? (lat > 0 ? 90.0 : -90.0) : lat;
        const double plon = pole ? 0.0 : wrap_longitude(lon);
        return {std::llround(plat * 1e6), std::llround(plon * 1e6)};
    }

    std::map<std::pair<long long, long long>, int> m_index;
};

struct LatLonRecord
{
    double lat_deg = 0.0;
    double lon_deg = 0.0;
    double u = 0.0;
    double v = 0.0;
};

/// Converts eastward/northward components at lat/lon points into ambient
/// tangent vectors at the matching vertices.
inline Observations uv_to_ambient(const VertexGeometry& geom, const LatLonIndex& index,
                                  std::span<const LatLonRecord> records,
                                  double noise_variance = default_noise_variance)
{
    std::vector<int> ids;
    VertexField values(records.size(), 3);
    for (std::size_t k = 0; k < records.size(); ++k) {
        const auto& r = records[k];
        const int v = index.find(r.lat_deg, r.lon_deg);
        if (v < 0) {
            fail(ErrorCode::UnmappedLocation,
                 "no vertex at lat " + std::to_string(r.lat_deg) + ", lon " + std::to_string(r.lon_deg));
        }
        ids.push_back(v);
        values.row(k) = uv_to_vector(geom.normals[v], r.u, r.v).transpose();
    }
    return make_observations(geom, std::move(ids), std::move(values), noise_variance);
}

// ---------------------------------------------------------------------------
// Conditioning
// ---------------------------------------------------------------------------

inline constexpr int max_jitter_steps = 3;

/// Cholesky of a symmetric matrix. On failure, adds jitter starting at
/// 1e-10 * trace / dim and growing tenfold, at most max_jitter_steps times.
inline Eigen::LLT<Eigen::MatrixXd> robust_cholesky(const Eigen::MatrixXd& a, bool try_plain = true)
{
    const Eigen::Index n = a.rows();
    if (try_plain) {
        Eigen::LLT<Eigen::MatrixXd> llt(a);
        if (llt.info() == Eigen::Success) return llt;
    }
    double jitter = 1e-10 * std::max(a.trace(), 0.0) / std::max<Eigen::Index>(n, 1);
    if (!(jitter > 0.0)) jitter = 1e-300;
    for (int step = 0; step <= max_jitter_steps; ++step, jitter *= 10.0) {
        Eigen::MatrixXd b = a;
        b.diagonal().array() += jitter;
        Eigen::LLT<Eigen::MatrixXd> llt(b);
        if (llt.info() == Eigen::Success) return llt;
    }
    fail(ErrorCode::SingularSystem, "Cholesky failed after jitter escalation");
}

struct PosteriorOptions
{
    bool full_covariance = true;
};

struct Posterior
{
    std::vector<int> predict_ids;
    VertexField mean;                ///< one row per predicted vertex
    Eigen::MatrixXd covariance;      ///< 3P x 3P, empty unless requested
    Eigen::VectorXd variance;        ///< 3P component variances, clamped at 0
    Eigen::VectorXd vertex_variance; ///< per vertex, trace of the 3x3 block
    double nll = 0.0;
    int clamped_variances = 0;       ///< negatives set to 0 for reporting
};

namespace detail {

inline double log_det_from_llt(const Eigen::LLT<Eigen::MatrixXd>& llt)
{
    return 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
}

inline double gaussian_nll(const Eigen::LLT<Eigen::MatrixXd>& llt, const Eigen::VectorXd& y)
{
    const Eigen::VectorXd w = llt.matrixL().solve(y);
    const double m = static_cast<double>(y.size());
    return 0.5 * w.squaredNorm() + 0.5 * log_det_from_llt(llt) + 0.5 * m * std::log(2.0 * std::numbers::pi);
}

/// Clamps negative variances and fills the per-vertex fields.
inline void finish(Posterior& post, const Eigen::VectorXd& mean, Eigen::VectorXd var)
{
    for (Eigen::Index i = 0; i < var.size(); ++i) {
        if (var[i] < 0.0) {
            var[i] = 0.0;
            ++post.clamped_variances;
        }
    }
    post.mean = unstack(mean);
    post.vertex_variance = var.reshaped(3, var.size() / 3).colwise().sum().transpose();
    post.variance = std::move(var);
}

/// Finishes a posterior from prior blocks; K_pp is either full or just its diagonal.
inline Posterior condition(const Eigen::MatrixXd& k_oo, const Eigen::MatrixXd& k_po, const Eigen::MatrixXd* k_pp_full,
                           const Eigen::VectorXd& k_pp_diag, const Eigen::VectorXd& y, double noise,
                           std::vector<int> predict_ids, bool full)
{
    Posterior post;
    post.predict_ids = std::move(predict_ids);
    const Eigen::Index np = k_po.rows();
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(np);
    Eigen::VectorXd var = k_pp_diag;
    if (full && k_pp_full) post.covariance = *k_pp_full;
    if (y.size() > 0) {
        Eigen::MatrixXd a = k_oo;
        a.diagonal().array() += noise;
        const auto llt = robust_cholesky(a);
        mean = k_po * llt.solve(y);
        const Eigen::MatrixXd w = llt.matrixL().solve(k_po.transpose());  // m x P
        if (full && k_pp_full) post.covariance.noalias() -= w.transpose() * w;
        var -= w.colwise().squaredNorm().transpose();
        post.nll = gaussian_nll(llt, y);
    }
    if (full && k_pp_full) var = post.covariance.diagonal();
    finish(post, mean, std::move(var));
    return post;
}

} // namespace detail

/// NLL summed over the columns of `y` (independent realizations) for the
/// covariance B B^T + noise I, via the matrix determinant lemma and
/// Woodbury identity when B has fewer columns than rows.
inline double nll_lowrank(const Eigen::MatrixXd& b, const Eigen::MatrixXd& y, double noise)
{
    const Eigen::Index m = b.rows();
    const Eigen::Index r = b.cols();
    if (y.rows() != m) fail(ErrorCode::DimensionMismatch, "observation rows do not match the factor");
    if (!(noise > 0.0)) fail(ErrorCode::InvalidInput, "noise variance must be positive");
    if (m == 0) return 0.0;
    const double log2pi = std::log(2.0 * std::numbers::pi);
    const double n = static_cast<double>(y.cols());
    if (r >= m) {
        Eigen::MatrixXd a = b * b.transpose();
        a.diagonal().array() += noise;
        const auto llt = robust_cholesky(a);
        const Eigen::MatrixXd w = llt.matrixL().solve(y);
        return 0.5 * w.squaredNorm() + n * (0.5 * detail::log_det_from_llt(llt) + 0.5 * m * log2pi);
    }
    Eigen::MatrixXd inner = Eigen::MatrixXd::Identity(r, r);
    inner.noalias() += (b.transpose() * b) / noise;
    const auto llt = robust_cholesky(inner);
    const double log_det = static_cast<double>(m) * std::log(noise) + detail::log_det_from_llt(llt);
    const Eigen::MatrixXd z = llt.matrixL().solve(b.transpose() * y);
    const double quad = y.squaredNorm() / noise - z.squaredNorm() / (noise * noise);
    return 0.5 * quad + n * (0.5 * log_det + 0.5 * m * log2pi);
}

namespace detail {

/// Conditions the r coefficients of K = F F^T instead of the data; used when
/// the rank is below the number of observed components.
inline Posterior condition_weights(const Eigen::MatrixXd& f_o, const Eigen::MatrixXd& f_p, const Eigen::VectorXd& y,
                                   double noise, std::vector<int> predict_ids, bool full)
{
    Posterior post;
    post.predict_ids = std::move(predict_ids);
    const Eigen::Index r = f_o.cols();
    Eigen::MatrixXd a = Eigen::MatrixXd::Identity(r, r);
    a.noalias() += (f_o.transpose() * f_o) / noise;
    const auto llt = robust_cholesky(a);
    const Eigen::VectorXd mean = f_p * llt.solve(f_o.transpose() * y) / noise;
    const Eigen::MatrixXd w = llt.matrixL().solve(f_p.transpose());  // r x P
    Eigen::VectorXd var;
    if (full) {
        post.covariance = w.transpose() * w;
        var = post.covariance.diagonal();
    } else {
        var = w.colwise().squaredNorm().transpose();
    }
    post.nll = nll_lowrank(f_o, y, noise);
    finish(post, mean, std::move(var));
    return post;
}

} // namespace detail

/// Posterior at `predict_ids` given a dense 3V x 3V prior covariance.
inline Posterior posterior(const Eigen::MatrixXd& k, const Observations& obs, std::span<const int> predict_ids,
                           const PosteriorOptions& options = {})
{
    if (k.rows() != k.cols() || k.rows() % 3 != 0) fail(ErrorCode::DimensionMismatch, "covariance must be 3V x 3V");
    obs.validate(static_cast<int>(k.rows() / 3));
    const auto o = component_rows(obs.vertex_ids);
    const auto p = component_rows(predict_ids);
    const Eigen::MatrixXd k_oo = k(o, o);
    const Eigen::MatrixXd k_po = k(p, o);
    const Eigen::MatrixXd k_pp = k(p, p);
    return detail::condition(k_oo, k_po, &k_pp, k_pp.diagonal(), obs.y(), obs.noise_variance,
                             {predict_ids.begin(), predict_ids.end()}, options.full_covariance);
}

/// Posterior from the low-rank kernel factors; never forms the 3V x 3V matrix.
/// Switches to weight space when the rank is below the observed components.
inline Posterior posterior(const VectorKernel& kernel, const Observations& obs, std::span<const int> predict_ids,
                           const PosteriorOptions& options = {})
{
    obs.validate(static_cast<int>(kernel.dimension() / 3));
    const Eigen::MatrixXd f = kernel.factor();
    const Eigen::MatrixXd f_o = f(component_rows(obs.vertex_ids), Eigen::all);
    const Eigen::MatrixXd f_p = f(component_rows(predict_ids), Eigen::all);
    if (obs.size() > 0 && f.cols() < f_o.rows()) {
        return detail::condition_weights(f_o, f_p, obs.y(), obs.noise_variance,
                                         {predict_ids.begin(), predict_ids.end()}, options.full_covariance);
    }
    const Eigen::MatrixXd k_oo = f_o * f_o.transpose();
    const Eigen::MatrixXd k_po = f_p * f_o.transpose();
    const Eigen::VectorXd diag = f_p.rowwise().squaredNorm();
    Eigen::MatrixXd k_pp;
    if (options.full_covariance) k_pp = f_p * f_p.transpose();
    return detail::condition(k_oo, k_po, options.full_covariance ? &k_pp : nullptr, diag, obs.y(),
                             obs.noise_variance, {predict_ids.begin(), predict_ids.end()}, options.full_covariance);
}

/// Negative log marginal likelihood under a dense prior covariance.
inline double nll(const Eigen::MatrixXd& k, const Observations& obs)
{
    obs.validate(static_cast<int>(k.rows() / 3));
    if (obs.size() == 0) return 0.0;
    const auto o = component_rows(obs.vertex_ids);
    Eigen::MatrixXd a = k(o, o);
    a.diagonal().array() += obs.noise_variance;
    return detail::gaussian_nll(robust_cholesky(a), obs.y());
}

inline double nll(const VectorKernel& kernel, const Observations& obs)
{
    obs.validate(static_cast<int>(kernel.dimension() / 3));
    const Eigen::MatrixXd f = kernel.factor();
    const Eigen::MatrixXd f_o = f(component_rows(obs.vertex_ids), Eigen::all);
    return nll_lowrank(f_o, obs.y(), obs.noise_variance);
}

// ---------------------------------------------------------------------------
// Sampling
// ---------------------------------------------------------------------------

/// Draws mean + chol(cov + jitter I) z. Jitter is always added here, starting
/// at 1e-10 * trace / dim and escalating while the factorization fails.
inline std::vector<Eigen::VectorXd> sample_gaussian(const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov, int count,
                                                    std::uint64_t seed)
{
    const Eigen::Index n = mean.size();
    if (cov.rows() != n || cov.cols() != n) fail(ErrorCode::DimensionMismatch, "covariance does not match mean");
    std::vector<Eigen::VectorXd> out;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    if (n == 0 || cov.trace() <= 0.0) {
        out.assign(count, mean);
        return out;
    }
    const auto llt = robust_cholesky(cov, false);
    const Eigen::MatrixXd l = llt.matrixL();
    for (int s = 0; s < count; ++s) {
        Eigen::VectorXd z(n);
        for (Eigen::Index i = 0; i < n; ++i) z[i] = normal(rng);
        out.push_back(mean + l * z);
    }
    return out;
}

/// Posterior samples as vertex fields over the predicted vertices.
inline std::vector<VertexField> sample(const Posterior& post, int count, std::uint64_t seed)
{
    if (post.covariance.size() == 0 && post.mean.rows() > 0) {
        fail(ErrorCode::InvalidInput, "sampling needs the full posterior covariance");
    }
    std::vector<VertexField> out;
    for (const auto& s : sample_gaussian(stacked(post.mean), post.covariance, count, seed)) out.push_back(unstack(s));
    return out;
}

/// Prior samples B z with z standard normal, using the kernel's square-root factor.
inline std::vector<VertexField> sample_prior(const VectorKernel& kernel, int count, std::uint64_t seed)
{
    const Eigen::MatrixXd f = kernel.factor();
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    std::vector<VertexField> out;
    for (int s = 0; s < count; ++s) {
        Eigen::VectorXd z(f.cols());
        for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = normal(rng);
        out.push_back(unstack(f * z));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Boundary flux
// ---------------------------------------------------------------------------

/// Outward in-plane unit normals at boundary vertices: the mean of the two
/// incident boundary-edge normals, taken in the vertex tangent plane.
struct BoundaryNormals
{
    std::vector<int> vertices;
    std::vector<Vec3> normals;
};

inline BoundaryNormals boundary_normals(const SimplicialComplex& mesh, const VertexGeometry& geom)
{
    if (!mesh.has_boundary()) fail(ErrorCode::NoBoundary, "mesh has no boundary");
    std::vector<Vec3> acc(mesh.num_vertices(), Vec3::Zero());
    const auto& faces = mesh.faces();
    for (int e : mesh.boundary_edges()) {
        const int f = mesh.edge_faces()[e][0];
        const auto& fe = mesh.face_edges()[f];
        int side = 0;
        while (fe[side] != e) ++side;
        const int a = faces[f][side];
        const int b = faces[f][(side + 1) % 3];
        // Interior lies left of a -> b; t x n points right, i.e. outward.
        const Vec3 t = mesh.position(b) - mesh.position(a);
        for (int v : {a, b}) {
            Vec3 out = t.cross(geom.normals[v]);
            const double len = out.norm();
            if (len > 0.0) acc[v] += out / len;
        }
    }
    BoundaryNormals bn;
    for (int v : mesh.boundary_vertices()) {
        const Vec3& n = geom.normals[v];
        Vec3 d = acc[v] - n.dot(acc[v]) * n;
        const double len = d.norm();
        if (len < 1e-14) fail(ErrorCode::InvalidInput, "boundary normal vanishes at vertex " + std::to_string(v));
        bn.vertices.push_back(v);
        bn.normals.push_back(d / len);
    }
    return bn;
}

/// Signed outward flux v . n_out at each boundary vertex (boundary_vertices order).
inline Eigen::VectorXd boundary_flux(const BoundaryNormals& bn, const VertexField& field)
{
    Eigen::VectorXd flux(bn.vertices.size());
    for (std::size_t k = 0; k < bn.vertices.size(); ++k) {
        flux[k] = field.row(bn.vertices[k]).dot(bn.normals[k].transpose());
    }
    return flux;
}

/// Largest boundary flux relative to the largest vector norm in the field.
inline double relative_boundary_flux(const BoundaryNormals& bn, const VertexField& field)
{
    const double scale = field.rowwise().norm().maxCoeff();
    if (!(scale > 0.0)) return 0.0;
    return boundary_flux(bn, field).cwiseAbs().maxCoeff() / scale;
}

/// Removes the outward-normal component at boundary vertices. Interior rows
/// are copied untouched.
inline VertexField enforce_no_flux(const BoundaryNormals& bn, const VertexField& field)
{
    VertexField out = field;
    for (std::size_t k = 0; k < bn.vertices.size(); ++k) {
        const int v = bn.vertices[k];
        const Eigen::RowVector3d nn = bn.normals[k].transpose();
        out.row(v) -= field.row(v).dot(nn) * nn;
    }
    return out;
}

inline VertexField enforce_no_flux(const SimplicialComplex& mesh, const VertexGeometry& geom, const VertexField& field)
{
    if (field.rows() != mesh.num_vertices()) fail(ErrorCode::DimensionMismatch, "field must cover every vertex");
    return enforce_no_flux(boundary_normals(mesh, geom), field);
}

// ---------------------------------------------------------------------------
// Metrics
// ---------------------------------------------------------------------------

struct FieldMetrics
{
    double mse = 0.0;
    Vec3 component_mse = Vec3::Zero();
    double mean_norm = 0.0;
    int count = 0;
};

/// Errors over the vertices selected by `mask` (empty mask selects all).
inline FieldMetrics metrics(const VertexField& predicted, const VertexField& truth, const std::vector<char>& mask = {})
{
    if (predicted.rows() != truth.rows()) fail(ErrorCode::DimensionMismatch, "prediction and truth differ in size");
    if (!mask.empty() && static_cast<Eigen::Index>(mask.size()) != truth.rows()) {
        fail(ErrorCode::DimensionMismatch, "mask length differs from field size");
    }
    FieldMetrics m;
    for (Eigen::Index i = 0; i < truth.rows(); ++i) {
        if (!mask.empty() && !mask[i]) continue;
        const Eigen::RowVector3d d = predicted.row(i) - truth.row(i);
        m.component_mse += d.cwiseAbs2().transpose();
        m.mean_norm += truth.row(i).norm();
        ++m.count;
    }
    if (m.count == 0) fail(ErrorCode::EmptyMask, "mask selects no vertices");
    m.component_mse /= m.count;
    m.mse = m.component_mse.sum();
    m.mean_norm /= m.count;
    return m;
}

} // namespace meshvec

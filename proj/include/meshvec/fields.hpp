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

#include <meshvec/dec.hpp>
#include <meshvec/mesh.hpp>
#include <meshvec/parallel.hpp>
#include <meshvec/spectral.hpp>

#include <Eigen/Core>

#include <cmath>
#include <vector>

namespace meshvec {

/// One ambient 3-vector per vertex. Row-major, so the flat storage is the
/// stacked vector (x0, y0, z0, x1, ...).
using VertexField = Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::RowMajor>;

inline Eigen::Map<const Eigen::VectorXd> stacked(const VertexField& f)
{
    return {f.data(), f.size()};
}

inline VertexField unstack(const Eigen::Ref<const Eigen::VectorXd>& v)
{
    VertexField f(v.size() / 3, 3);
    Eigen::Map<Eigen::VectorXd>(f.data(), f.size()) = v;
    return f;
}

/// Removes the normal component at every vertex.
inline void project_tangent(const VertexGeometry& geom, VertexField& field)
{
    for (Eigen::Index v = 0; v < field.rows(); ++v) {
        const Vec3& n = geom.normals[v];
        const Vec3 u = field.row(v).transpose();
        field.row(v) = (u - u.dot(n) * n).transpose();
    }
}

/// max_v |field_v . n_v|
inline double tangency_residual(const VertexGeometry& geom, const VertexField& field)
{
    double r = 0.0;
    for (Eigen::Index v = 0; v < field.rows(); ++v) {
        r = std::max(r, std::abs(field.row(v).dot(geom.normals[v].transpose())));
    }
    return r;
}

/// Primal-primal sharp.
///
/// In each face around a vertex v with corners (v, a, b), the integrated
/// values on edges va and vb determine the unique in-plane vector u with
/// u.(a-v) = alpha_va and u.(b-v) = alpha_vb. The vertex vector is the
/// corner-angle weighted mean of these face vectors, projected onto the
/// tangent plane of the vertex normal.
inline VertexField sharp_pp(const SimplicialComplex& mesh, const VertexGeometry& geom,
                            const Eigen::Ref<const Eigen::VectorXd>& one_form)
{
    if (one_form.size() != mesh.num_edges()) {
        fail(ErrorCode::DimensionMismatch, "1-form length does not match edge count");
    }
    const auto& x = mesh.positions();
    VertexField out = VertexField::Zero(mesh.num_vertices(), 3);
    for (int v = 0; v < mesh.num_vertices(); ++v) {
        const auto incident = mesh.vertex_faces(v);
        if (incident.empty()) fail(ErrorCode::IsolatedVertex, "vertex " + std::to_string(v) + " has no faces");
        Vec3 sum = Vec3::Zero();
        double weight = 0.0;
        for (int f : incident) {
            const Face& t = mesh.faces()[f];
            int k = 0;
            while (t[k] != v) ++k;
            const int a = t[(k + 1) % 3], b = t[(k + 2) % 3];
            // side k is (v,a); side k+2 is (b,v)
            const double alpha_va = mesh.face_edge_signs()[f][k] * one_form[mesh.face_edges()[f][k]];
            const double alpha_vb = -mesh.face_edge_signs()[f][(k + 2) % 3] * one_form[mesh.face_edges()[f][(k + 2) % 3]];
            const Vec3& n = geom.face_normals[f];
            const double twice_area = 2.0 * geom.face_areas[f];
            const Vec3 grad_a = n.cross(x[v] - x[b]) / twice_area;
            const Vec3 grad_b = n.cross(x[a] - x[v]) / twice_area;
            const double theta = geom.corner_angles[f][k];
            sum += theta * (alpha_va * grad_a + alpha_vb * grad_b);
            weight += theta;
        }
        Vec3 u = sum / weight;
        const Vec3& nv = geom.normals[v];
        u -= u.dot(nv) * nv;
        out.row(v) = u.transpose();
    }
    return out;
}

/// Positive quarter turn about the vertex normal: v -> n x v.
inline VertexField rotate_tangent(const VertexGeometry& geom, const VertexField& field)
{
    VertexField out(field.rows(), 3);
    for (Eigen::Index v = 0; v < field.rows(); ++v) {
        out.row(v) = geom.normals[v].cross(Vec3(field.row(v).transpose())).transpose();
    }
    return out;
}

/// Midpoint-rule flat: integrates the linear interpolant of a vertex field
/// along each edge. Used for divergence diagnostics.
inline Eigen::VectorXd flat_midpoint(const SimplicialComplex& mesh, const VertexField& field)
{
    Eigen::VectorXd alpha(mesh.num_edges());
    for (int e = 0; e < mesh.num_edges(); ++e) {
        const int i = mesh.edges()[e][0], j = mesh.edges()[e][1];
        const Vec3 mid = 0.5 * (field.row(i) + field.row(j)).transpose();
        alpha[e] = mid.dot(mesh.position(j) - mesh.position(i));
    }
    return alpha;
}

/// Vector fields built from Laplacian eigenvectors, stacked as columns.
struct ModeFields
{
    Eigen::MatrixXd fields;       ///< 3V x count, stacked VertexFields
    Eigen::MatrixXd one_forms;    ///< E x count, d0 f_n / sqrt(lambda_n) before sharp
    Eigen::VectorXd eigenvalues;  ///< lambda_n of each column
    std::vector<int> modes;       ///< source eigenvector index per column

    int count() const { return static_cast<int>(fields.cols()); }
    VertexField field(int n) const { return unstack(fields.col(n)); }
};

/// Eigenvalues at or below this fraction of the largest are treated as zero.
inline constexpr double zero_eigenvalue_tolerance = 1e-9;

namespace detail {

inline std::vector<int> select_modes(const SpectralBasis& basis, int first_mode)
{
    const int count = basis.num_modes();
    const double top = count > 0 ? std::abs(basis.eigenvalues.maxCoeff()) : 0.0;
    const double threshold = zero_eigenvalue_tolerance * std::max(top, 1e-300);
    std::vector<int> modes;
    if (first_mode < 0) {
        for (int n = 0; n < count; ++n)
            if (basis.eigenvalues[n] > threshold) modes.push_back(n);
        return modes;
    }
    for (int n = first_mode; n < count; ++n) {
        if (!(basis.eigenvalues[n] > threshold)) {
            fail(ErrorCode::ZeroEigenvalueIncluded,
                 "mode " + std::to_string(n) + " has eigenvalue " + std::to_string(basis.eigenvalues[n]));
        }
        modes.push_back(n);
    }
    return modes;
}

} // namespace detail

/// Curl-free fields (d0 f_n / sqrt(lambda_n))^#. With first_mode < 0 every
/// zero-eigenvalue mode is skipped; otherwise modes from first_mode on are
/// used and a zero eigenvalue among them is an error.
inline ModeFields diverging_basis(const SimplicialComplex& mesh, const VertexGeometry& geom, const DecOperators& ops,
                                  const SpectralBasis& basis, int first_mode = -1)
{
    const auto modes = detail::select_modes(basis, first_mode);
    const int count = static_cast<int>(modes.size());
    ModeFields out;
    out.modes = modes;
    out.eigenvalues.resize(count);
    out.fields.resize(3 * mesh.num_vertices(), count);
    out.one_forms.resize(mesh.num_edges(), count);
    for (int c = 0; c < count; ++c) out.eigenvalues[c] = basis.eigenvalues[modes[c]];
    out.one_forms = ops.d0 * basis.eigenvectors(Eigen::all, modes);
    for (int c = 0; c < count; ++c) out.one_forms.col(c) /= std::sqrt(out.eigenvalues[c]);
    parallel_for(count, [&](int c) {
        const VertexField f = sharp_pp(mesh, geom, out.one_forms.col(c));
        out.fields.col(c) = stacked(f);
    });
    return out;
}

/// Divergence-free fields: diverging construction followed by rotate_tangent.
inline ModeFields curling_basis(const SimplicialComplex& mesh, const VertexGeometry& geom, const DecOperators& ops,
                                const SpectralBasis& basis, int first_mode = -1)
{
    ModeFields out = diverging_basis(mesh, geom, ops, basis, first_mode);
    parallel_for(out.count(), [&](int c) {
        const VertexField r = rotate_tangent(geom, out.field(c));
        out.fields.col(c) = stacked(r);
    });
    return out;
}

/// Harmonic vertex fields: sharp of each harmonic 1-form (possibly none).
inline Eigen::MatrixXd harmonic_vertex_basis(const SimplicialComplex& mesh, const VertexGeometry& geom,
                                             const HarmonicBasis& harmonic)
{
    Eigen::MatrixXd out(3 * mesh.num_vertices(), harmonic.dimension());
    for (int h = 0; h < harmonic.dimension(); ++h) {
        out.col(h) = stacked(sharp_pp(mesh, geom, harmonic.one_forms.col(h)));
    }
    return out;
}

/// The two unit constant fields (1,0,0) and (0,1,0) of a planar domain.
inline Eigen::MatrixXd harmonic_manual_flat(const SimplicialComplex& mesh)
{
    const int nv = mesh.num_vertices();
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(3 * nv, 2);
    for (int v = 0; v < nv; ++v) {
        out(3 * v, 0) = 1.0;
        out(3 * v + 1, 1) = 1.0;
    }
    return out;
}

/// Curl-free, divergence-free and harmonic bases feeding the vector kernels.
struct VectorBases
{
    ModeFields diverging;
    ModeFields curling;
    Eigen::MatrixXd harmonic;  ///< 3V x H
    int num_vertices = 0;
};

} // namespace meshvec

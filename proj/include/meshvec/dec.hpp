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

#include <meshvec/mesh.hpp>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <vector>

namespace meshvec {

using SparseMatrix = Eigen::SparseMatrix<double>;
using IncidenceMatrix = Eigen::SparseMatrix<int>;

/// Signed vertex-edge incidence (E x V): row (i,j), i<j, holds -1 at i and +1 at j.
inline IncidenceMatrix incidence_0(const SimplicialComplex& mesh)
{
    std::vector<Eigen::Triplet<int>> t;
    t.reserve(2 * mesh.num_edges());
    for (int e = 0; e < mesh.num_edges(); ++e) {
        t.emplace_back(e, mesh.edges()[e][0], -1);
        t.emplace_back(e, mesh.edges()[e][1], 1);
    }
    IncidenceMatrix d(mesh.num_edges(), mesh.num_vertices());
    d.setFromTriplets(t.begin(), t.end());
    return d;
}

/// Signed edge-face incidence (F x E) relative to the face winding.
inline IncidenceMatrix incidence_1(const SimplicialComplex& mesh)
{
    std::vector<Eigen::Triplet<int>> t;
    t.reserve(3 * mesh.num_faces());
    for (int f = 0; f < mesh.num_faces(); ++f) {
        for (int k = 0; k < 3; ++k) t.emplace_back(f, mesh.face_edges()[f][k], mesh.face_edge_signs()[f][k]);
    }
    IncidenceMatrix d(mesh.num_faces(), mesh.num_edges());
    d.setFromTriplets(t.begin(), t.end());
    return d;
}

inline SparseMatrix exterior_derivative_0(const SimplicialComplex& mesh)
{
    return incidence_0(mesh).cast<double>();
}

inline SparseMatrix exterior_derivative_1(const SimplicialComplex& mesh)
{
    return incidence_1(mesh).cast<double>();
}

/// Diagonal of the 0-form Hodge star: barycentric dual areas, or ones in flat mode.
inline Eigen::VectorXd hodge_star_0(const SimplicialComplex& mesh, bool flat_mode = false)
{
    if (flat_mode) return Eigen::VectorXd::Ones(mesh.num_vertices());
    return vertex_geometry(mesh).dual_areas;
}

/// Diagonal of the 1-form Hodge star: half the sum of cotangents of the angles
/// opposite each edge (a single angle on boundary edges). Entries may be
/// negative on obtuse triangulations.
inline Eigen::VectorXd hodge_star_1(const SimplicialComplex& mesh)
{
    Eigen::VectorXd w = Eigen::VectorXd::Zero(mesh.num_edges());
    const auto& x = mesh.positions();
    for (int f = 0; f < mesh.num_faces(); ++f) {
        const Face& t = mesh.faces()[f];
        for (int k = 0; k < 3; ++k) {
            // side k joins t[k], t[k+1]; the opposite corner is t[k+2]
            const int apex = t[(k + 2) % 3];
            w[mesh.face_edges()[f][k]] += 0.5 * corner_cot(x[apex], x[t[k]], x[t[(k + 1) % 3]]);
        }
    }
    return w;
}

/// Diagonal of the 2-form Hodge star: inverse face areas.
inline Eigen::VectorXd hodge_star_2(const SimplicialComplex& mesh)
{
    Eigen::VectorXd s(mesh.num_faces());
    const auto& x = mesh.positions();
    for (int f = 0; f < mesh.num_faces(); ++f) {
        const Face& t = mesh.faces()[f];
        s[f] = 1.0 / triangle_area(x[t[0]], x[t[1]], x[t[2]]);
    }
    return s;
}

/// Cotangent stiffness d0^T star1 d0, assembled edge by edge so that the
/// result is exactly symmetric.
inline SparseMatrix stiffness_from_weights(const SimplicialComplex& mesh, const Eigen::VectorXd& star1)
{
    const int nv = mesh.num_vertices();
    std::vector<Eigen::Triplet<double>> t;
    t.reserve(4 * mesh.num_edges());
    Eigen::VectorXd diag = Eigen::VectorXd::Zero(nv);
    for (int e = 0; e < mesh.num_edges(); ++e) {
        const int i = mesh.edges()[e][0], j = mesh.edges()[e][1];
        t.emplace_back(i, j, -star1[e]);
        t.emplace_back(j, i, -star1[e]);
        diag[i] += star1[e];
        diag[j] += star1[e];
    }
    for (int v = 0; v < nv; ++v) t.emplace_back(v, v, diag[v]);
    SparseMatrix L(nv, nv);
    L.setFromTriplets(t.begin(), t.end());
    return L;
}

inline SparseMatrix stiffness(const SimplicialComplex& mesh)
{
    return stiffness_from_weights(mesh, hodge_star_1(mesh));
}

/// All DEC operators of one complex, assembled once.
struct DecOperators
{
    SparseMatrix d0;          ///< E x V
    SparseMatrix d1;          ///< F x E
    Eigen::VectorXd star0;    ///< V (identity in flat mode)
    Eigen::VectorXd star1;    ///< E
    Eigen::VectorXd star2;    ///< F
    SparseMatrix stiffness;   ///< V x V
    bool flat_mode = false;

    static DecOperators build(const SimplicialComplex& mesh, bool flat_mode = false)
    {
        DecOperators ops;
        ops.flat_mode = flat_mode;
        ops.d0 = exterior_derivative_0(mesh);
        ops.d1 = exterior_derivative_1(mesh);
        ops.star0 = hodge_star_0(mesh, flat_mode);
        ops.star1 = hodge_star_1(mesh);
        ops.star2 = hodge_star_2(mesh);
        ops.stiffness = stiffness_from_weights(mesh, ops.star1);
        return ops;
    }

    int num_vertices() const { return static_cast<int>(star0.size()); }
    int num_edges() const { return static_cast<int>(star1.size()); }
    int num_faces() const { return static_cast<int>(star2.size()); }

    /// Total mass, i.e. the area used for kernel normalization.
    double mass_total() const { return star0.sum(); }
};

/// star0^-1 d0^T star1 alpha; the divergence of d0 f is the cotangent Laplacian of f.
inline Eigen::VectorXd divergence(const DecOperators& ops, const Eigen::VectorXd& one_form)
{
    if (one_form.size() != ops.num_edges()) {
        fail(ErrorCode::DimensionMismatch, "1-form length " + std::to_string(one_form.size()) +
                                               " does not match edge count " + std::to_string(ops.num_edges()));
    }
    const Eigen::VectorXd flux = ops.star1.cwiseProduct(one_form);
    return (ops.d0.transpose() * flux).cwiseQuotient(ops.star0);
}

/// L_c f = star0^-1 (d0^T star1 d0) f.
inline Eigen::VectorXd cotangent_laplacian_apply(const DecOperators& ops, const Eigen::VectorXd& f)
{
    return (ops.stiffness * f).cwiseQuotient(ops.star0);
}

/// Weak-form Hodge Laplacian on 1-forms.
struct Hodge1System
{
    SparseMatrix stiffness1;  ///< star1 d0 star0^-1 d0^T star1 + d1^T star2 d1
    Eigen::VectorXd mass1;    ///< diagonal, strictly positive
    int clamped_edges = 0;    ///< entries of star1 raised to the positivity floor
};

/// Relative floor applied to non-positive star1 entries in the 1-form mass.
inline constexpr double hodge1_mass_floor = 1e-10;

inline Hodge1System hodge1_system(const DecOperators& ops)
{
    Hodge1System sys;
    const int ne = ops.num_edges();
    double positive_sum = 0.0;
    int positive_count = 0;
    for (int e = 0; e < ne; ++e) {
        if (ops.star1[e] > 0.0) {
            positive_sum += ops.star1[e];
            ++positive_count;
        }
    }
    if (positive_count == 0) fail(ErrorCode::SingularMass, "no positive cotangent weights");
    const double floor = hodge1_mass_floor * positive_sum / positive_count;
    sys.mass1 = ops.star1;
    for (int e = 0; e < ne; ++e) {
        if (!(sys.mass1[e] > floor)) {
            sys.mass1[e] = floor;
            ++sys.clamped_edges;
        }
    }
    // B = star1 d0 (E x V); first term B star0^-1 B^T.
    const SparseMatrix B = sys.mass1.asDiagonal() * ops.d0;
    const SparseMatrix Bs = B * ops.star0.cwiseInverse().asDiagonal();
    SparseMatrix codiff = Bs * SparseMatrix(B.transpose());
    SparseMatrix curl = SparseMatrix(ops.d1.transpose()) * ops.star2.asDiagonal() * ops.d1;
    SparseMatrix K = codiff + curl;
    // symmetrize exactly
    sys.stiffness1 = 0.5 * (K + SparseMatrix(K.transpose()));
    return sys;
}

/// Matrix Market dump (coordinate, real, general).
inline void write_matrix_market(const std::filesystem::path& path, const SparseMatrix& m)
{
    std::ofstream out(path);
    if (!out) fail(ErrorCode::IoError, "cannot open " + path.string());
    out << "%%MatrixMarket matrix coordinate real general\n";
    out << m.rows() << ' ' << m.cols() << ' ' << m.nonZeros() << '\n';
    out << std::setprecision(17);
    for (int k = 0; k < m.outerSize(); ++k) {
        for (SparseMatrix::InnerIterator it(m, k); it; ++it) {
            out << it.row() + 1 << ' ' << it.col() + 1 << ' ' << it.value() << '\n';
        }
    }
}

inline void write_matrix_market(const std::filesystem::path& path, const Eigen::VectorXd& diagonal)
{
    SparseMatrix m(diagonal.size(), diagonal.size());
    std::vector<Eigen::Triplet<double>> t;
    for (Eigen::Index i = 0; i < diagonal.size(); ++i) t.emplace_back(i, i, diagonal[i]);
    m.setFromTriplets(t.begin(), t.end());
    write_matrix_market(path, m);
}

} // namespace meshvec

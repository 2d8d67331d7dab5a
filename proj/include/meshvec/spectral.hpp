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
#include <meshvec/linalg.hpp>
#include <meshvec/mesh.hpp>

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace meshvec {

enum class BoundaryKind { neumann, dirichlet };

/// Truncation used when none is configured.
inline constexpr int default_truncation = 250;
/// Problems up to this size go through the dense solver.
inline constexpr int dense_solver_limit = 3000;

enum class SolverChoice { automatic, dense, iterative };

/// Eigenpairs of the cotangent Laplacian, ascending, M-orthonormal.
struct SpectralBasis
{
    Eigen::VectorXd eigenvalues;   ///< L+1 values
    Eigen::MatrixXd eigenvectors;  ///< V x (L+1)
    BoundaryKind kind = BoundaryKind::neumann;
    Eigen::VectorXd mass;          ///< diagonal mass used (star0 or ones)
    bool iterative = false;

    int num_modes() const { return static_cast<int>(eigenvalues.size()); }
    int truncation() const { return num_modes() - 1; }
};

/// Caps a requested truncation at V - 1.
inline int effective_truncation(int requested, int num_vertices)
{
    return std::clamp(requested, 0, num_vertices - 1);
}

namespace detail {

inline linalg::EigenPairs lowest_pairs(const SparseMatrix& K, const Eigen::VectorXd& mass, int count,
                                       SolverChoice solver, bool& iterative)
{
    const int n = static_cast<int>(K.rows());
    iterative = solver == SolverChoice::iterative || (solver == SolverChoice::automatic && n > dense_solver_limit);
    auto pairs = iterative ? linalg::generalized_lowest_lanczos(K, mass, count)
                           : linalg::generalized_lowest_dense(K, mass, count);
    linalg::normalize_signs(pairs.vectors);
    return pairs;
}

} // namespace detail

/// Smallest L+1 eigenpairs of stiffness f = lambda star0 f (natural Neumann
/// conditions on any boundary).
inline SpectralBasis eigensolve(const DecOperators& ops, int truncation, SolverChoice solver = SolverChoice::automatic)
{
    const int nv = ops.num_vertices();
    if (truncation < 0) fail(ErrorCode::InvalidInput, "truncation L must be >= 0");
    if (truncation + 1 > nv) {
        fail(ErrorCode::TruncationTooLarge, "L + 1 = " + std::to_string(truncation + 1) +
                                                " exceeds the vertex count V = " + std::to_string(nv));
    }
    SpectralBasis b;
    b.kind = BoundaryKind::neumann;
    b.mass = ops.star0;
    auto pairs = detail::lowest_pairs(ops.stiffness, ops.star0, truncation + 1, solver, b.iterative);
    b.eigenvalues = std::move(pairs.values);
    b.eigenvectors = std::move(pairs.vectors);
    return b;
}

/// Dirichlet eigenpairs: boundary vertices are removed from the problem and
/// the eigenvectors are padded with exact zeros there.
inline SpectralBasis eigensolve_dirichlet(const DecOperators& ops, const SimplicialComplex& mesh, int truncation,
                                          SolverChoice solver = SolverChoice::automatic)
{
    if (!mesh.has_boundary()) fail(ErrorCode::NoBoundary, "Dirichlet eigenproblem needs a mesh with boundary");
    if (truncation < 0) fail(ErrorCode::InvalidInput, "truncation L must be >= 0");
    const int nv = mesh.num_vertices();
    std::vector<int> interior_index(nv, -1);
    std::vector<int> interior;
    for (int v = 0; v < nv; ++v) {
        if (!mesh.is_boundary_vertex(v)) {
            interior_index[v] = static_cast<int>(interior.size());
            interior.push_back(v);
        }
    }
    const int ni = static_cast<int>(interior.size());
    if (truncation + 1 > ni) {
        fail(ErrorCode::TruncationTooLarge, "L + 1 = " + std::to_string(truncation + 1) +
                                                " exceeds the interior vertex count " + std::to_string(ni));
    }
    std::vector<Eigen::Triplet<double>> t;
    for (int k = 0; k < ops.stiffness.outerSize(); ++k) {
        for (SparseMatrix::InnerIterator it(ops.stiffness, k); it; ++it) {
            const int r = interior_index[it.row()], c = interior_index[it.col()];
            if (r >= 0 && c >= 0) t.emplace_back(r, c, it.value());
        }
    }
    SparseMatrix K(ni, ni);
    K.setFromTriplets(t.begin(), t.end());
    Eigen::VectorXd mass(ni);
    for (int i = 0; i < ni; ++i) mass[i] = ops.star0[interior[i]];

    SpectralBasis b;
    b.kind = BoundaryKind::dirichlet;
    b.mass = ops.star0;
    auto pairs = detail::lowest_pairs(K, mass, truncation + 1, solver, b.iterative);
    b.eigenvalues = std::move(pairs.values);
    b.eigenvectors = Eigen::MatrixXd::Zero(nv, truncation + 1);
    for (int i = 0; i < ni; ++i) b.eigenvectors.row(interior[i]) = pairs.vectors.row(i);
    return b;
}

/// Discrete harmonic 1-forms: numerical null space of the weak Hodge Laplacian.
struct HarmonicBasis
{
    Eigen::MatrixXd one_forms;      ///< E x H, mass1-orthonormal
    Eigen::VectorXd eigenvalues;    ///< all computed candidate eigenvalues, ascending
    double gap = std::numeric_limits<double>::infinity();  ///< first non-harmonic / last harmonic eigenvalue

    int dimension() const { return static_cast<int>(one_forms.cols()); }
};

/// Largest ratio (last harmonic / first non-harmonic) accepted as a spectral gap.
inline constexpr double max_harmonic_gap_ratio = 1e-3;

/// Eigenvectors of (stiffness1, mass1) whose eigenvalue lies below
/// `tolerance` times the reference (largest computed) eigenvalue.
///
/// `gap` reports the first non-harmonic eigenvalue over the largest harmonic
/// one; with no harmonic forms it is the smallest eigenvalue over the
/// detection threshold.
inline HarmonicBasis harmonic_oneforms(const Hodge1System& sys, double tolerance = 1e-6)
{
    const int ne = static_cast<int>(sys.mass1.size());
    int count = std::min(ne, 8);
    linalg::EigenPairs pairs;
    int h = 0;
    for (;;) {
        pairs = linalg::generalized_lowest_lanczos(sys.stiffness1, sys.mass1, count);
        const double reference = pairs.values[count - 1];
        h = 0;
        while (h < count && pairs.values[h] < tolerance * reference) ++h;
        if (h < count || count == ne) break;
        count = std::min(ne, 2 * count);
    }
    HarmonicBasis out;
    out.eigenvalues = pairs.values;
    const double reference = pairs.values[count - 1];
    if (h == count) {
        fail(ErrorCode::NoSpectralGap, "every eigenvalue of the 1-form Laplacian is numerically zero");
    }
    const double first_non_harmonic = pairs.values[h];
    if (h > 0) {
        const double last = std::max(pairs.values[h - 1], 0.0);
        if (last > max_harmonic_gap_ratio * first_non_harmonic) {
            fail(ErrorCode::NoSpectralGap, "harmonic candidates are not separated from the rest of the spectrum");
        }
        out.gap = last > 0.0 ? first_non_harmonic / last : std::numeric_limits<double>::infinity();
    } else {
        out.gap = first_non_harmonic / (tolerance * reference);
    }

    // Gram-Schmidt in the mass1 inner product (modified, two passes).
    Eigen::MatrixXd Q = pairs.vectors.leftCols(h);
    for (int pass = 0; pass < 2; ++pass) {
        for (int j = 0; j < h; ++j) {
            for (int i = 0; i < j; ++i) {
                const double c = Q.col(i).dot(sys.mass1.cwiseProduct(Q.col(j)));
                Q.col(j) -= c * Q.col(i);
            }
            Q.col(j) /= std::sqrt(Q.col(j).dot(sys.mass1.cwiseProduct(Q.col(j))));
        }
    }
    out.one_forms = std::move(Q);
    return out;
}

} // namespace meshvec

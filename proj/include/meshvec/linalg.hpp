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

#include <meshvec/errors.hpp>

#include <Eigen/Core>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>
#include <Eigen/Eigenvalues>

#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

namespace meshvec::linalg {

using SparseMatrix = Eigen::SparseMatrix<double>;

struct EigenPairs
{
    Eigen::VectorXd values;   ///< ascending
    Eigen::MatrixXd vectors;  ///< one column per value
};

/// Lowest `count` eigenpairs of a dense symmetric matrix (LAPACK dsyevr).
/// Only the lower triangle of `a` is referenced.
inline EigenPairs symmetric_lowest(Eigen::MatrixXd a, int count, bool want_vectors = true)
{
    const lapack_int n = static_cast<lapack_int>(a.rows());
    if (a.cols() != n) fail(ErrorCode::DimensionMismatch, "eigensolve needs a square matrix");
    count = std::clamp(count, 0, static_cast<int>(n));
    EigenPairs out;
    if (count == 0 || n == 0) {
        out.values.resize(0);
        out.vectors.resize(n, 0);
        return out;
    }
    Eigen::VectorXd w(n);
    Eigen::MatrixXd z(want_vectors ? n : 1, want_vectors ? count : 1);
    std::vector<lapack_int> support(2 * static_cast<std::size_t>(count));
    lapack_int found = 0;
    const lapack_int info = LAPACKE_dsyevr(LAPACK_COL_MAJOR, want_vectors ? 'V' : 'N', count == n ? 'A' : 'I', 'L', n,
                                           a.data(), n, 0.0, 0.0, 1, count, 0.0, &found, w.data(), z.data(),
                                           want_vectors ? n : 1, support.data());
    if (info != 0 || found != count) {
        fail(ErrorCode::ConvergenceFailure, "dsyevr failed (info " + std::to_string(info) + ")");
    }
    out.values = w.head(count);
    if (want_vectors) out.vectors = std::move(z);
    return out;
}

/// All eigenvalues of a dense symmetric matrix, ascending.
inline Eigen::VectorXd symmetric_eigenvalues(const Eigen::MatrixXd& a)
{
    return symmetric_lowest(a, static_cast<int>(a.rows()), false).values;
}

/// Lowest eigenpairs of K f = lambda diag(mass) f through the dense reduction
/// A = M^-1/2 K M^-1/2. Eigenvectors come back M-orthonormal.
inline EigenPairs generalized_lowest_dense(const SparseMatrix& K, const Eigen::VectorXd& mass, int count)
{
    const Eigen::VectorXd s = mass.cwiseSqrt().cwiseInverse();
    Eigen::MatrixXd a = s.asDiagonal() * Eigen::MatrixXd(K) * s.asDiagonal();
    EigenPairs p = symmetric_lowest(std::move(a), count, true);
    p.vectors = s.asDiagonal() * p.vectors;
    return p;
}

struct LanczosOptions
{
    double shift = -1.0;       ///< factorizes K + shift*M; <= 0 picks a scale-relative shift
    double tolerance = 1e-10;  ///< relative Ritz residual of the inverted operator
    int max_restarts = 300;
    int krylov_dim = 0;        ///< 0 picks max(2*count + 20, count + 40)
    unsigned seed = 20260616u;
};

/// Lowest `count` eigenpairs of the symmetric definite pencil (K, diag(mass))
/// for positive semi-definite K, by shift-invert Lanczos in the M inner
/// product with Krylov-Schur restarts and full reorthogonalization.
inline EigenPairs generalized_lowest_lanczos(const SparseMatrix& K, const Eigen::VectorXd& mass, int count,
                                             const LanczosOptions& opts = {})
{
    const int n = static_cast<int>(K.rows());
    if (K.cols() != n || mass.size() != n) fail(ErrorCode::DimensionMismatch, "pencil dimensions disagree");
    if (count <= 0) return {Eigen::VectorXd(0), Eigen::MatrixXd(n, 0)};
    if (count > n) fail(ErrorCode::TruncationTooLarge, "requested more eigenpairs than the problem size");

    double shift = opts.shift;
    if (!(shift > 0.0)) shift = 1e-6 * K.diagonal().sum() / mass.sum();
    if (!(shift > 0.0)) shift = 1e-12;

    SparseMatrix shifted = K;
    for (int i = 0; i < n; ++i) shifted.coeffRef(i, i) += shift * mass[i];
    shifted.makeCompressed();
    Eigen::SimplicialLDLT<SparseMatrix> solver(shifted);
    if (solver.info() != Eigen::Success) fail(ErrorCode::ConvergenceFailure, "shifted factorization failed");

    const int m = std::min(n, opts.krylov_dim > 0 ? opts.krylov_dim : std::max(2 * count + 20, count + 40));
    Eigen::MatrixXd V(n, m + 1);
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(m, m);

    std::mt19937 rng(opts.seed);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    auto m_norm = [&](const Eigen::VectorXd& x) { return std::sqrt(x.dot(mass.cwiseProduct(x))); };
    auto orthogonalize = [&](Eigen::VectorXd& w, int cols) -> Eigen::VectorXd {
        Eigen::VectorXd h = Eigen::VectorXd::Zero(cols);
        for (int pass = 0; pass < 2 && cols > 0; ++pass) {
            const Eigen::VectorXd c = V.leftCols(cols).transpose() * mass.cwiseProduct(w);
            w.noalias() -= V.leftCols(cols) * c;
            h += c;
        }
        return h;
    };
    auto random_direction = [&](int cols) {
        for (int attempt = 0; attempt < 8; ++attempt) {
            Eigen::VectorXd w(n);
            for (int i = 0; i < n; ++i) w[i] = unif(rng);
            orthogonalize(w, cols);
            const double nrm = m_norm(w);
            if (nrm > 1e-8) return Eigen::VectorXd(w / nrm);
        }
        fail(ErrorCode::ConvergenceFailure, "could not extend the Krylov basis");
    };

    V.col(0) = random_direction(0);
    int kept = 0;
    double beta = 0.0;
    Eigen::VectorXd theta;
    Eigen::MatrixXd S;
    bool converged = false;
    for (int restart = 0; restart <= opts.max_restarts; ++restart) {
        for (int j = kept; j < m; ++j) {
            Eigen::VectorXd w = solver.solve(mass.cwiseProduct(V.col(j)));
            const double scale = m_norm(w);
            const Eigen::VectorXd h = orthogonalize(w, j + 1);
            H.block(0, j, j + 1, 1) = h;
            H.block(j, 0, 1, j + 1) = h.transpose();
            beta = m_norm(w);
            if (j + 1 == n) {
                beta = 0.0;
                V.col(j + 1).setZero();
            } else if (beta <= 1e-12 * std::max(scale, 1e-300)) {
                beta = 0.0;  // invariant subspace; continue with a fresh direction
                V.col(j + 1) = random_direction(j + 1);
            } else {
                V.col(j + 1) = w / beta;
            }
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H);
        theta = es.eigenvalues();
        S = es.eigenvectors();
        // Largest theta of the inverted operator = smallest lambda.
        bool all_ok = true;
        for (int k = 0; k < count; ++k) {
            const int idx = m - 1 - k;
            const double resid = std::abs(beta * S(m - 1, idx));
            if (resid > opts.tolerance * std::abs(theta[idx])) {
                all_ok = false;
                break;
            }
        }
        if (all_ok || m == n) {
            converged = true;
            break;
        }
        // Krylov-Schur restart: keep the best Ritz vectors plus the residual direction.
        const int keep = std::min(m - 1, count + (m - count) / 2);
        const Eigen::MatrixXd Skeep = S.rightCols(keep);
        const Eigen::MatrixXd U = V.leftCols(m) * Skeep;
        const Eigen::VectorXd next = V.col(m);
        V.leftCols(keep) = U;
        V.col(keep) = next;
        H.setZero();
        for (int k = 0; k < keep; ++k) {
            H(k, k) = theta[m - keep + k];
            H(k, keep) = H(keep, k) = beta * Skeep(m - 1, k);
        }
        kept = keep;
    }
    if (!converged) fail(ErrorCode::ConvergenceFailure, "shift-invert Lanczos did not converge");

    EigenPairs out;
    out.values.resize(count);
    out.vectors = V.leftCols(m) * S.rightCols(count).rowwise().reverse();
    for (int k = 0; k < count; ++k) out.values[k] = 1.0 / theta[m - 1 - k] - shift;
    return out;
}

/// Fixes eigenvector signs so the largest-magnitude entry of each column is positive.
inline void normalize_signs(Eigen::MatrixXd& vectors)
{
    for (Eigen::Index c = 0; c < vectors.cols(); ++c) {
        Eigen::Index arg = 0;
        vectors.col(c).cwiseAbs().maxCoeff(&arg);
        if (vectors(arg, c) < 0.0) vectors.col(c) = -vectors.col(c);
    }
}

} // namespace meshvec::linalg

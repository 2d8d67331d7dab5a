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
#include "support.hpp"

#include <gtest/gtest.h>

using namespace meshvec;
using namespace meshvec::testing;

namespace {

double max_orthonormality_error(const SpectralBasis& b, const Eigen::VectorXd& mass)
{
    const Eigen::MatrixXd g = b.eigenvectors.transpose() * mass.asDiagonal() * b.eigenvectors;
    return (g - Eigen::MatrixXd::Identity(g.rows(), g.cols())).cwiseAbs().maxCoeff();
}

double max_residual(const DecOperators& ops, const SpectralBasis& b)
{
    const Eigen::MatrixXd r = ops.stiffness * b.eigenvectors - ops.star0.asDiagonal() * b.eigenvectors * b.eigenvalues.asDiagonal();
    return r.cwiseAbs().maxCoeff();
}

} // namespace

TEST(Eigensolve, SphereClusters)
{
    const auto ops = DecOperators::build(generate_icosphere(3));
    const auto b = eigensolve(ops, 15);
    EXPECT_LE(std::abs(b.eigenvalues[0]), 1e-9 * b.eigenvalues.maxCoeff());
    const Eigen::VectorXd f0 = b.eigenvectors.col(0);
    EXPECT_LT((f0.array() - f0.mean()).abs().maxCoeff(), 1e-8);
    int n = 1;
    for (int ell = 1; ell <= 3; ++ell)
        for (int k = 0; k < 2 * ell + 1; ++k, ++n) EXPECT_NEAR(b.eigenvalues[n], ell * (ell + 1.0), 0.02 * ell * (ell + 1.0));
}

TEST(Eigensolve, DenseMatchesReferenceAndHasSmallResiduals)
{
    // Guards against a broken BLAS: eigenvalues and eigenvector residuals both.
    const auto ops = DecOperators::build(random_scan_mesh(5, 3));
    const auto b = eigensolve(ops, 120, SolverChoice::dense);
    const Eigen::VectorXd s = ops.star0.cwiseSqrt().cwiseInverse();
    const Eigen::MatrixXd a = s.asDiagonal() * Eigen::MatrixXd(ops.stiffness) * s.asDiagonal();
    const Eigen::VectorXd ref = reference_eigenvalues(a).head(121);
    EXPECT_LT((b.eigenvalues - ref).cwiseAbs().maxCoeff(), 1e-9 * ref.maxCoeff());
    EXPECT_LT(max_residual(ops, b), 1e-8 * b.eigenvalues.maxCoeff() * ops.star0.maxCoeff());
    EXPECT_LT(max_orthonormality_error(b, ops.star0), 1e-8);
}

TEST(Eigensolve, IterativeAgreesWithDense)
{
    const auto ops = DecOperators::build(generate_torus(40, 16, 2.0, 0.8));
    const auto d = eigensolve(ops, 60, SolverChoice::dense);
    const auto it = eigensolve(ops, 60, SolverChoice::iterative);
    EXPECT_TRUE(it.iterative);
    EXPECT_FALSE(d.iterative);
    EXPECT_LT((d.eigenvalues - it.eigenvalues).cwiseAbs().maxCoeff(), 1e-8 * d.eigenvalues.maxCoeff());
    EXPECT_LT(max_orthonormality_error(it, ops.star0), 1e-6);
    EXPECT_LT(max_residual(ops, it), 1e-6 * d.eigenvalues.maxCoeff() * ops.star0.maxCoeff());
}

TEST(Eigensolve, OneFormOrthogonality)
{
    const auto ops = DecOperators::build(random_scan_mesh(9, 2));
    const auto b = eigensolve(ops, 40);
    const Eigen::MatrixXd a = ops.d0 * b.eigenvectors;
    const Eigen::MatrixXd g = a.transpose() * ops.star1.asDiagonal() * a;
    EXPECT_LT((g - Eigen::MatrixXd(b.eigenvalues.asDiagonal())).cwiseAbs().maxCoeff(), 1e-6 * b.eigenvalues.maxCoeff());
}

TEST(Eigensolve, SignConvention)
{
    const auto b = eigensolve(DecOperators::build(generate_icosphere(2)), 20);
    for (int n = 0; n < b.num_modes(); ++n) {
        Eigen::Index i;
        b.eigenvectors.col(n).cwiseAbs().maxCoeff(&i);
        EXPECT_GT(b.eigenvectors(i, n), 0.0);
    }
}

TEST(Eigensolve, NeumannSquare)
{
    const auto g = generate_grid_delaunay(50, 50);
    const auto b = eigensolve(DecOperators::build(g), 3);
    const double pi2 = std::numbers::pi * std::numbers::pi;
    EXPECT_NEAR(b.eigenvalues[1], pi2, 0.05 * pi2);
    EXPECT_NEAR(b.eigenvalues[2], pi2, 0.05 * pi2);
    EXPECT_NEAR(b.eigenvalues[3], 2 * pi2, 0.05 * 2 * pi2);
}

TEST(Eigensolve, NeumannSquareIdentityMass)
{
    // Unit mass is h^2 times the dual-area mass in the interior but doubles the
    // weight of boundary nodes; for cos(pi x) that inflates the Rayleigh
    // denominator by 3h, so lambda / h^2 ~ pi^2 / (1 + 3h).
    const auto g = generate_grid_delaunay(50, 50);
    const auto b = eigensolve(DecOperators::build(g, true), 1);
    const double h = 1.0 / 49.0;
    const double pi2 = std::numbers::pi * std::numbers::pi;
    EXPECT_NEAR(b.eigenvalues[1] / (h * h), pi2 / (1.0 + 3.0 * h), 0.01 * pi2);
}

TEST(Eigensolve, DirichletSquare)
{
    const auto g = generate_grid_delaunay(50, 50);
    const auto ops = DecOperators::build(g);
    const auto b = eigensolve_dirichlet(ops, g, 5);
    const double pi2 = std::numbers::pi * std::numbers::pi;
    EXPECT_NEAR(b.eigenvalues[0], 2 * pi2, 0.05 * 2 * pi2);
    EXPECT_NEAR(b.eigenvalues[1], 5 * pi2, 0.05 * 5 * pi2);
    for (int v : g.boundary_vertices())
        for (int n = 0; n < b.num_modes(); ++n) EXPECT_EQ(b.eigenvectors(v, n), 0.0);
    EXPECT_LT(max_orthonormality_error(b, ops.star0), 1e-8);
}

TEST(Eigensolve, Errors)
{
    const auto s = generate_icosphere(0);
    const auto ops = DecOperators::build(s);
    EXPECT_THROW(eigensolve_dirichlet(ops, s, 3), Error);
    try {
        eigensolve(ops, 12);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::TruncationTooLarge);
    }
    EXPECT_EQ(eigensolve(ops, 11).num_modes(), 12);
    EXPECT_EQ(effective_truncation(250, 12), 11);
}

TEST(Eigensolve, PermutationInvariantSpectrum)
{
    const auto m = random_scan_mesh(30, 2);
    std::vector<int> perm = all_vertices(m.num_vertices());
    std::mt19937_64 rng(8);
    std::shuffle(perm.begin(), perm.end(), rng);
    const auto a = eigensolve(DecOperators::build(m), 30);
    const auto b = eigensolve(DecOperators::build(permuted(m, perm)), 30);
    EXPECT_LT((a.eigenvalues - b.eigenvalues).cwiseAbs().maxCoeff(), 1e-9 * a.eigenvalues.maxCoeff());
}

TEST(Harmonic, TorusAndAnnulusGaps)
{
    const auto t = harmonic_oneforms(hodge1_system(DecOperators::build(generate_torus(48, 16, 2.0, 1.0))));
    EXPECT_EQ(t.dimension(), 2);
    EXPECT_GE(t.gap, 1e3);
    const auto a = harmonic_oneforms(hodge1_system(DecOperators::build(annulus(21))));
    EXPECT_EQ(a.dimension(), 1);
    EXPECT_GE(a.gap, 1e3);
    const auto s = harmonic_oneforms(hodge1_system(DecOperators::build(generate_icosphere(2))));
    EXPECT_EQ(s.dimension(), 0);
    EXPECT_GE(s.gap, 1e3);
}

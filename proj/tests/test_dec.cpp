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

// Two equilateral triangles sharing edge (0,1).
SimplicialComplex diamond()
{
    const double h = std::sqrt(3.0) / 2.0;
    return build_complex({{0, 0, 0}, {1, 0, 0}, {0.5, h, 0}, {0.5, -h, 0}}, {{0, 1, 2}, {1, 0, 3}});
}

} // namespace

TEST(ExteriorDerivative, SignsAndValues)
{
    const auto m = diamond();
    const auto d0 = exterior_derivative_0(m);
    const int e = m.find_edge(0, 1);
    Eigen::VectorXd f(4);
    f << 1.0, 3.0, 0.0, 0.0;
    EXPECT_EQ((d0 * f)[e], 2.0);
    EXPECT_EQ(d0.coeff(e, 0), -1.0);
    EXPECT_EQ(d0.coeff(e, 1), 1.0);
    EXPECT_EQ((d0 * Eigen::VectorXd::Constant(4, 2.5)).cwiseAbs().maxCoeff(), 0.0);
}

TEST(ExteriorDerivative, ComposeToZeroOnEveryMesh)
{
    for (const auto& m : {diamond(), generate_icosphere(2), generate_torus(8, 6, 2.0, 0.5), annulus(11),
                          random_scan_mesh(8, 2)}) {
        const IncidenceMatrix dd = incidence_1(m) * incidence_0(m);
        EXPECT_EQ(dd.cast<double>().cwiseAbs().sum(), 0.0);
    }
}

TEST(HodgeStar, CotangentWeights)
{
    const auto m = diamond();
    const auto s1 = hodge_star_1(m);
    EXPECT_NEAR(s1[m.find_edge(0, 1)], 1.0 / std::sqrt(3.0), 1e-12);
    // Boundary edge: one cot 60 / 2.
    EXPECT_NEAR(s1[m.find_edge(0, 2)], 0.5 / std::sqrt(3.0), 1e-12);

    const auto g = generate_grid_delaunay(5, 5, {0, 4, 0, 4});
    const auto w = hodge_star_1(g);
    const int center = 2 * 5 + 2;
    EXPECT_NEAR(w[g.find_edge(center, center + 1)], 1.0, 1e-12);
    EXPECT_NEAR(w[g.find_edge(center, center + 5)], 1.0, 1e-12);
    EXPECT_NEAR(w[g.find_edge(center, center + 6)], 0.0, 1e-12);  // diagonal: opposite right angles
    EXPECT_NEAR(w[g.find_edge(0, 5)], 0.5, 1e-12);
    // Boundary edge opposite a right angle.
    const auto right = build_complex({{0, 0, 0}, {1, 0, 0}, {0, 1, 0}}, {{0, 1, 2}});
    EXPECT_NEAR(hodge_star_1(right)[right.find_edge(1, 2)], 0.0, 1e-15);
}

TEST(HodgeStar, VertexAndFaceStars)
{
    const auto g = generate_grid_delaunay(5, 5, {0, 4, 0, 4});
    const auto s0 = hodge_star_0(g);
    EXPECT_NEAR(s0[12], 1.0, 1e-12);
    EXPECT_NEAR(s0.sum(), 16.0, 1e-12);
    EXPECT_EQ(hodge_star_0(g, true), Eigen::VectorXd::Ones(25));
    const auto s2 = hodge_star_2(g);
    EXPECT_NEAR(s2[0], 2.0, 1e-12);
    const auto sphere = generate_icosphere(3);
    EXPECT_GT(hodge_star_0(sphere).minCoeff(), 0.0);
    EXPECT_GT(hodge_star_2(sphere).minCoeff(), 0.0);
}

TEST(Stiffness, FivePointStencil)
{
    const auto g = generate_grid_delaunay(5, 5, {0, 4, 0, 4});
    const Eigen::MatrixXd l = Eigen::MatrixXd(stiffness(g));
    const int c = 12;
    EXPECT_NEAR(l(c, c), 4.0, 1e-12);
    for (int n : {c - 1, c + 1, c - 5, c + 5}) EXPECT_NEAR(l(c, n), -1.0, 1e-12);
    for (int n : {c - 6, c + 6, c - 4, c + 4}) EXPECT_NEAR(l(c, n), 0.0, 1e-12);
}

TEST(Stiffness, SymmetricZeroRowSumsPsd)
{
    for (const auto& m : {generate_icosphere(2), random_scan_mesh(2, 2), annulus(9)}) {
        const auto ops = DecOperators::build(m);
        const Eigen::MatrixXd l(ops.stiffness);
        EXPECT_LT((l - l.transpose()).cwiseAbs().maxCoeff(), 1e-12);
        EXPECT_LT(l.rowwise().sum().cwiseAbs().maxCoeff(), 1e-10 * l.cwiseAbs().maxCoeff());
        const Eigen::MatrixXd explicit_form = Eigen::MatrixXd(ops.d0).transpose() * ops.star1.asDiagonal() * Eigen::MatrixXd(ops.d0);
        EXPECT_LT((l - explicit_form).cwiseAbs().maxCoeff(), 1e-12);
        std::mt19937_64 rng(1);
        std::normal_distribution<double> nd;
        for (int k = 0; k < 100; ++k) {
            Eigen::VectorXd f(m.num_vertices());
            for (auto& x : f) x = nd(rng);
            EXPECT_GE(f.dot(l * f), -1e-10 * f.squaredNorm());
        }
    }
}

TEST(Divergence, MatchesCotangentLaplacian)
{
    const auto m = random_scan_mesh(6, 2);
    const auto ops = DecOperators::build(m);
    Eigen::VectorXd f(m.num_vertices());
    for (int v = 0; v < m.num_vertices(); ++v) f[v] = m.position(v).x() * m.position(v).y();
    const Eigen::VectorXd a = ops.d0 * f;
    EXPECT_LT((divergence(ops, a) - cotangent_laplacian_apply(ops, f)).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_EQ(divergence(ops, Eigen::VectorXd::Zero(m.num_edges())).cwiseAbs().maxCoeff(), 0.0);
}

TEST(Divergence, RotatedGradientIsSolenoidal)
{
    // alpha = flat(rotate(grad f)) on a flat grid; its divergence vanishes away from the rim.
    const auto m = generate_grid_delaunay(41, 41);
    const auto ops = DecOperators::build(m);
    const auto geom = vertex_geometry(m);
    VertexField u(m.num_vertices(), 3);
    for (int v = 0; v < m.num_vertices(); ++v) {
        const double x = m.position(v).x(), y = m.position(v).y();
        u.row(v) << -x, y, 0.0;  // rotated gradient of xy
    }
    const Eigen::VectorXd alpha = flat_midpoint(m, u);
    const Eigen::VectorXd div = divergence(ops, alpha);
    double interior = 0.0;
    for (int v = 0; v < m.num_vertices(); ++v)
        if (!m.is_boundary_vertex(v)) interior = std::max(interior, std::abs(div[v]));
    EXPECT_LE(interior, 1e-6 * alpha.cwiseAbs().maxCoeff());
}

TEST(Hodge1, SymmetricPsdAndClamped)
{
    const auto m = random_scan_mesh(12, 1);
    const auto sys = hodge1_system(DecOperators::build(m));
    const Eigen::MatrixXd k(sys.stiffness1);
    EXPECT_LT((k - k.transpose()).cwiseAbs().maxCoeff(), 1e-10 * k.cwiseAbs().maxCoeff());
    EXPECT_GE(psd_ratio(k), -1e-10);
    EXPECT_GT(sys.mass1.minCoeff(), 0.0);

    // A grid's diagonal edges have zero cotangent weight and are clamped.
    const auto grid = hodge1_system(DecOperators::build(generate_grid_delaunay(5, 5)));
    EXPECT_EQ(grid.clamped_edges, 16);
    EXPECT_GT(grid.mass1.minCoeff(), 0.0);
}

TEST(Hodge1, NullSpaceDimensions)
{
    EXPECT_EQ(harmonic_oneforms(hodge1_system(DecOperators::build(generate_icosphere(2)))).dimension(), 0);
    EXPECT_EQ(harmonic_oneforms(hodge1_system(DecOperators::build(generate_torus(24, 12, 2.0, 0.7)))).dimension(), 2);
    EXPECT_EQ(harmonic_oneforms(hodge1_system(DecOperators::build(generate_grid_delaunay(15, 15)))).dimension(), 0);
    EXPECT_EQ(harmonic_oneforms(hodge1_system(DecOperators::build(annulus(21)))).dimension(), 1);
}

TEST(Hodge1, HarmonicFormsAnnihilatedAndOrthonormal)
{
    const auto sys = hodge1_system(DecOperators::build(generate_torus(24, 12, 2.0, 0.7)));
    const auto h = harmonic_oneforms(sys);
    const Eigen::MatrixXd g = h.one_forms.transpose() * sys.mass1.asDiagonal() * h.one_forms;
    EXPECT_LT((g - Eigen::MatrixXd::Identity(2, 2)).cwiseAbs().maxCoeff(), 1e-6);
    const double scale = Eigen::MatrixXd(sys.stiffness1).norm();
    EXPECT_LT((sys.stiffness1 * h.one_forms).norm(), 1e-6 * scale);
}

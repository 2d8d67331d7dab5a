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

VertexField random_tangent_field(const VertexGeometry& geom, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd;
    VertexField f(geom.normals.size(), 3);
    for (auto& x : f.reshaped()) x = nd(rng);
    project_tangent(geom, f);
    return f;
}

} // namespace

TEST(Sharp, ConstantFieldMatchesLeastSquaresOracle)
{
    const auto m = generate_grid_delaunay(21, 21);
    const auto geom = vertex_geometry(m);
    const Vec3 c(1, 0, 0);
    Eigen::VectorXd alpha(m.num_edges());
    for (int e = 0; e < m.num_edges(); ++e) alpha[e] = c.dot(m.position(m.edges()[e][1]) - m.position(m.edges()[e][0]));
    const auto u = sharp_pp(m, geom, alpha);
    const auto oracle = least_squares_sharp(m, geom, alpha);
    for (int v = 0; v < m.num_vertices(); ++v) {
        if (m.is_boundary_vertex(v)) continue;
        EXPECT_LT((u.row(v) - c.transpose()).norm(), 1e-2);
        EXPECT_LT((u.row(v) - oracle.row(v)).norm(), 1e-2);
    }
}

TEST(Sharp, GradientOfLinearFunction)
{
    const auto m = generate_grid_delaunay(15, 11, {0, 2, 0, 1});
    const auto geom = vertex_geometry(m);
    const auto ops = DecOperators::build(m);
    Eigen::VectorXd f(m.num_vertices());
    for (int v = 0; v < m.num_vertices(); ++v) f[v] = m.position(v).x();
    const auto u = sharp_pp(m, geom, ops.d0 * f);
    for (int v = 0; v < m.num_vertices(); ++v)
        if (!m.is_boundary_vertex(v)) EXPECT_LT((u.row(v) - Eigen::RowVector3d(1, 0, 0)).norm(), 1e-2);
}

TEST(Sharp, CurvedSurfaceAgreesWithOracle)
{
    // Gradient of z on the unit sphere is e_z - z n; both reconstructions converge to it.
    std::vector<double> to_oracle, to_exact;
    for (int s : {3, 4}) {
        const auto m = generate_icosphere(s);
        const auto geom = vertex_geometry(m);
        const auto ops = DecOperators::build(m);
        Eigen::VectorXd f(m.num_vertices());
        VertexField exact(m.num_vertices(), 3);
        for (int v = 0; v < m.num_vertices(); ++v) {
            const Vec3 n = m.position(v).normalized();
            f[v] = m.position(v).z();
            exact.row(v) = (Vec3::UnitZ() - n.z() * n).transpose();
        }
        const Eigen::VectorXd alpha = ops.d0 * f;
        const auto u = sharp_pp(m, geom, alpha);
        to_oracle.push_back((u - least_squares_sharp(m, geom, alpha)).rowwise().norm().maxCoeff());
        to_exact.push_back((u - exact).rowwise().norm().maxCoeff());
        EXPECT_LT(tangency_residual(geom, u), 1e-12);
    }
    EXPECT_LT(to_oracle[1], 2e-2);
    EXPECT_LT(to_exact[1], 1e-2);
    EXPECT_LT(to_oracle[1], 0.6 * to_oracle[0]);
    EXPECT_LT(to_exact[1], 0.6 * to_exact[0]);
}

TEST(Sharp, JitteredMesh)
{
    const auto m = random_scan_mesh(13, 3);
    const auto geom = vertex_geometry(m);
    const auto ops = DecOperators::build(m);
    Eigen::VectorXd f(m.num_vertices());
    for (int v = 0; v < m.num_vertices(); ++v) f[v] = m.position(v).z();
    EXPECT_LT(tangency_residual(geom, sharp_pp(m, geom, ops.d0 * f)), 1e-12);
    EXPECT_EQ(sharp_pp(m, geom, Eigen::VectorXd::Zero(m.num_edges())).cwiseAbs().maxCoeff(), 0.0);
    EXPECT_THROW(sharp_pp(m, geom, Eigen::VectorXd::Zero(3)), Error);
}

TEST(Rotate, QuarterTurn)
{
    const auto m = generate_grid_delaunay(4, 4);
    const auto geom = vertex_geometry(m);
    VertexField e1 = VertexField::Zero(m.num_vertices(), 3);
    e1.col(0).setOnes();
    const auto r = rotate_tangent(geom, e1);
    for (int v = 0; v < m.num_vertices(); ++v) EXPECT_LT((r.row(v) - Eigen::RowVector3d(0, 1, 0)).norm(), 1e-15);

    const auto s = generate_icosphere(2);
    const auto sg = vertex_geometry(s);
    const auto f = random_tangent_field(sg, 3);
    const auto rr = rotate_tangent(sg, rotate_tangent(sg, f));
    EXPECT_LT((rr + f).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LT((rotate_tangent(sg, f).rowwise().norm() - f.rowwise().norm()).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Bases, CountsScalingAndTangency)
{
    const auto m = random_scan_mesh(4, 2);
    const auto geom = vertex_geometry(m);
    const auto ops = DecOperators::build(m);
    const auto basis = eigensolve(ops, 50);
    const auto d = diverging_basis(m, geom, ops, basis);
    const auto c = curling_basis(m, geom, ops, basis);
    EXPECT_EQ(d.count(), 50);
    EXPECT_EQ(c.count(), 50);
    EXPECT_EQ(d.modes.front(), 1);
    // d1 d0 f = 0 exactly on the unscaled integer route, and the scaled forms are star1-orthonormal.
    const Eigen::MatrixXd g = d.one_forms.transpose() * ops.star1.asDiagonal() * d.one_forms;
    EXPECT_LT((g - Eigen::MatrixXd::Identity(50, 50)).cwiseAbs().maxCoeff(), 1e-6);
    for (int n = 0; n < d.count(); ++n) {
        EXPECT_LT(tangency_residual(geom, d.field(n)), 1e-6);
        EXPECT_LT(tangency_residual(geom, c.field(n)), 1e-6);
    }
    EXPECT_THROW(diverging_basis(m, geom, ops, basis, 0), Error);
}

TEST(Bases, PointwiseOrthogonalOnFlatMesh)
{
    const auto m = generate_grid_delaunay(12, 9);
    const auto geom = vertex_geometry(m);
    const auto ops = DecOperators::build(m);
    const auto basis = eigensolve(ops, 30);
    const auto d = diverging_basis(m, geom, ops, basis);
    const auto c = curling_basis(m, geom, ops, basis);
    for (int n = 0; n < d.count(); ++n) {
        const auto a = d.field(n), b = c.field(n);
        for (int v = 0; v < m.num_vertices(); ++v) EXPECT_NEAR(a.row(v).dot(b.row(v)), 0.0, 1e-10);
    }
}

namespace {

/// Largest interior divergence of the re-integrated curling field over that of
/// the diverging field, per mode. `skip_rings` = 1 drops boundary vertices,
/// 2 also drops their neighbours.
std::vector<double> curl_divergence_ratio(const SimplicialComplex& m, int skip_rings)
{
    const auto geom = vertex_geometry(m);
    const auto ops = DecOperators::build(m);
    const auto basis = eigensolve(ops, 6);
    const auto c = curling_basis(m, geom, ops, basis);
    const auto d = diverging_basis(m, geom, ops, basis);
    std::vector<char> skip(m.num_vertices(), 0);
    for (int v : m.boundary_vertices()) skip[v] = 1;
    if (skip_rings > 1) {
        std::vector<char> ring = skip;
        for (const auto& ed : m.edges()) {
            if (skip[ed[0]] || skip[ed[1]]) ring[ed[0]] = ring[ed[1]] = 1;
        }
        skip = ring;
    }
    std::vector<double> out;
    for (int n = 0; n < c.count(); ++n) {
        const Eigen::VectorXd dc = divergence(ops, flat_midpoint(m, c.field(n)));
        const Eigen::VectorXd dd = divergence(ops, flat_midpoint(m, d.field(n)));
        double ic = 0.0, id = 0.0;
        for (int v = 0; v < m.num_vertices(); ++v) {
            if (skip[v]) continue;
            ic = std::max(ic, std::abs(dc[v]));
            id = std::max(id, std::abs(dd[v]));
        }
        out.push_back(ic / id);
    }
    return out;
}

} // namespace

TEST(Bases, CurlingFieldsAreNearlySolenoidal)
{
    // Target tolerance at every interior vertex. The first ring next to the
    // boundary reads one-sided sharp vectors and sits near 4e-3 at any
    // resolution, so this fails; see CurlingDivergenceAwayFromBoundary.
    const auto r = curl_divergence_ratio(generate_grid_delaunay(81, 81), 1);
    for (std::size_t n = 0; n < r.size(); ++n) EXPECT_LE(r[n], 1e-3) << "mode " << n;
}

TEST(Bases, CurlingDivergenceAwayFromBoundary)
{
    const auto r = curl_divergence_ratio(generate_grid_delaunay(81, 81), 2);
    for (std::size_t n = 0; n < r.size(); ++n) EXPECT_LE(r[n], 1e-3) << "mode " << n;
}

TEST(Bases, DirichletCurlingBoundaryFlux)
{
    // Target tolerance; measured flux is first order in h (about 1e-2 here).
    const auto m = generate_grid_delaunay(81, 81);
    const auto geom = vertex_geometry(m);
    const auto ops = DecOperators::build(m);
    const auto c = curling_basis(m, geom, ops, eigensolve_dirichlet(ops, m, 5), 0);
    const auto bn = boundary_normals(m, geom);
    for (int n = 0; n < c.count(); ++n) EXPECT_LE(relative_boundary_flux(bn, c.field(n)), 1e-3) << "mode " << n;
}

TEST(Bases, DirichletCurlingFluxConverges)
{
    // Lowest (simple) mode only; the next pair is degenerate and may rotate between resolutions.
    std::vector<double> flux;
    for (int n : {41, 81, 161}) {
        const auto m = generate_grid_delaunay(n, n);
        const auto geom = vertex_geometry(m);
        const auto ops = DecOperators::build(m);
        const auto c = curling_basis(m, geom, ops, eigensolve_dirichlet(ops, m, 0), 0);
        flux.push_back(relative_boundary_flux(boundary_normals(m, geom), c.field(0)));
    }
    EXPECT_LT(flux[1], 0.6 * flux[0]);
    EXPECT_LT(flux[2], 0.6 * flux[1]);
}

TEST(Bases, HarmonicFields)
{
    const auto grid = generate_grid_delaunay(5, 4);
    const auto h = harmonic_manual_flat(grid);
    ASSERT_EQ(h.cols(), 2);
    EXPECT_EQ(unstack(h.col(0)).col(0), Eigen::VectorXd::Ones(grid.num_vertices()));
    EXPECT_EQ(unstack(h.col(1)).col(1), Eigen::VectorXd::Ones(grid.num_vertices()));

    const auto s = generate_icosphere(2);
    const auto sh = harmonic_vertex_basis(s, vertex_geometry(s), harmonic_oneforms(hodge1_system(DecOperators::build(s))));
    EXPECT_EQ(sh.cols(), 0);

    const auto t = generate_torus(48, 16, 2.0, 1.0);
    const auto tg = vertex_geometry(t);
    const auto th = harmonic_vertex_basis(t, tg, harmonic_oneforms(hodge1_system(DecOperators::build(t))));
    ASSERT_EQ(th.cols(), 2);
    for (int k = 0; k < 2; ++k) {
        const auto f = unstack(th.col(k));
        EXPECT_LT(tangency_residual(tg, f), 1e-6);
        double inner = 0.0, outer = 0.0;
        for (int v = 0; v < t.num_vertices(); ++v) {
            const double rho = std::hypot(t.position(v).x(), t.position(v).y());
            if (rho < 1.2) inner = std::max(inner, f.row(v).norm());
            if (rho > 2.8) outer = std::max(outer, f.row(v).norm());
        }
        EXPECT_GT(inner, outer);
    }
}

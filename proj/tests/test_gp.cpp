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

struct Small
{
    SimplicialComplex mesh;
    VertexGeometry geom;
    DecOperators ops;
    VectorKernel kernel;
};

Small small_model(SimplicialComplex mesh, double sigma_h2 = 0.2)
{
    Small s{std::move(mesh), {}, {}, {}};
    s.geom = vertex_geometry(s.mesh);
    s.ops = DecOperators::build(s.mesh);
    const auto basis = eigensolve(s.ops, s.mesh.num_vertices() - 1);
    VectorBases b;
    b.num_vertices = s.mesh.num_vertices();
    b.diverging = diverging_basis(s.mesh, s.geom, s.ops, basis);
    b.curling = curling_basis(s.mesh, s.geom, s.ops, basis);
    b.harmonic = harmonic_manual_flat(s.mesh);
    KernelParams p;
    p.kappa_d = 0.3;
    p.kappa_c = 0.5;
    p.sigma_d2 = 0.6;
    p.sigma_c2 = 1.0;
    p.sigma_h2 = sigma_h2;
    s.kernel = vector_kernel(b, p, s.ops.mass_total());
    return s;
}

Observations random_obs(const Small& s, std::vector<int> ids, double noise, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd;
    VertexField vals(ids.size(), 3);
    for (auto& x : vals.reshaped()) x = nd(rng);
    return make_observations(s.geom, std::move(ids), vals, noise);
}

} // namespace

TEST(Observations, ProjectedAndValidated)
{
    const auto m = generate_icosphere(1);
    const auto g = vertex_geometry(m);
    VertexField vals(2, 3);
    vals << 1, 2, 3, -1, 0, 4;
    const auto obs = make_observations(g, {0, 5}, vals);
    for (int k = 0; k < 2; ++k) EXPECT_LT(std::abs(obs.values.row(k).dot(g.normals[obs.vertex_ids[k]].transpose())), 1e-12);
    EXPECT_THROW(make_observations(g, {0, 0}, vals), Error);
    EXPECT_THROW(make_observations(g, {0, 99}, vals), Error);
    EXPECT_THROW(make_observations(g, {0, 1}, vals, 0.0), Error);
}

TEST(Frames, EastNorthGeometry)
{
    const Vec3 n(1, 0, 0);  // equator, lon 0
    EXPECT_LT((uv_to_vector(n, 1, 0) - Vec3(0, 1, 0)).norm(), 1e-15);
    EXPECT_LT((uv_to_vector(n, 0, 1) - Vec3(0, 0, 1)).norm(), 1e-15);
    EXPECT_EQ(uv_to_vector(n, 0, 0).norm(), 0.0);
    const Vec3 m = Vec3(0.3, -0.5, 0.4).normalized();
    const Vec3 x = uv_to_vector(m, 0.7, -1.1);
    const auto uv = vector_to_uv(m, x);
    EXPECT_NEAR(uv[0], 0.7, 1e-12);
    EXPECT_NEAR(uv[1], -1.1, 1e-12);
    EXPECT_THROW(east_north_frame(Vec3(0, 0, 1)), Error);
}

TEST(LatLon, IndexLookupWrapsAndCollapsesPoles)
{
    const auto s = sphere_from_latlon_grid({-90, -45, 0, 45, 90}, {0, 90, 180, 270});
    const LatLonIndex index(s.vertex_latlon);
    EXPECT_EQ(index.find(0, 90), s.vertex_of(2, 1));
    EXPECT_EQ(index.find(0, -270), s.vertex_of(2, 1));
    EXPECT_EQ(index.find(0, 450), s.vertex_of(2, 1));
    EXPECT_EQ(index.find(90, 0), index.find(90, 123));
    EXPECT_EQ(index.find(10, 0), -1);
    const auto g = vertex_geometry(s.complex);
    const std::vector<LatLonRecord> recs{{0, 0, 1, 0}, {45, 90, 0, 2}};
    const auto obs = uv_to_ambient(g, index, recs);
    ASSERT_EQ(obs.size(), 2);
    const std::vector<LatLonRecord> bad{{10, 0, 1, 0}};
    try {
        uv_to_ambient(g, index, bad);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::UnmappedLocation);
    }
}

TEST(Posterior, MatchesDenseOracleOnSmallMesh)
{
    const auto s = small_model(generate_grid_delaunay(6, 5));
    const Eigen::MatrixXd k = s.kernel.dense();
    const auto obs = random_obs(s, {0, 4, 7, 12, 13, 19, 22, 28}, 1e-3, 5);
    const auto predict = all_vertices(s.mesh.num_vertices());
    const auto ref = dense_gp(k, obs.vertex_ids, obs.y(), obs.noise_variance, predict);
    for (const auto& post : {posterior(k, obs, predict), posterior(s.kernel, obs, predict)}) {
        EXPECT_LT((stacked(post.mean) - ref.mean).cwiseAbs().maxCoeff(), 1e-8);
        EXPECT_LT((post.covariance - ref.cov).cwiseAbs().maxCoeff(), 1e-8);
        EXPECT_NEAR(post.nll, ref.nll, 1e-8 * std::max(1.0, std::abs(ref.nll)));
    }
    EXPECT_NEAR(nll(k, obs), ref.nll, 1e-8 * std::max(1.0, std::abs(ref.nll)));
}

TEST(Posterior, NoObservationsGivesPrior)
{
    const auto s = small_model(generate_grid_delaunay(4, 4));
    Observations none;
    none.values.resize(0, 3);
    const auto post = posterior(s.kernel, none, all_vertices(16));
    EXPECT_EQ(post.mean.cwiseAbs().maxCoeff(), 0.0);
    EXPECT_LT((post.covariance - s.kernel.dense()).cwiseAbs().maxCoeff(), 1e-14);
    EXPECT_EQ(post.nll, 0.0);
}

TEST(Posterior, InterpolatesAtLowNoise)
{
    const auto s = small_model(generate_grid_delaunay(6, 6));
    const auto obs = random_obs(s, {3, 10, 20, 33}, 1e-10, 8);
    const auto post = posterior(s.kernel, obs, obs.vertex_ids);
    EXPECT_LE((post.mean - obs.values).norm(), 1e-4 * obs.values.norm());
}

TEST(Posterior, VarianceReductionAndLinearity)
{
    const auto s = small_model(generate_grid_delaunay(7, 6));
    const Eigen::VectorXd prior = s.kernel.dense().diagonal();
    auto a = random_obs(s, {1, 9, 15, 30, 40}, 1e-2, 1);
    auto b = random_obs(s, {1, 9, 15, 30, 40}, 1e-2, 2);
    const auto predict = all_vertices(s.mesh.num_vertices());
    const auto pa = posterior(s.kernel, a, predict);
    EXPECT_LE((pa.variance - prior).maxCoeff(), 1e-8);
    const auto pb = posterior(s.kernel, b, predict);
    Observations c = a;
    c.values = 2.0 * a.values - 3.0 * b.values;
    const auto pc = posterior(s.kernel, c, predict);
    EXPECT_LT((pc.mean - (2.0 * pa.mean - 3.0 * pb.mean)).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Nll, ScalarHandValue)
{
    // One observed component: prior variance 1, noise 1, y = 2.
    Eigen::MatrixXd b(1, 1);
    b << 1.0;
    Eigen::MatrixXd y(1, 1);
    y << 2.0;
    const double expected = 0.5 * (4.0 / 2.0) + 0.5 * std::log(2.0) + 0.5 * std::log(2.0 * std::numbers::pi);
    EXPECT_NEAR(nll_lowrank(b, y, 1.0), expected, 1e-14);
    // Woodbury route: rank 1 factor with 3 rows against the dense log density.
    Eigen::MatrixXd f(3, 1);
    f << 0.5, -1.0, 2.0;
    Eigen::MatrixXd y3(3, 2);
    y3 << 0.1, 0.3, -0.4, 1.0, 2.0, 0.0;
    Eigen::MatrixXd cov = f * f.transpose();
    cov.diagonal().array() += 0.2;
    double dense = 0.0;
    for (int c = 0; c < 2; ++c) {
        dense += 0.5 * y3.col(c).dot(cov.inverse() * y3.col(c)) + 0.5 * std::log(cov.determinant()) +
                 1.5 * std::log(2.0 * std::numbers::pi);
    }
    EXPECT_NEAR(nll_lowrank(f, y3, 0.2), dense, 1e-12);
}

TEST(Nll, UnitSystemZeroData)
{
    const int m = 6;
    Eigen::MatrixXd b = Eigen::MatrixXd::Identity(m, m);
    const double noise = 1e-12;
    EXPECT_NEAR(nll_lowrank(b, Eigen::MatrixXd::Zero(m, 1), noise), 0.5 * m * std::log(2.0 * std::numbers::pi), 1e-10);
}

TEST(Cholesky, JitterEscalation)
{
    Eigen::MatrixXd a(2, 2);
    a << 1.0, 1.0, 1.0, 1.0;  // singular
    EXPECT_NO_THROW(robust_cholesky(a));
    Eigen::MatrixXd neg = -Eigen::MatrixXd::Identity(3, 3);
    try {
        robust_cholesky(neg);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::SingularSystem);
    }
}

TEST(Sampling, DeterministicAndCalibrated)
{
    const auto s = small_model(generate_grid_delaunay(5, 4), 0.0);
    ASSERT_EQ(s.mesh.num_vertices(), 20);
    const auto a = sample_prior(s.kernel, 3, 42);
    const auto b = sample_prior(s.kernel, 3, 42);
    for (int k = 0; k < 3; ++k) EXPECT_EQ(a[k], b[k]);

    const int n = 10000;
    const auto draws = sample_prior(s.kernel, n, 7);
    const Eigen::MatrixXd k = s.kernel.dense();
    Eigen::MatrixXd emp = Eigen::MatrixXd::Zero(k.rows(), k.cols());
    for (const auto& d : draws) {
        const Eigen::VectorXd x = stacked(d);
        emp.noalias() += x * x.transpose();
    }
    emp /= n;
    EXPECT_LT((emp - k).norm(), 0.05 * k.norm());

    // Posterior sampler against the posterior covariance.
    const auto obs = random_obs(s, {0, 7, 13}, 1e-2, 4);
    const auto post = posterior(s.kernel, obs, all_vertices(20));
    const auto ps = sample(post, n, 11);
    Eigen::MatrixXd pc = Eigen::MatrixXd::Zero(60, 60);
    for (const auto& d : ps) {
        const Eigen::VectorXd x = stacked(d) - stacked(post.mean);
        pc.noalias() += x * x.transpose();
    }
    pc /= n;
    EXPECT_LT((pc - post.covariance).norm(), 0.05 * post.covariance.norm());
}

TEST(Sampling, ZeroCovarianceReturnsMean)
{
    Eigen::VectorXd mean(4);
    mean << 1, 2, 3, 4;
    for (const auto& s : sample_gaussian(mean, Eigen::MatrixXd::Zero(4, 4), 3, 1)) EXPECT_EQ(s, mean);
}

TEST(NoFlux, ProjectionProperties)
{
    const auto m = annulus(15);
    const auto g = vertex_geometry(m);
    std::mt19937_64 rng(3);
    std::normal_distribution<double> nd;
    VertexField f(m.num_vertices(), 3);
    for (auto& x : f.reshaped()) x = nd(rng);
    f.col(2).setZero();
    const auto bn = boundary_normals(m, g);
    const auto fixed = enforce_no_flux(bn, f);
    EXPECT_LE(boundary_flux(bn, fixed).cwiseAbs().maxCoeff(), 4 * std::numeric_limits<double>::epsilon() * f.cwiseAbs().maxCoeff());
    for (int v = 0; v < m.num_vertices(); ++v)
        if (!m.is_boundary_vertex(v)) EXPECT_TRUE((fixed.row(v).array() == f.row(v).array()).all());
    EXPECT_LT((enforce_no_flux(bn, fixed) - fixed).cwiseAbs().maxCoeff(), 1e-12);
    // Outer-rim normals point away from the square's center.
    for (std::size_t k = 0; k < bn.vertices.size(); ++k) {
        const Vec3 x = m.position(bn.vertices[k]) - Vec3(0.5, 0.5, 0);
        if (x.cwiseAbs().maxCoeff() > 0.49) EXPECT_GT(bn.normals[k].dot(x), 0.0);
        else EXPECT_LT(bn.normals[k].dot(x), 0.0);
    }
    const auto sphere = generate_icosphere(1);
    try {
        enforce_no_flux(sphere, vertex_geometry(sphere), VertexField::Zero(sphere.num_vertices(), 3));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::NoBoundary);
    }
}

TEST(Metrics, Values)
{
    VertexField t(4, 3);
    t << 1, 0, 0, 0, 2, 0, 0, 0, 3, 1, 1, 1;
    EXPECT_EQ(metrics(t, t).mse, 0.0);
    VertexField p = t;
    p.rowwise() += Eigen::RowVector3d(0.5, -1.0, 2.0);
    EXPECT_NEAR(metrics(p, t).mse, 0.25 + 1.0 + 4.0, 1e-14);
    const auto m = metrics(t, t);
    const VertexField scaled = t / m.mean_norm;
    EXPECT_NEAR(metrics(scaled, scaled).mean_norm, 1.0, 1e-12);
    EXPECT_EQ(metrics(p, t, {1, 0, 0, 0}).count, 1);
    try {
        metrics(p, t, {0, 0, 0, 0});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::EmptyMask);
    }
}

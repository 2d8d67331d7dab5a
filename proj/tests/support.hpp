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

// Independent reference computations used by the unit and acceptance tests.

#include <meshvec.hpp>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>
#include <vector>

namespace meshvec::testing {

/// Icosphere with radial jitter, shuffled vertex ids and rotated face
/// corners; about the size of a decimated scan.
inline SimplicialComplex random_scan_mesh(std::uint64_t seed, int subdivisions = 4)
{
    const auto base = generate_icosphere(subdivisions, 1.0);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> jitter(-0.05, 0.05);
    const int nv = base.num_vertices();
    std::vector<int> perm(nv);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<Vec3> pos(nv);
    for (int v = 0; v < nv; ++v) pos[perm[v]] = base.position(v) * (1.0 + jitter(rng));
    std::vector<Face> faces;
    for (const auto& f : base.faces()) {
        const int r = static_cast<int>(rng() % 3);
        faces.push_back({perm[f[r]], perm[f[(r + 1) % 3]], perm[f[(r + 2) % 3]]});
    }
    std::shuffle(faces.begin(), faces.end(), rng);
    return build_complex(std::move(pos), std::move(faces));
}

/// Unit square grid with a square hole in the middle (first Betti number 1).
inline SimplicialComplex annulus(int n = 31)
{
    const std::vector<Vec2> hole{{0.35, 0.35}, {0.65, 0.35}, {0.65, 0.65}, {0.35, 0.65}};
    return generate_grid_delaunay(n, n, {}, hole);
}

/// Applies a vertex permutation (new id of old vertex v is perm[v]).
inline SimplicialComplex permuted(const SimplicialComplex& mesh, const std::vector<int>& perm)
{
    std::vector<Vec3> pos(mesh.num_vertices());
    for (int v = 0; v < mesh.num_vertices(); ++v) pos[perm[v]] = mesh.position(v);
    std::vector<Face> faces;
    for (const auto& f : mesh.faces()) faces.push_back({perm[f[0]], perm[f[1]], perm[f[2]]});
    return build_complex(std::move(pos), std::move(faces));
}

/// Eigenvalues through Eigen's own solver (no LAPACK).
inline Eigen::VectorXd reference_eigenvalues(const Eigen::MatrixXd& a)
{
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (a + a.transpose()), Eigen::EigenvaluesOnly);
    return es.eigenvalues();
}

/// min eigenvalue / max eigenvalue; PSD within tol means >= -tol.
inline double psd_ratio(const Eigen::MatrixXd& a)
{
    const auto ev = reference_eigenvalues(a);
    const double top = std::max(ev.maxCoeff(), 1e-300);
    return ev.minCoeff() / top;
}

/// GP conditioning written out with explicit inverses.
struct DenseGp
{
    Eigen::VectorXd mean;
    Eigen::MatrixXd cov;
    double nll = 0.0;
};

inline DenseGp dense_gp(const Eigen::MatrixXd& k, const std::vector<int>& obs_vertices, const Eigen::VectorXd& y,
                        double noise, const std::vector<int>& predict_vertices)
{
    auto rows = [](const std::vector<int>& vs) {
        std::vector<Eigen::Index> r;
        for (int v : vs)
            for (int c = 0; c < 3; ++c) r.push_back(3 * v + c);
        return r;
    };
    const auto o = rows(obs_vertices), p = rows(predict_vertices);
    const Eigen::Index m = static_cast<Eigen::Index>(o.size());
    Eigen::MatrixXd a(m, m), kpo(p.size(), m), kpp(p.size(), p.size());
    for (Eigen::Index i = 0; i < m; ++i)
        for (Eigen::Index j = 0; j < m; ++j) a(i, j) = k(o[i], o[j]) + (i == j ? noise : 0.0);
    for (std::size_t i = 0; i < p.size(); ++i)
        for (Eigen::Index j = 0; j < m; ++j) kpo(i, j) = k(p[i], o[j]);
    for (std::size_t i = 0; i < p.size(); ++i)
        for (std::size_t j = 0; j < p.size(); ++j) kpp(i, j) = k(p[i], p[j]);
    Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
    const Eigen::MatrixXd inv = lu.inverse();
    DenseGp g;
    g.mean = kpo * inv * y;
    g.cov = kpp - kpo * inv * kpo.transpose();
    double logdet = 0.0;
    const Eigen::MatrixXd u = lu.matrixLU().triangularView<Eigen::Upper>();
    for (Eigen::Index i = 0; i < m; ++i) logdet += std::log(std::abs(u(i, i)));
    g.nll = 0.5 * y.dot(inv * y) + 0.5 * logdet + 0.5 * m * std::log(2.0 * std::numbers::pi);
    return g;
}

/// Per-vertex least-squares tangent vector u minimizing
/// sum_e (u . (x_j - x_i) - alpha_e)^2 over the one-ring edges.
inline VertexField least_squares_sharp(const SimplicialComplex& mesh, const VertexGeometry& geom,
                                       const Eigen::VectorXd& alpha)
{
    VertexField out(mesh.num_vertices(), 3);
    for (int v = 0; v < mesh.num_vertices(); ++v) {
        const Vec3 n = geom.normals[v];
        Vec3 t1 = n.unitOrthogonal();
        Vec3 t2 = n.cross(t1);
        Eigen::MatrixXd a(mesh.vertex_edges(v).size(), 2);
        Eigen::VectorXd b(a.rows());
        int r = 0;
        for (int e : mesh.vertex_edges(v)) {
            const auto& ed = mesh.edges()[e];
            const Vec3 d = mesh.position(ed[1]) - mesh.position(ed[0]);
            a(r, 0) = d.dot(t1);
            a(r, 1) = d.dot(t2);
            b[r] = alpha[e];
            ++r;
        }
        const Eigen::Vector2d c = a.colPivHouseholderQr().solve(b);
        out.row(v) = (c[0] * t1 + c[1] * t2).transpose();
    }
    return out;
}

inline double pearson(const Eigen::VectorXd& a, const Eigen::VectorXd& b)
{
    const Eigen::VectorXd x = a.array() - a.mean();
    const Eigen::VectorXd y = b.array() - b.mean();
    return x.dot(y) / (x.norm() * y.norm());
}

} // namespace meshvec::testing

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
#include <Eigen/Geometry>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace meshvec {

using Vec3 = Eigen::Vector3d;
using Face = std::array<int, 3>;
using Edge = std::array<int, 2>;

/// Embedded, oriented triangle mesh (2-manifold, possibly with boundary).
///
/// Edges are stored with canonical orientation (low vertex index first) and
/// sorted lexicographically, so edge numbering depends only on connectivity.
/// Instances are immutable once built.
class SimplicialComplex
{
public:
    /// Relative area threshold below which a face counts as degenerate.
    static constexpr double degeneracy_tolerance = 1e-12;

    SimplicialComplex() = default;

    static SimplicialComplex build(std::vector<Vec3> positions, std::vector<Face> faces);

    int num_vertices() const { return static_cast<int>(m_positions.size()); }
    int num_edges() const { return static_cast<int>(m_edges.size()); }
    int num_faces() const { return static_cast<int>(m_faces.size()); }
    int euler_characteristic() const { return num_vertices() - num_edges() + num_faces(); }

    const std::vector<Vec3>& positions() const { return m_positions; }
    const Vec3& position(int v) const { return m_positions[v]; }
    const std::vector<Face>& faces() const { return m_faces; }
    const std::vector<Edge>& edges() const { return m_edges; }

    /// Incident faces per edge; the second slot is -1 on boundary edges.
    const std::vector<std::array<int, 2>>& edge_faces() const { return m_edge_faces; }
    /// Edge indices of face sides (v0,v1), (v1,v2), (v2,v0).
    const std::vector<std::array<int, 3>>& face_edges() const { return m_face_edges; }
    /// +1 when the face traverses the side low-to-high, -1 otherwise.
    const std::vector<std::array<int, 3>>& face_edge_signs() const { return m_face_edge_signs; }

    std::span<const int> vertex_faces(int v) const
    {
        return {m_vf_index.data() + m_vf_offset[v], m_vf_index.data() + m_vf_offset[v + 1]};
    }
    std::span<const int> vertex_edges(int v) const
    {
        return {m_ve_index.data() + m_ve_offset[v], m_ve_index.data() + m_ve_offset[v + 1]};
    }

    const std::vector<int>& boundary_edges() const { return m_boundary_edges; }
    const std::vector<int>& boundary_vertices() const { return m_boundary_vertices; }
    bool is_boundary_vertex(int v) const { return m_is_boundary_vertex[v] != 0; }
    bool is_boundary_edge(int e) const { return m_edge_faces[e][1] < 0; }
    bool has_boundary() const { return !m_boundary_edges.empty(); }

    /// Index of the edge joining a and b, or -1.
    int find_edge(int a, int b) const
    {
        auto it = m_edge_lookup.find(edge_key(a, b));
        return it == m_edge_lookup.end() ? -1 : it->second;
    }

    /// Closed boundary loops, each listed in the orientation induced by the faces
    /// (interior on the left).
    std::vector<std::vector<int>> boundary_loops() const;

private:
    static std::uint64_t edge_key(int a, int b)
    {
        if (a > b) std::swap(a, b);
        return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint32_t>(b);
    }

    std::vector<Vec3> m_positions;
    std::vector<Face> m_faces;
    std::vector<Edge> m_edges;
    std::vector<std::array<int, 2>> m_edge_faces;
    std::vector<std::array<int, 3>> m_face_edges;
    std::vector<std::array<int, 3>> m_face_edge_signs;
    std::vector<int> m_vf_offset, m_vf_index;
    std::vector<int> m_ve_offset, m_ve_index;
    std::vector<int> m_boundary_edges;
    std::vector<int> m_boundary_vertices;
    std::vector<char> m_is_boundary_vertex;
    std::unordered_map<std::uint64_t, int> m_edge_lookup;
};

inline SimplicialComplex build_complex(std::vector<Vec3> positions, std::vector<Face> faces)
{
    return SimplicialComplex::build(std::move(positions), std::move(faces));
}

inline double triangle_area(const Vec3& a, const Vec3& b, const Vec3& c)
{
    return 0.5 * (b - a).cross(c - a).norm();
}

/// Interior angle at `apex` of the triangle (apex, b, c).
inline double corner_angle(const Vec3& apex, const Vec3& b, const Vec3& c)
{
    const Vec3 u = b - apex;
    const Vec3 w = c - apex;
    return std::atan2(u.cross(w).norm(), u.dot(w));
}

/// Cotangent of the interior angle at `apex`.
inline double corner_cot(const Vec3& apex, const Vec3& b, const Vec3& c)
{
    const Vec3 u = b - apex;
    const Vec3 w = c - apex;
    return u.dot(w) / u.cross(w).norm();
}

inline SimplicialComplex SimplicialComplex::build(std::vector<Vec3> positions, std::vector<Face> faces)
{
    const int nv = static_cast<int>(positions.size());
    if (nv < 3) fail(ErrorCode::InvalidInput, "a complex needs at least 3 vertices");
    if (faces.empty()) fail(ErrorCode::InvalidInput, "a complex needs at least one face");

    for (std::size_t f = 0; f < faces.size(); ++f) {
        const Face& t = faces[f];
        for (int v : t) {
            if (v < 0 || v >= nv) {
                fail(ErrorCode::InvalidInput,
                     "face " + std::to_string(f) + " references vertex " + std::to_string(v) +
                         " out of range");
            }
        }
        if (t[0] == t[1] || t[1] == t[2] || t[2] == t[0]) {
            fail(ErrorCode::DegenerateFace, "face " + std::to_string(f) + " repeats a vertex");
        }
    }

    double mean_area = 0.0;
    std::vector<double> areas(faces.size());
    for (std::size_t f = 0; f < faces.size(); ++f) {
        const Face& t = faces[f];
        areas[f] = triangle_area(positions[t[0]], positions[t[1]], positions[t[2]]);
        mean_area += areas[f];
    }
    mean_area /= static_cast<double>(faces.size());
    for (std::size_t f = 0; f < faces.size(); ++f) {
        if (!(areas[f] > degeneracy_tolerance * mean_area)) {
            fail(ErrorCode::DegenerateFace, "face " + std::to_string(f) + " has (near) zero area");
        }
    }

    SimplicialComplex c;
    c.m_positions = std::move(positions);
    c.m_faces = std::move(faces);
    const int nf = c.num_faces();

    std::vector<Edge> all;
    all.reserve(3 * c.m_faces.size());
    for (const Face& t : c.m_faces) {
        for (int k = 0; k < 3; ++k) {
            int a = t[k], b = t[(k + 1) % 3];
            all.push_back({std::min(a, b), std::max(a, b)});
        }
    }
    std::sort(all.begin(), all.end());
    all.erase(std::unique(all.begin(), all.end()), all.end());
    c.m_edges = std::move(all);
    const int ne = c.num_edges();
    c.m_edge_lookup.reserve(ne * 2);
    for (int e = 0; e < ne; ++e) c.m_edge_lookup.emplace(edge_key(c.m_edges[e][0], c.m_edges[e][1]), e);

    c.m_edge_faces.assign(ne, {-1, -1});
    c.m_face_edges.resize(nf);
    c.m_face_edge_signs.resize(nf);
    std::vector<std::array<int, 2>> edge_face_sign(ne, {0, 0});
    for (int f = 0; f < nf; ++f) {
        const Face& t = c.m_faces[f];
        for (int k = 0; k < 3; ++k) {
            const int a = t[k], b = t[(k + 1) % 3];
            const int e = c.m_edge_lookup.at(edge_key(a, b));
            const int sign = a < b ? 1 : -1;
            c.m_face_edges[f][k] = e;
            c.m_face_edge_signs[f][k] = sign;
            auto& slots = c.m_edge_faces[e];
            if (slots[0] < 0) {
                slots[0] = f;
                edge_face_sign[e][0] = sign;
            } else if (slots[1] < 0) {
                slots[1] = f;
                edge_face_sign[e][1] = sign;
            } else {
                fail(ErrorCode::NonManifoldEdge,
                     "edge (" + std::to_string(c.m_edges[e][0]) + "," + std::to_string(c.m_edges[e][1]) +
                         ") has more than two incident faces");
            }
        }
    }
    for (int e = 0; e < ne; ++e) {
        if (c.m_edge_faces[e][1] >= 0 && edge_face_sign[e][0] == edge_face_sign[e][1]) {
            fail(ErrorCode::InconsistentOrientation,
                 "faces " + std::to_string(c.m_edge_faces[e][0]) + " and " +
                     std::to_string(c.m_edge_faces[e][1]) + " traverse a shared edge in the same direction");
        }
    }

    // Vertex -> face and vertex -> edge adjacency in CSR form.
    c.m_vf_offset.assign(nv + 1, 0);
    for (const Face& t : c.m_faces)
        for (int v : t) ++c.m_vf_offset[v + 1];
    for (int v = 0; v < nv; ++v) c.m_vf_offset[v + 1] += c.m_vf_offset[v];
    c.m_vf_index.resize(c.m_vf_offset[nv]);
    {
        std::vector<int> fill(c.m_vf_offset.begin(), c.m_vf_offset.end() - 1);
        for (int f = 0; f < nf; ++f)
            for (int v : c.m_faces[f]) c.m_vf_index[fill[v]++] = f;
    }
    c.m_ve_offset.assign(nv + 1, 0);
    for (const Edge& e : c.m_edges) {
        ++c.m_ve_offset[e[0] + 1];
        ++c.m_ve_offset[e[1] + 1];
    }
    for (int v = 0; v < nv; ++v) c.m_ve_offset[v + 1] += c.m_ve_offset[v];
    c.m_ve_index.resize(c.m_ve_offset[nv]);
    {
        std::vector<int> fill(c.m_ve_offset.begin(), c.m_ve_offset.end() - 1);
        for (int e = 0; e < ne; ++e) {
            c.m_ve_index[fill[c.m_edges[e][0]]++] = e;
            c.m_ve_index[fill[c.m_edges[e][1]]++] = e;
        }
    }
    for (int v = 0; v < nv; ++v) {
        if (c.m_vf_offset[v + 1] == c.m_vf_offset[v]) {
            fail(ErrorCode::IsolatedVertex, "vertex " + std::to_string(v) + " belongs to no face");
        }
    }

    c.m_is_boundary_vertex.assign(nv, 0);
    std::vector<int> boundary_degree(nv, 0);
    for (int e = 0; e < ne; ++e) {
        if (c.m_edge_faces[e][1] < 0) {
            c.m_boundary_edges.push_back(e);
            for (int v : c.m_edges[e]) {
                c.m_is_boundary_vertex[v] = 1;
                ++boundary_degree[v];
            }
        }
    }
    for (int v = 0; v < nv; ++v) {
        if (c.m_is_boundary_vertex[v]) {
            if (boundary_degree[v] != 2) {
                fail(ErrorCode::NonManifoldVertex,
                     "boundary vertex " + std::to_string(v) + " touches " +
                         std::to_string(boundary_degree[v]) + " boundary edges");
            }
            c.m_boundary_vertices.push_back(v);
        }
    }
    return c;
}

inline std::vector<std::vector<int>> SimplicialComplex::boundary_loops() const
{
    // Directed boundary edge a->b as traversed by its single face.
    std::unordered_map<int, int> next;
    for (int e : m_boundary_edges) {
        const int f = m_edge_faces[e][0];
        for (int k = 0; k < 3; ++k) {
            if (m_face_edges[f][k] == e) {
                next[m_faces[f][k]] = m_faces[f][(k + 1) % 3];
                break;
            }
        }
    }
    std::vector<std::vector<int>> loops;
    std::vector<char> seen(num_vertices(), 0);
    for (int start : m_boundary_vertices) {
        if (seen[start]) continue;
        std::vector<int> loop;
        int v = start;
        while (!seen[v]) {
            seen[v] = 1;
            loop.push_back(v);
            v = next.at(v);
        }
        loops.push_back(std::move(loop));
    }
    return loops;
}

/// Per-vertex and per-face geometry derived from the embedding.
struct VertexGeometry
{
    std::vector<Vec3> normals;          ///< angle-weighted unit vertex normals
    Eigen::VectorXd dual_areas;         ///< barycentric dual areas
    double total_area = 0.0;
    std::vector<Vec3> face_normals;
    Eigen::VectorXd face_areas;
    std::vector<std::array<double, 3>> corner_angles;  ///< interior angle at each face corner
};

inline VertexGeometry vertex_geometry(const SimplicialComplex& mesh)
{
    const int nv = mesh.num_vertices();
    const int nf = mesh.num_faces();
    VertexGeometry g;
    g.normals.assign(nv, Vec3::Zero());
    g.dual_areas = Eigen::VectorXd::Zero(nv);
    g.face_normals.resize(nf);
    g.face_areas.resize(nf);
    g.corner_angles.resize(nf);

    const auto& x = mesh.positions();
    for (int f = 0; f < nf; ++f) {
        const Face& t = mesh.faces()[f];
        const Vec3 cr = (x[t[1]] - x[t[0]]).cross(x[t[2]] - x[t[0]]);
        const double area = 0.5 * cr.norm();
        g.face_areas[f] = area;
        g.face_normals[f] = cr.normalized();
        g.total_area += area;
        for (int k = 0; k < 3; ++k) {
            const int v = t[k];
            const double angle = corner_angle(x[v], x[t[(k + 1) % 3]], x[t[(k + 2) % 3]]);
            g.corner_angles[f][k] = angle;
            g.normals[v] += angle * g.face_normals[f];
            g.dual_areas[v] += area / 3.0;
        }
    }
    for (int v = 0; v < nv; ++v) {
        const double len = g.normals[v].norm();
        if (!(len > 1e-12)) fail(ErrorCode::ZeroNormal, "vertex " + std::to_string(v) + " has a vanishing normal");
        g.normals[v] /= len;
    }
    return g;
}

} // namespace meshvec

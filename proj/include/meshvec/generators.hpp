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

#include <cmath>
#include <map>
#include <numbers>
#include <optional>
#include <queue>
#include <unordered_map>
#include <vector>

namespace meshvec {

using Vec2 = Eigen::Vector2d;

// ---------------------------------------------------------------------------
// Icosphere
// ---------------------------------------------------------------------------

/// Icosahedron refined `subdivisions` times; every refinement level projects
/// midpoints back onto the sphere.
inline SimplicialComplex generate_icosphere(int subdivisions, double radius = 1.0)
{
    if (subdivisions < 0) fail(ErrorCode::InvalidInput, "subdivisions must be >= 0");
    if (!(radius > 0.0)) fail(ErrorCode::InvalidInput, "radius must be positive");

    const double t = (1.0 + std::sqrt(5.0)) / 2.0;
    std::vector<Vec3> x = {
        {-1, t, 0}, {1, t, 0}, {-1, -t, 0}, {1, -t, 0},
        {0, -1, t}, {0, 1, t}, {0, -1, -t}, {0, 1, -t},
        {t, 0, -1}, {t, 0, 1}, {-t, 0, -1}, {-t, 0, 1},
    };
    for (auto& p : x) p.normalize();
    std::vector<Face> faces = {
        {0, 11, 5}, {0, 5, 1}, {0, 1, 7}, {0, 7, 10}, {0, 10, 11},
        {1, 5, 9}, {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
        {3, 9, 4}, {3, 4, 2}, {3, 2, 6}, {3, 6, 8}, {3, 8, 9},
        {4, 9, 5}, {2, 4, 11}, {6, 2, 10}, {8, 6, 7}, {9, 8, 1},
    };

    for (int level = 0; level < subdivisions; ++level) {
        std::unordered_map<std::uint64_t, int> midpoint;
        auto mid = [&](int a, int b) {
            const std::uint64_t key = (static_cast<std::uint64_t>(std::min(a, b)) << 32) |
                                      static_cast<std::uint32_t>(std::max(a, b));
            auto it = midpoint.find(key);
            if (it != midpoint.end()) return it->second;
            x.push_back((x[a] + x[b]).normalized());
            const int id = static_cast<int>(x.size()) - 1;
            midpoint.emplace(key, id);
            return id;
        };
        std::vector<Face> refined;
        refined.reserve(faces.size() * 4);
        for (const Face& f : faces) {
            const int ab = mid(f[0], f[1]);
            const int bc = mid(f[1], f[2]);
            const int ca = mid(f[2], f[0]);
            refined.push_back({f[0], ab, ca});
            refined.push_back({f[1], bc, ab});
            refined.push_back({f[2], ca, bc});
            refined.push_back({ab, bc, ca});
        }
        faces = std::move(refined);
    }
    for (auto& p : x) p = radius * p.normalized();
    return build_complex(std::move(x), std::move(faces));
}

// ---------------------------------------------------------------------------
// Torus
// ---------------------------------------------------------------------------

/// Torus of revolution about the z axis with `major_sections` rings of
/// `minor_sections` vertices each; faces are oriented outward.
inline SimplicialComplex generate_torus(int major_sections, int minor_sections, double major_radius,
                                        double minor_radius)
{
    if (major_sections < 3 || minor_sections < 3) fail(ErrorCode::InvalidInput, "torus needs >= 3 sections");
    if (!(major_radius > minor_radius && minor_radius > 0.0)) {
        fail(ErrorCode::InvalidInput, "torus radii must satisfy R > r > 0");
    }
    const double two_pi = 2.0 * std::numbers::pi;
    std::vector<Vec3> x;
    x.reserve(static_cast<std::size_t>(major_sections) * minor_sections);
    for (int i = 0; i < major_sections; ++i) {
        const double phi = two_pi * i / major_sections;
        for (int j = 0; j < minor_sections; ++j) {
            const double theta = two_pi * j / minor_sections;
            const double rho = major_radius + minor_radius * std::cos(theta);
            x.emplace_back(rho * std::cos(phi), rho * std::sin(phi), minor_radius * std::sin(theta));
        }
    }
    auto id = [&](int i, int j) { return (i % major_sections) * minor_sections + (j % minor_sections); };
    std::vector<Face> faces;
    faces.reserve(2 * x.size());
    for (int i = 0; i < major_sections; ++i) {
        for (int j = 0; j < minor_sections; ++j) {
            const int a = id(i, j), b = id(i + 1, j), c = id(i + 1, j + 1), d = id(i, j + 1);
            faces.push_back({a, b, c});
            faces.push_back({a, c, d});
        }
    }
    return build_complex(std::move(x), std::move(faces));
}

// ---------------------------------------------------------------------------
// Planar grids
// ---------------------------------------------------------------------------

struct Bounds2
{
    double xmin = 0.0, xmax = 1.0, ymin = 0.0, ymax = 1.0;
};

/// Even-odd point-in-polygon test; points on the rim count as outside.
inline bool point_in_polygon(const Vec2& p, const std::vector<Vec2>& polygon)
{
    bool inside = false;
    const std::size_t n = polygon.size();
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
        const Vec2& a = polygon[i];
        const Vec2& b = polygon[j];
        // on-segment check
        const Vec2 ab = b - a, ap = p - a;
        const double cross = ab.x() * ap.y() - ab.y() * ap.x();
        if (std::abs(cross) <= 1e-12 * ab.norm() && ap.dot(p - b) <= 0.0) return false;
        if ((a.y() > p.y()) != (b.y() > p.y())) {
            const double xcross = a.x() + (p.y() - a.y()) * (b.x() - a.x()) / (b.y() - a.y());
            if (p.x() < xcross) inside = !inside;
        }
    }
    return inside;
}

namespace detail {

/// Drops unused vertices (keeping relative order) and re-indexes faces.
inline SimplicialComplex compact_and_build(const std::vector<Vec3>& x, std::vector<Face> faces)
{
    std::vector<int> remap(x.size(), -1);
    for (const Face& f : faces)
        for (int v : f) remap[v] = 0;
    std::vector<Vec3> kept;
    for (std::size_t v = 0; v < x.size(); ++v) {
        if (remap[v] == 0) {
            remap[v] = static_cast<int>(kept.size());
            kept.push_back(x[v]);
        }
    }
    for (Face& f : faces)
        for (int& v : f) v = remap[v];
    return build_complex(std::move(kept), std::move(faces));
}

} // namespace detail

/// Triangulated nx-by-ny grid over `bounds` at z = 0.
///
/// Each cell is split along its (i,j)-(i+1,j+1) diagonal; the four corners of
/// a rectangular cell are cocircular, so this is a Delaunay triangulation. An
/// optional polygon removes every triangle touching its interior; the rim of
/// the removed region (snapped to grid vertices) becomes an interior boundary.
inline SimplicialComplex generate_grid_delaunay(int nx, int ny, const Bounds2& bounds = {},
                                                const std::optional<std::vector<Vec2>>& hole = std::nullopt)
{
    if (nx < 2 || ny < 2) fail(ErrorCode::InvalidInput, "grid needs nx, ny >= 2");
    if (!(bounds.xmax > bounds.xmin && bounds.ymax > bounds.ymin)) {
        fail(ErrorCode::InvalidInput, "grid bounds are empty");
    }
    std::vector<Vec3> x;
    x.reserve(static_cast<std::size_t>(nx) * ny);
    for (int j = 0; j < ny; ++j) {
        const double y = bounds.ymin + (bounds.ymax - bounds.ymin) * j / (ny - 1);
        for (int i = 0; i < nx; ++i) {
            x.emplace_back(bounds.xmin + (bounds.xmax - bounds.xmin) * i / (nx - 1), y, 0.0);
        }
    }
    auto id = [nx](int i, int j) { return j * nx + i; };
    std::vector<Face> faces;
    for (int j = 0; j + 1 < ny; ++j) {
        for (int i = 0; i + 1 < nx; ++i) {
            const int a = id(i, j), b = id(i + 1, j), c = id(i + 1, j + 1), d = id(i, j + 1);
            faces.push_back({a, b, c});
            faces.push_back({a, c, d});
        }
    }
    if (!hole || hole->size() < 3) return build_complex(std::move(x), std::move(faces));

    const auto& polygon = *hole;
    std::vector<char> inside(x.size(), 0);
    for (std::size_t v = 0; v < x.size(); ++v) inside[v] = point_in_polygon(x[v].head<2>(), polygon);
    std::vector<char> removed(faces.size(), 0);
    for (std::size_t f = 0; f < faces.size(); ++f) {
        const Face& t = faces[f];
        const Vec3 centroid = (x[t[0]] + x[t[1]] + x[t[2]]) / 3.0;
        removed[f] = inside[t[0]] || inside[t[1]] || inside[t[2]] || point_in_polygon(centroid.head<2>(), polygon);
    }

    // Removing faces can pinch a vertex between two holes (boundary degree 4);
    // peel the fan around such vertices until every boundary vertex is regular.
    for (int pass = 0; pass < 64; ++pass) {
        std::map<std::pair<int, int>, int> count;
        for (std::size_t f = 0; f < faces.size(); ++f) {
            if (removed[f]) continue;
            const Face& t = faces[f];
            for (int k = 0; k < 3; ++k) {
                int a = t[k], b = t[(k + 1) % 3];
                ++count[{std::min(a, b), std::max(a, b)}];
            }
        }
        std::vector<int> degree(x.size(), 0);
        for (const auto& [edge, n] : count) {
            if (n == 1) {
                ++degree[edge.first];
                ++degree[edge.second];
            }
        }
        bool changed = false;
        for (std::size_t f = 0; f < faces.size(); ++f) {
            if (removed[f]) continue;
            for (int v : faces[f]) {
                if (degree[v] > 2) {
                    removed[f] = 1;
                    changed = true;
                    break;
                }
            }
        }
        if (!changed) break;
    }

    std::vector<Face> kept;
    for (std::size_t f = 0; f < faces.size(); ++f)
        if (!removed[f]) kept.push_back(faces[f]);
    if (kept.empty()) fail(ErrorCode::EmptyDomain, "hole polygon removes the entire grid");
    return detail::compact_and_build(x, kept);
}

// ---------------------------------------------------------------------------
// Convex hull and lat/lon spheres
// ---------------------------------------------------------------------------

/// Triangulated convex hull of `points` (incremental construction). Every
/// input point must be a hull vertex; faces are oriented outward and index
/// into `points` directly.
inline std::vector<Face> convex_hull(const std::vector<Vec3>& points)
{
    const int n = static_cast<int>(points.size());
    if (n < 4) fail(ErrorCode::DegenerateHull, "hull needs at least 4 points");

    double scale = 0.0;
    for (const auto& p : points) scale = std::max(scale, p.cwiseAbs().maxCoeff());
    const double eps = 1e-12 * std::max(scale, 1e-300);

    // Initial tetrahedron from extreme points.
    int i0 = 0, i1 = -1, i2 = -1, i3 = -1;
    double best = 0.0;
    for (int i = 1; i < n; ++i) {
        const double d = (points[i] - points[i0]).norm();
        if (d > best) best = d, i1 = i;
    }
    best = 0.0;
    for (int i = 0; i < n && i1 >= 0; ++i) {
        const double d = (points[i] - points[i0]).cross(points[i1] - points[i0]).norm();
        if (d > best) best = d, i2 = i;
    }
    best = 0.0;
    Vec3 plane_n = Vec3::Zero();
    if (i2 >= 0) plane_n = (points[i1] - points[i0]).cross(points[i2] - points[i0]).normalized();
    for (int i = 0; i < n && i2 >= 0; ++i) {
        const double d = std::abs(plane_n.dot(points[i] - points[i0]));
        if (d > best) best = d, i3 = i;
    }
    if (i1 < 0 || i2 < 0 || i3 < 0 || best <= 1e3 * eps) {
        fail(ErrorCode::DegenerateHull, "input points are coplanar");
    }

    struct HullFace
    {
        Face v;
        Vec3 normal;
        double offset;
        bool alive;
    };
    std::vector<HullFace> hf;
    std::unordered_map<std::uint64_t, int> directed;  // directed edge a->b -> face
    auto dkey = [](int a, int b) {
        return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint32_t>(b);
    };
    const Vec3 interior = (points[i0] + points[i1] + points[i2] + points[i3]) / 4.0;
    auto add_face = [&](int a, int b, int c) {
        Vec3 nrm = (points[b] - points[a]).cross(points[c] - points[a]);
        nrm.normalize();
        hf.push_back({{a, b, c}, nrm, nrm.dot(points[a]), true});
        const int id = static_cast<int>(hf.size()) - 1;
        directed[dkey(a, b)] = id;
        directed[dkey(b, c)] = id;
        directed[dkey(c, a)] = id;
    };
    auto add_oriented = [&](int a, int b, int c) {
        const Vec3 nrm = (points[b] - points[a]).cross(points[c] - points[a]);
        if (nrm.dot(interior - points[a]) > 0.0) add_face(a, c, b);
        else add_face(a, b, c);
    };
    add_oriented(i0, i1, i2);
    add_oriented(i0, i1, i3);
    add_oriented(i0, i2, i3);
    add_oriented(i1, i2, i3);

    std::vector<int> alive_list = {0, 1, 2, 3};
    std::vector<char> on_hull(n, 0);
    on_hull[i0] = on_hull[i1] = on_hull[i2] = on_hull[i3] = 1;
    std::vector<int> stamp;
    int visit_id = 0;

    for (int p = 0; p < n; ++p) {
        if (on_hull[p]) continue;
        const Vec3& q = points[p];
        int seed = -1;
        double seed_dist = eps;
        int dead = 0;
        for (int f : alive_list) {
            if (!hf[f].alive) {
                ++dead;
                continue;
            }
            const double d = hf[f].normal.dot(q) - hf[f].offset;
            if (d > seed_dist) seed_dist = d, seed = f;
        }
        if (2 * dead > static_cast<int>(alive_list.size())) {
            std::erase_if(alive_list, [&](int f) { return !hf[f].alive; });
        }
        if (seed < 0) {
            fail(ErrorCode::DegenerateHull, "point " + std::to_string(p) + " is not a vertex of the convex hull");
        }

        // Flood the visible region from the most-visible face.
        ++visit_id;
        stamp.resize(hf.size(), 0);
        std::vector<int> visible;
        std::queue<int> queue;
        queue.push(seed);
        stamp[seed] = visit_id;
        while (!queue.empty()) {
            const int f = queue.front();
            queue.pop();
            visible.push_back(f);
            for (int k = 0; k < 3; ++k) {
                const int a = hf[f].v[k], b = hf[f].v[(k + 1) % 3];
                const int g = directed.at(dkey(b, a));
                if (stamp[g] == visit_id) continue;
                if (hf[g].normal.dot(q) - hf[g].offset > eps) {
                    stamp[g] = visit_id;
                    queue.push(g);
                }
            }
        }
        std::vector<std::array<int, 2>> horizon;
        for (int f : visible) {
            for (int k = 0; k < 3; ++k) {
                const int a = hf[f].v[k], b = hf[f].v[(k + 1) % 3];
                const int g = directed.at(dkey(b, a));
                if (stamp[g] != visit_id) horizon.push_back({a, b});
            }
        }
        for (int f : visible) {
            hf[f].alive = false;
            for (int k = 0; k < 3; ++k) directed.erase(dkey(hf[f].v[k], hf[f].v[(k + 1) % 3]));
        }
        for (const auto& [a, b] : horizon) {
            add_face(a, b, p);
            alive_list.push_back(static_cast<int>(hf.size()) - 1);
        }
        on_hull[p] = 1;
    }

    std::vector<Face> faces;
    for (const auto& f : hf)
        if (f.alive) faces.push_back(f.v);
    return faces;
}

/// Sphere mesh built from a latitude/longitude grid.
struct LatLonSphere
{
    SimplicialComplex complex;
    /// Vertex of grid point (lat index i, lon index j) at i * num_lons + j.
    std::vector<int> grid_to_vertex;
    /// Representative (lat, lon) in degrees of each vertex.
    std::vector<std::array<double, 2>> vertex_latlon;
    int num_lats = 0;
    int num_lons = 0;

    int vertex_of(int lat_index, int lon_index) const { return grid_to_vertex[lat_index * num_lons + lon_index]; }
};

/// Wraps a longitude into [-180, 180).
inline double wrap_longitude(double lon_deg)
{
    double w = std::fmod(lon_deg + 180.0, 360.0);
    if (w < 0.0) w += 360.0;
    return w - 180.0;
}

inline Vec3 latlon_to_point(double lat_deg, double lon_deg, double radius)
{
    const double lat = lat_deg * std::numbers::pi / 180.0;
    const double lon = lon_deg * std::numbers::pi / 180.0;
    return radius * Vec3(std::cos(lat) * std::cos(lon), std::cos(lat) * std::sin(lon), std::sin(lat));
}

/// Projects the grid onto a sphere of `radius` and triangulates its convex
/// hull. All grid points at a pole collapse onto one vertex, as do
/// longitudes that coincide after wrapping.
inline LatLonSphere sphere_from_latlon_grid(const std::vector<double>& lats, const std::vector<double>& lons,
                                            double radius = 1.0)
{
    if (lats.empty() || lons.empty()) fail(ErrorCode::InvalidInput, "empty lat/lon grid");
    if (!(radius > 0.0)) fail(ErrorCode::InvalidInput, "radius must be positive");
    LatLonSphere out;
    out.num_lats = static_cast<int>(lats.size());
    out.num_lons = static_cast<int>(lons.size());
    out.grid_to_vertex.assign(lats.size() * lons.size(), -1);

    std::map<std::pair<long long, long long>, int> index;
    std::vector<Vec3> points;
    auto quantize = [](double d) { return static_cast<long long>(std::llround(d * 1e6)); };
    for (std::size_t i = 0; i < lats.size(); ++i) {
        const double lat = lats[i];
        if (lat < -90.0 - 1e-9 || lat > 90.0 + 1e-9) fail(ErrorCode::InvalidInput, "latitude out of range");
        for (std::size_t j = 0; j < lons.size(); ++j) {
            const bool pole = std::abs(std::abs(lat) - 90.0) < 1e-9;
            const double plat = pole ? (lat > 0 ? 90.0 : -90.0) : lat;
            const double plon = pole ? 0.0 : wrap_longitude(lons[j]);
            const auto key = std::make_pair(quantize(plat), quantize(plon));
            auto [it, inserted] = index.emplace(key, static_cast<int>(points.size()));
            if (inserted) {
                points.push_back(latlon_to_point(plat, plon, radius));
                out.vertex_latlon.push_back({plat, plon});
            }
            out.grid_to_vertex[i * lons.size() + j] = it->second;
        }
    }
    auto faces = convex_hull(points);
    out.complex = build_complex(std::move(points), std::move(faces));
    return out;
}

// ---------------------------------------------------------------------------
// Outer buffer
// ---------------------------------------------------------------------------

struct BufferedComplex
{
    SimplicialComplex complex;
    /// True for vertices of the original complex (which keep their indices).
    std::vector<char> interest_mask;
};

/// Surrounds a planar complex with rings of buffer triangles so that the new
/// outer boundary lies at least `margin` from every original vertex. Ring
/// spacing is at most `resolution`.
inline BufferedComplex add_outer_buffer(const SimplicialComplex& mesh, double margin, double resolution)
{
    BufferedComplex out;
    out.interest_mask.assign(mesh.num_vertices(), 1);
    if (!(margin > 0.0)) {
        out.complex = mesh;
        return out;
    }
    if (!(resolution > 0.0)) fail(ErrorCode::InvalidInput, "buffer resolution must be positive");
    double extent = 0.0;
    for (const auto& p : mesh.positions()) extent = std::max(extent, p.head<2>().cwiseAbs().maxCoeff());
    for (const auto& p : mesh.positions()) {
        if (std::abs(p.z()) > 1e-9 * std::max(extent, 1.0)) {
            fail(ErrorCode::InvalidInput, "outer buffer requires a planar complex in z = 0");
        }
    }
    const auto loops = mesh.boundary_loops();
    if (loops.empty()) fail(ErrorCode::NoBoundary, "outer buffer requires a complex with boundary");

    // The outer loop is the one with the largest signed (counterclockwise) area.
    auto signed_area = [&](const std::vector<int>& loop) {
        double a = 0.0;
        for (std::size_t k = 0; k < loop.size(); ++k) {
            const Vec3& p = mesh.position(loop[k]);
            const Vec3& q = mesh.position(loop[(k + 1) % loop.size()]);
            a += p.x() * q.y() - q.x() * p.y();
        }
        return 0.5 * a;
    };
    std::size_t outer = 0;
    for (std::size_t k = 1; k < loops.size(); ++k)
        if (signed_area(loops[k]) > signed_area(loops[outer])) outer = k;
    const auto& loop = loops[outer];
    const int m = static_cast<int>(loop.size());

    // Miter offset direction per loop vertex; a counterclockwise loop has the
    // exterior on its right.
    std::vector<Vec2> direction(m);
    for (int k = 0; k < m; ++k) {
        const Vec2 prev = mesh.position(loop[(k + m - 1) % m]).head<2>();
        const Vec2 cur = mesh.position(loop[k]).head<2>();
        const Vec2 next = mesh.position(loop[(k + 1) % m]).head<2>();
        const Vec2 t0 = (cur - prev).normalized();
        const Vec2 t1 = (next - cur).normalized();
        const Vec2 n0(t0.y(), -t0.x());
        const Vec2 n1(t1.y(), -t1.x());
        Vec2 miter = n0 + n1;
        if (miter.norm() < 1e-12) miter = n0;
        miter.normalize();
        const double cosine = std::max(miter.dot(n0), 0.25);
        direction[k] = miter / cosine;
    }

    const int rings = static_cast<int>(std::ceil(margin / resolution - 1e-12));
    const double step = margin / rings;
    std::vector<Vec3> x = mesh.positions();
    std::vector<Face> faces = mesh.faces();
    std::vector<int> previous(loop.begin(), loop.end());
    for (int r = 1; r <= rings; ++r) {
        std::vector<int> current(m);
        for (int k = 0; k < m; ++k) {
            const Vec2 base = mesh.position(loop[k]).head<2>();
            const Vec2 p = base + direction[k] * (step * r);
            x.emplace_back(p.x(), p.y(), 0.0);
            current[k] = static_cast<int>(x.size()) - 1;
        }
        for (int k = 0; k < m; ++k) {
            const int a = previous[k], b = previous[(k + 1) % m];
            const int c = current[(k + 1) % m], d = current[k];
            // split along the shorter diagonal
            if ((x[a] - x[c]).squaredNorm() <= (x[b] - x[d]).squaredNorm()) {
                faces.push_back({a, d, c});
                faces.push_back({a, c, b});
            } else {
                faces.push_back({a, d, b});
                faces.push_back({b, d, c});
            }
        }
        previous = std::move(current);
    }
    out.complex = build_complex(std::move(x), std::move(faces));
    out.interest_mask.resize(out.complex.num_vertices(), 0);
    return out;
}

} // namespace meshvec

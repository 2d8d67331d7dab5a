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

#include <meshvec/fields.hpp>
#include <meshvec/gp.hpp>
#include <meshvec/mesh_io.hpp>

#include <charconv>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace meshvec::io {

/// Numeric CSV with a header line.
struct CsvTable
{
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;

    int column(std::string_view name) const
    {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) return static_cast<int>(i);
        return -1;
    }
};

namespace detail {

inline std::string_view trim(std::string_view s)
{
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

inline std::vector<std::string_view> split(std::string_view line)
{
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        out.push_back(trim(line.substr(start, comma == std::string_view::npos ? line.npos : comma - start)));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

} // namespace detail

inline CsvTable read_csv(const std::filesystem::path& path)
{
    auto in = open_input(path);
    CsvTable t;
    std::string line;
    if (!std::getline(in, line)) fail(ErrorCode::IoError, path.string() + " is empty");
    for (auto h : detail::split(line)) t.header.emplace_back(h);
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (detail::trim(line).empty()) continue;
        const auto cells = detail::split(line);
        if (cells.size() != t.header.size()) {
            fail(ErrorCode::IoError, path.string() + ":" + std::to_string(lineno) + ": expected " +
                                         std::to_string(t.header.size()) + " columns");
        }
        std::vector<double> row(cells.size());
        for (std::size_t i = 0; i < cells.size(); ++i) {
            const auto c = cells[i];
            const auto res = std::from_chars(c.data(), c.data() + c.size(), row[i]);
            if (res.ec != std::errc() || res.ptr != c.data() + c.size()) {
                fail(ErrorCode::IoError, path.string() + ":" + std::to_string(lineno) + ": not a number: " + std::string(c));
            }
        }
        t.rows.push_back(std::move(row));
    }
    return t;
}

/// Observations as read from disk, before conversion to ambient vectors.
struct ObservationTable
{
    bool latlon = false;
    std::vector<int> vertex_ids;          ///< vertex mode
    VertexField values;                   ///< vertex mode
    std::vector<LatLonRecord> records;    ///< lat/lon mode
};

/// Reads `vertex_id,vx,vy,vz` or `lat_deg,lon_deg,u,v`; the header picks the mode.
inline ObservationTable read_observations(const std::filesystem::path& path)
{
    const auto t = read_csv(path);
    ObservationTable obs;
    const std::vector<std::string> vertex_header{"vertex_id", "vx", "vy", "vz"};
    const std::vector<std::string> latlon_header{"lat_deg", "lon_deg", "u", "v"};
    if (t.header == vertex_header) {
        obs.values.resize(t.rows.size(), 3);
        for (std::size_t k = 0; k < t.rows.size(); ++k) {
            const auto& r = t.rows[k];
            if (r[0] < 0 || r[0] != std::floor(r[0])) fail(ErrorCode::IoError, "vertex_id must be a non-negative integer");
            obs.vertex_ids.push_back(static_cast<int>(r[0]));
            obs.values.row(k) << r[1], r[2], r[3];
        }
    } else if (t.header == latlon_header) {
        obs.latlon = true;
        for (const auto& r : t.rows) {
            if (r[0] < -90.0 || r[0] > 90.0) fail(ErrorCode::IoError, "latitude out of range in " + path.string());
            obs.records.push_back({r[0], r[1], r[2], r[3]});
        }
    } else {
        fail(ErrorCode::IoError, path.string() + ": header must be vertex_id,vx,vy,vz or lat_deg,lon_deg,u,v");
    }
    return obs;
}

inline void write_observations(const std::filesystem::path& path, const Observations& obs)
{
    write_atomic(path, [&](std::ostream& out) {
        out << "vertex_id,vx,vy,vz\n";
        for (int k = 0; k < obs.size(); ++k) {
            out << obs.vertex_ids[k] << ',' << obs.values(k, 0) << ',' << obs.values(k, 1) << ',' << obs.values(k, 2) << '\n';
        }
    });
}

inline void write_field_csv(const std::filesystem::path& path, const SimplicialComplex& mesh, const VertexField& field)
{
    if (field.rows() != mesh.num_vertices()) fail(ErrorCode::DimensionMismatch, "field must cover every vertex");
    write_atomic(path, [&](std::ostream& out) {
        out << "vertex_id,x,y,z,vx,vy,vz\n";
        for (int v = 0; v < mesh.num_vertices(); ++v) {
            const auto& p = mesh.position(v);
            out << v << ',' << p.x() << ',' << p.y() << ',' << p.z() << ',' << field(v, 0) << ',' << field(v, 1) << ','
                << field(v, 2) << '\n';
        }
    });
}

/// Reads a full vertex field from `vertex_id,x,y,z,vx,vy,vz` or `vertex_id,vx,vy,vz`.
inline VertexField read_field_csv(const std::filesystem::path& path, int num_vertices)
{
    const auto t = read_csv(path);
    const int id = t.column("vertex_id"), vx = t.column("vx"), vy = t.column("vy"), vz = t.column("vz");
    if (id < 0 || vx < 0 || vy < 0 || vz < 0) fail(ErrorCode::IoError, path.string() + ": missing field columns");
    VertexField f = VertexField::Zero(num_vertices, 3);
    std::vector<char> seen(num_vertices, 0);
    for (const auto& r : t.rows) {
        const int v = static_cast<int>(r[id]);
        if (v < 0 || v >= num_vertices || seen[v]) fail(ErrorCode::IoError, path.string() + ": bad vertex id " + std::to_string(v));
        seen[v] = 1;
        f.row(v) << r[vx], r[vy], r[vz];
    }
    for (int v = 0; v < num_vertices; ++v)
        if (!seen[v]) fail(ErrorCode::IoError, path.string() + ": vertex " + std::to_string(v) + " missing");
    return f;
}

/// Legacy ASCII VTK polydata with point vectors (and optional point scalars).
inline void write_vtk(const std::filesystem::path& path, const SimplicialComplex& mesh,
                      const std::vector<std::pair<std::string, VertexField>>& vectors,
                      const std::vector<std::pair<std::string, Eigen::VectorXd>>& scalars = {})
{
    write_atomic(path, [&](std::ostream& out) {
        out << "# vtk DataFile Version 3.0\nmeshvec\nASCII\nDATASET POLYDATA\n";
        out << "POINTS " << mesh.num_vertices() << " double\n";
        for (const auto& p : mesh.positions()) out << p.x() << ' ' << p.y() << ' ' << p.z() << '\n';
        out << "POLYGONS " << mesh.num_faces() << ' ' << 4 * mesh.num_faces() << '\n';
        for (const auto& f : mesh.faces()) out << "3 " << f[0] << ' ' << f[1] << ' ' << f[2] << '\n';
        if (vectors.empty() && scalars.empty()) return;
        out << "POINT_DATA " << mesh.num_vertices() << '\n';
        for (const auto& [name, s] : scalars) {
            out << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
            for (Eigen::Index v = 0; v < s.size(); ++v) out << s[v] << '\n';
        }
        for (const auto& [name, f] : vectors) {
            out << "VECTORS " << name << " double\n";
            for (Eigen::Index v = 0; v < f.rows(); ++v) out << f(v, 0) << ' ' << f(v, 1) << ' ' << f(v, 2) << '\n';
        }
    });
}

inline void write_spectrum_csv(const std::filesystem::path& path, const Eigen::VectorXd& eigenvalues)
{
    write_atomic(path, [&](std::ostream& out) {
        out << "index,eigenvalue\n";
        for (Eigen::Index n = 0; n < eigenvalues.size(); ++n) out << n << ',' << eigenvalues[n] << '\n';
    });
}

/// One row per vertex, one column per mode.
inline void write_eigenvectors_csv(const std::filesystem::path& path, const Eigen::MatrixXd& vectors)
{
    write_atomic(path, [&](std::ostream& out) {
        for (Eigen::Index n = 0; n < vectors.cols(); ++n) out << (n ? "," : "") << "mode_" << n;
        out << '\n';
        for (Eigen::Index v = 0; v < vectors.rows(); ++v) {
            for (Eigen::Index n = 0; n < vectors.cols(); ++n) out << (n ? "," : "") << vectors(v, n);
            out << '\n';
        }
    });
}

inline void write_posterior_csv(const std::filesystem::path& path, const Posterior& post)
{
    write_atomic(path, [&](std::ostream& out) {
        out << "vertex_id,mean_x,mean_y,mean_z,var\n";
        for (std::size_t k = 0; k < post.predict_ids.size(); ++k) {
            out << post.predict_ids[k] << ',' << post.mean(k, 0) << ',' << post.mean(k, 1) << ',' << post.mean(k, 2)
                << ',' << post.vertex_variance[k] << '\n';
        }
    });
}

} // namespace meshvec::io

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

#include <meshvec/generators.hpp>
#include <meshvec/mesh.hpp>

#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

namespace meshvec::io {

/// Writes through a temporary sibling file and renames it into place.
inline void write_atomic(const std::filesystem::path& path, const std::function<void(std::ostream&)>& body)
{
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) fail(ErrorCode::IoError, "cannot open " + tmp.string() + " for writing");
        out << std::setprecision(17);
        body(out);
        out.flush();
        if (!out) fail(ErrorCode::IoError, "failed writing " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

inline std::ifstream open_input(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) fail(ErrorCode::IoError, "cannot open " + path.string());
    return in;
}

inline SimplicialComplex read_off(const std::filesystem::path& path)
{
    auto in = open_input(path);
    std::vector<std::string> tokens;
    std::string line;
    while (std::getline(in, line)) {
        if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
        std::istringstream ss(line);
        std::string tok;
        while (ss >> tok) tokens.push_back(tok);
    }
    std::size_t pos = 0;
    if (tokens.empty() || tokens[pos] != "OFF") fail(ErrorCode::IoError, path.string() + " is not an OFF file");
    ++pos;
    if (tokens.size() < pos + 3) fail(ErrorCode::IoError, "truncated OFF header");
    const long nv = std::stol(tokens[pos++]);
    const long nf = std::stol(tokens[pos++]);
    ++pos;  // edge count, unused
    std::vector<Vec3> x;
    x.reserve(nv);
    for (long v = 0; v < nv; ++v) {
        if (tokens.size() < pos + 3) fail(ErrorCode::IoError, "truncated OFF vertex list");
        x.emplace_back(std::stod(tokens[pos]), std::stod(tokens[pos + 1]), std::stod(tokens[pos + 2]));
        pos += 3;
    }
    std::vector<Face> faces;
    faces.reserve(nf);
    for (long f = 0; f < nf; ++f) {
        if (tokens.size() < pos + 1) fail(ErrorCode::IoError, "truncated OFF face list");
        const long k = std::stol(tokens[pos++]);
        if (k != 3) fail(ErrorCode::InvalidInput, "only triangular faces are supported");
        if (tokens.size() < pos + 3) fail(ErrorCode::IoError, "truncated OFF face list");
        faces.push_back({std::stoi(tokens[pos]), std::stoi(tokens[pos + 1]), std::stoi(tokens[pos + 2])});
        pos += 3;
    }
    return build_complex(std::move(x), std::move(faces));
}

inline void write_off(const std::filesystem::path& path, const SimplicialComplex& mesh)
{
    write_atomic(path, [&](std::ostream& out) {
        out << "OFF\n" << mesh.num_vertices() << ' ' << mesh.num_faces() << ' ' << mesh.num_edges() << '\n';
        for (const auto& p : mesh.positions()) out << p.x() << ' ' << p.y() << ' ' << p.z() << '\n';
        for (const auto& f : mesh.faces()) out << "3 " << f[0] << ' ' << f[1] << ' ' << f[2] << '\n';
    });
}

/// Reads `v` and `f` records of a Wavefront OBJ; texture/normal indices are ignored.
inline SimplicialComplex read_obj(const std::filesystem::path& path)
{
    auto in = open_input(path);
    std::vector<Vec3> x;
    std::vector<Face> faces;
    std::string line;
    while (std::getline(in, line)) {
        std::istringstream ss(line);
        std::string tag;
        if (!(ss >> tag)) continue;
        if (tag == "v") {
            double a, b, c;
            if (!(ss >> a >> b >> c)) fail(ErrorCode::IoError, "malformed OBJ vertex: " + line);
            x.emplace_back(a, b, c);
        } else if (tag == "f") {
            std::vector<int> ids;
            std::string tok;
            while (ss >> tok) {
                int idx = std::stoi(tok.substr(0, tok.find('/')));
                ids.push_back(idx < 0 ? static_cast<int>(x.size()) + idx : idx - 1);
            }
            if (ids.size() != 3) fail(ErrorCode::InvalidInput, "only triangular faces are supported");
            faces.push_back({ids[0], ids[1], ids[2]});
        }
    }
    return build_complex(std::move(x), std::move(faces));
}

inline void write_obj(const std::filesystem::path& path, const SimplicialComplex& mesh)
{
    write_atomic(path, [&](std::ostream& out) {
        for (const auto& p : mesh.positions()) out << "v " << p.x() << ' ' << p.y() << ' ' << p.z() << '\n';
        for (const auto& f : mesh.faces()) out << "f " << f[0] + 1 << ' ' << f[1] + 1 << ' ' << f[2] + 1 << '\n';
    });
}

inline SimplicialComplex read_mesh(const std::filesystem::path& path)
{
    const auto ext = path.extension().string();
    if (ext == ".off" || ext == ".OFF") return read_off(path);
    if (ext == ".obj" || ext == ".OBJ") return read_obj(path);
    fail(ErrorCode::InvalidInput, "unsupported mesh format: " + path.string());
}

/// `vertex_id,lat_deg,lon_deg`, one row per vertex.
inline void write_latlon_map(const std::filesystem::path& path, const LatLonSphere& sphere)
{
    write_atomic(path, [&](std::ostream& out) {
        out << "vertex_id,lat_deg,lon_deg\n";
        for (std::size_t v = 0; v < sphere.vertex_latlon.size(); ++v) {
            out << v << ',' << sphere.vertex_latlon[v][0] << ',' << sphere.vertex_latlon[v][1] << '\n';
        }
    });
}

inline std::vector<std::array<double, 2>> read_latlon_map(const std::filesystem::path& path)
{
    auto in = open_input(path);
    std::string line;
    std::getline(in, line);
    if (line.rfind("vertex_id,lat_deg,lon_deg", 0) != 0) fail(ErrorCode::IoError, "bad lat/lon map header");
    std::vector<std::array<double, 2>> out;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string a, b, c;
        std::getline(ss, a, ',');
        std::getline(ss, b, ',');
        std::getline(ss, c, ',');
        const auto id = static_cast<std::size_t>(std::stoul(a));
        if (id != out.size()) fail(ErrorCode::IoError, "lat/lon map rows must be in vertex order");
        out.push_back({std::stod(b), std::stod(c)});
    }
    return out;
}

} // namespace meshvec::io

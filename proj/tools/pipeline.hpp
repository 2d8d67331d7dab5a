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

#include <meshvec.hpp>
#include <meshvec/config.hpp>

#include <cmath>
#include <iostream>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

namespace meshvec::cli {

using config::Json;

/// Dotted-key access into a run config. Type mismatches are config errors.
class Config
{
public:
    explicit Config(Json root) : m_root(std::move(root)) {}

    const Json* find(std::string_view dotted) const
    {
        const Json* node = &m_root;
        std::size_t start = 0;
        while (true) {
            const auto dot = dotted.find('.', start);
            const std::string part(dotted.substr(start, dot == std::string_view::npos ? dotted.npos : dot - start));
            if (!node->is_object()) return nullptr;
            auto it = node->find(part);
            if (it == node->end()) return nullptr;
            node = &*it;
            if (dot == std::string_view::npos) return node;
            start = dot + 1;
        }
    }

    bool has(std::string_view key) const { return find(key) != nullptr; }

    template <class T>
    T get(std::string_view key, T fallback) const
    {
        const Json* j = find(key);
        return j ? convert<T>(*j, key) : fallback;
    }

    template <class T>
    T require(std::string_view key) const
    {
        const Json* j = find(key);
        if (!j) fail(ErrorCode::ConfigError, "missing config key '" + std::string(key) + "'");
        return convert<T>(*j, key);
    }

    const Json& root() const { return m_root; }

private:
    template <class T>
    static T convert(const Json& j, std::string_view key)
    {
        try {
            if constexpr (std::is_same_v<T, double>) {
                if (j.is_string()) {
                    const auto s = j.get<std::string>();
                    if (s == "inf" || s == "infinity") return std::numeric_limits<double>::infinity();
                }
            }
            return j.get<T>();
        } catch (const Json::exception&) {
            fail(ErrorCode::ConfigError, "config key '" + std::string(key) + "' has the wrong type");
        }
    }

    Json m_root;
};

// ---------------------------------------------------------------------------
// Mesh
// ---------------------------------------------------------------------------

struct MeshSetup
{
    SimplicialComplex complex;
    VertexGeometry geom;
    DecOperators ops;
    std::optional<LatLonSphere> latlon;       ///< set for the latlon_sphere generator
    std::vector<char> interest_mask;          ///< all true unless a buffer was added
    std::string description;

    bool planar() const
    {
        const auto& p = complex.positions();
        for (const auto& x : p)
            if (std::abs(x.z() - p.front().z()) > 1e-12) return false;
        return true;
    }
};

inline std::vector<double> grid_range(double lo, double hi, double step)
{
    if (!(step > 0.0)) fail(ErrorCode::ConfigError, "grid step must be positive");
    std::vector<double> out;
    const int n = static_cast<int>(std::floor((hi - lo) / step + 1e-9));
    for (int i = 0; i <= n; ++i) out.push_back(lo + i * step);
    return out;
}

inline MeshSetup build_mesh(const Config& cfg)
{
    MeshSetup m;
    const bool has_file = cfg.has("mesh.file");
    const bool has_gen = cfg.has("mesh.generator");
    if (has_file == has_gen) fail(ErrorCode::ConfigError, "give exactly one of mesh.file and mesh.generator");
    if (has_file) {
        const auto path = cfg.require<std::string>("mesh.file");
        m.complex = io::read_mesh(path);
        m.description = path;
    } else {
        const auto gen = cfg.require<std::string>("mesh.generator");
        m.description = gen;
        if (gen == "icosphere") {
            const int s = cfg.get<int>("mesh.subdivisions", 3);
            if (s < 0) fail(ErrorCode::ConfigError, "mesh.subdivisions must be >= 0");
            m.complex = generate_icosphere(s, cfg.get<double>("mesh.radius", 1.0));
        } else if (gen == "torus") {
            const int a = cfg.get<int>("mesh.major_sections", 96), b = cfg.get<int>("mesh.minor_sections", 24);
            const double R = cfg.get<double>("mesh.major_radius", 2.0), r = cfg.get<double>("mesh.minor_radius", 1.0);
            if (a < 3 || b < 3 || !(R > r && r > 0.0)) fail(ErrorCode::ConfigError, "torus needs sections >= 3 and R > r > 0");
            m.complex = generate_torus(a, b, R, r);
        } else if (gen == "grid") {
            Bounds2 bounds;
            if (cfg.has("mesh.bounds")) {
                const auto b = cfg.require<std::vector<double>>("mesh.bounds");
                if (b.size() != 4) fail(ErrorCode::ConfigError, "mesh.bounds is [xmin, xmax, ymin, ymax]");
                bounds = {b[0], b[1], b[2], b[3]};
            }
            std::optional<std::vector<Vec2>> hole;
            if (cfg.has("mesh.hole")) {
                std::vector<Vec2> poly;
                for (const auto& p : cfg.require<std::vector<std::vector<double>>>("mesh.hole")) {
                    if (p.size() != 2) fail(ErrorCode::ConfigError, "mesh.hole points are [x, y]");
                    poly.emplace_back(p[0], p[1]);
                }
                if (poly.size() < 3) fail(ErrorCode::ConfigError, "mesh.hole needs at least 3 points");
                hole = std::move(poly);
            }
            m.complex = generate_grid_delaunay(cfg.get<int>("mesh.nx", 45), cfg.get<int>("mesh.ny", 25), bounds, hole);
        } else if (gen == "latlon_sphere") {
            const double lat_step = cfg.get<double>("mesh.lat_step", 2.0);
            const double lon_step = cfg.get<double>("mesh.lon_step", 2.0);
            auto lats = grid_range(-90.0, 90.0, lat_step);
            auto lons = grid_range(-180.0, 180.0 - lon_step, lon_step);
            m.latlon = sphere_from_latlon_grid(lats, lons, cfg.get<double>("mesh.radius", 1.0));
            m.complex = m.latlon->complex;
        } else {
            fail(ErrorCode::ConfigError, "unknown mesh.generator '" + gen + "'");
        }
    }
    const double margin = cfg.get<double>("mesh.buffer_margin", 0.0);
    m.interest_mask.assign(m.complex.num_vertices(), 1);
    if (margin > 0.0) {
        auto buffered = add_outer_buffer(m.complex, margin, cfg.get<double>("mesh.buffer_resolution", margin / 4.0));
        m.complex = std::move(buffered.complex);
        m.interest_mask = std::move(buffered.interest_mask);
    }
    m.geom = vertex_geometry(m.complex);
    m.ops = DecOperators::build(m.complex, cfg.get<bool>("flat_mode", false));
    return m;
}

/// Latitude in degrees of each vertex, measured from the origin.
inline std::vector<double> vertex_latitudes(const SimplicialComplex& mesh)
{
    std::vector<double> lat;
    for (const auto& p : mesh.positions()) lat.push_back(std::asin(std::clamp(p.z() / p.norm(), -1.0, 1.0)) * 180.0 / std::numbers::pi);
    return lat;
}

// ---------------------------------------------------------------------------
// Model
// ---------------------------------------------------------------------------

enum class BoundaryMode { open, no_flux };

struct Model
{
    KernelParams params;
    BoundaryMode boundary = BoundaryMode::open;
    VectorBases bases;
    SpectralBasis neumann;
    std::optional<KappaField> kappa_field;
    NonstationaryTarget target = NonstationaryTarget::curling;
    int harmonic_dimension = 0;
    std::vector<std::string> warnings;

    double area = 1.0;
};

inline KernelParams read_kernel_params(const Config& cfg)
{
    KernelParams p;
    p.nu = cfg.get<double>("kernel.nu", 1.5);
    p.kappa_d = cfg.get<double>("kernel.kappa_d", 1.0);
    p.kappa_c = cfg.get<double>("kernel.kappa_c", 1.0);
    const double sd = cfg.get<double>("kernel.sigma_d", 0.0);
    const double sc = cfg.get<double>("kernel.sigma_c", 1.0);
    const double sh = cfg.get<double>("kernel.sigma_h", 0.0);
    p.sigma_d2 = sd * sd;
    p.sigma_c2 = sc * sc;
    p.sigma_h2 = sh * sh;
    p.truncation = cfg.get<int>("kernel.L", default_truncation);
    if (p.truncation < 1) fail(ErrorCode::ConfigError, "kernel.L must be >= 1");
    try {
        p.validate();
    } catch (const Error& e) {
        fail(ErrorCode::ConfigError, e.what());
    }
    return p;
}

inline std::optional<KappaField> read_kappa_field(const Config& cfg)
{
    if (!cfg.has("kernel.kappa_field")) return std::nullopt;
    const int count = cfg.get<int>("kernel.kappa_field.count", 20);
    if (count < 1) fail(ErrorCode::ConfigError, "kernel.kappa_field.count must be >= 1");
    auto field = KappaField::equally_spaced(count, cfg.get<double>("kernel.kappa_field.lo", -80.0),
                                            cfg.get<double>("kernel.kappa_field.hi", 80.0),
                                            cfg.get<double>("kernel.kappa_field.lengthscale", -1.0));
    if (cfg.has("kernel.kappa_field.weights")) {
        const auto w = cfg.require<std::vector<double>>("kernel.kappa_field.weights");
        if (static_cast<int>(w.size()) != count) fail(ErrorCode::ConfigError, "kappa_field.weights needs count entries");
        field.weights = Eigen::Map<const Eigen::VectorXd>(w.data(), count);
    }
    return field;
}

inline NonstationaryTarget read_target(const Config& cfg)
{
    const auto t = cfg.get<std::string>("kernel.kappa_field.target", "curling");
    if (t == "curling") return NonstationaryTarget::curling;
    if (t == "diverging") return NonstationaryTarget::diverging;
    if (t == "both") return NonstationaryTarget::both;
    fail(ErrorCode::ConfigError, "kappa_field.target must be curling, diverging or both");
}

inline SolverChoice read_solver(const Config& cfg)
{
    const auto s = cfg.get<std::string>("solver", "auto");
    if (s == "auto") return SolverChoice::automatic;
    if (s == "dense") return SolverChoice::dense;
    if (s == "iterative") return SolverChoice::iterative;
    fail(ErrorCode::ConfigError, "solver must be auto, dense or iterative");
}

inline int checked_truncation(int requested, int num_vertices)
{
    if (requested + 1 > num_vertices) {
        fail(ErrorCode::TruncationTooLarge, "kernel.L = " + std::to_string(requested) + " needs L + 1 <= V = " +
                                                std::to_string(num_vertices));
    }
    return requested;
}

inline Model build_model(const Config& cfg, const MeshSetup& mesh)
{
    Model model;
    model.params = read_kernel_params(cfg);
    model.kappa_field = read_kappa_field(cfg);
    model.target = read_target(cfg);
    model.area = mesh.ops.mass_total();
    const auto boundary = cfg.get<std::string>("boundary", "open");
    if (boundary == "open") model.boundary = BoundaryMode::open;
    else if (boundary == "no_flux") model.boundary = BoundaryMode::no_flux;
    else fail(ErrorCode::ConfigError, "boundary must be open or no_flux");
    if (model.boundary == BoundaryMode::no_flux && !mesh.complex.has_boundary()) {
        fail(ErrorCode::ConfigError, "boundary = no_flux requires a mesh with boundary");
    }

    const SolverChoice solver = read_solver(cfg);
    const int L = checked_truncation(model.params.truncation, mesh.complex.num_vertices());
    model.neumann = eigensolve(mesh.ops, L, solver);
    model.bases.num_vertices = mesh.complex.num_vertices();
    model.bases.diverging = diverging_basis(mesh.complex, mesh.geom, mesh.ops, model.neumann);
    if (model.boundary == BoundaryMode::no_flux) {
        const int nint = mesh.complex.num_vertices() - static_cast<int>(mesh.complex.boundary_vertices().size());
        const auto dirichlet = eigensolve_dirichlet(mesh.ops, mesh.complex, std::min(L, nint - 1), solver);
        model.bases.curling = curling_basis(mesh.complex, mesh.geom, mesh.ops, dirichlet, 0);
    } else {
        model.bases.curling = curling_basis(mesh.complex, mesh.geom, mesh.ops, model.neumann);
    }

    const auto harmonic = cfg.get<std::string>("harmonic", "auto");
    if (harmonic != "auto" && harmonic != "manual_flat" && harmonic != "none") {
        fail(ErrorCode::ConfigError, "harmonic must be auto, manual_flat or none");
    }
    if (model.params.sigma_h2 > 0.0 && harmonic != "none") {
        if (harmonic == "manual_flat" || (harmonic == "auto" && mesh.planar())) {
            if (!mesh.planar()) fail(ErrorCode::ConfigError, "harmonic = manual_flat needs a planar mesh");
            model.bases.harmonic = harmonic_manual_flat(mesh.complex);
        } else {
            const auto h = harmonic_oneforms(hodge1_system(mesh.ops));
            model.bases.harmonic = harmonic_vertex_basis(mesh.complex, mesh.geom, h);
        }
        if (model.bases.harmonic.cols() == 0) {
            model.warnings.push_back("harmonic basis is empty on this mesh; sigma_h has no effect");
        }
    }
    if (model.bases.harmonic.cols() == 0) model.bases.harmonic.resize(3 * mesh.complex.num_vertices(), 0);
    model.harmonic_dimension = static_cast<int>(model.bases.harmonic.cols());
    return model;
}

inline VectorKernel build_kernel(const Model& model, const MeshSetup& mesh)
{
    if (model.kappa_field) {
        const auto lat = vertex_latitudes(mesh.complex);
        return nonstationary_vector_kernel(model.bases, model.params, model.area, *model.kappa_field, lat, model.target);
    }
    return vector_kernel(model.bases, model.params, model.area);
}

// ---------------------------------------------------------------------------
// Observations
// ---------------------------------------------------------------------------

inline Observations load_observations(const Config& cfg, const MeshSetup& mesh, const std::string& path)
{
    const double noise = cfg.get<double>("observations.noise", default_noise_variance);
    if (!(noise > 0.0)) fail(ErrorCode::ConfigError, "observations.noise must be positive");
    const auto table = io::read_observations(path);
    if (!table.latlon) return make_observations(mesh.geom, table.vertex_ids, table.values, noise);
    LatLonIndex index;
    if (mesh.latlon) {
        index = LatLonIndex(mesh.latlon->vertex_latlon);
    } else if (cfg.has("observations.latlon_map")) {
        index = LatLonIndex(io::read_latlon_map(cfg.require<std::string>("observations.latlon_map")));
    } else {
        fail(ErrorCode::ConfigError, "lat/lon observations need mesh.generator = latlon_sphere or observations.latlon_map");
    }
    return uv_to_ambient(mesh.geom, index, table.records, noise);
}

/// observations.file, or every entry of observations.files (realizations).
inline std::vector<std::string> observation_paths(const Config& cfg)
{
    std::vector<std::string> paths;
    if (cfg.has("observations.files")) paths = cfg.require<std::vector<std::string>>("observations.files");
    if (cfg.has("observations.file")) paths.insert(paths.begin(), cfg.require<std::string>("observations.file"));
    if (paths.empty()) fail(ErrorCode::ConfigError, "missing observations.file");
    return paths;
}

} // namespace meshvec::cli

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
#include "pipeline.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <filesystem>
#include <functional>
#include <iostream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace meshvec;
using namespace meshvec::cli;

namespace {

enum Command : unsigned {
    kMeshgen = 1u << 0,
    kSpectrum = 1u << 1,
    kSample = 1u << 2,
    kPredict = 1u << 3,
    kFit = 1u << 4,
    kMetrics = 1u << 5,
};
constexpr unsigned kModel = kSample | kPredict | kFit;
constexpr unsigned kMeshUsers = kMeshgen | kSpectrum | kModel | kMetrics;

struct KeyDoc
{
    const char* key;
    const char* help;
    unsigned commands;
};

const std::vector<KeyDoc>& key_docs()
{
    static const std::vector<KeyDoc> docs{
        {"output_dir", "directory receiving all outputs (default out)", ~0u},
        {"seed", "random seed (default 0)", kSample | kFit},
        {"flat_mode", "use the identity for star0 (default false)", kSpectrum | kModel},
        {"solver", "auto | dense | iterative eigensolver (default auto)", kSpectrum | kModel},
        {"mesh.file", "OFF/OBJ triangle mesh; excludes mesh.generator", kMeshUsers},
        {"mesh.generator", "icosphere | torus | grid | latlon_sphere", kMeshUsers},
        {"mesh.subdivisions", "icosphere subdivisions (default 3)", kMeshUsers},
        {"mesh.radius", "icosphere / latlon_sphere radius (default 1)", kMeshUsers},
        {"mesh.major_sections", "torus sections around the axis (default 96)", kMeshUsers},
        {"mesh.minor_sections", "torus sections around the tube (default 24)", kMeshUsers},
        {"mesh.major_radius", "torus R (default 2)", kMeshUsers},
        {"mesh.minor_radius", "torus r (default 1)", kMeshUsers},
        {"mesh.nx", "grid points along x (default 45)", kMeshUsers},
        {"mesh.ny", "grid points along y (default 25)", kMeshUsers},
        {"mesh.bounds", "grid [xmin, xmax, ymin, ymax] (default unit square)", kMeshUsers},
        {"mesh.hole", "grid exclusion polygon [[x, y], ...]", kMeshUsers},
        {"mesh.lat_step", "latlon_sphere latitude spacing in degrees (default 2)", kMeshUsers},
        {"mesh.lon_step", "latlon_sphere longitude spacing in degrees (default 2)", kMeshUsers},
        {"mesh.buffer_margin", "outer buffer width for planar meshes (default 0, off)", kMeshUsers},
        {"mesh.buffer_resolution", "outer buffer ring spacing (default margin/4)", kMeshUsers},
        {"meshgen.format", "off | obj (default off)", kMeshgen},
        {"kernel.nu", "smoothness, number or \"inf\" (default 1.5)", kSpectrum | kModel},
        {"kernel.kappa_d", "diverging length-scale (default 1)", kModel},
        {"kernel.kappa_c", "curling length-scale (default 1)", kModel},
        {"kernel.sigma_d", "diverging standard deviation (default 0)", kModel},
        {"kernel.sigma_c", "curling standard deviation (default 1)", kModel},
        {"kernel.sigma_h", "harmonic standard deviation (default 0)", kSpectrum | kModel},
        {"kernel.L", "truncation, L + 1 eigenpairs (default 250)", kSpectrum | kModel},
        {"kernel.kappa_field.count", "number of RBF centers (default 20)", kModel},
        {"kernel.kappa_field.lo", "first center, latitude degrees (default -80)", kModel},
        {"kernel.kappa_field.hi", "last center, latitude degrees (default 80)", kModel},
        {"kernel.kappa_field.lengthscale", "RBF width (default center spacing)", kModel},
        {"kernel.kappa_field.weights", "RBF weights (default zeros)", kModel},
        {"kernel.kappa_field.target", "curling | diverging | both (default curling)", kModel},
        {"boundary", "open | no_flux (default open)", kModel},
        {"harmonic", "auto | manual_flat | none (default auto)", kModel},
        {"observations.file", "CSV vertex_id,vx,vy,vz or lat_deg,lon_deg,u,v", kSample | kPredict | kFit},
        {"observations.files", "further realizations at the same locations", kFit},
        {"observations.noise", "noise variance per component (default 1e-4)", kSample | kPredict | kFit},
        {"observations.latlon_map", "vertex_id,lat_deg,lon_deg map for file meshes", kSample | kPredict | kFit},
        {"sample.count", "number of samples (default 4)", kSample},
        {"sample.source", "prior | posterior (default prior)", kSample},
        {"predict.truth", "full truth field CSV for metrics", kPredict},
        {"fit.mode", "stationary | kappa_field (default stationary)", kFit},
        {"fit.budget", "maximum NLL evaluations (default 300)", kFit},
        {"fit.initial_step", "initial pattern step in search units (default 0.5)", kFit},
        {"fit.params.<name>", "{lower, upper, start, log}; names nu kappa_d kappa_c sigma_d sigma_c sigma_h noise", kFit},
        {"fit.weight_bound", "kappa_field weight box (default 5)", kFit},
        {"fit.mcmc", "run random-walk Metropolis after the MAP search (default false)", kFit},
        {"fit.mcmc_iterations", "chain length (default 2000)", kFit},
        {"fit.mcmc_burn_in", "adaptation steps (default 500)", kFit},
        {"metrics.predicted", "field CSV to score", kMetrics},
        {"metrics.truth", "truth field CSV", kMetrics},
        {"metrics.mask", "optional CSV vertex_id,mask", kMetrics},
    };
    return docs;
}

std::string keys_footer(unsigned command)
{
    std::string s = "\nConfig keys read:\n";
    for (const auto& d : key_docs()) {
        if (d.commands & command) {
            std::string k = d.key;
            k.resize(std::max<std::size_t>(k.size(), 32), ' ');
            s += "  " + k + " " + d.help + "\n";
        }
    }
    return s;
}

int exit_code(ErrorCode c)
{
    switch (c) {
    case ErrorCode::ConfigError:
    case ErrorCode::TruncationTooLarge:
    case ErrorCode::EmptyBases:
        return 2;
    case ErrorCode::ConvergenceFailure:
    case ErrorCode::SingularSystem:
    case ErrorCode::SingularMass:
    case ErrorCode::NoSpectralGap:
        return 4;
    default:
        return 3;
    }
}

/// Outputs are staged in memory and written only after the command succeeded.
class Outputs
{
public:
    explicit Outputs(fs::path dir) : m_dir(std::move(dir)) {}

    const fs::path& dir() const { return m_dir; }

    void add(std::function<void()> writer) { m_writers.push_back(std::move(writer)); }

    void commit()
    {
        fs::create_directories(m_dir);
        for (auto& w : m_writers) w();
    }

private:
    fs::path m_dir;
    std::vector<std::function<void()>> m_writers;
};

void write_json(const fs::path& path, const Json& j)
{
    io::write_atomic(path, [&](std::ostream& out) { out << j.dump(2) << '\n'; });
}

Json to_json(const KernelParams& p)
{
    Json j;
    j["nu"] = std::isinf(p.nu) ? Json("inf") : Json(p.nu);
    j["kappa_d"] = p.kappa_d;
    j["kappa_c"] = p.kappa_c;
    j["sigma_d"] = std::sqrt(p.sigma_d2);
    j["sigma_c"] = std::sqrt(p.sigma_c2);
    j["sigma_h"] = std::sqrt(p.sigma_h2);
    j["L"] = p.truncation;
    return j;
}

void print_warnings(const Model& model)
{
    for (const auto& w : model.warnings) std::cerr << "warning: " << w << '\n';
}

// ---------------------------------------------------------------------------

void cmd_meshgen(const Config& cfg, Outputs& out)
{
    auto mesh = std::make_shared<MeshSetup>(build_mesh(cfg));
    const auto format = cfg.get<std::string>("meshgen.format", "off");
    if (format != "off" && format != "obj") fail(ErrorCode::ConfigError, "meshgen.format must be off or obj");
    std::cout << "V=" << mesh->complex.num_vertices() << " E=" << mesh->complex.num_edges()
              << " F=" << mesh->complex.num_faces() << " chi=" << mesh->complex.euler_characteristic()
              << " boundary_vertices=" << mesh->complex.boundary_vertices().size() << '\n';
    out.add([mesh, format, dir = out.dir()] {
        if (format == "obj") io::write_obj(dir / "mesh.obj", mesh->complex);
        else io::write_off(dir / "mesh.off", mesh->complex);
        if (mesh->latlon) io::write_latlon_map(dir / "latlon_map.csv", *mesh->latlon);
        if (std::find(mesh->interest_mask.begin(), mesh->interest_mask.end(), 0) != mesh->interest_mask.end()) {
            io::write_atomic(dir / "interest_mask.csv", [&](std::ostream& o) {
                o << "vertex_id,mask\n";
                for (std::size_t v = 0; v < mesh->interest_mask.size(); ++v) o << v << ',' << int(mesh->interest_mask[v]) << '\n';
            });
        }
    });
}

void cmd_spectrum(const Config& cfg, Outputs& out, bool harmonic)
{
    const auto mesh = build_mesh(cfg);
    const int L = checked_truncation(cfg.get<int>("kernel.L", default_truncation), mesh.complex.num_vertices());
    auto basis = std::make_shared<SpectralBasis>(eigensolve(mesh.ops, L, read_solver(cfg)));
    std::cout << "V=" << mesh.complex.num_vertices() << " modes=" << basis->num_modes()
              << " solver=" << (basis->iterative ? "iterative" : "dense") << '\n';
    std::shared_ptr<Json> report;
    if (harmonic) {
        const auto h = harmonic_oneforms(hodge1_system(mesh.ops));
        std::cout << "H=" << h.dimension() << " gap=" << h.gap << '\n';
        report = std::make_shared<Json>();
        (*report)["H"] = h.dimension();
        (*report)["gap"] = h.gap;
        (*report)["eigenvalues"] = std::vector<double>(h.eigenvalues.data(), h.eigenvalues.data() + h.eigenvalues.size());
    }
    out.add([basis, report, dir = out.dir()] {
        io::write_spectrum_csv(dir / "spectrum.csv", basis->eigenvalues);
        io::write_eigenvectors_csv(dir / "eigenvectors.csv", basis->eigenvectors);
        if (report) write_json(dir / "harmonic.json", *report);
    });
}

void cmd_sample(const Config& cfg, Outputs& out)
{
    auto mesh = std::make_shared<MeshSetup>(build_mesh(cfg));
    const auto model = build_model(cfg, *mesh);
    print_warnings(model);
    const int count = cfg.get<int>("sample.count", 4);
    if (count < 1) fail(ErrorCode::ConfigError, "sample.count must be >= 1");
    const auto seed = cfg.get<std::uint64_t>("seed", 0);
    const auto source = cfg.get<std::string>("sample.source", "prior");
    const auto kernel = build_kernel(model, *mesh);
    std::vector<VertexField> samples;
    if (source == "prior") {
        samples = sample_prior(kernel, count, seed);
    } else if (source == "posterior") {
        const auto obs = load_observations(cfg, *mesh, observation_paths(cfg).front());
        const auto ids = all_vertices(mesh->complex.num_vertices());
        const auto post = posterior(kernel, obs, ids, {.full_covariance = true});
        samples = sample(post, count, seed);
    } else {
        fail(ErrorCode::ConfigError, "sample.source must be prior or posterior");
    }
    if (model.boundary == BoundaryMode::no_flux) {
        const auto bn = boundary_normals(mesh->complex, mesh->geom);
        for (auto& s : samples) s = enforce_no_flux(bn, s);
    }
    auto shared = std::make_shared<std::vector<VertexField>>(std::move(samples));
    out.add([mesh, shared, dir = out.dir()] {
        for (std::size_t k = 0; k < shared->size(); ++k) {
            const auto stem = "sample_" + std::to_string(k + 1);
            io::write_field_csv(dir / (stem + ".csv"), mesh->complex, (*shared)[k]);
            io::write_vtk(dir / (stem + ".vtk"), mesh->complex, {{"field", (*shared)[k]}});
        }
    });
    std::cout << "wrote " << count << " samples (V=" << mesh->complex.num_vertices() << ")\n";
}

void cmd_predict(const Config& cfg, Outputs& out)
{
    auto mesh = std::make_shared<MeshSetup>(build_mesh(cfg));
    const auto obs = load_observations(cfg, *mesh, observation_paths(cfg).front());
    const auto model = build_model(cfg, *mesh);
    print_warnings(model);
    const auto kernel = build_kernel(model, *mesh);
    const int nv = mesh->complex.num_vertices();
    const auto ids = all_vertices(nv);
    auto post = std::make_shared<Posterior>(posterior(kernel, obs, ids, {.full_covariance = false}));
    if (model.boundary == BoundaryMode::no_flux) post->mean = enforce_no_flux(mesh->complex, mesh->geom, post->mean);

    auto metrics_json = std::make_shared<Json>();
    (*metrics_json)["nll"] = post->nll;
    (*metrics_json)["observed_vertices"] = obs.size();
    (*metrics_json)["clamped_variances"] = post->clamped_variances;
    const Eigen::MatrixXd f = kernel.factor();
    const Eigen::VectorXd prior_var = f.rowwise().squaredNorm();
    double prior_sum = 0.0;
    int interest = 0;
    for (int v = 0; v < nv; ++v) {
        if (!mesh->interest_mask[v]) continue;
        prior_sum += prior_var.segment(3 * v, 3).sum();
        ++interest;
    }
    (*metrics_json)["mean_prior_variance"] = prior_sum / interest;
    if (cfg.has("predict.truth")) {
        const auto truth = io::read_field_csv(cfg.require<std::string>("predict.truth"), nv);
        std::vector<char> held_out = mesh->interest_mask;
        for (int v : obs.vertex_ids) held_out[v] = 0;
        const auto all = metrics(post->mean, truth, mesh->interest_mask);
        (*metrics_json)["mse_all"] = all.mse;
        (*metrics_json)["mean_norm"] = all.mean_norm;
        if (std::find(held_out.begin(), held_out.end(), 1) != held_out.end()) {
            const auto m = metrics(post->mean, truth, held_out);
            (*metrics_json)["mse"] = m.mse;
            (*metrics_json)["component_mse"] = {m.component_mse.x(), m.component_mse.y(), m.component_mse.z()};
            (*metrics_json)["held_out_vertices"] = m.count;
        } else {
            (*metrics_json)["mse"] = all.mse;
        }
    }
    out.add([mesh, post, metrics_json, dir = out.dir()] {
        io::write_posterior_csv(dir / "posterior.csv", *post);
        io::write_vtk(dir / "posterior.vtk", mesh->complex, {{"mean", post->mean}}, {{"variance", post->vertex_variance}});
        write_json(dir / "metrics.json", *metrics_json);
    });
    std::cout << "nll=" << post->nll;
    if (metrics_json->contains("mse")) std::cout << " mse=" << (*metrics_json)["mse"].get<double>();
    std::cout << '\n';
}

std::vector<ParamBound> read_param_space(const Config& cfg)
{
    std::vector<ParamBound> space;
    const Json* params = cfg.find("fit.params");
    if (!params || !params->is_object() || params->empty()) fail(ErrorCode::ConfigError, "fit.params is empty");
    for (const auto& name : stationary_param_names()) {
        if (!params->contains(name)) continue;
        const std::string base = "fit.params." + name;
        ParamBound b;
        b.name = name;
        b.lower = cfg.require<double>(base + ".lower");
        b.upper = cfg.require<double>(base + ".upper");
        b.log_scale = cfg.get<bool>(base + ".log", true);
        b.start = cfg.get<double>(base + ".start", b.log_scale ? std::sqrt(b.lower * b.upper) : 0.5 * (b.lower + b.upper));
        if (!(b.lower < b.upper)) fail(ErrorCode::ConfigError, base + ": lower must be below upper");
        space.push_back(b);
    }
    for (const auto& [name, _] : params->items()) {
        const auto& names = stationary_param_names();
        if (std::find(names.begin(), names.end(), name) == names.end()) {
            fail(ErrorCode::ConfigError, "unknown fit parameter '" + name + "'");
        }
    }
    return space;
}

void cmd_fit(const Config& cfg, Outputs& out)
{
    const auto mode = cfg.get<std::string>("fit.mode", "stationary");
    if (mode != "stationary" && mode != "kappa_field") fail(ErrorCode::ConfigError, "fit.mode must be stationary or kappa_field");
    std::vector<ParamBound> space;
    if (mode == "stationary") space = read_param_space(cfg);
    auto mesh = std::make_shared<MeshSetup>(build_mesh(cfg));

    std::vector<Observations> realizations;
    for (const auto& p : observation_paths(cfg)) realizations.push_back(load_observations(cfg, *mesh, p));
    const auto& first = realizations.front();
    Eigen::MatrixXd y(3 * first.size(), realizations.size());
    for (std::size_t r = 0; r < realizations.size(); ++r) {
        if (realizations[r].vertex_ids != first.vertex_ids) {
            fail(ErrorCode::InvalidInput, "all observation files must list the same locations in the same order");
        }
        y.col(r) = realizations[r].y();
    }
    const auto model = build_model(cfg, *mesh);
    print_warnings(model);
    const auto data = make_fit_data(model.bases, model.area, first.vertex_ids, y, first.noise_variance);

    SearchOptions search;
    search.budget = cfg.get<int>("fit.budget", 300);
    search.initial_step = cfg.get<double>("fit.initial_step", 0.5);
    if (search.budget < 1) fail(ErrorCode::ConfigError, "fit.budget must be >= 1");

    auto report = std::make_shared<Json>();
    (*report)["mode"] = mode;
    (*report)["realizations"] = realizations.size();
    (*report)["observed_vertices"] = first.size();
    std::shared_ptr<std::vector<std::array<double, 2>>> curve;
    const SearchResult* result = nullptr;
    StationaryFit sfit;
    KappaFit kfit;
    if (mode == "stationary") {
        sfit = fit_stationary(data, model.params, space, search);
        result = &sfit.search;
        (*report)["params"] = to_json(sfit.params);
        (*report)["noise"] = sfit.noise_variance;
    } else {
        if (!model.kappa_field) fail(ErrorCode::ConfigError, "fit.mode = kappa_field needs a kernel.kappa_field block");
        std::optional<MetropolisOptions> mcmc;
        if (cfg.get<bool>("fit.mcmc", false)) {
            MetropolisOptions mo;
            mo.iterations = cfg.get<int>("fit.mcmc_iterations", 2000);
            mo.burn_in = cfg.get<int>("fit.mcmc_burn_in", 500);
            mo.seed = cfg.get<std::uint64_t>("seed", 0);
            mcmc = mo;
        }
        const auto lat = vertex_latitudes(mesh->complex);
        std::vector<double> obs_lat;
        for (int v : first.vertex_ids) obs_lat.push_back(lat[v]);
        kfit = fit_kappa_field(data, model.params, *model.kappa_field, obs_lat, model.target, search,
                               cfg.get<double>("fit.weight_bound", 5.0), mcmc);
        result = &kfit.search;
        (*report)["params"] = to_json(model.params);
        const auto& w = kfit.field.weights;
        (*report)["weights"] = std::vector<double>(w.data(), w.data() + w.size());
        (*report)["centers"] = std::vector<double>(kfit.field.centers.data(), kfit.field.centers.data() + w.size());
        (*report)["basis_lengthscale"] = kfit.field.basis_lengthscale;
        if (kfit.mcmc) {
            (*report)["mcmc"] = {{"acceptance_rate", kfit.mcmc->acceptance_rate}, {"scale", kfit.mcmc->scale},
                                 {"evaluations", kfit.mcmc->evaluations}};
        }
        curve = std::make_shared<std::vector<std::array<double, 2>>>();
        const int lo = static_cast<int>(std::ceil(kfit.field.centers.minCoeff() - 1e-9));
        const int hi = static_cast<int>(std::floor(kfit.field.centers.maxCoeff() + 1e-9));
        for (int deg = lo; deg <= hi; ++deg) curve->push_back({double(deg), kfit.field(deg)});
    }
    (*report)["status"] = to_string(result->status);
    (*report)["evaluations"] = result->evaluations;
    (*report)["initial_nll"] = result->initial_value;
    (*report)["final_nll"] = result->best_value;
    (*report)["trace"] = result->trace;
    out.add([report, curve, dir = out.dir()] {
        write_json(dir / "fit.json", *report);
        if (curve) {
            io::write_atomic(dir / "kappa_curve.csv", [&](std::ostream& o) {
                o << "lat_deg,kappa\n";
                for (const auto& [lat, k] : *curve) o << lat << ',' << k << '\n';
            });
        }
    });
    std::cout << "status=" << to_string(result->status) << " evaluations=" << result->evaluations
              << " initial_nll=" << result->initial_value << " final_nll=" << result->best_value << '\n';
}

void cmd_metrics(const Config& cfg, Outputs& out)
{
    const auto mesh = build_mesh(cfg);
    const int nv = mesh.complex.num_vertices();
    const auto pred = io::read_field_csv(cfg.require<std::string>("metrics.predicted"), nv);
    const auto truth = io::read_field_csv(cfg.require<std::string>("metrics.truth"), nv);
    std::vector<char> mask;
    if (cfg.has("metrics.mask")) {
        const auto t = io::read_csv(cfg.require<std::string>("metrics.mask"));
        const int id = t.column("vertex_id"), mk = t.column("mask");
        if (id < 0 || mk < 0) fail(ErrorCode::IoError, "mask CSV needs vertex_id,mask");
        mask.assign(nv, 0);
        for (const auto& r : t.rows) {
            const int v = static_cast<int>(r[id]);
            if (v < 0 || v >= nv) fail(ErrorCode::IoError, "mask vertex out of range");
            mask[v] = r[mk] != 0.0;
        }
    }
    const auto m = metrics(pred, truth, mask);
    auto j = std::make_shared<Json>(Json{{"mse", m.mse},
                                         {"component_mse", {m.component_mse.x(), m.component_mse.y(), m.component_mse.z()}},
                                         {"mean_norm", m.mean_norm},
                                         {"count", m.count}});
    out.add([j, dir = out.dir()] { write_json(dir / "metrics.json", *j); });
    std::cout << "mse=" << m.mse << " mean_norm=" << m.mean_norm << '\n';
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"meshvec: Gaussian vector fields on triangle meshes"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "Show help for every command");

    std::string config_path;
    std::vector<std::string> overrides;
    std::string output_dir;
    bool harmonic = false;

    struct Spec
    {
        const char* name;
        const char* help;
        unsigned bit;
    };
    const std::vector<Spec> specs{
        {"meshgen", "Generate or load a mesh and write it out", kMeshgen},
        {"spectrum", "Laplacian eigenpairs (spectrum.csv, eigenvectors.csv)", kSpectrum},
        {"sample", "Draw prior or posterior vector-field samples", kSample},
        {"predict", "Posterior mean and variance from observations", kPredict},
        {"fit", "Fit kernel hyperparameters or a kappa field by NLL", kFit},
        {"metrics", "Compare a predicted field against truth", kMetrics},
    };
    std::map<std::string, CLI::App*> subs;
    for (const auto& s : specs) {
        auto* sub = app.add_subcommand(s.name, s.help);
        sub->add_option("-c,--config", config_path, "TOML (or .json) run config")->check(CLI::ExistingFile);
        sub->add_option("-s,--set", overrides, "Override a config key: dotted.key=value (repeatable)");
        sub->add_option("-o,--output", output_dir, "Output directory (overrides output_dir)");
        if (s.bit == kSpectrum) sub->add_flag("--harmonic", harmonic, "Also compute harmonic 1-forms and report H");
        sub->footer(keys_footer(s.bit));
        subs[s.name] = sub;
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        Json root = Json::object();
        if (!config_path.empty()) root = config::load(config_path);
        for (const auto& o : overrides) config::apply_override(root, o);
        if (!output_dir.empty()) root["output_dir"] = output_dir;
        const Config cfg(root);
        Outputs out(cfg.get<std::string>("output_dir", "out"));

        const auto start = std::chrono::steady_clock::now();
        if (subs["meshgen"]->parsed()) cmd_meshgen(cfg, out);
        else if (subs["spectrum"]->parsed()) cmd_spectrum(cfg, out, harmonic);
        else if (subs["sample"]->parsed()) cmd_sample(cfg, out);
        else if (subs["predict"]->parsed()) cmd_predict(cfg, out);
        else if (subs["fit"]->parsed()) cmd_fit(cfg, out);
        else if (subs["metrics"]->parsed()) cmd_metrics(cfg, out);
        out.commit();
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::cerr << "done in " << secs << " s, outputs in " << out.dir().string() << '\n';
        return 0;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_code(e.code());
    } catch (const Json::exception& e) {
        std::cerr << "error: config: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }
}

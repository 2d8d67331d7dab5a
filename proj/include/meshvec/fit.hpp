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

#include <meshvec/gp.hpp>
#include <meshvec/kernels.hpp>

#include <Eigen/Core>

#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace meshvec {

/// One searchable hyperparameter. Positive parameters are searched in log space.
struct ParamBound
{
    std::string name;
    double lower = 0.0;
    double upper = 0.0;
    double start = 0.0;
    bool log_scale = true;
};

struct SearchOptions
{
    int budget = 300;           ///< maximum objective evaluations
    double initial_step = 0.5;  ///< in search coordinates (log units when log_scale)
    double min_step = 1e-3;
};

enum class FitStatus { converged, budget_exhausted };

inline const char* to_string(FitStatus s)
{
    return s == FitStatus::converged ? "converged" : "budget_exhausted";
}

struct SearchResult
{
    Eigen::VectorXd best;         ///< parameter values (natural scale)
    double best_value = std::numeric_limits<double>::infinity();
    double initial_value = std::numeric_limits<double>::infinity();
    std::vector<double> trace;    ///< best objective after each evaluation
    int evaluations = 0;
    FitStatus status = FitStatus::converged;
};

using Objective = std::function<double(const Eigen::VectorXd&)>;

/// Bounded Hooke-Jeeves pattern search. Objective failures count as +inf.
inline SearchResult pattern_search(const Objective& objective, std::span<const ParamBound> bounds,
                                   const SearchOptions& options = {})
{
    if (bounds.empty()) fail(ErrorCode::ConfigError, "parameter space is empty");
    const Eigen::Index n = static_cast<Eigen::Index>(bounds.size());
    Eigen::VectorXd lo(n), hi(n), x(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& b = bounds[i];
        if (!(b.lower <= b.start && b.start <= b.upper)) {
            fail(ErrorCode::ConfigError, "start of " + b.name + " lies outside its bounds");
        }
        if (b.log_scale && !(b.lower > 0.0)) fail(ErrorCode::ConfigError, "log-scale bound of " + b.name + " must be positive");
        lo[i] = b.log_scale ? std::log(b.lower) : b.lower;
        hi[i] = b.log_scale ? std::log(b.upper) : b.upper;
        x[i] = b.log_scale ? std::log(b.start) : b.start;
    }
    auto natural = [&](const Eigen::VectorXd& z) {
        Eigen::VectorXd p(n);
        for (Eigen::Index i = 0; i < n; ++i) p[i] = bounds[i].log_scale ? std::exp(z[i]) : z[i];
        return p;
    };

    SearchResult r;
    Eigen::VectorXd best_z = x;
    auto eval = [&](const Eigen::VectorXd& z) {
        double v = std::numeric_limits<double>::infinity();
        try {
            v = objective(natural(z));
        } catch (const Error& e) {
            if (e.code() != ErrorCode::SingularSystem) throw;
        }
        if (!std::isfinite(v)) v = std::numeric_limits<double>::infinity();
        ++r.evaluations;
        if (v < r.best_value) {
            r.best_value = v;
            best_z = z;
        }
        r.trace.push_back(r.best_value);
        return v;
    };
    auto exhausted = [&] { return r.evaluations >= options.budget; };

    double fx = eval(x);
    r.initial_value = fx;
    Eigen::VectorXd step = Eigen::VectorXd::Constant(n, options.initial_step);

    // Coordinate probes around base; returns the best point found.
    auto explore = [&](Eigen::VectorXd base, double& fbase) {
        for (Eigen::Index i = 0; i < n && !exhausted(); ++i) {
            for (double dir : {1.0, -1.0}) {
                if (exhausted()) break;
                Eigen::VectorXd t = base;
                t[i] = std::clamp(t[i] + dir * step[i], lo[i], hi[i]);
                if (t[i] == base[i]) continue;
                const double ft = eval(t);
                if (ft < fbase) {
                    base = t;
                    fbase = ft;
                    break;
                }
            }
        }
        return base;
    };

    while (!exhausted()) {
        double fnew = fx;
        Eigen::VectorXd xnew = explore(x, fnew);
        if (fnew < fx) {
            // Pattern moves while they keep improving.
            while (!exhausted()) {
                const Eigen::VectorXd jump = (2.0 * xnew - x).cwiseMax(lo).cwiseMin(hi);
                x = xnew;
                fx = fnew;
                double fj = eval(jump);
                const Eigen::VectorXd xj = explore(jump, fj);
                if (fj < fx) {
                    xnew = xj;
                    fnew = fj;
                } else {
                    break;
                }
            }
        } else {
            step *= 0.5;
            if (step.maxCoeff() < options.min_step) break;
        }
    }
    r.status = exhausted() ? FitStatus::budget_exhausted : FitStatus::converged;
    r.best = natural(best_z);
    return r;
}

struct MetropolisOptions
{
    int iterations = 2000;        ///< total steps including burn-in
    int burn_in = 500;            ///< adaptation and discard phase
    double initial_scale = 0.1;
    double target_acceptance = 0.25;
    std::uint64_t seed = 0;
};

struct MetropolisResult
{
    Eigen::VectorXd mean;       ///< posterior mean after burn-in
    double acceptance_rate = 0.0;
    double scale = 0.0;         ///< final proposal scale
    int evaluations = 0;
};

/// Random-walk Metropolis with an isotropic Gaussian proposal whose scale is
/// adapted during burn-in toward the target acceptance rate.
inline MetropolisResult random_walk_metropolis(const Objective& log_density, const Eigen::VectorXd& start,
                                               const MetropolisOptions& options = {})
{
    if (options.burn_in >= options.iterations) fail(ErrorCode::ConfigError, "burn-in must be shorter than the chain");
    std::mt19937_64 rng(options.seed);
    std::normal_distribution<double> normal;
    std::uniform_real_distribution<double> uniform;
    auto logp = [&](const Eigen::VectorXd& x) {
        try {
            const double v = log_density(x);
            return std::isfinite(v) ? v : -std::numeric_limits<double>::infinity();
        } catch (const Error& e) {
            if (e.code() != ErrorCode::SingularSystem) throw;
            return -std::numeric_limits<double>::infinity();
        }
    };

    MetropolisResult r;
    Eigen::VectorXd x = start;
    double lx = logp(x);
    ++r.evaluations;
    double log_scale = std::log(options.initial_scale);
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(x.size());
    int kept = 0, accepted = 0;
    for (int it = 0; it < options.iterations; ++it) {
        Eigen::VectorXd prop = x;
        const double s = std::exp(log_scale);
        for (Eigen::Index i = 0; i < prop.size(); ++i) prop[i] += s * normal(rng);
        const double lp = logp(prop);
        ++r.evaluations;
        const bool accept = std::log(uniform(rng)) < lp - lx;
        if (accept) {
            x = prop;
            lx = lp;
        }
        if (it < options.burn_in) {
            log_scale += ((accept ? 1.0 : 0.0) - options.target_acceptance) / std::sqrt(it + 1.0);
        } else {
            sum += x;
            ++kept;
            accepted += accept ? 1 : 0;
        }
    }
    r.mean = sum / kept;
    r.acceptance_rate = static_cast<double>(accepted) / kept;
    r.scale = std::exp(log_scale);
    return r;
}

// ---------------------------------------------------------------------------
// GP hyperparameter fitting
// ---------------------------------------------------------------------------

/// Observed values (possibly several realizations at the same vertices) and
/// the bases restricted to the observed rows.
struct FitData
{
    VectorBases observed;   ///< basis fields at observed vertices only
    double area = 1.0;      ///< normalization area of the full mesh
    Eigen::MatrixXd y;      ///< 3m x N, one column per realization
    double noise_variance = default_noise_variance;

    int num_observed() const { return observed.num_vertices; }
};

inline ModeFields restrict_rows(const ModeFields& m, const std::vector<Eigen::Index>& rows)
{
    ModeFields r;
    r.fields = m.fields(rows, Eigen::all);
    r.eigenvalues = m.eigenvalues;
    r.modes = m.modes;
    return r;
}

inline FitData make_fit_data(const VectorBases& bases, double area, std::span<const int> vertex_ids,
                             Eigen::MatrixXd y, double noise_variance)
{
    const auto rows = component_rows(vertex_ids);
    if (y.rows() != static_cast<Eigen::Index>(rows.size())) {
        fail(ErrorCode::DimensionMismatch, "observations must have 3 rows per observed vertex");
    }
    FitData d;
    d.observed.diverging = restrict_rows(bases.diverging, rows);
    d.observed.curling = restrict_rows(bases.curling, rows);
    d.observed.harmonic = bases.harmonic.cols() > 0 ? Eigen::MatrixXd(bases.harmonic(rows, Eigen::all))
                                                    : Eigen::MatrixXd(rows.size(), 0);
    d.observed.num_vertices = static_cast<int>(vertex_ids.size());
    d.area = area;
    d.y = std::move(y);
    d.noise_variance = noise_variance;
    return d;
}

inline FitData make_fit_data(const VectorBases& bases, double area, const Observations& obs)
{
    return make_fit_data(bases, area, obs.vertex_ids, obs.y(), obs.noise_variance);
}

/// NLL of the (possibly non-stationary) kernel on the fit data. Empty
/// `kappa_per_vertex` means stationary.
inline double fit_nll(const FitData& data, const KernelParams& p, double noise_variance,
                      const Eigen::VectorXd& kappa_per_vertex = {},
                      NonstationaryTarget target = NonstationaryTarget::both)
{
    const int m = data.num_observed();
    const auto vertices = all_vertices(m);
    std::vector<Eigen::MatrixXd> blocks;
    auto add = [&](const ModeFields& modes, double s2, double kappa, bool varying) {
        if (!(s2 > 0.0) || modes.count() == 0) return;
        const Eigen::VectorXd k = varying ? kappa_per_vertex : Eigen::VectorXd::Constant(m, kappa);
        blocks.push_back(std::sqrt(s2) * mode_factor(modes, p.nu, k, data.area, vertices));
    };
    const bool ns = kappa_per_vertex.size() > 0;
    add(data.observed.diverging, p.sigma_d2, p.kappa_d, ns && target != NonstationaryTarget::curling);
    add(data.observed.curling, p.sigma_c2, p.kappa_c, ns && target != NonstationaryTarget::diverging);
    if (p.sigma_h2 > 0.0 && data.observed.harmonic.cols() > 0) {
        blocks.push_back(std::sqrt(p.sigma_h2) * data.observed.harmonic);
    }
    Eigen::Index cols = 0;
    for (const auto& b : blocks) cols += b.cols();
    Eigen::MatrixXd f(3 * m, cols);
    cols = 0;
    for (const auto& b : blocks) {
        f.middleCols(cols, b.cols()) = b;
        cols += b.cols();
    }
    return nll_lowrank(f, data.y, noise_variance);
}

/// Names accepted in a stationary parameter space. sigma_* are standard
/// deviations; noise is the observation noise variance.
inline const std::vector<std::string>& stationary_param_names()
{
    static const std::vector<std::string> names{"nu", "kappa_d", "kappa_c", "sigma_d", "sigma_c", "sigma_h", "noise"};
    return names;
}

inline void apply_param(const std::string& name, double value, KernelParams& p, double& noise)
{
    if (name == "nu") p.nu = value;
    else if (name == "kappa_d") p.kappa_d = value;
    else if (name == "kappa_c") p.kappa_c = value;
    else if (name == "sigma_d") p.sigma_d2 = value * value;
    else if (name == "sigma_c") p.sigma_c2 = value * value;
    else if (name == "sigma_h") p.sigma_h2 = value * value;
    else if (name == "noise") noise = value;
    else fail(ErrorCode::ConfigError, "unknown fit parameter: " + name);
}

struct StationaryFit
{
    KernelParams params;
    double noise_variance = 0.0;
    SearchResult search;
};

/// Minimizes the NLL over the named hyperparameters, others fixed at `start`.
inline StationaryFit fit_stationary(const FitData& data, const KernelParams& start, std::span<const ParamBound> space,
                                    const SearchOptions& options = {})
{
    for (const auto& b : space) {
        KernelParams dummy;
        double n = 0.0;
        apply_param(b.name, b.start, dummy, n);
    }
    auto unpack = [&](const Eigen::VectorXd& x, KernelParams& p, double& noise) {
        p = start;
        noise = data.noise_variance;
        for (std::size_t i = 0; i < space.size(); ++i) apply_param(space[i].name, x[i], p, noise);
    };
    auto objective = [&](const Eigen::VectorXd& x) {
        KernelParams p;
        double noise;
        unpack(x, p, noise);
        return fit_nll(data, p, noise);
    };
    StationaryFit out;
    out.search = pattern_search(objective, space, options);
    unpack(out.search.best, out.params, out.noise_variance);
    return out;
}

struct KappaFit
{
    KappaField field;
    SearchResult search;                   ///< objective is NLL + |w|^2 / 2
    std::optional<MetropolisResult> mcmc;  ///< set when the sampler ran
};

/// Length-scale field per observed vertex.
inline Eigen::VectorXd kappa_at(const KappaField& field, std::span<const double> coords)
{
    Eigen::VectorXd k(coords.size());
    for (std::size_t i = 0; i < coords.size(); ++i) k[i] = field(coords[i]);
    return k;
}

/// Fits the RBF weights of a KappaField under standard normal priors: MAP by
/// pattern search (weights bounded to +-weight_bound), then optionally a
/// random-walk Metropolis chain started at the MAP whose posterior mean
/// replaces the weights.
inline KappaFit fit_kappa_field(const FitData& data, const KernelParams& params, const KappaField& initial,
                                std::span<const double> observed_coords, NonstationaryTarget target,
                                const SearchOptions& options = {}, double weight_bound = 5.0,
                                std::optional<MetropolisOptions> mcmc = std::nullopt)
{
    if (initial.size() == 0) fail(ErrorCode::ConfigError, "kappa field has no basis functions");
    if (static_cast<int>(observed_coords.size()) != data.num_observed()) {
        fail(ErrorCode::DimensionMismatch, "one coordinate per observed vertex is required");
    }
    auto neg_log_post = [&](const Eigen::VectorXd& w) {
        KappaField f = initial;
        f.weights = w;
        return fit_nll(data, params, data.noise_variance, kappa_at(f, observed_coords), target) + 0.5 * w.squaredNorm();
    };
    std::vector<ParamBound> space;
    for (int b = 0; b < initial.size(); ++b) {
        const double w0 = std::clamp(initial.weights[b], -weight_bound, weight_bound);
        space.push_back({"w" + std::to_string(b), -weight_bound, weight_bound, w0, false});
    }
    KappaFit out;
    out.field = initial;
    out.search = pattern_search(neg_log_post, space, options);
    out.field.weights = out.search.best;
    if (mcmc) {
        out.mcmc = random_walk_metropolis([&](const Eigen::VectorXd& w) { return -neg_log_post(w); },
                                          out.search.best, *mcmc);
        out.field.weights = out.mcmc->mean;
    }
    return out;
}

} // namespace meshvec

#include "aodmap/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "aodmap/error.hpp"
#include "aodmap/posterior.hpp"
#include "aodmap/rng.hpp"

namespace aodmap {

std::vector<double> default_tau_levels() {
    return {0.0, 0.05, 0.1, 0.15, 0.2, 0.3, 0.4, 0.6, 0.8, 1.0, 1.5, 3.0, 6.0};
}

std::vector<std::vector<double>> default_mixtures(int components) {
    const int M = components;
    std::vector<std::vector<double>> out;
    for (int i = 0; i < M; ++i) {
        std::vector<double> v(M, 0.0);
        v[i] = 1.0;
        out.push_back(std::move(v));
    }
    for (int i = 0; i < M; ++i)
        for (int j = i + 1; j < M; ++j) {
            std::vector<double> v(M, 0.0);
            v[i] = v[j] = 0.5;
            out.push_back(std::move(v));
        }
    for (int i = 0; i < M; ++i)
        for (int j = i + 1; j < M; ++j)
            for (int k = j + 1; k < M; ++k) {
                std::vector<double> v(M, 0.0);
                v[i] = v[j] = v[k] = 1.0 / 3.0;
                out.push_back(std::move(v));
            }
    return out;
}

GridSearchConfig default_grid_config(int components, std::vector<double> sigma2_fixed) {
    GridSearchConfig g;
    g.tau_levels = default_tau_levels();
    g.candidate_mixtures = default_mixtures(components);
    const int active = static_cast<int>(sigma2_fixed.size());
    g.sigma2_fixed = std::move(sigma2_fixed);
    g.success_threshold = static_cast<double>(active);  // about twice the expected misfit under correct noise
    return g;
}

void validate(const GridSearchConfig& config, const ForwardModel& forward) {
    if (config.tau_levels.empty() || config.candidate_mixtures.empty())
        throw ConfigError("grid search needs at least one tau level and one mixture");
    for (std::size_t i = 0; i < config.tau_levels.size(); ++i) {
        const double t = config.tau_levels[i];
        if (t < forward.tau_min() || t > forward.tau_max()) throw ConfigError("grid tau level outside table range");
        if (i > 0 && !(t > config.tau_levels[i - 1])) throw ConfigError("grid tau levels must be ascending");
    }
    for (const auto& mix : config.candidate_mixtures) {
        if (static_cast<int>(mix.size()) != forward.components())
            throw ConfigError("grid mixture length does not match component count");
        double sum = 0.0;
        for (double v : mix) {
            if (v < 0.0) throw ConfigError("grid mixture has a negative weight");
            sum += v;
        }
        if (std::abs(sum - 1.0) > 1e-9) throw ConfigError("grid mixture does not sum to one");
    }
    if (static_cast<int>(config.sigma2_fixed.size()) != forward.channels())
        throw ConfigError("sigma2_fixed length does not match channel count");
    for (double s : config.sigma2_fixed)
        if (!(s > 0.0)) throw ConfigError("sigma2_fixed entries must be positive");
}

GridResult grid_search_retrieve(const Scene& scene, const ForwardModel& forward, const GridSearchConfig& config) {
    validate(scene);
    validate(config, forward);
    const int P = scene.regions();
    const int C = scene.channels;
    const int M = forward.components();
    const std::size_t L = config.tau_levels.size();
    const std::size_t K = config.candidate_mixtures.size();

    // Model radiance for every grid pair, computed once.
    std::vector<double> models(L * K * C);
    for (std::size_t l = 0; l < L; ++l)
        for (std::size_t k = 0; k < K; ++k)
            forward.radiance(config.tau_levels[l], config.candidate_mixtures[k],
                             std::span<double>(models.data() + (l * K + k) * C, static_cast<std::size_t>(C)));

    GridResult out;
    out.tau.assign(P, 0.0);
    out.theta.assign(static_cast<std::size_t>(P) * M, 0.0);
    out.success.assign(P, false);
    out.min_chi2.assign(P, 0.0);

    std::vector<double> theta_acc(M);
    for (int p = 0; p < P; ++p) {
        const auto obs = scene.row(p);
        double best = std::numeric_limits<double>::infinity();
        std::size_t best_l = 0, best_k = 0;
        double tau_acc = 0.0;
        std::fill(theta_acc.begin(), theta_acc.end(), 0.0);
        long hits = 0;
        for (std::size_t l = 0; l < L; ++l) {
            for (std::size_t k = 0; k < K; ++k) {
                const std::span<const double> model(models.data() + (l * K + k) * C, static_cast<std::size_t>(C));
                const double chi = local::misfit(obs, scene.channel_mask, config.sigma2_fixed, model);
                if (chi < best) {
                    best = chi;
                    best_l = l;
                    best_k = k;
                }
                if (chi < config.success_threshold) {
                    ++hits;
                    tau_acc += config.tau_levels[l];
                    const auto& mix = config.candidate_mixtures[k];
                    for (int m = 0; m < M; ++m) theta_acc[m] += mix[m];
                }
            }
        }
        out.min_chi2[p] = best;
        auto row = std::span<double>(out.theta.data() + static_cast<std::size_t>(p) * M, static_cast<std::size_t>(M));
        if (hits > 0) {
            out.success[p] = true;
            out.tau[p] = tau_acc / static_cast<double>(hits);
            double sum = 0.0;
            for (int m = 0; m < M; ++m) sum += theta_acc[m];
            for (int m = 0; m < M; ++m) row[m] = theta_acc[m] / sum;
        } else {
            out.tau[p] = config.tau_levels[best_l];
            const auto& mix = config.candidate_mixtures[best_k];
            std::copy(mix.begin(), mix.end(), row.begin());
        }
    }
    return out;
}

MetricsReport compute_metrics(const std::vector<double>& retrieved, const std::vector<double>& reference,
                              const std::vector<bool>& mask) {
    if (retrieved.size() != reference.size()) throw ConfigError("metric fields differ in length");
    if (!mask.empty() && mask.size() != retrieved.size()) throw ConfigError("metric mask length differs");
    const std::size_t n = retrieved.size();

    MetricsReport r;
    r.mask = mask.empty() ? std::vector<bool>(n, true) : mask;
    r.errors.assign(n, std::numeric_limits<double>::quiet_NaN());

    double sum_x = 0.0, sum_y = 0.0, sum_e = 0.0, sum_e2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (!r.mask[i]) continue;
        const double e = retrieved[i] - reference[i];
        r.errors[i] = e;
        sum_x += retrieved[i];
        sum_y += reference[i];
        sum_e += e;
        sum_e2 += e * e;
        ++r.count;
    }
    if (r.count == 0) throw ConfigError("metrics need at least one valid entry");
    const double N = r.count;
    r.rmse = std::sqrt(sum_e2 / N);
    r.mean_bias = sum_e / N;

    const double mx = sum_x / N, my = sum_y / N;
    double sxx = 0.0, syy = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (!r.mask[i]) continue;
        const double dx = retrieved[i] - mx, dy = reference[i] - my;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if (r.count >= 2 && sxx > 0.0 && syy > 0.0) {
        r.correlation = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
        r.correlation_defined = true;
    } else {
        r.correlation = std::numeric_limits<double>::quiet_NaN();
    }
    return r;
}

StabilityReport stability_bounds(const Scene& scene, const ForwardModel& forward, const LatticeTopology& lattice,
                                 const SolverConfig& config, const std::vector<std::uint64_t>& seeds) {
    if (seeds.size() < 2) throw ConfigError("stability bounds need at least two initializations");
    const int P = scene.regions();
    StabilityReport rep;
    std::vector<std::vector<double>> runs;
    for (std::uint64_t seed : seeds) {
        SolverConfig cfg = config;
        cfg.seed = seed;
        const RetrievalState init = init_state(scene, forward, InitStrategy::random, cfg.hyper, seed);
        MapResult res = run_map(scene, forward, lattice, cfg, init);
        if (!res.trace.converged) {
            rep.failed_seeds.push_back(seed);
            continue;
        }
        runs.push_back(std::move(res.state.tau));
    }
    rep.runs_used = static_cast<int>(runs.size());
    rep.mean.assign(P, std::numeric_limits<double>::quiet_NaN());
    rep.std.assign(P, std::numeric_limits<double>::quiet_NaN());
    if (runs.empty()) return rep;
    const double n = static_cast<double>(runs.size());
    for (int p = 0; p < P; ++p) {
        double s = 0.0;
        for (const auto& r : runs) s += r[p];
        const double mean = s / n;
        rep.mean[p] = mean;
        if (runs.size() < 2) continue;
        double v = 0.0;
        for (const auto& r : runs) v += (r[p] - mean) * (r[p] - mean);
        rep.std[p] = std::sqrt(v / (n - 1.0));
    }
    return rep;
}

StabilityReport stability_bounds(const Scene& scene, const ForwardModel& forward, const LatticeTopology& lattice,
                                 const SolverConfig& config, int n_inits) {
    if (n_inits < 2) throw ConfigError("stability bounds need n_inits >= 2");
    std::vector<std::uint64_t> seeds;
    for (int i = 0; i < n_inits; ++i) seeds.push_back(mix_seed(config.seed, static_cast<std::uint64_t>(i)));
    return stability_bounds(scene, forward, lattice, config, seeds);
}

}  // namespace aodmap

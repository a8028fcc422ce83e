#include "aodmap/mcmc_solver.hpp"

#include <chrono>
#include <cmath>
#include <numeric>
#include <string>

#include "aodmap/error.hpp"
#include "aodmap/posterior.hpp"

namespace aodmap {

void validate(const McmcConfig& config, int components) {
    if (config.iterations < 1) throw ConfigError("mcmc iterations must be positive");
    if (config.burn_in < 0 || config.burn_in >= config.iterations) throw ConfigError("burn_in must lie in [0, iterations)");
    if (config.thin < 1) throw ConfigError("thin must be at least 1");
    if (!(config.delta > 0.0)) throw ConfigError("mcmc delta must be positive");
    if (!(config.gamma_shape_floor > 0.0)) throw ConfigError("gamma_shape_floor must be positive");
    validate(config.hyper);
    if (static_cast<int>(config.hyper.alpha.size()) != components)
        throw ConfigError("alpha length does not match component count");
}

double mh_acceptance_probability(double log_ratio) {
    if (log_ratio >= 0.0) return 1.0;
    return std::exp(log_ratio);
}

SweepStats mh_sweep(RetrievalState& state, const Scene& scene, const ForwardModel& forward,
                    const LatticeTopology& lattice, const McmcConfig& config, int sweep_index, AcceptRule rule) {
    std::vector<int> all;
    std::span<const int> regions = config.active_regions;
    if (config.active_regions.empty()) {
        all.resize(static_cast<std::size_t>(scene.regions()));
        std::iota(all.begin(), all.end(), 0);
        regions = all;
    }

    SweepSettings settings;
    settings.delta = config.delta;
    settings.gamma_shape_floor = config.gamma_shape_floor;
    settings.hyper = &config.hyper;
    settings.seed = config.seed;
    settings.rule = rule;
    settings.update_theta = config.update_theta;

    PatchView view;
    view.regions = regions;
    const SweepStats stats = sweep_patch(scene, forward, lattice, settings, state, view, sweep_index);
    if (config.update_hyper) apply_hyper_updates(state, scene, forward, lattice, config.hyper, nullptr);
    return stats;
}

McmcResult run_mcmc(const Scene& scene, const ForwardModel& forward, const LatticeTopology& lattice,
                    const McmcConfig& config, const RetrievalState& init) {
    validate(scene);
    validate(config, forward.components());
    if (lattice.regions() != scene.regions()) throw ConfigError("lattice does not match scene dimensions");
    validate(init, scene, config.hyper);
    check_initial_posterior(scene, init, config.hyper, forward, lattice);

    using clock = std::chrono::steady_clock;
    const int P = scene.regions();
    const int M = init.components;
    const int C = scene.channels;

    McmcResult out;
    RetrievalState state = init;
    out.trace.initial_log_posterior = log_posterior(scene, state, config.hyper, forward, lattice);

    std::vector<double> tau_sum(P, 0.0), tau_sq(P, 0.0), theta_sum(static_cast<std::size_t>(P) * M, 0.0);
    std::vector<double> sigma_sum(C, 0.0);
    double kappa_sum = 0.0;

    // Samples are summed as deviations from the first retained draw to keep the
    // variance accumulation well-conditioned.
    std::vector<double> shift;

    for (int it = 0; it < config.iterations; ++it) {
        const auto t0 = clock::now();
        const SweepStats stats = mh_sweep(state, scene, forward, lattice, config, it, AcceptRule::metropolis);

        SweepRecord rec;
        rec.sweep = it + 1;
        rec.log_posterior = log_posterior(scene, state, config.hyper, forward, lattice);
        rec.tau_accepted = stats.tau_accepted;
        rec.theta_accepted = stats.theta_accepted;
        rec.proposals = stats.proposals;
        rec.kappa = state.kappa;
        rec.elapsed_ms = std::chrono::duration<double, std::milli>(clock::now() - t0).count();
        out.trace.sweeps.push_back(rec);

        if (it < config.burn_in || (it - config.burn_in) % config.thin != 0) continue;
        if (shift.empty()) shift = state.tau;
        for (int p = 0; p < P; ++p) {
            const double d = state.tau[p] - shift[p];
            tau_sum[p] += d;
            tau_sq[p] += d * d;
        }
        for (std::size_t i = 0; i < theta_sum.size(); ++i) theta_sum[i] += state.theta[i];
        for (int c = 0; c < C; ++c) sigma_sum[c] += state.sigma2[c];
        kappa_sum += state.kappa;
        ++out.samples;
        if (config.keep_samples) out.tau_samples.push_back(state.tau);
    }
    out.trace.converged = true;

    const double n = out.samples;
    out.mean = state;
    out.tau_std.assign(P, 0.0);
    for (int p = 0; p < P; ++p) {
        const double m = tau_sum[p] / n;
        out.mean.tau[p] = shift[p] + m;
        out.tau_std[p] = std::sqrt(std::max(tau_sq[p] / n - m * m, 0.0));
    }
    for (int p = 0; p < P; ++p) {
        auto row = out.mean.theta_row(p);
        for (int m = 0; m < M; ++m) row[m] = theta_sum[static_cast<std::size_t>(p) * M + m] / n;
        project_to_simplex_floor(row);
    }
    for (int c = 0; c < C; ++c) out.mean.sigma2[c] = sigma_sum[c] / n;
    out.mean.kappa = kappa_sum / n;
    return out;
}

}  // namespace aodmap

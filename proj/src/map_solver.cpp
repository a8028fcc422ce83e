#include "aodmap/map_solver.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "aodmap/baselines.hpp"
#include "aodmap/error.hpp"
#include "aodmap/posterior.hpp"

namespace aodmap {

void validate(const SolverConfig& config, int components) {
    if (!(config.delta > 0.0)) throw ConfigError("solver delta must be positive");
    if (!(config.epsilon > 0.0)) throw ConfigError("solver epsilon must be positive");
    if (config.max_sweeps < 1) throw ConfigError("max_sweeps must be at least 1");
    if (!(config.gamma_shape_floor > 0.0)) throw ConfigError("gamma_shape_floor must be positive");
    validate(config.hyper);
    if (static_cast<int>(config.hyper.alpha.size()) != components)
        throw ConfigError("alpha has " + std::to_string(config.hyper.alpha.size()) + " entries but the model has " +
                          std::to_string(components) + " components");
}

KappaUpdate update_kappa(const RetrievalState& state, const LatticeTopology& lattice, double kappa_cap) {
    const int P = lattice.regions();
    if (P < 4) throw DomainError("kappa update requires at least 4 regions");
    const double s = local::edge_sum_of_squares(state.tau, lattice);
    if (!(s > 0.0)) return {kappa_cap, true};
    return {std::min((P - 3) / s, kappa_cap), false};
}

std::vector<double> channel_sse(const RetrievalState& state, const Scene& scene, const ForwardModel& forward) {
    const int C = scene.channels;
    std::vector<double> sse(C, 0.0), model(C);
    for (int p = 0; p < scene.regions(); ++p) {
        forward.radiance(state.tau[p], state.theta_row(p), model);
        const auto obs = scene.row(p);
        for (int c = 0; c < C; ++c) {
            const double r = obs[c] - model[c];
            sse[c] += r * r;
        }
    }
    return sse;
}

std::vector<double> update_sigma(const RetrievalState& state, const Scene& scene, const ForwardModel& forward,
                                 double sigma2_floor) {
    const auto sse = channel_sse(state, scene, forward);
    const double denom = scene.regions() + 2.0;
    std::vector<double> out = state.sigma2;
    out.resize(static_cast<std::size_t>(scene.channels), 1.0);
    for (int c = 0; c < scene.channels; ++c) {
        if (!scene.channel_mask[c]) continue;
        out[c] = std::max(sse[c] / denom, sigma2_floor);
    }
    return out;
}

TauDraw draw_tau(double neighbor_mean, double delta, double tau_max, Rng& rng) {
    std::normal_distribution<double> normal(neighbor_mean, delta);
    const double raw = normal(rng);
    TauDraw d;
    d.center = neighbor_mean;
    d.value = std::clamp(raw, 0.0, tau_max);
    d.clamped = d.value != raw;
    return d;
}

void draw_theta(std::span<const double> concentration, double shape_floor, Rng& rng, std::span<double> out) {
    double sum = 0.0;
    for (std::size_t k = 0; k < concentration.size(); ++k) {
        std::gamma_distribution<double> gamma(std::max(concentration[k], shape_floor), 1.0);
        out[k] = gamma(rng);
        sum += out[k];
    }
    if (sum > 0.0) {
        for (std::size_t k = 0; k < concentration.size(); ++k) out[k] /= sum;
    }
    project_to_simplex_floor(out.first(concentration.size()));
}

double propose_tau(const RetrievalState& state, const LatticeTopology& lattice, int p, double delta, double tau_max,
                   Rng& rng) {
    const auto nb = lattice.neighbors(p);
    double mean = 0.0;
    for (int q : nb) mean += state.tau[q];
    mean /= static_cast<double>(nb.size());
    return draw_tau(mean, delta, tau_max, rng).value;
}

std::vector<double> propose_theta(const RetrievalState& state, const LatticeTopology& lattice, int p,
                                  double shape_floor, Rng& rng) {
    const int M = state.components;
    const auto nb = lattice.neighbors(p);
    std::vector<double> conc(M, 0.0), out(M);
    for (int q : nb) {
        const auto row = state.theta_row(q);
        for (int m = 0; m < M; ++m) conc[m] += row[m];
    }
    for (double& v : conc) v /= static_cast<double>(nb.size());
    draw_theta(conc, shape_floor, rng, out);
    return out;
}

namespace {

constexpr std::size_t kMaxChannels = 64;
constexpr std::size_t kMaxComponents = 32;

template <std::size_t N>
struct Scratch {
    std::array<double, N> fixed{};
    std::vector<double> heap;
    std::span<double> view;
    explicit Scratch(int n) {
        if (n <= static_cast<int>(N)) {
            view = {fixed.data(), static_cast<std::size_t>(n)};
        } else {
            heap.resize(static_cast<std::size_t>(n));
            view = heap;
        }
    }
};

double kappa_terms_delta(int P, double s, double k_old, double k_new) {
    return 0.5 * (P - 3) * (std::log(k_new) - std::log(k_old)) - 0.5 * s * (k_new - k_old);
}

double sigma_terms_delta(int P, double sse, double s_old, double s_new) {
    return -0.5 * (P + 2) * (std::log(s_new) - std::log(s_old)) - 0.5 * sse * (1.0 / s_new - 1.0 / s_old);
}

double closed_kappa(int P, double s, double cap) { return s > 0.0 ? std::min((P - 3) / s, cap) : cap; }

void record(const SweepHooks& hooks) {
    if (hooks.audit && hooks.running_f) hooks.audit->push_back(*hooks.running_f);
}

void advance(const SweepHooks& hooks, double df) {
    if (hooks.running_f) {
        *hooks.running_f += df;
        record(hooks);
    }
}

}  // namespace

SweepStats sweep_patch(const Scene& scene, const ForwardModel& forward, const LatticeTopology& lattice,
                       const SweepSettings& settings, RetrievalState& live, const PatchView& view, int sweep_index,
                       const SweepHooks& hooks) {
    const HyperParams& hyper = *settings.hyper;
    const int M = live.components;
    const int C = scene.channels;
    const int P = scene.regions();
    const double tau_hi = std::min(hyper.tau_max, forward.tau_max());
    const double inv_two_delta2 = 1.0 / (2.0 * settings.delta * settings.delta);

    Scratch<kMaxChannels> model_cur(C), model_new(C);
    Scratch<kMaxComponents> theta_new(M), conc(M);
    std::array<double, 4> nb_tau{};

    auto source = [&](int q) -> const RetrievalState& {
        if (view.owner == nullptr || (*view.owner)[q] == view.patch) return live;
        return *view.snapshot;
    };

    SweepStats stats;
    for (int p : view.regions) {
        const auto nb = lattice.neighbors(p);
        const std::size_t n = nb.size();
        double mean = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            nb_tau[i] = source(nb[i]).tau[nb[i]];
            mean += nb_tau[i];
        }
        mean /= static_cast<double>(n);
        const std::span<const double> nbs(nb_tau.data(), n);
        const auto obs = scene.row(p);

        auto theta_p = live.theta_row(p);
        forward.radiance(live.tau[p], theta_p, model_cur.view);
        double chi_cur = local::misfit(obs, scene.channel_mask, live.sigma2, model_cur.view);

        // --- tau_p
        {
            Rng rng = stream_rng(settings.seed, sweep_index, p, Stream::tau_proposal);
            const TauDraw d = draw_tau(mean, settings.delta, tau_hi, rng);
            const double tau_old = live.tau[p];
            forward.radiance(d.value, theta_p, model_new.view);
            const double chi_new = local::misfit(obs, scene.channel_mask, live.sigma2, model_new.view);
            const double df = -(chi_new - chi_cur) + local::smoothness_delta(tau_old, d.value, nbs, live.kappa);

            bool accept = false;
            if (settings.rule == AcceptRule::greedy) {
                accept = df > 0.0;
            } else if (d.clamped) {
                // The target puts no mass on the clamp atoms.
                accept = false;
            } else if (tau_old <= 0.0 || tau_old >= tau_hi) {
                accept = true;
            } else {
                const double a = tau_old - d.center;
                const double b = d.value - d.center;
                const double log_ratio = df - (a * a - b * b) * inv_two_delta2;
                Rng urng = stream_rng(settings.seed, sweep_index, p, Stream::tau_accept);
                accept = std::log(std::uniform_real_distribution<double>(0.0, 1.0)(urng)) < log_ratio;
            }
            ++stats.proposals;
            if (accept) {
                if (hooks.book) {
                    double ds = 0.0;
                    for (double q : nbs) ds += (d.value - q) * (d.value - q) - (tau_old - q) * (tau_old - q);
                    hooks.book->edge_ss += ds;
                    for (int c = 0; c < C; ++c) {
                        const double rn = obs[c] - model_new.view[c];
                        const double ro = obs[c] - model_cur.view[c];
                        hooks.book->sse[c] += rn * rn - ro * ro;
                    }
                }
                live.tau[p] = d.value;
                std::swap(model_cur.view, model_new.view);
                chi_cur = chi_new;
                ++stats.tau_accepted;
                stats.delta_sum += df;
                advance(hooks, df);
            }
            if (hooks.book) {
                const double k_new = closed_kappa(P, hooks.book->edge_ss, hyper.kappa_cap);
                const double dk = kappa_terms_delta(P, hooks.book->edge_ss, live.kappa, k_new);
                if (dk >= 0.0 && k_new != live.kappa) {
                    live.kappa = k_new;
                    advance(hooks, dk);
                }
            }
        }

        // --- theta_p
        if (settings.update_theta) {
            std::fill(conc.view.begin(), conc.view.end(), 0.0);
            for (std::size_t i = 0; i < n; ++i) {
                const auto row = source(nb[i]).theta_row(nb[i]);
                for (int m = 0; m < M; ++m) conc.view[m] += row[m];
            }
            for (double& v : conc.view) v /= static_cast<double>(n);

            Rng rng = stream_rng(settings.seed, sweep_index, p, Stream::theta_proposal);
            draw_theta(conc.view, settings.gamma_shape_floor, rng, theta_new.view);
            forward.radiance(live.tau[p], theta_new.view, model_new.view);
            const double chi_new = local::misfit(obs, scene.channel_mask, live.sigma2, model_new.view);
            const double df = -(chi_new - chi_cur) + local::dirichlet_log_term(theta_new.view, hyper.alpha) -
                              local::dirichlet_log_term(theta_p, hyper.alpha);

            bool accept = false;
            if (settings.rule == AcceptRule::greedy) {
                accept = df > 0.0;
            } else {
                // Hastings correction for the Dirichlet proposal q(theta) = Dir(theta; a).
                double log_q_ratio = 0.0;
                for (int m = 0; m < M; ++m) {
                    const double a1 = std::max(conc.view[m], settings.gamma_shape_floor) - 1.0;
                    log_q_ratio += a1 * (std::log(std::max(theta_p[m], kThetaFloor)) -
                                         std::log(std::max(theta_new.view[m], kThetaFloor)));
                }
                Rng urng = stream_rng(settings.seed, sweep_index, p, Stream::theta_accept);
                accept = std::log(std::uniform_real_distribution<double>(0.0, 1.0)(urng)) < df + log_q_ratio;
            }
            if (accept) {
                if (hooks.book) {
                    for (int c = 0; c < C; ++c) {
                        const double rn = obs[c] - model_new.view[c];
                        const double ro = obs[c] - model_cur.view[c];
                        hooks.book->sse[c] += rn * rn - ro * ro;
                    }
                }
                std::copy(theta_new.view.begin(), theta_new.view.end(), theta_p.begin());
                ++stats.theta_accepted;
                stats.delta_sum += df;
                advance(hooks, df);
            }
        }

        if (hooks.book) {
            for (int c = 0; c < C; ++c) {
                if (!scene.channel_mask[c]) continue;
                const double sse = std::max(hooks.book->sse[c], 0.0);
                const double s_new = std::max(sse / (P + 2.0), hyper.sigma2_floor);
                const double ds = sigma_terms_delta(P, sse, live.sigma2[c], s_new);
                if (ds >= 0.0 && s_new != live.sigma2[c]) {
                    live.sigma2[c] = s_new;
                    advance(hooks, ds);
                }
            }
        }
    }
    return stats;
}

double apply_hyper_updates(RetrievalState& state, const Scene& scene, const ForwardModel& forward,
                           const LatticeTopology& lattice, const HyperParams& hyper, bool* kappa_degenerate) {
    const int P = scene.regions();
    double total = 0.0;

    const double s = local::edge_sum_of_squares(state.tau, lattice);
    const KappaUpdate ku = update_kappa(state, lattice, hyper.kappa_cap);
    if (kappa_degenerate) *kappa_degenerate = ku.degenerate;
    const double dk = kappa_terms_delta(P, s, state.kappa, ku.kappa);
    if (dk >= 0.0) {
        state.kappa = ku.kappa;
        total += dk;
    }

    const auto sse = channel_sse(state, scene, forward);
    for (int c = 0; c < scene.channels; ++c) {
        if (!scene.channel_mask[c]) continue;
        const double s_new = std::max(sse[c] / (P + 2.0), hyper.sigma2_floor);
        const double ds = sigma_terms_delta(P, sse[c], state.sigma2[c], s_new);
        if (ds >= 0.0) {
            state.sigma2[c] = s_new;
            total += ds;
        }
    }
    return total;
}

void check_initial_posterior(const Scene& scene, const RetrievalState& state, const HyperParams& hyper,
                             const ForwardModel& forward, const LatticeTopology& lattice) {
    const PosteriorTerms t = posterior_terms(scene, state, hyper, forward, lattice);
    auto check = [](double v, const char* name) {
        if (!std::isfinite(v))
            throw InitializationError(std::string("initial log-posterior term '") + name +
                                      "' is not finite (" + std::to_string(v) + ")");
    };
    check(t.kappa_norm, "kappa normalization");
    check(t.noise_norm, "noise normalization");
    check(t.misfit, "misfit");
    check(t.smoothness, "smoothness");
    check(t.dirichlet, "dirichlet");
    check(t.gamma_norm, "gamma normalization");
}

MapResult run_sweep_loop(const Scene& scene, const ForwardModel& forward, const LatticeTopology& lattice,
                         const SolverConfig& config, RetrievalState init, const SweepExecutor& executor,
                         bool exact_deltas) {
    validate(scene);
    validate(config, forward.components());
    if (forward.channels() != scene.channels) throw ConfigError("forward model and scene channel counts differ");
    if (forward.tau_min() > 0.0) throw ConfigError("forward model must cover tau = 0");
    if (lattice.regions() != scene.regions()) throw ConfigError("lattice does not match scene dimensions");
    validate(init, scene, config.hyper);
    check_initial_posterior(scene, init, config.hyper, forward, lattice);

    using clock = std::chrono::steady_clock;
    MapResult result{std::move(init), {}};
    RetrievalState& state = result.state;
    SweepTrace& trace = result.trace;

    double f = log_posterior(scene, state, config.hyper, forward, lattice);
    trace.initial_log_posterior = f;
    if (config.audit && exact_deltas) trace.audit.push_back(f);

    double prev = f;
    for (int s = 0; s < config.max_sweeps; ++s) {
        const auto t0 = clock::now();
        SweepHooks hooks;
        if (exact_deltas) {
            hooks.running_f = &f;
            hooks.audit = config.audit ? &trace.audit : nullptr;
        }
        const SweepStats stats = executor(state, s, hooks);

        if (config.cadence == HyperCadence::per_sweep) {
            bool degenerate = false;
            const double dh = apply_hyper_updates(state, scene, forward, lattice, config.hyper, &degenerate);
            trace.kappa_degenerate = degenerate;
            if (exact_deltas) {
                f += dh;
                if (config.audit) trace.audit.push_back(f);
            }
        } else {
            trace.kappa_degenerate = !(local::edge_sum_of_squares(state.tau, lattice) > 0.0);
        }
        if (!exact_deltas) f = log_posterior(scene, state, config.hyper, forward, lattice);

        SweepRecord rec;
        rec.sweep = s + 1;
        rec.log_posterior = f;
        rec.tau_accepted = stats.tau_accepted;
        rec.theta_accepted = stats.theta_accepted;
        rec.proposals = stats.proposals;
        rec.kappa = state.kappa;
        rec.elapsed_ms = std::chrono::duration<double, std::milli>(clock::now() - t0).count();
        trace.sweeps.push_back(rec);

        if (s == 0) {
            trace.epsilon = config.relative_epsilon
                                ? std::max(config.epsilon * std::abs(f), std::numeric_limits<double>::min())
                                : config.epsilon;
        }
        if (std::abs(f - prev) < trace.epsilon) {
            trace.converged = true;
            break;
        }
        prev = f;
    }
    return result;
}

MapResult run_map(const Scene& scene, const ForwardModel& forward, const LatticeTopology& lattice,
                  const SolverConfig& config, const RetrievalState& init) {
    std::vector<int> order(static_cast<std::size_t>(scene.regions()));
    for (int p = 0; p < scene.regions(); ++p) order[p] = p;

    SweepSettings settings;
    settings.delta = config.delta;
    settings.gamma_shape_floor = config.gamma_shape_floor;
    settings.hyper = &config.hyper;
    settings.seed = config.seed;
    settings.rule = AcceptRule::greedy;

    const bool per_region = config.cadence == HyperCadence::per_region;
    auto executor = [&](RetrievalState& state, int sweep, const SweepHooks& hooks) {
        PatchView view;
        view.regions = order;
        if (!per_region) return sweep_patch(scene, forward, lattice, settings, state, view, sweep, hooks);
        HyperBook book;
        book.edge_ss = local::edge_sum_of_squares(state.tau, lattice);
        book.sse = channel_sse(state, scene, forward);
        SweepHooks with_book = hooks;
        with_book.book = &book;
        return sweep_patch(scene, forward, lattice, settings, state, view, sweep, with_book);
    };
    return run_sweep_loop(scene, forward, lattice, config, init, executor, true);
}

RetrievalState init_state(const Scene& scene, const ForwardModel& forward, InitStrategy strategy,
                          const HyperParams& hyper, std::uint64_t seed) {
    const int P = scene.regions();
    const int M = forward.components();
    RetrievalState state;
    state.components = M;
    state.kappa = 1.0;
    state.sigma2.assign(static_cast<std::size_t>(scene.channels), 1.0);
    state.tau.assign(static_cast<std::size_t>(P), 0.2);
    state.theta.assign(static_cast<std::size_t>(P) * M, 1.0 / M);

    switch (strategy) {
        case InitStrategy::flat:
            break;
        case InitStrategy::random: {
            Rng rng(derive_seed(seed, "init"));
            std::uniform_real_distribution<double> uni(0.05, std::min(1.0, hyper.tau_max));
            std::gamma_distribution<double> gamma(1.0, 1.0);
            for (int p = 0; p < P; ++p) {
                state.tau[p] = uni(rng);
                auto row = state.theta_row(p);
                double sum = 0.0;
                for (double& v : row) sum += (v = gamma(rng));
                for (double& v : row) v /= sum;
                project_to_simplex_floor(row);
            }
            break;
        }
        case InitStrategy::coarse_grid: {
            GridSearchConfig gc = default_grid_config(M, std::vector<double>(scene.channels, 1.0));
            gc.success_threshold = 0.0;  // pure argmin
            const GridResult grid = grid_search_retrieve(scene, forward, gc);
            const LatticeTopology lat = build_lattice(scene.width, scene.height);
            for (int p = 0; p < P; ++p) {
                const auto nb = lat.neighbors(p);
                double t = grid.tau[p];
                auto row = state.theta_row(p);
                for (int m = 0; m < M; ++m) row[m] = grid.theta[static_cast<std::size_t>(p) * M + m];
                for (int q : nb) {
                    t += grid.tau[q];
                    for (int m = 0; m < M; ++m) row[m] += grid.theta[static_cast<std::size_t>(q) * M + m];
                }
                state.tau[p] = std::clamp(t / static_cast<double>(nb.size() + 1), 0.0, hyper.tau_max);
                project_to_simplex_floor(row);
            }
            break;
        }
    }
    state.sigma2 = update_sigma(state, scene, forward, hyper.sigma2_floor);
    return state;
}

}  // namespace aodmap

#include "aodmap/posterior.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <string>

#include "aodmap/error.hpp"

namespace aodmap {

namespace local {

double misfit(std::span<const double> observed, const std::vector<bool>& mask, std::span<const double> sigma2,
              std::span<const double> model) {
    double sum = 0.0;
    for (std::size_t c = 0; c < observed.size(); ++c) {
        if (!mask[c]) continue;
        const double r = observed[c] - model[c];
        sum += r * r / (2.0 * sigma2[c]);
    }
    return sum;
}

double dirichlet_log_term(std::span<const double> theta, std::span<const double> alpha) {
    double sum = 0.0;
    for (std::size_t m = 0; m < theta.size(); ++m) {
        const double a1 = alpha[m] - 1.0;
        if (a1 == 0.0) continue;
        sum += a1 * std::log(std::max(theta[m], kThetaFloor));
    }
    return sum;
}

double smoothness_delta(double tau_old, double tau_new, std::span<const double> neighbor_tau, double kappa) {
    double diff = 0.0;
    for (double q : neighbor_tau) {
        const double dn = tau_new - q;
        const double d0 = tau_old - q;
        diff += dn * dn - d0 * d0;
    }
    return -0.5 * kappa * diff;
}

double edge_sum_of_squares(std::span<const double> tau, const LatticeTopology& lattice) {
    double s = 0.0;
    for (const Edge& e : lattice.edges()) {
        const double d = tau[e.a] - tau[e.b];
        s += d * d;
    }
    return s;
}

}  // namespace local

namespace {

constexpr std::size_t kMaxChannels = 64;

// Model radiance into a stack buffer; channel counts stay small (<= 36 for real instruments).
struct RadianceBuffer {
    std::array<double, kMaxChannels> fixed{};
    std::vector<double> heap;
    std::span<double> view;

    explicit RadianceBuffer(int channels) {
        if (channels <= static_cast<int>(kMaxChannels)) {
            view = {fixed.data(), static_cast<std::size_t>(channels)};
        } else {
            heap.resize(static_cast<std::size_t>(channels));
            view = heap;
        }
    }
};

double region_misfit_at(const Scene& scene, int p, std::span<const double> sigma2, const ForwardModel& forward,
                        double tau, std::span<const double> theta) {
    RadianceBuffer buf(scene.channels);
    forward.radiance(tau, theta, buf.view);
    return local::misfit(scene.row(p), scene.channel_mask, sigma2, buf.view);
}

void gather_neighbors(const RetrievalState& state, const LatticeTopology& lattice, int p, std::array<double, 4>& out) {
    const auto nb = lattice.neighbors(p);
    for (std::size_t i = 0; i < nb.size(); ++i) out[i] = state.tau[nb[i]];
}

}  // namespace

double chi_square_region(const Scene& scene, const RetrievalState& state, const ForwardModel& forward, int p) {
    if (p < 0 || p >= scene.regions()) throw DomainError("region index " + std::to_string(p) + " out of range");
    return region_misfit_at(scene, p, state.sigma2, forward, state.tau[p], state.theta_row(p));
}

PosteriorTerms posterior_terms(const Scene& scene, const RetrievalState& state, const HyperParams& hyper,
                               const ForwardModel& forward, const LatticeTopology& lattice) {
    const int P = scene.regions();
    PosteriorTerms t;

    t.kappa_norm = 0.5 * (P - 3) * std::log(state.kappa);

    const double two_pi = 2.0 * std::numbers::pi;
    for (int c = 0; c < scene.channels; ++c) {
        if (!scene.channel_mask[c]) continue;
        t.noise_norm -= 0.5 * (P + 2) * std::log(two_pi * state.sigma2[c]);
    }

    for (int p = 0; p < P; ++p) t.misfit -= chi_square_region(scene, state, forward, p);

    t.smoothness = -0.5 * state.kappa * local::edge_sum_of_squares(state.tau, lattice);

    for (int p = 0; p < P; ++p) t.dirichlet += local::dirichlet_log_term(state.theta_row(p), hyper.alpha);

    double alpha_sum = 0.0;
    for (double a : hyper.alpha) {
        alpha_sum += a;
        t.gamma_norm -= std::lgamma(a);
    }
    t.gamma_norm += std::lgamma(alpha_sum);
    return t;
}

double log_posterior(const Scene& scene, const RetrievalState& state, const HyperParams& hyper,
                     const ForwardModel& forward, const LatticeTopology& lattice) {
    return posterior_terms(scene, state, hyper, forward, lattice).total();
}

double delta_log_posterior_tau(const Scene& scene, const RetrievalState& state, const ForwardModel& forward,
                               const LatticeTopology& lattice, int p, double tau_new) {
    const double tau_old = state.tau[p];
    if (tau_new == tau_old) return 0.0;
    const auto theta = state.theta_row(p);
    const double chi_old = region_misfit_at(scene, p, state.sigma2, forward, tau_old, theta);
    const double chi_new = region_misfit_at(scene, p, state.sigma2, forward, tau_new, theta);

    std::array<double, 4> nb{};
    gather_neighbors(state, lattice, p, nb);
    const std::span<const double> nbs(nb.data(), static_cast<std::size_t>(lattice.neighbor_count(p)));
    return -(chi_new - chi_old) + local::smoothness_delta(tau_old, tau_new, nbs, state.kappa);
}

double delta_log_posterior_theta(const Scene& scene, const RetrievalState& state, const HyperParams& hyper,
                                 const ForwardModel& forward, int p, std::span<const double> theta_new) {
    const auto theta_old = state.theta_row(p);
    if (std::equal(theta_old.begin(), theta_old.end(), theta_new.begin(), theta_new.end())) return 0.0;
    const double tau = state.tau[p];
    const double chi_old = region_misfit_at(scene, p, state.sigma2, forward, tau, theta_old);
    const double chi_new = region_misfit_at(scene, p, state.sigma2, forward, tau, theta_new);
    return -(chi_new - chi_old) + local::dirichlet_log_term(theta_new, hyper.alpha) -
           local::dirichlet_log_term(theta_old, hyper.alpha);
}

double delta_log_posterior_region(const Scene& scene, const RetrievalState& state, const HyperParams& hyper,
                                  const ForwardModel& forward, const LatticeTopology& lattice, int p,
                                  double tau_new, std::span<const double> theta_new) {
    const double tau_old = state.tau[p];
    const auto theta_old = state.theta_row(p);
    const double chi_old = region_misfit_at(scene, p, state.sigma2, forward, tau_old, theta_old);
    const double chi_new = region_misfit_at(scene, p, state.sigma2, forward, tau_new, theta_new);

    std::array<double, 4> nb{};
    gather_neighbors(state, lattice, p, nb);
    const std::span<const double> nbs(nb.data(), static_cast<std::size_t>(lattice.neighbor_count(p)));
    return -(chi_new - chi_old) + local::smoothness_delta(tau_old, tau_new, nbs, state.kappa) +
           local::dirichlet_log_term(theta_new, hyper.alpha) - local::dirichlet_log_term(theta_old, hyper.alpha);
}

}  // namespace aodmap

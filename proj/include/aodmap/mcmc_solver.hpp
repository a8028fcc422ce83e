#pragma once

#include <cstdint>
#include <vector>

#include "aodmap/forward_model.hpp"
#include "aodmap/lattice.hpp"
#include "aodmap/map_solver.hpp"
#include "aodmap/types.hpp"

namespace aodmap {

struct McmcConfig {
    int iterations = 1000;
    int burn_in = 200;
    int thin = 1;
    double delta = 0.05;
    std::uint64_t seed = 1;
    double gamma_shape_floor = 1e-3;
    HyperParams hyper;
    bool update_hyper = true;         // closed-form kappa / sigma2 after every sweep
    bool update_theta = true;
    std::vector<int> active_regions;  // empty = every region
    bool keep_samples = false;        // retain thinned tau fields
};

void validate(const McmcConfig& config, int components);

// min(1, exp(log_ratio)).
double mh_acceptance_probability(double log_ratio);

// One Metropolis-Hastings-within-Gibbs sweep over every active tau_p and
// theta_p, using the MAP proposals with their Hastings corrections, followed
// by the closed-form kappa / sigma2 updates. `rule = greedy` turns it into the
// MAP coordinate search on the same proposal stream.
SweepStats mh_sweep(RetrievalState& state, const Scene& scene, const ForwardModel& forward,
                    const LatticeTopology& lattice, const McmcConfig& config, int sweep_index,
                    AcceptRule rule = AcceptRule::metropolis);

struct McmcResult {
    RetrievalState mean;         // posterior mean of tau, theta, sigma2, kappa
    std::vector<double> tau_std; // per-region posterior standard deviation
    SweepTrace trace;
    int samples = 0;
    std::vector<std::vector<double>> tau_samples;  // when keep_samples
};

McmcResult run_mcmc(const Scene& scene, const ForwardModel& forward, const LatticeTopology& lattice,
                    const McmcConfig& config, const RetrievalState& init);

}  // namespace aodmap

#pragma once

#include <cstdint>
#include <vector>

#include "aodmap/forward_model.hpp"
#include "aodmap/types.hpp"

namespace aodmap {

enum class Sparsity { dense, sparse };

struct TruthOptions {
    int width = 16;
    int height = 16;
    int components = 8;
    double smoothness = 2.0;  // Gaussian kernel sd in regions; 0 = white noise, inf = constant
    Sparsity sparsity = Sparsity::dense;
    double tau_lo = 0.05;
    double tau_hi = 0.6;
    int blob_size = 4;  // typical composition blob edge in regions; 1 = independent rows
    std::uint64_t seed = 1;
};

void validate(const TruthOptions& options);

struct Truth {
    int width = 0;
    int height = 0;
    int components = 0;
    std::vector<double> tau;    // P
    std::vector<double> theta;  // P x M
};

// Smoothed, rescaled tau field and blockwise Dirichlet composition field
// (concentration 1 for dense, 0.125 for sparse).
Truth gen_truth(const TruthOptions& options);

// Noiseless observations: row p = L^RT(tau_p, theta_p), every channel unmasked.
Scene render(const Truth& truth, const ForwardModel& forward, double region_size_km = 17.6);

// L_obs = max(0, L * (1 + level * z)), z standard normal per (region, channel).
Scene add_noise(const Scene& scene, double level, std::uint64_t seed);

struct SimScene {
    Truth truth;
    Scene scene;
    double noise_level = 0.0;
};

// gen_truth -> render -> add_noise, with the noise seed derived from options.seed.
SimScene simulate(const TruthOptions& options, const ForwardModel& forward, double noise_level);

// State holding the truth fields, with sigma2 and kappa at their closed forms.
RetrievalState truth_state(const Truth& truth, const Scene& scene, const ForwardModel& forward,
                           const HyperParams& hyper);

}  // namespace aodmap

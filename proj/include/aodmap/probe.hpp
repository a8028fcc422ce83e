#pragma once

#include <span>
#include <vector>

#include "aodmap/forward_model.hpp"
#include "aodmap/lattice.hpp"
#include "aodmap/types.hpp"

namespace aodmap {

struct SliceSpec {
    int region = 0;
    int component = 0;
    double tau_lo = 0.0, tau_hi = 1.0;
    double theta_lo = 0.0, theta_hi = 1.0;
    int tau_points = 41;
    int theta_points = 41;
};

// values[i * tau.size() + j] = -log f with theta_m = theta[i], tau_p = tau[j].
struct PosteriorSlice {
    std::vector<double> tau;
    std::vector<double> theta;
    std::vector<double> values;

    double at(int i_theta, int j_tau) const { return values[static_cast<std::size_t>(i_theta) * tau.size() + j_tau]; }
};

// Sets row[m] = share and rescales the other entries so their ratios are kept
// (spread evenly when they are all zero), then applies the simplex floor.
void set_component_share(std::span<double> row, int m, double share);

// Negative log-posterior over a (theta_m, tau_p) grid, every other coordinate fixed.
PosteriorSlice posterior_slice(const Scene& scene, const ForwardModel& forward, const LatticeTopology& lattice,
                               const RetrievalState& state, const HyperParams& hyper, const SliceSpec& spec);

// For each theta row of the slice, the tau value at the row minimum.
struct CouplingReport {
    std::vector<double> argmin_tau;
    double spread = 0.0;  // max - min of argmin_tau
    bool coupled = false;  // spread > 0
};

CouplingReport coupling(const PosteriorSlice& slice);

struct DominanceMap {
    std::vector<int> index;     // component position, 0-based
    std::vector<int> id;        // catalogue id (position + 1 when no ids are given)
    std::vector<double> share;
};

// Per-row argmax; ties go to the lowest component id.
DominanceMap dominance_map(std::span<const double> theta, int components, std::span<const int> ids = {});

// Fraction of regions whose dominant components agree.
double dominance_agreement(const DominanceMap& a, const DominanceMap& b);

}  // namespace aodmap

#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "aodmap/forward_model.hpp"
#include "aodmap/lattice.hpp"
#include "aodmap/map_solver.hpp"
#include "aodmap/types.hpp"

namespace aodmap {

// Independent per-region search over a fixed (tau level x mixture) grid.
struct GridSearchConfig {
    std::vector<double> tau_levels;
    std::vector<std::vector<double>> candidate_mixtures;
    std::vector<double> sigma2_fixed;  // per channel
    double success_threshold = 0.0;
};

void validate(const GridSearchConfig& config, const ForwardModel& forward);

// 13 AOD levels on [0, 6], denser at the low end.
std::vector<double> default_tau_levels();

// One-hot, pairwise 50/50 and equal three-way mixtures over M components
// (M + C(M,2) + C(M,3) candidates; 92 for M = 8).
std::vector<std::vector<double>> default_mixtures(int components);

GridSearchConfig default_grid_config(int components, std::vector<double> sigma2_fixed);

struct GridResult {
    std::vector<double> tau;    // P
    std::vector<double> theta;  // P x M
    std::vector<bool> success;
    std::vector<double> min_chi2;
};

// Regions whose best misfit is below the threshold return the mean tau and mean
// (renormalized) theta over every grid pair below the threshold; the rest return
// the argmin pair and success = false.
GridResult grid_search_retrieve(const Scene& scene, const ForwardModel& forward, const GridSearchConfig& config);

struct MetricsReport {
    double rmse = 0.0;
    double correlation = 0.0;  // NaN when undefined
    bool correlation_defined = false;
    double mean_bias = 0.0;
    int count = 0;
    std::vector<double> errors;  // retrieved - reference; NaN outside the mask
    std::vector<bool> mask;
};

// Population (divide-by-N) conventions throughout. An empty mask selects every entry.
MetricsReport compute_metrics(const std::vector<double>& retrieved, const std::vector<double>& reference,
                              const std::vector<bool>& mask = {});

struct StabilityReport {
    std::vector<double> mean;  // per region
    std::vector<double> std;   // per region, sample (n - 1) convention
    int runs_used = 0;
    std::vector<std::uint64_t> failed_seeds;  // runs that hit max_sweeps, excluded
};

// MAP from several random initializations, one seed per run.
StabilityReport stability_bounds(const Scene& scene, const ForwardModel& forward, const LatticeTopology& lattice,
                                 const SolverConfig& config, const std::vector<std::uint64_t>& seeds);
StabilityReport stability_bounds(const Scene& scene, const ForwardModel& forward, const LatticeTopology& lattice,
                                 const SolverConfig& config, int n_inits);

}  // namespace aodmap

#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "aodmap/forward_model.hpp"
#include "aodmap/lattice.hpp"
#include "aodmap/rng.hpp"
#include "aodmap/types.hpp"

namespace aodmap {

enum class HyperCadence { per_region, per_sweep };
enum class InitStrategy { flat, coarse_grid, random };
enum class AcceptRule { greedy, metropolis };

struct SolverConfig {
    double delta = 0.05;      // sd of the tau proposal
    double epsilon = 1e-4;    // stop when |f_k - f_{k-1}| < epsilon
    bool relative_epsilon = true;  // epsilon is a fraction of |f| after the first sweep
    int max_sweeps = 200;
    std::uint64_t seed = 1;
    double gamma_shape_floor = 1e-3;
    HyperParams hyper;
    HyperCadence cadence = HyperCadence::per_sweep;
    bool audit = false;  // record f after every accepted update (sequential runs)
};

void validate(const SolverConfig& config, int components);

struct SweepRecord {
    int sweep = 0;
    double log_posterior = 0.0;
    int tau_accepted = 0;
    int theta_accepted = 0;
    int proposals = 0;  // per coordinate type
    double kappa = 0.0;
    double elapsed_ms = 0.0;

    double tau_accept_rate() const { return proposals ? static_cast<double>(tau_accepted) / proposals : 0.0; }
    double theta_accept_rate() const { return proposals ? static_cast<double>(theta_accepted) / proposals : 0.0; }
};

struct SweepTrace {
    double initial_log_posterior = 0.0;
    double epsilon = 0.0;  // absolute threshold in effect
    std::vector<SweepRecord> sweeps;
    std::vector<double> audit;
    bool converged = false;
    bool kappa_degenerate = false;
};

struct MapResult {
    RetrievalState state;
    SweepTrace trace;
};

// ---------------------------------------------------------------------------
// Closed-form hyperparameter updates

struct KappaUpdate {
    double kappa = 0.0;
    bool degenerate = false;  // constant tau field; kappa set to the cap
};

// (P - 3) / S with S the edge sum of squared tau differences, capped at kappa_cap.
KappaUpdate update_kappa(const RetrievalState& state, const LatticeTopology& lattice, double kappa_cap);

// Per unmasked channel SSE / (P + 2), floored; masked channels keep their value.
std::vector<double> update_sigma(const RetrievalState& state, const Scene& scene, const ForwardModel& forward,
                                 double sigma2_floor);

// Per-channel sum of squared residuals over all regions.
std::vector<double> channel_sse(const RetrievalState& state, const Scene& scene, const ForwardModel& forward);

// ---------------------------------------------------------------------------
// Proposals

struct TauDraw {
    double value = 0.0;   // clamped into [0, tau_max]
    double center = 0.0;  // neighbour mean
    bool clamped = false;
};

TauDraw draw_tau(double neighbor_mean, double delta, double tau_max, Rng& rng);

// Independent Gamma(max(concentration_k, shape_floor), 1) draws normalized onto
// the simplex, then floored at kThetaFloor.
void draw_theta(std::span<const double> concentration, double shape_floor, Rng& rng, std::span<double> out);

// Normal(neighbour mean of tau, delta^2) clamped into [0, tau_max].
double propose_tau(const RetrievalState& state, const LatticeTopology& lattice, int p, double delta, double tau_max,
                   Rng& rng);

// Dirichlet draw with concentration = neighbour mean of theta (floored).
std::vector<double> propose_theta(const RetrievalState& state, const LatticeTopology& lattice, int p,
                                  double shape_floor, Rng& rng);

// ---------------------------------------------------------------------------
// Sweep engine shared by the MAP, MCMC and patch-parallel drivers

struct SweepSettings {
    double delta = 0.05;
    double gamma_shape_floor = 1e-3;
    const HyperParams* hyper = nullptr;
    std::uint64_t seed = 1;
    AcceptRule rule = AcceptRule::greedy;
    bool update_theta = true;
};

// A subset of regions updated in order. Neighbours owned by another patch are
// read from the snapshot; everything else from the live state.
struct PatchView {
    std::span<const int> regions;
    const std::vector<int>* owner = nullptr;  // region -> patch; nullptr = every region is in-patch
    int patch = 0;
    const RetrievalState* snapshot = nullptr;
};

struct SweepStats {
    int tau_accepted = 0;
    int theta_accepted = 0;
    int proposals = 0;
    double delta_sum = 0.0;  // sum of accepted log-posterior changes
};

// Running per-sweep sufficient statistics for per-region kappa / sigma2 updates.
struct HyperBook {
    double edge_ss = 0.0;
    std::vector<double> sse;
};

struct SweepHooks {
    HyperBook* book = nullptr;          // non-null -> per-region hyperparameter cadence
    double* running_f = nullptr;        // running log-posterior, advanced by accepted deltas
    std::vector<double>* audit = nullptr;
};

SweepStats sweep_patch(const Scene& scene, const ForwardModel& forward, const LatticeTopology& lattice,
                       const SweepSettings& settings, RetrievalState& live, const PatchView& view, int sweep_index,
                       const SweepHooks& hooks = {});

// One sweep of executor(state, sweep_index, hooks) advances the state in place.
using SweepExecutor = std::function<SweepStats(RetrievalState&, int, const SweepHooks&)>;

// The outer loop: sweeps, per-sweep kappa / sigma2 updates, stopping rule.
// When exact_deltas is true the trace follows the running sum of accepted
// deltas; otherwise f is re-evaluated in full after every sweep.
MapResult run_sweep_loop(const Scene& scene, const ForwardModel& forward, const LatticeTopology& lattice,
                         const SolverConfig& config, RetrievalState init, const SweepExecutor& executor,
                         bool exact_deltas);

// Coordinate-wise stochastic search for the MAP estimate.
MapResult run_map(const Scene& scene, const ForwardModel& forward, const LatticeTopology& lattice,
                  const SolverConfig& config, const RetrievalState& init);

// Applies the closed-form kappa and sigma2 updates; returns the change in f
// (updates that would lower f through rounding are skipped).
double apply_hyper_updates(RetrievalState& state, const Scene& scene, const ForwardModel& forward,
                           const LatticeTopology& lattice, const HyperParams& hyper, bool* kappa_degenerate);

// Starting points: flat (tau = 0.2, uniform theta), coarse_grid (smoothed
// per-region grid-search argmin), random (tau ~ U(0.05, 1), theta ~ Dir(1)).
RetrievalState init_state(const Scene& scene, const ForwardModel& forward, InitStrategy strategy,
                          const HyperParams& hyper, std::uint64_t seed);

// Throws InitializationError naming the first non-finite term of f.
void check_initial_posterior(const Scene& scene, const RetrievalState& state, const HyperParams& hyper,
                             const ForwardModel& forward, const LatticeTopology& lattice);

}  // namespace aodmap

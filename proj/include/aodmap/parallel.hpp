#pragma once

#include <vector>

#include "aodmap/forward_model.hpp"
#include "aodmap/lattice.hpp"
#include "aodmap/map_solver.hpp"
#include "aodmap/types.hpp"

namespace aodmap {

struct PatchRect {
    int x0, y0, x1, y1;  // half-open [x0, x1) x [y0, y1)
    int area() const { return (x1 - x0) * (y1 - y0); }
};

// Non-overlapping contiguous rectangles covering the lattice.
struct PatchPartition {
    int n_patches = 0;
    std::vector<int> assignment;             // region -> patch id
    std::vector<std::vector<int>> patches;   // region lists, row-major within each patch
    std::vector<PatchRect> rects;
};

// Rectangles of near-equal area (largest / smallest <= 2).
// Throws ConfigError unless 1 <= n_patches <= P.
PatchPartition partition(const LatticeTopology& lattice, int n_patches);

struct ParallelOptions {
    int n_patches = 1;
    int threads = 0;  // 0 = min(n_patches, hardware threads)
};

struct SpeedupRecord {
    int n_patches = 0;
    int threads = 0;
    std::vector<double> sweep_ms;
    double total_ms = 0.0;
};

struct ParallelResult {
    RetrievalState state;
    SweepTrace trace;
    SpeedupRecord speedup;
};

// One barrier-synchronized sweep: each patch updates its regions in order
// against the live state for in-patch neighbours and `snapshot` for the rest.
// Hyperparameters are not touched.
SweepStats parallel_sweep(RetrievalState& state, const RetrievalState& snapshot, const Scene& scene,
                          const ForwardModel& forward, const LatticeTopology& lattice,
                          const PatchPartition& partition, const SolverConfig& config, int sweep_index,
                          int threads = 0);

// Full MAP loop with patch-parallel sweeps and global kappa / sigma2 updates
// after each barrier. Requires the per-sweep hyperparameter cadence.
ParallelResult run_map_parallel(const Scene& scene, const ForwardModel& forward, const LatticeTopology& lattice,
                                const SolverConfig& config, const ParallelOptions& options,
                                const RetrievalState& init);

}  // namespace aodmap

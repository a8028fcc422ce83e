#pragma once

#include <span>
#include <vector>

namespace aodmap {

// Entries of a composition row are clamped up to this value before any log.
inline constexpr double kThetaFloor = 1e-12;

// Observed radiance on a width x height lattice of regions, C channels each.
// Region p = y * width + x; radiance is row-major P x C.
struct Scene {
    int width = 0;
    int height = 0;
    int channels = 0;
    std::vector<double> radiance;
    std::vector<bool> channel_mask;  // true = channel available
    double region_size_km = 17.6;

    int regions() const { return width * height; }
    double at(int p, int c) const { return radiance[static_cast<std::size_t>(p) * channels + c]; }
    std::span<const double> row(int p) const {
        return {radiance.data() + static_cast<std::size_t>(p) * channels, static_cast<std::size_t>(channels)};
    }
    int active_channels() const;
};

// Throws ConfigError when the scene violates its invariants.
void validate(const Scene& scene);

struct HyperParams {
    std::vector<double> alpha;  // Dirichlet concentration, one per component
    double tau_max = 6.0;
    double sigma2_floor = 1e-12;
    double kappa_cap = 1e12;

    static HyperParams uniform(int components) {
        HyperParams h;
        h.alpha.assign(static_cast<std::size_t>(components), 1.0);
        return h;
    }
};

void validate(const HyperParams& hyper);

// Per-region AOD and composition plus the global noise and smoothness parameters.
struct RetrievalState {
    int components = 0;
    std::vector<double> tau;     // P
    std::vector<double> theta;   // P x M row-major
    std::vector<double> sigma2;  // C (masked channels carry an unused value)
    double kappa = 1.0;

    int regions() const { return static_cast<int>(tau.size()); }
    std::span<const double> theta_row(int p) const {
        return {theta.data() + static_cast<std::size_t>(p) * components, static_cast<std::size_t>(components)};
    }
    std::span<double> theta_row(int p) {
        return {theta.data() + static_cast<std::size_t>(p) * components, static_cast<std::size_t>(components)};
    }

    friend bool operator==(const RetrievalState&, const RetrievalState&) = default;
};

// Throws DomainError naming the first violated invariant.
void validate(const RetrievalState& state, const Scene& scene, const HyperParams& hyper);

// Clamps entries up to kThetaFloor and renormalizes the row to sum to one.
void project_to_simplex_floor(std::span<double> row);

}  // namespace aodmap

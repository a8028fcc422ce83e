#include "aodmap/types.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "aodmap/error.hpp"

namespace aodmap {

int Scene::active_channels() const {
    int n = 0;
    for (bool on : channel_mask) n += on ? 1 : 0;
    return n;
}

void validate(const Scene& scene) {
    if (scene.width < 1 || scene.height < 1) throw ConfigError("scene dimensions must be positive");
    if (scene.regions() < 4) throw ConfigError("scene must contain at least 4 regions");
    if (scene.channels < 1) throw ConfigError("scene must have at least one channel");
    if (scene.radiance.size() != static_cast<std::size_t>(scene.regions()) * scene.channels)
        throw ConfigError("radiance size does not match regions x channels");
    if (scene.channel_mask.size() != static_cast<std::size_t>(scene.channels))
        throw ConfigError("channel mask length does not match channel count");
    if (scene.active_channels() == 0) throw ConfigError("all channels are masked");
    for (std::size_t i = 0; i < scene.radiance.size(); ++i) {
        const double v = scene.radiance[i];
        if (!std::isfinite(v) || v < 0.0)
            throw ConfigError("radiance entry " + std::to_string(i) + " is negative or non-finite");
    }
}

void validate(const HyperParams& hyper) {
    if (hyper.alpha.empty()) throw ConfigError("alpha must have one entry per component");
    for (double a : hyper.alpha)
        if (!(a > 0.0) || !std::isfinite(a)) throw ConfigError("alpha entries must be positive and finite");
    if (!(hyper.tau_max > 0.0)) throw ConfigError("tau_max must be positive");
    if (!(hyper.sigma2_floor > 0.0)) throw ConfigError("sigma2_floor must be positive");
    if (!(hyper.kappa_cap > 0.0)) throw ConfigError("kappa_cap must be positive");
}

void validate(const RetrievalState& state, const Scene& scene, const HyperParams& hyper) {
    const int P = scene.regions();
    const int M = state.components;
    if (state.regions() != P) throw DomainError("tau length does not match region count");
    if (M < 1 || state.theta.size() != static_cast<std::size_t>(P) * M)
        throw DomainError("theta shape does not match regions x components");
    if (state.sigma2.size() != static_cast<std::size_t>(scene.channels))
        throw DomainError("sigma2 length does not match channel count");
    for (int p = 0; p < P; ++p) {
        const double t = state.tau[p];
        if (!(t >= 0.0 && t <= hyper.tau_max))
            throw DomainError("tau[" + std::to_string(p) + "] outside [0, tau_max]");
        const auto row = state.theta_row(p);
        double sum = 0.0;
        for (double v : row) {
            if (!(v >= 0.0)) throw DomainError("theta row " + std::to_string(p) + " has a negative entry");
            sum += v;
        }
        if (std::abs(sum - 1.0) > 1e-12) throw DomainError("theta row " + std::to_string(p) + " is not normalized");
    }
    for (int c = 0; c < scene.channels; ++c) {
        if (!scene.channel_mask[c]) continue;
        if (!(state.sigma2[c] >= hyper.sigma2_floor) || !std::isfinite(state.sigma2[c]))
            throw DomainError("sigma2[" + std::to_string(c) + "] below floor or non-finite");
    }
    if (!(state.kappa >= 0.0) || !std::isfinite(state.kappa)) throw DomainError("kappa negative or non-finite");
}

void project_to_simplex_floor(std::span<double> row) {
    double sum = 0.0;
    for (double& v : row) {
        if (!(v >= kThetaFloor)) v = kThetaFloor;  // also catches NaN
        sum += v;
    }
    for (double& v : row) v /= sum;
}

}  // namespace aodmap

#include "aodmap/probe.hpp"

#include <algorithm>
#include <limits>

#include "aodmap/error.hpp"
#include "aodmap/posterior.hpp"

namespace aodmap {

void set_component_share(std::span<double> row, int m, double share) {
    const int M = static_cast<int>(row.size());
    const double rest_old = 1.0 - row[m];
    const double rest_new = 1.0 - share;
    for (int k = 0; k < M; ++k) {
        if (k == m) continue;
        row[k] = rest_old > 0.0 ? row[k] * rest_new / rest_old : rest_new / (M - 1);
    }
    row[m] = share;
    project_to_simplex_floor(row);
}

namespace {

std::vector<double> axis(double lo, double hi, int n) {
    std::vector<double> a(n);
    for (int i = 0; i < n; ++i) a[i] = n == 1 ? lo : lo + (hi - lo) * i / (n - 1);
    return a;
}

}  // namespace

PosteriorSlice posterior_slice(const Scene& scene, const ForwardModel& forward, const LatticeTopology& lattice,
                               const RetrievalState& state, const HyperParams& hyper, const SliceSpec& spec) {
    if (spec.region < 0 || spec.region >= scene.regions()) throw ConfigError("slice region out of range");
    if (spec.component < 0 || spec.component >= state.components) throw ConfigError("slice component out of range");
    if (spec.tau_points < 1 || spec.theta_points < 1) throw ConfigError("slice resolution must be positive");
    if (spec.tau_lo < forward.tau_min() || spec.tau_hi > forward.tau_max() || spec.tau_lo > spec.tau_hi)
        throw ConfigError("slice tau range outside the forward model range");
    if (spec.theta_lo < 0.0 || spec.theta_hi > 1.0 || spec.theta_lo > spec.theta_hi)
        throw ConfigError("slice theta range must lie in [0, 1]");

    PosteriorSlice out;
    out.tau = axis(spec.tau_lo, spec.tau_hi, spec.tau_points);
    out.theta = axis(spec.theta_lo, spec.theta_hi, spec.theta_points);
    out.values.resize(out.tau.size() * out.theta.size());

    RetrievalState work = state;
    const auto base = state.theta_row(spec.region);
    for (std::size_t i = 0; i < out.theta.size(); ++i) {
        auto row = work.theta_row(spec.region);
        std::copy(base.begin(), base.end(), row.begin());
        set_component_share(row, spec.component, out.theta[i]);
        for (std::size_t j = 0; j < out.tau.size(); ++j) {
            work.tau[spec.region] = out.tau[j];
            out.values[i * out.tau.size() + j] = -log_posterior(scene, work, hyper, forward, lattice);
        }
    }
    return out;
}

CouplingReport coupling(const PosteriorSlice& slice) {
    CouplingReport r;
    const std::size_t nt = slice.tau.size();
    for (std::size_t i = 0; i < slice.theta.size(); ++i) {
        const auto first = slice.values.begin() + static_cast<std::ptrdiff_t>(i * nt);
        const auto it = std::min_element(first, first + static_cast<std::ptrdiff_t>(nt));
        r.argmin_tau.push_back(slice.tau[static_cast<std::size_t>(it - first)]);
    }
    const auto [lo, hi] = std::minmax_element(r.argmin_tau.begin(), r.argmin_tau.end());
    r.spread = *hi - *lo;
    r.coupled = r.spread > 0.0;
    return r;
}

DominanceMap dominance_map(std::span<const double> theta, int components, std::span<const int> ids) {
    const int M = components;
    if (M < 1 || theta.size() % static_cast<std::size_t>(M) != 0) throw ConfigError("theta field shape mismatch");
    if (!ids.empty() && static_cast<int>(ids.size()) != M) throw ConfigError("component id list length mismatch");
    const int P = static_cast<int>(theta.size() / M);
    auto id_of = [&](int k) { return ids.empty() ? k + 1 : ids[k]; };

    DominanceMap d;
    d.index.resize(P);
    d.id.resize(P);
    d.share.resize(P);
    for (int p = 0; p < P; ++p) {
        int best = 0;
        for (int k = 1; k < M; ++k) {
            const double v = theta[static_cast<std::size_t>(p) * M + k];
            const double b = theta[static_cast<std::size_t>(p) * M + best];
            if (v > b || (v == b && id_of(k) < id_of(best))) best = k;
        }
        d.index[p] = best;
        d.id[p] = id_of(best);
        d.share[p] = theta[static_cast<std::size_t>(p) * M + best];
    }
    return d;
}

double dominance_agreement(const DominanceMap& a, const DominanceMap& b) {
    if (a.index.size() != b.index.size() || a.index.empty()) throw ConfigError("dominance maps differ in size");
    std::size_t same = 0;
    for (std::size_t i = 0; i < a.index.size(); ++i) same += a.index[i] == b.index[i];
    return static_cast<double>(same) / static_cast<double>(a.index.size());
}

}  // namespace aodmap

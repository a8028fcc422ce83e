#include "aodmap/forward_model.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <random>
#include <set>

#include "aodmap/error.hpp"

namespace aodmap {

std::vector<int> ComponentLibrary::ids() const {
    std::vector<int> out;
    out.reserve(components.size());
    for (const auto& c : components) out.push_back(c.id);
    return out;
}

void validate(const ComponentLibrary& library) {
    if (library.size() < 2) throw ConfigError("component library needs at least two components");
    std::set<int> seen;
    for (const auto& c : library.components) {
        if (!seen.insert(c.id).second) throw ConfigError("duplicate component id " + std::to_string(c.id));
        if (!(c.r_min > 0.0 && c.r_min < c.r_c && c.r_c < c.r_max))
            throw ConfigError("component " + std::to_string(c.id) + ": radii must satisfy 0 < r_min < r_c < r_max");
        if (!(c.ssa_558 > 0.0 && c.ssa_558 <= 1.0))
            throw ConfigError("component " + std::to_string(c.id) + ": ssa_558 must lie in (0, 1]");
    }
}

ComponentLibrary default_component_library() {
    return ComponentLibrary{{
        {1, "small_spherical_nonabsorb", 0.0010, 0.4000, 0.03, 1.65, 1.00},
        {2, "small_spherical_nonabsorb", 0.0010, 0.7500, 0.06, 1.70, 1.00},
        {3, "medium_spherical_nonabsorb", 0.0010, 1.5000, 0.12, 1.75, 1.00},
        {6, "large_spherical_nonabsorb", 0.1000, 50.000, 1.00, 1.90, 1.00},
        {8, "small_spherical_moderate_absorb", 0.0010, 0.7500, 0.06, 1.70, 0.90},
        {14, "small_spherical_strong_absorb", 0.0010, 0.7500, 0.06, 1.70, 0.80},
        {19, "medium_dust", 0.1000, 1.0000, 0.50, 1.50, 0.98},
        {21, "coarse_dust", 0.1000, 6.0000, 1.00, 2.00, 0.90},
    }};
}

void validate(const RadianceTable& table) {
    if (table.knots() < 2) throw ConfigError("radiance table needs at least two knots");
    if (table.components < 1 || table.channels < 1) throw ConfigError("radiance table has empty dimensions");
    for (int k = 1; k < table.knots(); ++k)
        if (!(table.tau_knots[k] > table.tau_knots[k - 1])) throw ConfigError("tau knots must be strictly ascending");
    if (table.values.size() != static_cast<std::size_t>(table.components) * table.knots() * table.channels)
        throw ConfigError("radiance table value count does not match its dimensions");
    for (double v : table.values)
        if (!std::isfinite(v) || v < 0.0) throw ConfigError("radiance table values must be finite and >= 0");
}

void eval_radiance(const RadianceTable& table, double tau, std::span<const double> theta, std::span<double> out) {
    const auto& knots = table.tau_knots;
    if (!(tau >= knots.front() && tau <= knots.back()))
        throw DomainError("tau " + std::to_string(tau) + " outside table range");

    // Interval [k, k+1] containing tau; the last knot belongs to the final interval.
    auto it = std::upper_bound(knots.begin(), knots.end(), tau);
    int k = static_cast<int>(it - knots.begin()) - 1;
    k = std::clamp(k, 0, table.knots() - 2);
    const double w = (tau - knots[k]) / (knots[k + 1] - knots[k]);

    const int C = table.channels;
    std::fill(out.begin(), out.begin() + C, 0.0);
    for (int m = 0; m < table.components; ++m) {
        const double t = theta[m];
        if (t == 0.0) continue;
        const double a = t * (1.0 - w);
        const double b = t * w;
        const auto lo = table.knot_row(m, k);
        const auto hi = table.knot_row(m, k + 1);
        for (int c = 0; c < C; ++c) out[c] += a * lo[c] + b * hi[c];
    }
}

std::vector<double> eval_radiance(const RadianceTable& table, double tau, std::span<const double> theta) {
    std::vector<double> out(static_cast<std::size_t>(table.channels));
    eval_radiance(table, tau, theta, out);
    return out;
}

namespace {

constexpr std::array<double, 4> kBandNm = {446.0, 558.0, 672.0, 866.0};
constexpr std::array<double, 4> kSurfaceAlbedo = {0.05, 0.07, 0.09, 0.22};
// Signed camera view angles, forward (-) through nadir to aft (+), degrees.
constexpr std::array<double, 9> kViewDeg = {-70.5, -60.0, -45.6, -26.1, 0.0, 26.1, 45.6, 60.0, 70.5};

struct ChannelGeometry {
    int band;
    double view_deg;
};

std::vector<ChannelGeometry> channel_layout(int channels) {
    const int bands = std::min(4, channels);
    const int angles = (channels + bands - 1) / bands;
    std::vector<ChannelGeometry> out;
    out.reserve(static_cast<std::size_t>(channels));
    for (int c = 0; c < channels; ++c) {
        const int b = c / angles;
        const int a = c % angles;
        double view = 0.0;
        if (angles == 9) {
            view = kViewDeg[a];
        } else if (angles > 1) {
            view = -70.5 + 141.0 * a / (angles - 1);
        }
        out.push_back({std::min(b, 3), view});
    }
    return out;
}

}  // namespace

RadianceTable build_synthetic_table(const ComponentLibrary& library, const SyntheticTableOptions& options) {
    validate(library);
    if (options.knots < 2) throw ConfigError("synthetic table needs at least two knots");
    if (options.channels < 1) throw ConfigError("synthetic table needs at least one channel");
    if (!(options.tau_max > 0.0)) throw ConfigError("tau_max must be positive");

    const int M = library.size();
    const int K = options.knots;
    const int C = options.channels;
    const auto layout = channel_layout(C);

    // Only component-independent quantities are randomized, so the SSA ordering
    // between otherwise identical components holds for every seed.
    std::mt19937_64 rng(options.seed);
    std::uniform_real_distribution<double> jitter(-1.0, 1.0);
    std::array<double, 4> albedo{};
    for (int b = 0; b < 4; ++b) albedo[b] = kSurfaceAlbedo[b] * (1.0 + 0.2 * jitter(rng));
    std::vector<double> surface(C), gain(C);
    for (int c = 0; c < C; ++c) {
        const double x = layout[c].view_deg / 70.5;
        surface[c] = albedo[layout[c].band] * (1.0 + 0.15 * x + 0.1 * x * x) * (1.0 + 0.03 * jitter(rng));
        gain[c] = 1.0 + 0.05 * jitter(rng);
    }

    RadianceTable table;
    table.components = M;
    table.channels = C;
    table.seed = options.seed;
    table.tau_knots.resize(K);
    for (int k = 0; k < K; ++k) table.tau_knots[k] = options.tau_max * k / (K - 1);
    table.tau_knots.back() = options.tau_max;
    table.values.resize(static_cast<std::size_t>(M) * K * C);

    for (int m = 0; m < M; ++m) {
        const auto& comp = library.components[m];
        const double angstrom = 2.2 / (1.0 + comp.r_c / 0.08);
        const double asym = 0.2 + 0.6 * comp.r_c / (comp.r_c + 0.15);
        for (int c = 0; c < C; ++c) {
            const double lambda = kBandNm[layout[c].band];
            const double x = layout[c].view_deg / 70.5;
            const double mu = std::cos(layout[c].view_deg * std::acos(-1.0) / 180.0);
            const double extinction = std::pow(lambda / 558.0, -angstrom);
            const double ssa = std::clamp(1.0 - (1.0 - comp.ssa_558) * (558.0 / lambda), 0.05, 1.0);
            const double phase = 1.0 + 0.8 * asym * x + 0.4 * (1.0 - asym) * x * x;
            const double amplitude = 0.25 * ssa * ssa * ssa * phase * gain[c];
            const double rate = 0.35 * extinction / mu * (0.5 + 0.5 * ssa);
            for (int k = 0; k < K; ++k) {
                const double tau = table.tau_knots[k];
                table.values[(static_cast<std::size_t>(m) * K + k) * C + c] =
                    surface[c] + amplitude * -std::expm1(-rate * tau);
            }
        }
    }
    return table;
}

TableForwardModel::TableForwardModel(RadianceTable table) : table_(std::move(table)) { validate(table_); }

}  // namespace aodmap

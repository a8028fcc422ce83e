#include "aodmap/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "aodmap/error.hpp"
#include "aodmap/lattice.hpp"
#include "aodmap/map_solver.hpp"
#include "aodmap/rng.hpp"

namespace aodmap {

void validate(const TruthOptions& o) {
    if (o.width < 2 || o.height < 2) throw ConfigError("simulated lattice needs width and height >= 2");
    if (o.components < 2) throw ConfigError("simulation needs at least two components");
    if (!(o.smoothness >= 0.0)) throw ConfigError("smoothness must be nonnegative");
    if (!(o.tau_lo >= 0.0) || !(o.tau_hi >= o.tau_lo)) throw ConfigError("tau range must satisfy 0 <= lo <= hi");
    if (o.blob_size < 1) throw ConfigError("blob_size must be at least 1");
}

namespace {

std::vector<double> smooth(const std::vector<double>& z, int W, int H, double sd) {
    if (sd == 0.0) return z;
    const int P = W * H;
    std::vector<double> out(P, 0.0);
    if (std::isinf(sd)) {
        double mean = 0.0;
        for (double v : z) mean += v;
        std::fill(out.begin(), out.end(), mean / P);
        return out;
    }
    // Separable, border-normalized Gaussian weights.
    auto weights = [sd](int n) {
        std::vector<double> w(static_cast<std::size_t>(n) * n);
        for (int i = 0; i < n; ++i) {
            double s = 0.0;
            for (int j = 0; j < n; ++j) {
                const double d = i - j;
                s += (w[static_cast<std::size_t>(i) * n + j] = std::exp(-0.5 * d * d / (sd * sd)));
            }
            for (int j = 0; j < n; ++j) w[static_cast<std::size_t>(i) * n + j] /= s;
        }
        return w;
    };
    const auto wx = weights(W), wy = weights(H);
    std::vector<double> tmp(P, 0.0);
    for (int y = 0; y < H; ++y)
        for (int x = 0; x < W; ++x) {
            double s = 0.0;
            for (int j = 0; j < W; ++j) s += wx[static_cast<std::size_t>(x) * W + j] * z[y * W + j];
            tmp[y * W + x] = s;
        }
    for (int y = 0; y < H; ++y)
        for (int x = 0; x < W; ++x) {
            double s = 0.0;
            for (int j = 0; j < H; ++j) s += wy[static_cast<std::size_t>(y) * H + j] * tmp[j * W + x];
            out[y * W + x] = s;
        }
    return out;
}

void dirichlet(double concentration, Rng& rng, std::span<double> out) {
    std::gamma_distribution<double> gamma(concentration, 1.0);
    double sum = 0.0;
    for (double& v : out) sum += (v = gamma(rng));
    if (!(sum > 0.0)) {
        // Every draw underflowed; fall back to a single uniformly chosen vertex.
        std::fill(out.begin(), out.end(), 0.0);
        out[std::uniform_int_distribution<std::size_t>(0, out.size() - 1)(rng)] = 1.0;
        sum = 1.0;
    }
    for (double& v : out) v /= sum;
}

}  // namespace

Truth gen_truth(const TruthOptions& o) {
    validate(o);
    const int W = o.width, H = o.height, P = W * H, M = o.components;
    Truth t{W, H, M, {}, {}};

    Rng tau_rng(derive_seed(o.seed, "truth_tau"));
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<double> z(P);
    for (double& v : z) v = normal(tau_rng);
    const auto s = smooth(z, W, H, o.smoothness);
    const auto [lo_it, hi_it] = std::minmax_element(s.begin(), s.end());
    const double lo = *lo_it, hi = *hi_it;
    double scale = 0.0;
    for (double v : z) scale = std::max(scale, std::abs(v));
    t.tau.resize(P);
    if (hi - lo <= 1e-9 * scale) {
        std::fill(t.tau.begin(), t.tau.end(), 0.5 * (o.tau_lo + o.tau_hi));
    } else {
        for (int p = 0; p < P; ++p) t.tau[p] = o.tau_lo + (o.tau_hi - o.tau_lo) * (s[p] - lo) / (hi - lo);
    }

    Rng theta_rng(derive_seed(o.seed, "truth_theta"));
    const double conc = o.sparsity == Sparsity::dense ? 1.0 : 0.125;
    t.theta.assign(static_cast<std::size_t>(P) * M, 0.0);
    auto row = [&](int p) { return std::span<double>(t.theta.data() + static_cast<std::size_t>(p) * M, M); };

    if (o.blob_size == 1) {
        for (int p = 0; p < P; ++p) dirichlet(conc, theta_rng, row(p));
    } else {
        // Voronoi blobs around randomly placed centres.
        const int n_blobs = std::max(1, (P + o.blob_size * o.blob_size - 1) / (o.blob_size * o.blob_size));
        std::uniform_real_distribution<double> ux(0.0, W), uy(0.0, H);
        std::vector<std::pair<double, double>> centres(n_blobs);
        std::vector<double> blob_theta(static_cast<std::size_t>(n_blobs) * M);
        for (int b = 0; b < n_blobs; ++b) {
            centres[b] = {ux(theta_rng), uy(theta_rng)};
            dirichlet(conc, theta_rng, std::span<double>(blob_theta.data() + static_cast<std::size_t>(b) * M, M));
        }
        for (int p = 0; p < P; ++p) {
            const double cx = p % W + 0.5, cy = p / W + 0.5;
            int best = 0;
            double best_d = std::numeric_limits<double>::infinity();
            for (int b = 0; b < n_blobs; ++b) {
                const double dx = cx - centres[b].first, dy = cy - centres[b].second;
                const double d = dx * dx + dy * dy;
                if (d < best_d) {
                    best_d = d;
                    best = b;
                }
            }
            std::copy_n(blob_theta.begin() + static_cast<std::ptrdiff_t>(best) * M, M, row(p).begin());
        }
    }
    for (int p = 0; p < P; ++p) project_to_simplex_floor(row(p));
    return t;
}

Scene render(const Truth& truth, const ForwardModel& forward, double region_size_km) {
    if (truth.components != forward.components()) throw ConfigError("truth component count does not match forward model");
    Scene s;
    s.width = truth.width;
    s.height = truth.height;
    s.channels = forward.channels();
    s.channel_mask.assign(static_cast<std::size_t>(s.channels), true);
    s.region_size_km = region_size_km;
    const int P = s.regions(), M = truth.components;
    s.radiance.resize(static_cast<std::size_t>(P) * s.channels);
    for (int p = 0; p < P; ++p) {
        const std::span<const double> th(truth.theta.data() + static_cast<std::size_t>(p) * M, M);
        forward.radiance(truth.tau[p], th,
                         std::span<double>(s.radiance.data() + static_cast<std::size_t>(p) * s.channels,
                                           static_cast<std::size_t>(s.channels)));
    }
    return s;
}

Scene add_noise(const Scene& scene, double level, std::uint64_t seed) {
    if (!(level >= 0.0 && level <= 1.0)) throw ConfigError("noise level must lie in [0, 1]");
    Scene out = scene;
    if (level == 0.0) return out;
    Rng rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (double& v : out.radiance) v = std::max(0.0, v * (1.0 + level * normal(rng)));
    return out;
}

SimScene simulate(const TruthOptions& options, const ForwardModel& forward, double noise_level) {
    SimScene sim;
    sim.truth = gen_truth(options);
    sim.scene = add_noise(render(sim.truth, forward), noise_level, derive_seed(options.seed, "noise"));
    sim.noise_level = noise_level;
    return sim;
}

RetrievalState truth_state(const Truth& truth, const Scene& scene, const ForwardModel& forward,
                           const HyperParams& hyper) {
    RetrievalState st;
    st.components = truth.components;
    st.tau = truth.tau;
    st.theta = truth.theta;
    st.sigma2.assign(static_cast<std::size_t>(scene.channels), 1.0);
    st.sigma2 = update_sigma(st, scene, forward, hyper.sigma2_floor);
    st.kappa = update_kappa(st, build_lattice(truth.width, truth.height), hyper.kappa_cap).kappa;
    return st;
}

}  // namespace aodmap

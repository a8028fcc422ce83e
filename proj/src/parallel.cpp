#include "aodmap/parallel.hpp"

#include <algorithm>
#include <barrier>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <thread>

#include "aodmap/error.hpp"

namespace aodmap {

namespace {

// Splits `total` cells into parts proportional to `weights`, each part >= 1.
std::vector<int> apportion(int total, const std::vector<int>& weights) {
    const int parts = static_cast<int>(weights.size());
    int wsum = 0;
    for (int w : weights) wsum += w;
    std::vector<int> out(parts);
    std::vector<std::pair<double, int>> frac;
    int used = 0;
    for (int i = 0; i < parts; ++i) {
        const double ideal = static_cast<double>(total) * weights[i] / wsum;
        out[i] = std::max(1, static_cast<int>(std::floor(ideal)));
        used += out[i];
        frac.push_back({ideal - std::floor(ideal), i});
    }
    std::stable_sort(frac.begin(), frac.end(), [](auto a, auto b) { return a.first > b.first; });
    for (int k = 0; used < total; k = (k + 1) % parts) {
        ++out[frac[k].second];
        ++used;
    }
    while (used > total) {
        auto it = std::max_element(out.begin(), out.end());
        --*it;
        --used;
    }
    return out;
}

struct Candidate {
    std::vector<PatchRect> rects;
    double ratio = std::numeric_limits<double>::infinity();
    double squareness = std::numeric_limits<double>::infinity();
};

Candidate layout(const std::vector<int>& counts, const std::vector<int>& heights, int across, bool transpose) {
    Candidate cand;
    int a0 = 0;
    for (std::size_t i = 0; i < counts.size(); ++i) {
        const auto widths = apportion(across, std::vector<int>(counts[i], 1));
        int b0 = 0;
        for (int w : widths) {
            cand.rects.push_back(transpose ? PatchRect{a0, b0, a0 + heights[i], b0 + w}
                                           : PatchRect{b0, a0, b0 + w, a0 + heights[i]});
            b0 += w;
        }
        a0 += heights[i];
    }
    int amin = std::numeric_limits<int>::max(), amax = 0;
    double sq = 0.0;
    for (const auto& r : cand.rects) {
        amin = std::min(amin, r.area());
        amax = std::max(amax, r.area());
        sq += std::abs((r.x1 - r.x0) - (r.y1 - r.y0));
    }
    cand.ratio = static_cast<double>(amax) / amin;
    cand.squareness = sq / static_cast<double>(cand.rects.size());
    return cand;
}

// Bands along the first axis (length `along`), band i split into counts[i] pieces
// along the second axis (length `across`), band heights proportional to counts.
// `transpose` maps the result back to (x, y).
Candidate banded(int along, int across, const std::vector<int>& counts, bool transpose) {
    const int bands = static_cast<int>(counts.size());
    if (*std::max_element(counts.begin(), counts.end()) > across || bands > along) return {};
    const auto heights = apportion(along, counts);
    if (*std::min_element(heights.begin(), heights.end()) < 1) return {};
    return layout(counts, heights, across, transpose);
}

// Exact search over banded layouts whose piece areas all lie in [lo, hi]:
// a DP over (rows used, pieces used) minimizing total |width - height|.
Candidate banded_exact(int along, int across, int n, int lo, int hi, bool transpose) {
    const double inf = std::numeric_limits<double>::infinity();
    const auto at = [n](int r, int j) { return static_cast<std::size_t>(r) * (n + 1) + j; };
    std::vector<double> cost(static_cast<std::size_t>(along + 1) * (n + 1), inf);
    std::vector<std::pair<int, int>> step(cost.size(), {0, 0});  // (height, pieces) of the last band
    cost[at(0, 0)] = 0.0;
    for (int r = 0; r < along; ++r)
        for (int j = 0; j < n; ++j) {
            if (cost[at(r, j)] == inf) continue;
            for (int h = 1; r + h <= along; ++h) {
                if (h > hi) break;
                for (int k = std::max(1, across * h / hi); k <= std::min(across, n - j); ++k) {
                    const int wl = across / k, wh = (across + k - 1) / k;
                    if (h * wl < lo) break;
                    if (h * wh > hi) continue;
                    const int n_wide = across - k * wl;  // pieces of width wl + 1
                    const double c = cost[at(r, j)] + n_wide * std::abs(wh - h) + (k - n_wide) * std::abs(wl - h);
                    if (c < cost[at(r + h, j + k)]) {
                        cost[at(r + h, j + k)] = c;
                        step[at(r + h, j + k)] = {h, k};
                    }
                }
            }
        }
    if (cost[at(along, n)] == inf) return {};
    std::vector<int> counts, heights;
    for (int r = along, j = n; r > 0;) {
        const auto [h, k] = step[at(r, j)];
        heights.insert(heights.begin(), h);
        counts.insert(counts.begin(), k);
        r -= h;
        j -= k;
    }
    return layout(counts, heights, across, transpose);
}

// Smallest-ratio exact layout with ratio <= max_ratio, if any.
Candidate exact_search(int W, int H, int n, double max_ratio) {
    const double mean = static_cast<double>(W) * H / n;
    std::vector<int> areas;
    for (int h = 1; h <= std::max(W, H); ++h)
        for (int w = 1; w <= std::max(W, H); ++w) areas.push_back(h * w);
    std::sort(areas.begin(), areas.end());
    areas.erase(std::unique(areas.begin(), areas.end()), areas.end());
    std::vector<std::pair<int, int>> windows;
    for (int lo : areas) {
        if (lo > mean) break;
        for (int hi : areas)
            if (hi >= mean && hi <= max_ratio * lo) windows.push_back({lo, hi});
    }
    std::stable_sort(windows.begin(), windows.end(), [](auto a, auto b) {
        return static_cast<double>(a.second) / a.first < static_cast<double>(b.second) / b.first;
    });
    for (const auto& [lo, hi] : windows) {
        Candidate a = banded_exact(H, W, n, lo, hi, false);
        Candidate b = banded_exact(W, H, n, lo, hi, true);
        if (!b.rects.empty() && (a.rects.empty() || b.squareness < a.squareness)) a = std::move(b);
        if (!a.rects.empty()) return a;
    }
    return {};
}

// Ways to give `bands` bands at least one piece each, n pieces in total. Every
// composition is tried while there are few of them; otherwise only the even split.
std::vector<std::vector<int>> band_counts(int n, int bands) {
    constexpr double kMaxCompositions = 64.0;
    double count = 1.0;  // C(n - 1, bands - 1)
    for (int i = 1; i < bands && count <= kMaxCompositions; ++i) count = count * (n - i) / i;

    std::vector<std::vector<int>> out;
    if (count > kMaxCompositions) {
        std::vector<int> even(bands, n / bands);
        for (int i = 0; i < n % bands; ++i) ++even[i];
        out.push_back(std::move(even));
        return out;
    }
    std::vector<int> cur(bands, 1);
    std::function<void(int, int)> fill = [&](int i, int left) {
        if (i == bands - 1) {
            cur[i] = left;
            out.push_back(cur);
            return;
        }
        for (int k = 1; k <= left - (bands - 1 - i); ++k) {
            cur[i] = k;
            fill(i + 1, left - k);
        }
    };
    fill(0, n);
    return out;
}

}  // namespace

PatchPartition partition(const LatticeTopology& lattice, int n_patches) {
    const int W = lattice.width();
    const int H = lattice.height();
    const int P = lattice.regions();
    if (n_patches < 1 || n_patches > P)
        throw ConfigError("n_patches must lie in [1, " + std::to_string(P) + "], got " + std::to_string(n_patches));

    Candidate best;
    auto consider = [&](Candidate c) {
        if (c.rects.empty()) return;
        if (c.ratio < best.ratio || (c.ratio == best.ratio && c.squareness < best.squareness)) best = std::move(c);
    };
    for (int bands = 1; bands <= std::min(n_patches, std::max(W, H)); ++bands) {
        for (const auto& counts : band_counts(n_patches, bands)) {
            if (bands <= H) consider(banded(H, W, counts, false));
            if (bands <= W) consider(banded(W, H, counts, true));
        }
    }
    if (best.ratio > 2.0) {
        Candidate exact = exact_search(W, H, n_patches, 2.0);
        if (!exact.rects.empty()) best = std::move(exact);
    }
    if (best.rects.empty()) throw ConfigError("could not partition lattice into " + std::to_string(n_patches) + " patches");

    PatchPartition out;
    out.n_patches = n_patches;
    out.rects = std::move(best.rects);
    out.assignment.assign(P, -1);
    out.patches.resize(n_patches);
    for (int id = 0; id < n_patches; ++id) {
        const auto& r = out.rects[id];
        for (int y = r.y0; y < r.y1; ++y)
            for (int x = r.x0; x < r.x1; ++x) out.assignment[lattice.index(x, y)] = id;
    }
    for (int p = 0; p < P; ++p) out.patches[out.assignment[p]].push_back(p);
    return out;
}

namespace {

SweepSettings settings_from(const SolverConfig& config) {
    SweepSettings s;
    s.delta = config.delta;
    s.gamma_shape_floor = config.gamma_shape_floor;
    s.hyper = &config.hyper;
    s.seed = config.seed;
    s.rule = AcceptRule::greedy;
    return s;
}

int resolve_threads(int requested, int n_patches) {
    int t = requested;
    if (t <= 0) t = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    return std::clamp(t, 1, n_patches);
}

// Workers persist across sweeps; the caller acts as worker 0. Two barriers
// bracket each sweep so every patch finishes before the next one starts.
class PatchPool {
public:
    PatchPool(int workers, std::function<void(int)> job)
        : workers_(workers), job_(std::move(job)), start_(workers), done_(workers) {
        for (int w = 1; w < workers_; ++w) {
            threads_.emplace_back([this, w] {
                for (;;) {
                    start_.arrive_and_wait();
                    if (stop_) return;
                    job_(w);
                    done_.arrive_and_wait();
                }
            });
        }
    }

    ~PatchPool() {
        stop_ = true;
        if (workers_ > 1) start_.arrive_and_wait();
    }

    PatchPool(const PatchPool&) = delete;
    PatchPool& operator=(const PatchPool&) = delete;

    void run() {
        if (workers_ == 1) {
            job_(0);
            return;
        }
        start_.arrive_and_wait();
        job_(0);
        done_.arrive_and_wait();
    }

private:
    int workers_;
    std::function<void(int)> job_;
    std::barrier<> start_;
    std::barrier<> done_;
    bool stop_ = false;
    std::vector<std::jthread> threads_;
};

SweepStats sum_stats(const std::vector<SweepStats>& per_patch) {
    SweepStats total;
    for (const auto& s : per_patch) {
        total.tau_accepted += s.tau_accepted;
        total.theta_accepted += s.theta_accepted;
        total.proposals += s.proposals;
        total.delta_sum += s.delta_sum;
    }
    return total;
}

}  // namespace

SweepStats parallel_sweep(RetrievalState& state, const RetrievalState& snapshot, const Scene& scene,
                          const ForwardModel& forward, const LatticeTopology& lattice,
                          const PatchPartition& partition, const SolverConfig& config, int sweep_index,
                          int threads) {
    const SweepSettings settings = settings_from(config);
    const int workers = resolve_threads(threads, partition.n_patches);
    std::vector<SweepStats> per_patch(partition.n_patches);

    auto job = [&](int w) {
        for (int id = w; id < partition.n_patches; id += workers) {
            PatchView view;
            view.regions = partition.patches[id];
            view.owner = &partition.assignment;
            view.patch = id;
            view.snapshot = &snapshot;
            per_patch[id] = sweep_patch(scene, forward, lattice, settings, state, view, sweep_index);
        }
    };
    {
        std::vector<std::jthread> pool;
        for (int w = 1; w < workers; ++w) pool.emplace_back(job, w);
        job(0);
    }
    return sum_stats(per_patch);
}

ParallelResult run_map_parallel(const Scene& scene, const ForwardModel& forward, const LatticeTopology& lattice,
                                const SolverConfig& config, const ParallelOptions& options,
                                const RetrievalState& init) {
    if (config.cadence != HyperCadence::per_sweep)
        throw ConfigError("parallel sweeps require the per_sweep hyperparameter cadence");
    const PatchPartition part = partition(lattice, options.n_patches);
    const SweepSettings settings = settings_from(config);
    const int workers = resolve_threads(options.threads, part.n_patches);
    // With a single patch no neighbour read is stale, so accepted deltas are exact.
    const bool exact = part.n_patches == 1;

    std::vector<SweepStats> per_patch(part.n_patches);
    RetrievalState snapshot;
    RetrievalState* live = nullptr;
    int sweep_index = 0;
    SweepHooks single_hooks;

    PatchPool pool(workers, [&](int w) {
        for (int id = w; id < part.n_patches; id += workers) {
            PatchView view;
            view.regions = part.patches[id];
            view.owner = &part.assignment;
            view.patch = id;
            view.snapshot = &snapshot;
            per_patch[id] = sweep_patch(scene, forward, lattice, settings, *live, view, sweep_index,
                                        exact ? single_hooks : SweepHooks{});
        }
    });

    auto executor = [&](RetrievalState& state, int sweep, const SweepHooks& hooks) {
        if (!exact) snapshot = state;
        live = &state;
        sweep_index = sweep;
        single_hooks = hooks;
        pool.run();
        return sum_stats(per_patch);
    };

    MapResult r = run_sweep_loop(scene, forward, lattice, config, init, executor, exact);
    ParallelResult out{std::move(r.state), std::move(r.trace), {}};
    out.speedup.n_patches = part.n_patches;
    out.speedup.threads = workers;
    for (const auto& rec : out.trace.sweeps) {
        out.speedup.sweep_ms.push_back(rec.elapsed_ms);
        out.speedup.total_ms += rec.elapsed_ms;
    }
    return out;
}

}  // namespace aodmap

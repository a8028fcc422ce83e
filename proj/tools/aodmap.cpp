// aodmap command-line driver: simulate scenes, run retrievals, time the
// patch-parallel solver and export posterior slices.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "aodmap/baselines.hpp"
#include "aodmap/config.hpp"
#include "aodmap/error.hpp"
#include "aodmap/io.hpp"
#include "aodmap/lattice.hpp"
#include "aodmap/map_solver.hpp"
#include "aodmap/mcmc_solver.hpp"
#include "aodmap/parallel.hpp"
#include "aodmap/posterior.hpp"
#include "aodmap/probe.hpp"
#include "aodmap/rng.hpp"
#include "aodmap/simulator.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace aodmap;

namespace {

constexpr int kExitInput = 2;
constexpr int kExitSolver = 3;

const char* kKeyHelp = R"(Configuration keys (file sections or --section.key VALUE overrides):
  seed                    master seed; every random stream is derived from it (default 1)
  [scene]   width, height (16), smoothness (2), sparsity (dense|sparse), tau_lo (0.05),
            tau_hi (0.6), blob_size (4), noise_level (0), region_size_km (17.6),
            components (default | path to a components JSON), channels (36), knots (25), tau_max (6)
  [solver]  delta (0.05), epsilon (1e-4), relative_epsilon (true), max_sweeps (200),
            gamma_shape_floor (1e-3), cadence (per_sweep|per_region), init (coarse_grid|flat|random),
            alpha (1, one value or one per component), sigma2_floor (1e-12), kappa_cap (1e12), tau_max (6)
  [mcmc]    iterations (1000), burn_in (200), thin (1), dump_samples (false)
  [parallel] patches (1), threads (0 = hardware)
  [grid]    relative_sigma (0.05), threshold (number of active channels)
  [stability] n_inits (0 = off)
  [benchmark] patches (1,2,4,8)
  [slice]   region (0), component (0), tau_lo (0), tau_hi (1), theta_lo (0), theta_hi (1),
            tau_points (41), theta_points (41)
Exit codes: 0 success, 2 input or configuration error, 3 solver error.)";

const std::set<std::string> kKnownKeys = {
    "seed",
    "scene.width", "scene.height", "scene.smoothness", "scene.sparsity", "scene.tau_lo", "scene.tau_hi",
    "scene.blob_size", "scene.noise_level", "scene.region_size_km", "scene.components", "scene.channels",
    "scene.knots", "scene.tau_max",
    "solver.delta", "solver.epsilon", "solver.relative_epsilon", "solver.max_sweeps", "solver.gamma_shape_floor",
    "solver.cadence", "solver.init", "solver.alpha", "solver.sigma2_floor", "solver.kappa_cap", "solver.tau_max",
    "mcmc.iterations", "mcmc.burn_in", "mcmc.thin", "mcmc.dump_samples",
    "parallel.patches", "parallel.threads",
    "grid.relative_sigma", "grid.threshold",
    "stability.n_inits",
    "benchmark.patches",
    "slice.region", "slice.component", "slice.tau_lo", "slice.tau_hi", "slice.theta_lo", "slice.theta_hi",
    "slice.tau_points", "slice.theta_points",
};

using clock_type = std::chrono::steady_clock;

double ms_since(clock_type::time_point t0) {
    return std::chrono::duration<double, std::milli>(clock_type::now() - t0).count();
}

std::string hex64(std::uint64_t v) {
    char buf[19];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

// Leftover "--section.key value" / "--section.key=value" pairs become overrides.
void apply_overrides(Config& cfg, const std::vector<std::string>& extras) {
    for (std::size_t i = 0; i < extras.size(); ++i) {
        const std::string& a = extras[i];
        if (a.rfind("--", 0) != 0) throw ConfigError("unexpected argument '" + a + "'");
        std::string key = a.substr(2), value;
        const auto eq = key.find('=');
        if (eq != std::string::npos) {
            value = key.substr(eq + 1);
            key = key.substr(0, eq);
        } else {
            if (i + 1 >= extras.size()) throw ConfigError("override --" + key + " needs a value");
            value = extras[++i];
        }
        cfg.set(key, value);
    }
}

Config load_config(const std::string& file, const std::vector<std::string>& extras) {
    Config cfg = file.empty() ? Config::parse("", "<defaults>") : Config::load(file);
    apply_overrides(cfg, extras);
    cfg.require_known(kKnownKeys);
    return cfg;
}

HyperParams hyper_from(const Config& cfg, int components) {
    HyperParams h = HyperParams::uniform(components);
    const auto alpha = cfg.get_doubles("solver.alpha", {1.0});
    if (alpha.size() == 1) {
        h.alpha.assign(static_cast<std::size_t>(components), alpha[0]);
    } else if (static_cast<int>(alpha.size()) == components) {
        h.alpha = alpha;
    } else {
        throw ConfigError("solver.alpha needs 1 or " + std::to_string(components) + " values");
    }
    h.tau_max = cfg.get_double("solver.tau_max", h.tau_max);
    h.sigma2_floor = cfg.get_double("solver.sigma2_floor", h.sigma2_floor);
    h.kappa_cap = cfg.get_double("solver.kappa_cap", h.kappa_cap);
    validate(h);
    return h;
}

SolverConfig solver_from(const Config& cfg, int components) {
    SolverConfig s;
    s.delta = cfg.get_double("solver.delta", s.delta);
    s.epsilon = cfg.get_double("solver.epsilon", s.epsilon);
    s.relative_epsilon = cfg.get_bool("solver.relative_epsilon", s.relative_epsilon);
    s.max_sweeps = cfg.get_int("solver.max_sweeps", s.max_sweeps);
    s.gamma_shape_floor = cfg.get_double("solver.gamma_shape_floor", s.gamma_shape_floor);
    s.seed = derive_seed(cfg.get_u64("seed", 1), "solver");
    s.hyper = hyper_from(cfg, components);
    const std::string cadence = cfg.get_string("solver.cadence", "per_sweep");
    if (cadence == "per_sweep") s.cadence = HyperCadence::per_sweep;
    else if (cadence == "per_region") s.cadence = HyperCadence::per_region;
    else throw ConfigError("solver.cadence must be per_sweep or per_region, got '" + cadence + "'");
    validate(s, components);
    return s;
}

InitStrategy init_from(const Config& cfg) {
    const std::string v = cfg.get_string("solver.init", "coarse_grid");
    if (v == "flat") return InitStrategy::flat;
    if (v == "coarse_grid") return InitStrategy::coarse_grid;
    if (v == "random") return InitStrategy::random;
    throw ConfigError("solver.init must be flat, coarse_grid or random, got '" + v + "'");
}

json manifest_base(const std::string& command, const Config& cfg) {
    return {{"command", command},
            {"version", AODMAP_VERSION},
            {"config_source", cfg.source()},
            {"config", cfg.canonical()},
            {"config_hash", hex64(derive_seed(0, cfg.canonical()))},
            {"seed", cfg.get_u64("seed", 1)}};
}

void write_manifest(const fs::path& out, const json& m) { io::write_text(out / "manifest.json", m.dump(2) + "\n"); }

struct LoadedScene {
    io::SceneBundle bundle;
    ComponentLibrary library;
    std::unique_ptr<ForwardModel> forward;
    std::optional<Truth> truth;
};

LoadedScene load_scene(const fs::path& dir) {
    LoadedScene s;
    s.bundle = io::read_scene(dir);
    s.library = io::load_components(dir, s.bundle.components);
    s.forward = io::make_forward(s.bundle.forward, s.library, dir);
    if (s.forward->channels() != s.bundle.scene.channels)
        throw IoError("forward model channel count does not match the scene");
    if (fs::exists(dir / "truth.csv")) s.truth = io::read_truth(dir / "truth.csv", s.bundle.scene.width, s.bundle.scene.height);
    return s;
}

void write_fields(const fs::path& out, const RetrievalState& st, const Scene& scene, const ComponentLibrary& lib) {
    io::write_grid(out / "tau.csv", st.tau, scene.width);
    io::write_rows(out / "theta.csv", st.theta, st.components);
    io::write_state(out / "state.json", st);
    const auto ids = lib.ids();
    const DominanceMap d = dominance_map(st.theta, st.components, ids);
    std::string csv = "region,component_id,share\n";
    for (std::size_t p = 0; p < d.id.size(); ++p)
        csv += std::to_string(p) + "," + std::to_string(d.id[p]) + "," + io::format_double(d.share[p]) + "\n";
    io::write_text(out / "dominance.csv", csv);
}

// ---------------------------------------------------------------------------

int cmd_simulate(const std::string& config_file, const fs::path& out, const std::vector<std::string>& extras) {
    const Config cfg = load_config(config_file, extras);
    const auto t0 = clock_type::now();
    const std::uint64_t seed = cfg.get_u64("seed", 1);

    const std::string comp_ref = cfg.get_string("scene.components", "default");
    const ComponentLibrary lib = comp_ref == "default" ? default_component_library() : io::read_components(comp_ref);

    io::ForwardSpec fs_spec;
    fs_spec.channels = cfg.get_int("scene.channels", 36);
    fs_spec.knots = cfg.get_int("scene.knots", 25);
    fs_spec.tau_max = cfg.get_double("scene.tau_max", 6.0);
    fs_spec.seed = derive_seed(seed, "table");
    const auto forward = io::make_forward(fs_spec, lib, out);

    TruthOptions o;
    o.width = cfg.get_int("scene.width", o.width);
    o.height = cfg.get_int("scene.height", o.height);
    o.components = lib.size();
    o.smoothness = cfg.get_double("scene.smoothness", o.smoothness);
    const std::string sp = cfg.get_string("scene.sparsity", "dense");
    if (sp == "dense") o.sparsity = Sparsity::dense;
    else if (sp == "sparse") o.sparsity = Sparsity::sparse;
    else throw ConfigError("scene.sparsity must be dense or sparse, got '" + sp + "'");
    o.tau_lo = cfg.get_double("scene.tau_lo", o.tau_lo);
    o.tau_hi = cfg.get_double("scene.tau_hi", o.tau_hi);
    o.blob_size = cfg.get_int("scene.blob_size", o.blob_size);
    o.seed = derive_seed(seed, "truth");
    const double noise = cfg.get_double("scene.noise_level", 0.0);

    SimScene sim = simulate(o, *forward, noise);
    sim.scene.region_size_km = cfg.get_double("scene.region_size_km", 17.6);

    io::SceneBundle b;
    b.scene = sim.scene;
    b.components = "components.json";
    b.forward = fs_spec;
    io::write_scene(out, b);
    io::write_components(out / "components.json", lib);
    io::write_truth(out / "truth.csv", sim.truth);
    io::write_grid(out / "truth_tau.csv", sim.truth.tau, o.width);

    json m = manifest_base("simulate", cfg);
    m["seeds"] = {{"truth", o.seed}, {"table", fs_spec.seed}, {"noise", derive_seed(o.seed, "noise")}};
    m["timings_ms"] = {{"total", ms_since(t0)}};
    write_manifest(out, m);
    std::cout << "wrote " << o.width << "x" << o.height << " scene (" << lib.size() << " components, noise "
              << noise << ") to " << out.string() << "\n";
    return 0;
}

int cmd_retrieve(const fs::path& scene_dir, const std::string& method, const std::string& config_file,
                 const fs::path& out, const std::vector<std::string>& extras) {
    const Config cfg = load_config(config_file, extras);
    const auto t0 = clock_type::now();
    LoadedScene ls = load_scene(scene_dir);
    const Scene& scene = ls.bundle.scene;
    const ForwardModel& fwd = *ls.forward;
    const int M = fwd.components();
    const LatticeTopology lat = build_lattice(scene.width, scene.height);
    const SolverConfig solver = solver_from(cfg, M);
    json m = manifest_base("retrieve", cfg);
    m["method"] = method;
    m["scene"] = fs::absolute(scene_dir).string();
    m["seeds"] = {{"solver", solver.seed}};

    std::vector<double> tau_out;
    json timings;
    const auto write_solution = [&](const RetrievalState& st) {
        write_fields(out, st, scene, ls.library);
        tau_out = st.tau;
    };

    if (method == "map" || method == "map-parallel") {
        const auto ti = clock_type::now();
        const RetrievalState init = init_state(scene, fwd, init_from(cfg), solver.hyper, solver.seed);
        timings["init"] = ms_since(ti);
        const auto ts = clock_type::now();
        if (method == "map") {
            const MapResult r = run_map(scene, fwd, lat, solver, init);
            io::write_trace(out / "trace.csv", r.trace);
            write_solution(r.state);
            m["sweeps"] = r.trace.sweeps.size();
            m["converged"] = r.trace.converged;
        } else {
            ParallelOptions po;
            po.n_patches = cfg.get_int("parallel.patches", 1);
            po.threads = cfg.get_int("parallel.threads", 0);
            const ParallelResult r = run_map_parallel(scene, fwd, lat, solver, po, init);
            io::write_trace(out / "trace.csv", r.trace);
            io::write_speedup(out / "speedup.csv", {r.speedup});
            write_solution(r.state);
            m["sweeps"] = r.trace.sweeps.size();
            m["converged"] = r.trace.converged;
            m["patches"] = po.n_patches;
            m["threads"] = r.speedup.threads;
        }
        timings["solve"] = ms_since(ts);

        const int n_inits = cfg.get_int("stability.n_inits", 0);
        if (n_inits > 0) {
            const auto tb = clock_type::now();
            const StabilityReport rep = stability_bounds(scene, fwd, lat, solver, n_inits);
            std::string csv = "region,mean,std\n";
            for (std::size_t p = 0; p < rep.mean.size(); ++p)
                csv += std::to_string(p) + "," + io::format_double(rep.mean[p]) + "," + io::format_double(rep.std[p]) + "\n";
            io::write_text(out / "stability.csv", csv);
            m["stability"] = {{"runs_used", rep.runs_used}, {"failed_seeds", rep.failed_seeds}};
            timings["stability"] = ms_since(tb);
        }
    } else if (method == "mcmc") {
        McmcConfig mc;
        mc.iterations = cfg.get_int("mcmc.iterations", mc.iterations);
        mc.burn_in = cfg.get_int("mcmc.burn_in", mc.burn_in);
        mc.thin = cfg.get_int("mcmc.thin", mc.thin);
        mc.keep_samples = cfg.get_bool("mcmc.dump_samples", false);
        mc.delta = solver.delta;
        mc.seed = derive_seed(cfg.get_u64("seed", 1), "mcmc");
        mc.gamma_shape_floor = solver.gamma_shape_floor;
        mc.hyper = solver.hyper;
        m["seeds"]["mcmc"] = mc.seed;
        const auto ti = clock_type::now();
        const RetrievalState init = init_state(scene, fwd, init_from(cfg), solver.hyper, solver.seed);
        timings["init"] = ms_since(ti);
        const auto ts = clock_type::now();
        const McmcResult r = run_mcmc(scene, fwd, lat, mc, init);
        timings["solve"] = ms_since(ts);
        io::write_trace(out / "trace.csv", r.trace);
        write_solution(r.mean);
        io::write_grid(out / "tau_std.csv", r.tau_std, scene.width);
        if (mc.keep_samples) {
            std::vector<double> flat;
            for (const auto& s : r.tau_samples) flat.insert(flat.end(), s.begin(), s.end());
            io::write_rows(out / "samples.csv", flat, scene.regions());
        }
        m["samples"] = r.samples;
    } else if (method == "grid") {
        const double rel = cfg.get_double("grid.relative_sigma", 0.05);
        if (!(rel > 0.0)) throw ConfigError("grid.relative_sigma must be positive");
        std::vector<double> s2(static_cast<std::size_t>(scene.channels), 1.0);
        for (int c = 0; c < scene.channels; ++c) {
            double mean = 0.0;
            for (int p = 0; p < scene.regions(); ++p) mean += scene.at(p, c);
            mean /= scene.regions();
            s2[c] = std::max(std::pow(rel * mean, 2), solver.hyper.sigma2_floor);
        }
        GridSearchConfig gc = default_grid_config(M, s2);
        gc.success_threshold = cfg.get_double("grid.threshold", static_cast<double>(scene.active_channels()));
        const auto ts = clock_type::now();
        const GridResult g = grid_search_retrieve(scene, fwd, gc);
        timings["solve"] = ms_since(ts);
        RetrievalState st;
        st.components = M;
        st.tau = g.tau;
        st.theta = g.theta;
        st.sigma2 = s2;
        st.kappa = 0.0;
        write_solution(st);
        std::vector<double> succ(g.success.begin(), g.success.end());
        io::write_grid(out / "success.csv", succ, scene.width);
        m["successes"] = std::count(g.success.begin(), g.success.end(), true);
    } else {
        throw ConfigError("unknown method '" + method + "' (map, map-parallel, mcmc, grid)");
    }

    if (ls.truth) {
        const MetricsReport rep = compute_metrics(tau_out, ls.truth->tau);
        io::write_metrics(out / "metrics.json", rep, method);
        io::write_grid(out / "error.csv", rep.errors, scene.width);
        std::cout << method << ": tau rmse " << rep.rmse << ", bias " << rep.mean_bias << "\n";
    } else {
        std::cout << method << ": retrieval written to " << out.string() << "\n";
    }
    timings["total"] = ms_since(t0);
    m["timings_ms"] = timings;
    write_manifest(out, m);
    return 0;
}

int cmd_benchmark(const fs::path& scene_dir, const std::string& patches_arg, const std::string& config_file,
                  const fs::path& out, const std::vector<std::string>& extras) {
    Config cfg = load_config(config_file, extras);
    if (!patches_arg.empty()) cfg.set("benchmark.patches", patches_arg);
    const auto t0 = clock_type::now();
    LoadedScene ls = load_scene(scene_dir);
    const Scene& scene = ls.bundle.scene;
    const ForwardModel& fwd = *ls.forward;
    const LatticeTopology lat = build_lattice(scene.width, scene.height);
    const SolverConfig solver = solver_from(cfg, fwd.components());
    const auto counts = cfg.get_ints("benchmark.patches", {1, 2, 4, 8});
    if (counts.empty()) throw ConfigError("benchmark.patches is empty");
    const RetrievalState init = init_state(scene, fwd, init_from(cfg), solver.hyper, solver.seed);

    std::vector<SpeedupRecord> records;
    std::string summary = "n_patches,threads,sweeps,total_ms,ms_per_sweep,speedup,log_posterior,mean_rel_dtau";
    if (ls.truth) summary += ",rmse";
    summary += "\n";
    std::vector<double> ref_tau;
    double ref_per_sweep = 0.0;
    for (int n : counts) {
        ParallelOptions po;
        po.n_patches = n;
        po.threads = cfg.get_int("parallel.threads", 0);
        const ParallelResult r = run_map_parallel(scene, fwd, lat, solver, po, init);
        const double per_sweep = r.speedup.total_ms / static_cast<double>(std::max<std::size_t>(1, r.trace.sweeps.size()));
        if (ref_tau.empty()) {
            ref_tau = r.state.tau;
            ref_per_sweep = per_sweep;
        }
        double rel = 0.0;
        for (std::size_t p = 0; p < ref_tau.size(); ++p)
            rel += ref_tau[p] > 0.0 ? std::abs(r.state.tau[p] - ref_tau[p]) / ref_tau[p] : std::abs(r.state.tau[p]);
        rel /= static_cast<double>(ref_tau.size());
        summary += std::to_string(n) + "," + std::to_string(r.speedup.threads) + "," +
                   std::to_string(r.trace.sweeps.size()) + "," + io::format_double(r.speedup.total_ms) + "," +
                   io::format_double(per_sweep) + "," + io::format_double(ref_per_sweep / per_sweep) + "," +
                   io::format_double(log_posterior(scene, r.state, solver.hyper, fwd, lat)) + "," +
                   io::format_double(rel);
        if (ls.truth) summary += "," + io::format_double(compute_metrics(r.state.tau, ls.truth->tau).rmse);
        summary += "\n";
        records.push_back(r.speedup);
    }
    io::write_speedup(out / "speedup.csv", records);
    io::write_text(out / "summary.csv", summary);
    json m = manifest_base("benchmark", cfg);
    m["scene"] = fs::absolute(scene_dir).string();
    m["patches"] = counts;
    m["seeds"] = {{"solver", solver.seed}};
    m["timings_ms"] = {{"total", ms_since(t0)}};
    write_manifest(out, m);
    std::cout << summary;
    return 0;
}

int cmd_slice(const fs::path& scene_dir, const fs::path& state_file, const std::string& config_file,
              const fs::path& out, const std::vector<std::string>& extras) {
    const Config cfg = load_config(config_file, extras);
    const auto t0 = clock_type::now();
    LoadedScene ls = load_scene(scene_dir);
    const Scene& scene = ls.bundle.scene;
    const LatticeTopology lat = build_lattice(scene.width, scene.height);
    const HyperParams hyper = hyper_from(cfg, ls.forward->components());
    const RetrievalState st = io::read_state(state_file);
    validate(st, scene, hyper);

    SliceSpec spec;
    spec.region = cfg.get_int("slice.region", spec.region);
    spec.component = cfg.get_int("slice.component", spec.component);
    spec.tau_lo = cfg.get_double("slice.tau_lo", spec.tau_lo);
    spec.tau_hi = cfg.get_double("slice.tau_hi", spec.tau_hi);
    spec.theta_lo = cfg.get_double("slice.theta_lo", spec.theta_lo);
    spec.theta_hi = cfg.get_double("slice.theta_hi", spec.theta_hi);
    spec.tau_points = cfg.get_int("slice.tau_points", spec.tau_points);
    spec.theta_points = cfg.get_int("slice.theta_points", spec.theta_points);
    const PosteriorSlice sl = posterior_slice(scene, *ls.forward, lat, st, hyper, spec);
    io::write_slice(out / "slice", sl);
    const CouplingReport cr = coupling(sl);
    std::string csv = "theta,argmin_tau\n";
    for (std::size_t i = 0; i < sl.theta.size(); ++i)
        csv += io::format_double(sl.theta[i]) + "," + io::format_double(cr.argmin_tau[i]) + "\n";
    io::write_text(out / "coupling.csv", csv);

    json m = manifest_base("slice", cfg);
    m["scene"] = fs::absolute(scene_dir).string();
    m["state"] = fs::absolute(state_file).string();
    m["coupling_spread"] = cr.spread;
    m["timings_ms"] = {{"total", ms_since(t0)}};
    write_manifest(out, m);
    std::cout << "slice " << sl.theta.size() << "x" << sl.tau.size() << " written; argmin tau spread " << cr.spread
              << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Bayesian aerosol optical depth retrieval on region lattices"};
    app.footer(kKeyHelp);
    app.require_subcommand(1);
    app.set_version_flag("--version", AODMAP_VERSION);

    std::string config_file, method = "map", patches;
    fs::path out, scene_dir, state_file;

    auto* sim = app.add_subcommand("simulate", "Generate a ground-truth scene and its observations");
    sim->add_option("-c,--config", config_file, "Configuration file");
    sim->add_option("-o,--out", out, "Output directory")->required();
    sim->allow_extras();

    auto* ret = app.add_subcommand("retrieve", "Retrieve tau and theta fields from a scene");
    ret->add_option("-s,--scene", scene_dir, "Scene directory")->required();
    ret->add_option("-m,--method", method, "map | map-parallel | mcmc | grid")->capture_default_str();
    ret->add_option("-c,--config", config_file, "Configuration file");
    ret->add_option("-o,--out", out, "Output directory")->required();
    ret->allow_extras();

    auto* bench = app.add_subcommand("benchmark", "Time the patch-parallel MAP solver over patch counts");
    bench->add_option("-s,--scene", scene_dir, "Scene directory")->required();
    bench->add_option("-p,--patches", patches, "Comma-separated patch counts (overrides benchmark.patches)");
    bench->add_option("-c,--config", config_file, "Configuration file");
    bench->add_option("-o,--out", out, "Output directory")->required();
    bench->allow_extras();

    auto* slice = app.add_subcommand("slice", "Negative log-posterior over a (theta_m, tau_p) grid");
    slice->add_option("-s,--scene", scene_dir, "Scene directory")->required();
    slice->add_option("--state", state_file, "state.json written by retrieve")->required();
    slice->add_option("-c,--config", config_file, "Configuration file");
    slice->add_option("-o,--out", out, "Output directory")->required();
    slice->allow_extras();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kExitInput;
    }

    try {
        if (*sim) return cmd_simulate(config_file, out, sim->remaining());
        if (*ret) return cmd_retrieve(scene_dir, method, config_file, out, ret->remaining());
        if (*bench) return cmd_benchmark(scene_dir, patches, config_file, out, bench->remaining());
        if (*slice) return cmd_slice(scene_dir, state_file, config_file, out, slice->remaining());
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    } catch (const fs::filesystem_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    } catch (const InitializationError& e) {
        std::cerr << "solver error: " << e.what() << "\n";
        return kExitSolver;
    } catch (const std::exception& e) {
        std::cerr << "solver error: " << e.what() << "\n";
        return kExitSolver;
    }
    return 0;
}

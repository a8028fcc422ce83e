#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "aodmap/baselines.hpp"
#include "aodmap/forward_model.hpp"
#include "aodmap/map_solver.hpp"
#include "aodmap/parallel.hpp"
#include "aodmap/probe.hpp"
#include "aodmap/simulator.hpp"
#include "aodmap/types.hpp"

namespace aodmap::io {

namespace fs = std::filesystem;

// How a scene's forward model is rebuilt: a synthetic table from its
// parameters, or a table exported with write_table.
struct ForwardSpec {
    std::string type = "synthetic";  // "synthetic" | "table"
    int channels = 36;
    int knots = 25;
    double tau_max = 6.0;
    std::uint64_t seed = 0;
    std::string table_path;  // for type = "table", relative to the scene directory
};

struct SceneBundle {
    Scene scene;
    std::string components = "default";  // "default" or a components file relative to the scene directory
    ForwardSpec forward;
};

// scene.json + radiance.csv.
void write_scene(const fs::path& dir, const SceneBundle& bundle);
SceneBundle read_scene(const fs::path& dir);

ComponentLibrary load_components(const fs::path& scene_dir, const std::string& ref);
std::unique_ptr<ForwardModel> make_forward(const ForwardSpec& spec, const ComponentLibrary& library,
                                           const fs::path& scene_dir);

void write_components(const fs::path& file, const ComponentLibrary& library);
ComponentLibrary read_components(const fs::path& file);

// JSON header (knots, dims, seed) + CSV of values, one row per (component, knot).
void write_table(const fs::path& json_file, const RadianceTable& table);
RadianceTable read_table(const fs::path& json_file);

// region,tau,theta_1..theta_M
void write_truth(const fs::path& file, const Truth& truth);
Truth read_truth(const fs::path& file, int width, int height);

// Full retrieval state (tau, theta, sigma2, kappa) as JSON.
void write_state(const fs::path& file, const RetrievalState& state);
RetrievalState read_state(const fs::path& file);

void write_trace(const fs::path& file, const SweepTrace& trace);
void write_speedup(const fs::path& file, const std::vector<SpeedupRecord>& records);
void write_metrics(const fs::path& file, const MetricsReport& report, const std::string& method);

// Per-region fields aligned with the scene layout: height rows of width values.
void write_grid(const fs::path& file, const std::vector<double>& field, int width);
// One row per region.
void write_rows(const fs::path& file, const std::vector<double>& values, int columns);
void write_slice(const fs::path& stem, const PosteriorSlice& slice);

std::string format_double(double v);
std::string read_text(const fs::path& file);
void write_text(const fs::path& file, const std::string& text);

}  // namespace aodmap::io

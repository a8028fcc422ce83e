#include <doctest.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>
#include <sys/wait.h>
#include <unistd.h>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Scratch {
    fs::path path = fs::temp_directory_path() / ("aodmap_cli_" + std::to_string(::getpid()));
    Scratch() {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~Scratch() { fs::remove_all(path); }
};

const fs::path& root() {
    static const Scratch s;
    return s.path;
}

int run(const std::string& args) {
    const std::string cmd = std::string(AODMAP_CLI) + " " + args + " > " + (root() / "last.log").string() + " 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& f) {
    std::ifstream in(f, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

json load(const fs::path& f) { return json::parse(slurp(f)); }

std::string dir(const std::string& name) { return (root() / name).string(); }

}  // namespace

TEST_CASE("simulate writes a deterministic default scene") {
    REQUIRE(run("simulate -o " + dir("a")) == 0);
    REQUIRE(run("simulate -o " + dir("b")) == 0);
    for (const char* f : {"scene.json", "radiance.csv", "truth.csv", "truth_tau.csv", "components.json"}) {
        CAPTURE(f);
        CHECK(fs::exists(root() / "a" / f));
        CHECK(slurp(root() / "a" / f) == slurp(root() / "b" / f));
    }
    const auto scene = load(root() / "a" / "scene.json");
    CHECK(scene["width"] == 16);
    CHECK(scene["height"] == 16);
    CHECK(scene["channels"] == 36);
    CHECK(load(root() / "a" / "components.json").size() == 8);
    const auto man = load(root() / "a" / "manifest.json");
    CHECK(man["command"] == "simulate");
    CHECK(man["seed"] == 1);
    CHECK(man["seeds"].contains("truth"));
    CHECK(man["version"] == "0.3.0");
}

TEST_CASE("noise changes the observations but not the truth") {
    REQUIRE(run("simulate -o " + dir("noisy") + " --scene.noise_level 0.5") == 0);
    REQUIRE(run("simulate -o " + dir("a")) == 0);
    CHECK(slurp(root() / "noisy" / "truth.csv") == slurp(root() / "a" / "truth.csv"));
    CHECK(slurp(root() / "noisy" / "radiance.csv") != slurp(root() / "a" / "radiance.csv"));
    REQUIRE(run("simulate -o " + dir("seed2") + " --seed=2") == 0);
    CHECK(slurp(root() / "seed2" / "truth.csv") != slurp(root() / "a" / "truth.csv"));
}

TEST_CASE("config file and overrides") {
    {
        std::ofstream cfg(root() / "small.ini");
        cfg << "[scene]\nwidth = 6\nheight = 5\n";
    }
    REQUIRE(run("simulate -c " + dir("small.ini") + " -o " + dir("small") + " --scene.height 4") == 0);
    const auto scene = load(root() / "small" / "scene.json");
    CHECK(scene["width"] == 6);
    CHECK(scene["height"] == 4);
    const auto man = load(root() / "small" / "manifest.json");
    CHECK(man["config"].get<std::string>().find("scene.height=4") != std::string::npos);
}

TEST_CASE("retrieval methods write their outputs") {
    REQUIRE(run("simulate -o " + dir("r") + " --scene.width 8 --scene.height 8 --scene.noise_level 0.3") == 0);
    REQUIRE(run("retrieve -s " + dir("r") + " -m map -o " + dir("r_map")) == 0);
    for (const char* f : {"tau.csv", "theta.csv", "state.json", "dominance.csv", "trace.csv", "metrics.json", "error.csv",
                          "manifest.json"})
        CHECK(fs::exists(root() / "r_map" / f));
    const auto m = load(root() / "r_map" / "metrics.json");
    CHECK(m["count"] == 64);
    CHECK(m["rmse"].get<double>() > 0.0);

    REQUIRE(run("retrieve -s " + dir("r") + " -m map-parallel --parallel.patches 1 -o " + dir("r_par")) == 0);
    CHECK(slurp(root() / "r_par" / "state.json") == slurp(root() / "r_map" / "state.json"));
    CHECK(fs::exists(root() / "r_par" / "speedup.csv"));

    REQUIRE(run("retrieve -s " + dir("r") + " -m mcmc --mcmc.iterations 60 --mcmc.burn_in 20 -o " + dir("r_mc")) == 0);
    CHECK(fs::exists(root() / "r_mc" / "tau_std.csv"));
    REQUIRE(run("retrieve -s " + dir("r") + " -m grid -o " + dir("r_grid")) == 0);
    CHECK(fs::exists(root() / "r_grid" / "success.csv"));

    REQUIRE(run("slice -s " + dir("r") + " --state " + dir("r_map/state.json") + " -o " + dir("r_slice") +
                " --slice.region 10 --slice.tau_points 11 --slice.theta_points 5") == 0);
    CHECK(fs::exists(root() / "r_slice" / "slice.csv"));
    CHECK(fs::exists(root() / "r_slice" / "coupling.csv"));
}

TEST_CASE("MAP beats the grid baseline on the half-noise benchmark scene") {
    REQUIRE(run("simulate -o " + dir("bench") + " --scene.noise_level 0.5") == 0);
    REQUIRE(run("retrieve -s " + dir("bench") + " -m map -o " + dir("bench_map")) == 0);
    REQUIRE(run("retrieve -s " + dir("bench") + " -m grid -o " + dir("bench_grid")) == 0);
    const double map = load(root() / "bench_map" / "metrics.json")["rmse"].get<double>();
    const double grid = load(root() / "bench_grid" / "metrics.json")["rmse"].get<double>();
    MESSAGE("rmse map " << map << " grid " << grid);
    CHECK(map < grid);
}

TEST_CASE("benchmark with one patch reports unit speedup") {
    REQUIRE(run("simulate -o " + dir("bm") + " --scene.width 8 --scene.height 8") == 0);
    REQUIRE(run("benchmark -s " + dir("bm") + " -p 1 -o " + dir("bm_out")) == 0);
    std::istringstream in(slurp(root() / "bm_out" / "summary.csv"));
    std::string header, row;
    std::getline(in, header);
    std::getline(in, row);
    CHECK(header.rfind("n_patches,threads,sweeps,total_ms,ms_per_sweep,speedup", 0) == 0);
    std::vector<std::string> cells;
    std::istringstream rs(row);
    for (std::string c; std::getline(rs, c, ',');) cells.push_back(c);
    REQUIRE(cells.size() == 9);
    CHECK(cells[0] == "1");
    CHECK(std::stod(cells[5]) == 1.0);
}

TEST_CASE("usage and input errors exit with code 2") {
    CHECK(run("simulate -o " + dir("x") + " --bogus.key 1") == 2);
    CHECK(run("retrieve -m map -o " + dir("x")) == 2);
    CHECK(run("retrieve -s " + dir("does_not_exist") + " -m map -o " + dir("x")) == 2);
    CHECK(run("retrieve -s " + dir("r") + " -m newton -o " + dir("x")) == 2);
    CHECK(run("retrieve -s " + dir("r") + " -m map -o " + dir("x") + " --solver.max_sweeps 0") == 2);
    CHECK(run("simulate -c " + dir("missing.ini") + " -o " + dir("x")) == 2);
    CHECK(run("frobnicate") == 2);
}

TEST_CASE("numerical failure at initialization exits with code 3") {
    REQUIRE(run("simulate -o " + dir("huge") + " --scene.width 4 --scene.height 4") == 0);
    std::istringstream in(slurp(root() / "huge" / "radiance.csv"));
    std::string out;
    for (std::string line; std::getline(in, line);) {
        std::string row;
        for (std::size_t i = 0, n = std::count(line.begin(), line.end(), ',') + 1; i < n; ++i) row += i ? ",1e200" : "1e200";
        out += row + "\n";
    }
    std::ofstream(root() / "huge" / "radiance.csv") << out;
    CHECK(run("retrieve -s " + dir("huge") + " -m map -o " + dir("huge_out")) == 3);
}

TEST_CASE("default noiseless retrieval is below the frozen recovery threshold") {
    REQUIRE(run("simulate -o " + dir("clean")) == 0);
    REQUIRE(run("retrieve -s " + dir("clean") + " -m map -o " + dir("clean_map")) == 0);
    const double rmse = load(root() / "clean_map" / "metrics.json")["rmse"].get<double>();
    MESSAGE("noiseless map rmse " << rmse);
    CHECK(rmse < 0.045);
}

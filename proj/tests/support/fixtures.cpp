#include "fixtures.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <stdexcept>

#include "aodmap/map_solver.hpp"
#include "aodmap/rng.hpp"

namespace fixtures {

using nlohmann::json;
using namespace aodmap;

const json& oracle() {
    static const json data = [] {
        std::ifstream in(AODMAP_TEST_DATA "/oracle_fixtures.json");
        if (!in) throw std::runtime_error("cannot open oracle fixtures");
        return json::parse(in);
    }();
    return data;
}

namespace {

RadianceTable table_from(const json& j) {
    RadianceTable t;
    t.tau_knots = j.at("knots").get<std::vector<double>>();
    t.components = j.at("components").get<int>();
    t.channels = j.at("channels").get<int>();
    t.values = j.at("table").get<std::vector<double>>();
    return t;
}

}  // namespace

OracleCase load_case(const json& j) {
    const int w = j.at("width"), h = j.at("height"), c = j.at("channels"), m = j.at("components");
    OracleCase oc{{}, TableForwardModel(table_from(j)), build_lattice(w, h), {}, {}, &j.at("expected")};
    oc.scene.width = w;
    oc.scene.height = h;
    oc.scene.channels = c;
    oc.scene.radiance = j.at("radiance").get<std::vector<double>>();
    oc.scene.channel_mask = j.at("mask").get<std::vector<bool>>();
    oc.state.components = m;
    oc.state.tau = j.at("tau").get<std::vector<double>>();
    oc.state.theta = j.at("theta").get<std::vector<double>>();
    oc.state.sigma2 = j.at("sigma2").get<std::vector<double>>();
    oc.state.kappa = j.at("kappa").get<double>();
    oc.hyper = HyperParams::uniform(m);
    oc.hyper.alpha = j.at("alpha").get<std::vector<double>>();
    return oc;
}

double rel_err(double got, double want) {
    const double scale = std::max(std::abs(want), 1e-300);
    return std::abs(got - want) / scale;
}

RandomProblem random_problem(std::uint64_t seed, int width, int height, int channels, int components,
                             double noise) {
    ComponentLibrary lib = default_component_library();
    lib.components.resize(static_cast<std::size_t>(components));
    SyntheticTableOptions o;
    o.channels = channels;
    o.knots = 9;
    o.seed = seed;
    RandomProblem rp{{}, TableForwardModel(build_synthetic_table(lib, o)), build_lattice(width, height), {}, {}};

    Rng rng(derive_seed(seed, "test_problem"));
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::gamma_distribution<double> g(0.7, 1.0);
    const int P = width * height;
    rp.state.components = components;
    rp.state.tau.resize(P);
    rp.state.theta.resize(static_cast<std::size_t>(P) * components);
    for (int p = 0; p < P; ++p) {
        rp.state.tau[p] = 1.5 * u(rng);
        auto row = rp.state.theta_row(p);
        double s = 0.0;
        for (double& v : row) s += (v = g(rng) + 1e-3);
        for (double& v : row) v /= s;
        project_to_simplex_floor(row);
    }
    rp.scene.width = width;
    rp.scene.height = height;
    rp.scene.channels = channels;
    rp.scene.channel_mask.assign(static_cast<std::size_t>(channels), true);
    rp.scene.radiance.resize(static_cast<std::size_t>(P) * channels);
    std::normal_distribution<double> z(0.0, 1.0);
    for (int p = 0; p < P; ++p) {
        const auto l = rp.forward.radiance(1.5 * u(rng), rp.state.theta_row(p));
        for (int c = 0; c < channels; ++c)
            rp.scene.radiance[static_cast<std::size_t>(p) * channels + c] = std::max(0.0, l[c] * (1.0 + noise * z(rng)));
    }
    rp.state.sigma2.resize(channels);
    for (double& s : rp.state.sigma2) s = 1e-3 + 1e-2 * u(rng);
    rp.state.kappa = 0.5 + 10.0 * u(rng);
    rp.hyper = HyperParams::uniform(components);
    for (double& a : rp.hyper.alpha) a = 0.2 + 2.0 * u(rng);
    return rp;
}

const TableForwardModel& default_forward() {
    static const TableForwardModel fwd(build_synthetic_table(default_component_library(), {}));
    return fwd;
}

}  // namespace fixtures

#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "aodmap/forward_model.hpp"
#include "aodmap/lattice.hpp"
#include "aodmap/simulator.hpp"
#include "aodmap/types.hpp"

namespace fixtures {

const nlohmann::json& oracle();

// One frozen reference case: a small random scene with its own lookup table.
struct OracleCase {
    aodmap::Scene scene;
    aodmap::TableForwardModel forward;
    aodmap::LatticeTopology lattice;
    aodmap::RetrievalState state;
    aodmap::HyperParams hyper;
    const nlohmann::json* expected = nullptr;
};

OracleCase load_case(const nlohmann::json& j);

double rel_err(double got, double want);

// Random small problem built from the library's own synthetic table; used by
// self-consistency properties that need no external oracle.
struct RandomProblem {
    aodmap::Scene scene;
    aodmap::TableForwardModel forward;
    aodmap::LatticeTopology lattice;
    aodmap::RetrievalState state;
    aodmap::HyperParams hyper;
};

RandomProblem random_problem(std::uint64_t seed, int width, int height, int channels, int components,
                             double noise = 0.05);

// The shared 16x16, eight-component default synthetic forward model.
const aodmap::TableForwardModel& default_forward();

}  // namespace fixtures

#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace aodmap {

using Rng = std::mt19937_64;

// Independent draw streams used by the sweep engine. Each (seed, sweep, region,
// purpose) tuple owns its own generator, so the draws a region sees do not
// depend on how regions are scheduled across patches or threads.
enum class Stream : std::uint64_t {
    tau_proposal = 1,
    theta_proposal = 2,
    tau_accept = 3,
    theta_accept = 4,
};

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b);

// Derives a named sub-seed, e.g. derive_seed(seed, "noise").
std::uint64_t derive_seed(std::uint64_t seed, std::string_view tag);

Rng stream_rng(std::uint64_t seed, std::uint64_t sweep, std::uint64_t region, Stream purpose);

}  // namespace aodmap

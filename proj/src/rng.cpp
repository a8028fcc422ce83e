#include "aodmap/rng.hpp"

namespace aodmap {

namespace {

// splitmix64 finalizer
std::uint64_t avalanche(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) { return avalanche(avalanche(a) ^ (b + 0x632be59bd9b4e019ULL)); }

std::uint64_t derive_seed(std::uint64_t seed, std::string_view tag) {
    std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
    for (char ch : tag) {
        h ^= static_cast<unsigned char>(ch);
        h *= 0x100000001b3ULL;
    }
    return mix_seed(seed, h);
}

Rng stream_rng(std::uint64_t seed, std::uint64_t sweep, std::uint64_t region, Stream purpose) {
    std::uint64_t k = mix_seed(seed, static_cast<std::uint64_t>(purpose));
    k = mix_seed(k, sweep);
    k = mix_seed(k, region);
    return Rng(k);
}

}  // namespace aodmap

#include "aodmap/lattice.hpp"

#include "aodmap/error.hpp"

namespace aodmap {

LatticeTopology build_lattice(int width, int height) {
    if (width < 2 || height < 2) throw ConfigError("lattice needs width >= 2 and height >= 2");

    LatticeTopology lat;
    lat.width_ = width;
    lat.height_ = height;
    const int P = width * height;
    lat.neighbors_.assign(P, {-1, -1, -1, -1});
    lat.counts_.assign(P, 0);
    lat.edges_.reserve(static_cast<std::size_t>(width) * (height - 1) + static_cast<std::size_t>(height) * (width - 1));

    auto link = [&](int a, int b) {
        lat.neighbors_[a][lat.counts_[a]++] = b;
        lat.neighbors_[b][lat.counts_[b]++] = a;
        lat.edges_.push_back({a, b});
    };
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            const int p = lat.index(x, y);
            if (x + 1 < width) link(p, p + 1);
            if (y + 1 < height) link(p, p + width);
        }
    }
    return lat;
}

}  // namespace aodmap

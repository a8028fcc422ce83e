#pragma once

#include <array>
#include <span>
#include <vector>

namespace aodmap {

struct Edge {
    int a;
    int b;  // a < b
};

// 4-neighbour lattice over width x height regions, truncated at the borders.
class LatticeTopology {
public:
    LatticeTopology() = default;

    int width() const { return width_; }
    int height() const { return height_; }
    int regions() const { return width_ * height_; }

    int index(int x, int y) const { return y * width_ + x; }
    int x_of(int p) const { return p % width_; }
    int y_of(int p) const { return p / width_; }

    std::span<const int> neighbors(int p) const {
        return {neighbors_[p].data(), static_cast<std::size_t>(counts_[p])};
    }
    int neighbor_count(int p) const { return counts_[p]; }
    const std::vector<Edge>& edges() const { return edges_; }

private:
    friend LatticeTopology build_lattice(int width, int height);

    int width_ = 0;
    int height_ = 0;
    std::vector<std::array<int, 4>> neighbors_;
    std::vector<int> counts_;
    std::vector<Edge> edges_;
};

// Throws ConfigError unless width >= 2 and height >= 2.
LatticeTopology build_lattice(int width, int height);

}  // namespace aodmap

#pragma once

#include <utility>
#include <vector>

namespace chaincast {

// Dense symmetric weighted graph with zero diagonal and nonnegative weights.
// coords, when present, give each node a lattice position; the spectral
// module uses them to attach isolated nodes to the nearest cluster.
struct WeightedGraph {
    int n = 0;
    std::vector<double> w;  // row-major n*n
    std::vector<std::pair<int, int>> coords;

    WeightedGraph() = default;
    explicit WeightedGraph(int nodes)
        : n(nodes), w(static_cast<std::size_t>(nodes) * static_cast<std::size_t>(nodes), 0.0) {}

    [[nodiscard]] double at(int i, int j) const {
        return w[static_cast<std::size_t>(i) * static_cast<std::size_t>(n) +
                 static_cast<std::size_t>(j)];
    }
    void set(int i, int j, double v) {
        w[static_cast<std::size_t>(i) * static_cast<std::size_t>(n) + static_cast<std::size_t>(j)] =
            v;
        w[static_cast<std::size_t>(j) * static_cast<std::size_t>(n) + static_cast<std::size_t>(i)] =
            v;
    }

    [[nodiscard]] double degree(int i) const {
        double d = 0.0;
        for (int j = 0; j < n; ++j) d += at(i, j);
        return d;
    }

    // Nodes with no incident edge.
    [[nodiscard]] std::vector<int> isolated_nodes() const;

    // Connected components over nonzero weights, each sorted, ordered by
    // smallest member.
    [[nodiscard]] std::vector<std::vector<int>> components() const;

    // Throws ParamError on asymmetry, negative weights, or nonzero diagonal.
    void validate() const;
};

}  // namespace chaincast

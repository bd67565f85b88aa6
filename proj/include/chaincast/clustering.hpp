#pragma once

#include <cstdint>
#include <vector>

namespace chaincast {

// Partition of graph nodes into k clusters. For chainlet graphs the node
// index is the row-major bucket index (inputs-major).
struct Clustering {
    int k = 0;
    std::vector<int> assignment;  // node -> cluster id in [0, k)
    std::uint64_t seed = 0;

    // Throws ParamError unless every node is assigned a valid id and every
    // cluster is nonempty.
    void validate(std::size_t expected_nodes) const;
};

// 1-D embedding of clusters: order[i] is the cluster id placed at
// positions[i], positions are 1..n at unit spacing.
struct ClusterEmbedding {
    std::vector<int> order;
    std::vector<double> positions;

    [[nodiscard]] double L1() const { return positions.front(); }
    [[nodiscard]] double L2() const { return positions.back(); }
    [[nodiscard]] int n_clusters() const { return static_cast<int>(order.size()); }

    // Position index of a cluster id (inverse of order).
    [[nodiscard]] std::vector<int> position_of() const;

    [[nodiscard]] ClusterEmbedding reversed() const;

    void validate() const;
};

}  // namespace chaincast

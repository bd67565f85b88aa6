#include "chaincast/clustering.hpp"

#include <algorithm>
#include <cmath>

#include "chaincast/errors.hpp"

namespace chaincast {

void Clustering::validate(std::size_t expected_nodes) const {
    if (k <= 0) throw ParamError("clustering has k <= 0");
    if (assignment.size() != expected_nodes)
        throw ParamError("clustering covers " + std::to_string(assignment.size()) +
                         " nodes, expected " + std::to_string(expected_nodes));
    std::vector<int> counts(static_cast<std::size_t>(k), 0);
    for (int id : assignment) {
        if (id < 0 || id >= k) throw ParamError("cluster id out of range: " + std::to_string(id));
        ++counts[static_cast<std::size_t>(id)];
    }
    for (int c = 0; c < k; ++c)
        if (counts[static_cast<std::size_t>(c)] == 0)
            throw ParamError("cluster " + std::to_string(c) + " is empty");
}

std::vector<int> ClusterEmbedding::position_of() const {
    std::vector<int> inv(order.size(), -1);
    for (std::size_t i = 0; i < order.size(); ++i) inv[static_cast<std::size_t>(order[i])] =
        static_cast<int>(i);
    return inv;
}

ClusterEmbedding ClusterEmbedding::reversed() const {
    ClusterEmbedding out = *this;
    std::reverse(out.order.begin(), out.order.end());
    return out;
}

void ClusterEmbedding::validate() const {
    const std::size_t n = order.size();
    if (n == 0) throw ParamError("embedding is empty");
    if (positions.size() != n) throw ParamError("embedding order/position size mismatch");
    std::vector<bool> seen(n, false);
    for (int id : order) {
        if (id < 0 || static_cast<std::size_t>(id) >= n || seen[static_cast<std::size_t>(id)])
            throw ParamError("embedding order is not a permutation of cluster ids");
        seen[static_cast<std::size_t>(id)] = true;
    }
    for (std::size_t i = 0; i < n; ++i)
        if (std::abs(positions[i] - (1.0 + static_cast<double>(i))) > 1e-9)
            throw ParamError("embedding positions must be 1..n at unit spacing");
}

}  // namespace chaincast

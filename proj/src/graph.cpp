#include "chaincast/graph.hpp"

#include <algorithm>
#include <numeric>

#include "chaincast/errors.hpp"

namespace chaincast {

std::vector<int> WeightedGraph::isolated_nodes() const {
    std::vector<int> out;
    for (int i = 0; i < n; ++i) {
        bool has_edge = false;
        for (int j = 0; j < n && !has_edge; ++j) has_edge = at(i, j) != 0.0;
        if (!has_edge) out.push_back(i);
    }
    return out;
}

std::vector<std::vector<int>> WeightedGraph::components() const {
    std::vector<int> parent(static_cast<std::size_t>(n));
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](int x) {
        while (parent[static_cast<std::size_t>(x)] != x) {
            parent[static_cast<std::size_t>(x)] =
                parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
            x = parent[static_cast<std::size_t>(x)];
        }
        return x;
    };
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (at(i, j) != 0.0) {
                const int ri = find(i), rj = find(j);
                if (ri != rj) parent[static_cast<std::size_t>(std::max(ri, rj))] = std::min(ri, rj);
            }
    std::vector<std::vector<int>> comps;
    std::vector<int> comp_of(static_cast<std::size_t>(n), -1);
    for (int i = 0; i < n; ++i) {
        const int r = find(i);
        if (comp_of[static_cast<std::size_t>(r)] < 0) {
            comp_of[static_cast<std::size_t>(r)] = static_cast<int>(comps.size());
            comps.emplace_back();
        }
        comps[static_cast<std::size_t>(comp_of[static_cast<std::size_t>(r)])].push_back(i);
    }
    return comps;
}

void WeightedGraph::validate() const {
    if (n < 0 || w.size() != static_cast<std::size_t>(n) * static_cast<std::size_t>(n))
        throw ParamError("graph weight matrix has wrong size");
    for (int i = 0; i < n; ++i) {
        if (at(i, i) != 0.0) throw ParamError("graph diagonal must be zero");
        for (int j = i + 1; j < n; ++j) {
            if (at(i, j) != at(j, i)) throw ParamError("graph weights must be symmetric");
            if (at(i, j) < 0.0) throw ParamError("graph weights must be nonnegative");
        }
    }
}

}  // namespace chaincast

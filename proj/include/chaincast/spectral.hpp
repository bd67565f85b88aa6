#pragma once

#include <cstdint>
#include <vector>

#include "chaincast/clustering.hpp"
#include "chaincast/graph.hpp"

namespace chaincast {

enum class LaplacianKind { Unnormalized, Symmetric };

// L = D - W, or L_sym = I - D^{-1/2} W D^{-1/2}. Isolated nodes contribute
// zero rows to L and identity rows to L_sym.
std::vector<double> laplacian(const WeightedGraph& g, LaplacianKind kind);

// Dense symmetric eigensolver (cyclic Jacobi). Eigenpairs sorted by
// ascending eigenvalue; vectors are columns of `vectors` (column-major).
struct EigenDecomposition {
    std::vector<double> values;
    std::vector<double> vectors;  // vectors[i + n*j] = component i of pair j
    int n = 0;

    [[nodiscard]] const double* vector(int j) const {
        return vectors.data() + static_cast<std::size_t>(n) * static_cast<std::size_t>(j);
    }
};
EigenDecomposition eigen_symmetric(std::vector<double> matrix, int n);

// Spectral clustering: k smallest eigenvectors of the Laplacian on the
// non-isolated subgraph, then seeded deterministic k-means. The default is
// the normalized symmetric variant with unit-normalized embedding rows; the
// unnormalized variant uses the raw eigenvector rows. Isolated nodes are
// attached to the cluster with the nearest member in Manhattan distance on
// the node coords (cluster 0 when the graph carries no coords).
Clustering spectral_cluster(const WeightedGraph& g, int k, std::uint64_t seed,
                            LaplacianKind kind = LaplacianKind::Symmetric);

// k-node graph whose edge weights sum all original weights between two
// clusters; zero diagonal.
WeightedGraph cluster_supergraph(const WeightedGraph& g, const Clustering& clustering);

// Orders clusters by their Fiedler-vector component and assigns positions
// 1..n. Canonical sign: the largest-magnitude component is made positive;
// ties break by ascending cluster id. Throws DisconnectedSupergraphError
// when the supergraph is not connected.
ClusterEmbedding fiedler_embedding(const WeightedGraph& supergraph);

}  // namespace chaincast

#include "chaincast/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "chaincast/errors.hpp"
#include "chaincast/rng.hpp"

namespace chaincast {

std::vector<double> laplacian(const WeightedGraph& g, LaplacianKind kind) {
    g.validate();
    const int n = g.n;
    const auto sz = static_cast<std::size_t>(n);
    std::vector<double> L(sz * sz, 0.0);
    std::vector<double> deg(sz, 0.0);
    for (int i = 0; i < n; ++i) deg[static_cast<std::size_t>(i)] = g.degree(i);

    if (kind == LaplacianKind::Unnormalized) {
        for (int i = 0; i < n; ++i) {
            L[static_cast<std::size_t>(i) * sz + static_cast<std::size_t>(i)] =
                deg[static_cast<std::size_t>(i)];
            for (int j = 0; j < n; ++j)
                if (j != i)
                    L[static_cast<std::size_t>(i) * sz + static_cast<std::size_t>(j)] =
                        -g.at(i, j);
        }
        return L;
    }

    std::vector<double> inv_sqrt(sz, 0.0);
    for (int i = 0; i < n; ++i)
        if (deg[static_cast<std::size_t>(i)] > 0.0)
            inv_sqrt[static_cast<std::size_t>(i)] = 1.0 / std::sqrt(deg[static_cast<std::size_t>(i)]);
    for (int i = 0; i < n; ++i) {
        L[static_cast<std::size_t>(i) * sz + static_cast<std::size_t>(i)] = 1.0;
        for (int j = 0; j < n; ++j)
            if (j != i)
                L[static_cast<std::size_t>(i) * sz + static_cast<std::size_t>(j)] =
                    -inv_sqrt[static_cast<std::size_t>(i)] * g.at(i, j) *
                    inv_sqrt[static_cast<std::size_t>(j)];
    }
    return L;
}

EigenDecomposition eigen_symmetric(std::vector<double> a, int n) {
    const auto sz = static_cast<std::size_t>(n);
    if (a.size() != sz * sz) throw ParamError("eigen_symmetric: matrix size mismatch");

    EigenDecomposition out;
    out.n = n;
    out.vectors.assign(sz * sz, 0.0);
    for (std::size_t i = 0; i < sz; ++i) out.vectors[i + sz * i] = 1.0;
    if (n == 1) {
        out.values = {a[0]};
        return out;
    }

    auto off_norm = [&] {
        double s = 0.0;
        for (int p = 0; p < n; ++p)
            for (int q = p + 1; q < n; ++q) {
                const double v = a[static_cast<std::size_t>(p) * sz + static_cast<std::size_t>(q)];
                s += v * v;
            }
        return std::sqrt(2.0 * s);
    };
    double frob = 0.0;
    for (const double v : a) frob += v * v;
    frob = std::sqrt(frob);
    const double tol = std::max(1e-300, 1e-14 * frob);

    // Cyclic Jacobi sweeps; 400x400 converges in well under the cap.
    for (int sweep = 0; sweep < 64 && off_norm() > tol; ++sweep) {
        for (int p = 0; p < n; ++p) {
            for (int q = p + 1; q < n; ++q) {
                const double apq = a[static_cast<std::size_t>(p) * sz + static_cast<std::size_t>(q)];
                if (std::abs(apq) <= 1e-300) continue;
                const double app = a[static_cast<std::size_t>(p) * sz + static_cast<std::size_t>(p)];
                const double aqq = a[static_cast<std::size_t>(q) * sz + static_cast<std::size_t>(q)];
                const double theta = (aqq - app) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;

                for (int i = 0; i < n; ++i) {
                    const auto ip = static_cast<std::size_t>(i) * sz + static_cast<std::size_t>(p);
                    const auto iq = static_cast<std::size_t>(i) * sz + static_cast<std::size_t>(q);
                    const double aip = a[ip], aiq = a[iq];
                    a[ip] = c * aip - s * aiq;
                    a[iq] = s * aip + c * aiq;
                }
                for (int i = 0; i < n; ++i) {
                    const auto pi = static_cast<std::size_t>(p) * sz + static_cast<std::size_t>(i);
                    const auto qi = static_cast<std::size_t>(q) * sz + static_cast<std::size_t>(i);
                    const double api = a[pi], aqi = a[qi];
                    a[pi] = c * api - s * aqi;
                    a[qi] = s * api + c * aqi;
                }
                for (int i = 0; i < n; ++i) {
                    const auto ip = static_cast<std::size_t>(i) + sz * static_cast<std::size_t>(p);
                    const auto iq = static_cast<std::size_t>(i) + sz * static_cast<std::size_t>(q);
                    const double vip = out.vectors[ip], viq = out.vectors[iq];
                    out.vectors[ip] = c * vip - s * viq;
                    out.vectors[iq] = s * vip + c * viq;
                }
            }
        }
    }

    std::vector<int> idx(sz);
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](int i, int j) {
        return a[static_cast<std::size_t>(i) * sz + static_cast<std::size_t>(i)] <
               a[static_cast<std::size_t>(j) * sz + static_cast<std::size_t>(j)];
    });
    EigenDecomposition sorted;
    sorted.n = n;
    sorted.values.resize(sz);
    sorted.vectors.resize(sz * sz);
    for (std::size_t j = 0; j < sz; ++j) {
        sorted.values[j] =
            a[static_cast<std::size_t>(idx[j]) * sz + static_cast<std::size_t>(idx[j])];
        for (std::size_t i = 0; i < sz; ++i)
            sorted.vectors[i + sz * j] = out.vectors[i + sz * static_cast<std::size_t>(idx[j])];
    }
    return sorted;
}

namespace {

// Seeded farthest-point k-means on row vectors. Lloyd iterations capped at
// 300, convergence at 1e-9 centroid movement, all ties broken by lowest
// index so the result is a pure function of (rows, k, seed).
std::vector<int> kmeans_rows(const std::vector<double>& rows, int m, int dim, int k,
                             std::uint64_t seed) {
    const auto d = static_cast<std::size_t>(dim);
    auto row = [&](int i) { return rows.data() + static_cast<std::size_t>(i) * d; };
    auto dist2 = [&](const double* a, const double* b) {
        double s = 0.0;
        for (std::size_t c = 0; c < d; ++c) {
            const double t = a[c] - b[c];
            s += t * t;
        }
        return s;
    };

    Rng rng(seed);
    std::vector<double> centroids(static_cast<std::size_t>(k) * d);
    std::vector<double> nearest(static_cast<std::size_t>(m),
                                std::numeric_limits<double>::infinity());
    int first = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(m)));
    std::copy_n(row(first), d, centroids.begin());
    for (int c = 1; c < k; ++c) {
        int far = 0;
        double far_d = -1.0;
        for (int i = 0; i < m; ++i) {
            const double dd = dist2(row(i), centroids.data() + static_cast<std::size_t>(c - 1) * d);
            nearest[static_cast<std::size_t>(i)] =
                std::min(nearest[static_cast<std::size_t>(i)], dd);
            if (nearest[static_cast<std::size_t>(i)] > far_d) {
                far_d = nearest[static_cast<std::size_t>(i)];
                far = i;
            }
        }
        std::copy_n(row(far), d, centroids.begin() + static_cast<std::size_t>(c) * d);
    }

    std::vector<int> assign(static_cast<std::size_t>(m), 0);
    std::vector<double> next(centroids.size());
    std::vector<int> counts(static_cast<std::size_t>(k));
    for (int iter = 0; iter < 300; ++iter) {
        for (int i = 0; i < m; ++i) {
            int best = 0;
            double best_d = std::numeric_limits<double>::infinity();
            for (int c = 0; c < k; ++c) {
                const double dd = dist2(row(i), centroids.data() + static_cast<std::size_t>(c) * d);
                if (dd < best_d) {
                    best_d = dd;
                    best = c;
                }
            }
            assign[static_cast<std::size_t>(i)] = best;
        }

        std::fill(next.begin(), next.end(), 0.0);
        std::fill(counts.begin(), counts.end(), 0);
        for (int i = 0; i < m; ++i) {
            const auto c = static_cast<std::size_t>(assign[static_cast<std::size_t>(i)]);
            ++counts[c];
            for (std::size_t col = 0; col < d; ++col) next[c * d + col] += row(i)[col];
        }
        // Re-seed an empty cluster at the point farthest from its centroid.
        for (int c = 0; c < k; ++c) {
            if (counts[static_cast<std::size_t>(c)] > 0) continue;
            int far = 0;
            double far_d = -1.0;
            for (int i = 0; i < m; ++i) {
                const auto ci = static_cast<std::size_t>(assign[static_cast<std::size_t>(i)]);
                if (counts[ci] <= 1) continue;  // keep donor clusters nonempty
                const double dd = dist2(row(i), centroids.data() + ci * d);
                if (dd > far_d) {
                    far_d = dd;
                    far = i;
                }
            }
            const auto old = static_cast<std::size_t>(assign[static_cast<std::size_t>(far)]);
            for (std::size_t col = 0; col < d; ++col) {
                next[old * d + col] -= row(far)[col];
                next[static_cast<std::size_t>(c) * d + col] += row(far)[col];
            }
            --counts[old];
            ++counts[static_cast<std::size_t>(c)];
            assign[static_cast<std::size_t>(far)] = c;
        }

        double moved = 0.0;
        for (int c = 0; c < k; ++c) {
            const auto cs = static_cast<std::size_t>(c);
            double shift = 0.0;
            for (std::size_t col = 0; col < d; ++col) {
                const double mean = next[cs * d + col] / counts[cs];
                const double delta = mean - centroids[cs * d + col];
                shift += delta * delta;
                centroids[cs * d + col] = mean;
            }
            moved = std::max(moved, std::sqrt(shift));
        }
        if (moved <= 1e-9) break;
    }

    // Final assignment against the converged centroids.
    for (int i = 0; i < m; ++i) {
        int best = 0;
        double best_d = std::numeric_limits<double>::infinity();
        for (int c = 0; c < k; ++c) {
            const double dd = dist2(row(i), centroids.data() + static_cast<std::size_t>(c) * d);
            if (dd < best_d) {
                best_d = dd;
                best = c;
            }
        }
        assign[static_cast<std::size_t>(i)] = best;
    }
    // The nearest-centroid pass can empty a cluster again; restore nonempty
    // clusters with the same deterministic fix before returning.
    std::fill(counts.begin(), counts.end(), 0);
    for (int i = 0; i < m; ++i) ++counts[static_cast<std::size_t>(assign[static_cast<std::size_t>(i)])];
    for (int c = 0; c < k; ++c) {
        if (counts[static_cast<std::size_t>(c)] > 0) continue;
        int far = 0;
        double far_d = -1.0;
        for (int i = 0; i < m; ++i) {
            const auto ci = static_cast<std::size_t>(assign[static_cast<std::size_t>(i)]);
            if (counts[ci] <= 1) continue;
            const double dd = dist2(row(i), centroids.data() + ci * d);
            if (dd > far_d) {
                far_d = dd;
                far = i;
            }
        }
        --counts[static_cast<std::size_t>(assign[static_cast<std::size_t>(far)])];
        assign[static_cast<std::size_t>(far)] = c;
        ++counts[static_cast<std::size_t>(c)];
    }
    return assign;
}

}  // namespace

Clustering spectral_cluster(const WeightedGraph& g, int k, std::uint64_t seed,
                            LaplacianKind kind) {
    g.validate();
    if (k < 1) throw ParamError("k must be >= 1");

    Clustering out;
    out.k = k;
    out.seed = seed;
    out.assignment.assign(static_cast<std::size_t>(g.n), 0);
    if (k == 1) return out;

    std::vector<int> usable;
    std::vector<bool> is_usable(static_cast<std::size_t>(g.n), false);
    for (int i = 0; i < g.n; ++i) {
        bool has_edge = false;
        for (int j = 0; j < g.n && !has_edge; ++j) has_edge = g.at(i, j) != 0.0;
        if (has_edge) {
            is_usable[static_cast<std::size_t>(i)] = true;
            usable.push_back(i);
        }
    }
    const int u = static_cast<int>(usable.size());
    if (k > u)
        throw ParamError("k = " + std::to_string(k) + " exceeds the " + std::to_string(u) +
                         " non-isolated nodes");

    WeightedGraph sub(u);
    for (int a = 0; a < u; ++a)
        for (int b = a + 1; b < u; ++b)
            sub.set(a, b, g.at(usable[static_cast<std::size_t>(a)],
                               usable[static_cast<std::size_t>(b)]));

    const auto L = laplacian(sub, kind);
    const auto eig = eigen_symmetric(L, u);

    // Embed rows from the k smallest eigenvectors; the symmetric variant
    // unit-normalizes each row.
    std::vector<double> rows(static_cast<std::size_t>(u) * static_cast<std::size_t>(k));
    for (int i = 0; i < u; ++i) {
        double norm2 = 0.0;
        for (int c = 0; c < k; ++c) {
            const double v = eig.vector(c)[i];
            rows[static_cast<std::size_t>(i) * static_cast<std::size_t>(k) +
                 static_cast<std::size_t>(c)] = v;
            norm2 += v * v;
        }
        if (kind == LaplacianKind::Symmetric && norm2 > 0.0) {
            const double inv = 1.0 / std::sqrt(norm2);
            for (int c = 0; c < k; ++c)
                rows[static_cast<std::size_t>(i) * static_cast<std::size_t>(k) +
                     static_cast<std::size_t>(c)] *= inv;
        }
    }

    const auto labels = kmeans_rows(rows, u, k, k, seed);
    for (int a = 0; a < u; ++a)
        out.assignment[static_cast<std::size_t>(usable[static_cast<std::size_t>(a)])] =
            labels[static_cast<std::size_t>(a)];

    // Attach isolated nodes: nearest assigned node in Manhattan distance on
    // the lattice coords, ties to the lower cluster id.
    const bool has_coords = g.coords.size() == static_cast<std::size_t>(g.n);
    for (int i = 0; i < g.n; ++i) {
        if (is_usable[static_cast<std::size_t>(i)]) continue;
        if (!has_coords) {
            out.assignment[static_cast<std::size_t>(i)] = 0;
            continue;
        }
        int best_cluster = 0;
        long best_dist = std::numeric_limits<long>::max();
        for (const int other : usable) {
            const long dist =
                std::labs(g.coords[static_cast<std::size_t>(i)].first -
                          g.coords[static_cast<std::size_t>(other)].first) +
                std::labs(g.coords[static_cast<std::size_t>(i)].second -
                          g.coords[static_cast<std::size_t>(other)].second);
            const int cluster = out.assignment[static_cast<std::size_t>(other)];
            if (dist < best_dist || (dist == best_dist && cluster < best_cluster)) {
                best_dist = dist;
                best_cluster = cluster;
            }
        }
        out.assignment[static_cast<std::size_t>(i)] = best_cluster;
    }

    out.validate(static_cast<std::size_t>(g.n));
    return out;
}

WeightedGraph cluster_supergraph(const WeightedGraph& g, const Clustering& clustering) {
    g.validate();
    clustering.validate(static_cast<std::size_t>(g.n));
    WeightedGraph super(clustering.k);
    for (int i = 0; i < g.n; ++i)
        for (int j = i + 1; j < g.n; ++j) {
            const double w = g.at(i, j);
            if (w == 0.0) continue;
            const int a = clustering.assignment[static_cast<std::size_t>(i)];
            const int b = clustering.assignment[static_cast<std::size_t>(j)];
            if (a == b) continue;
            super.set(a, b, super.at(a, b) + w);
        }
    return super;
}

ClusterEmbedding fiedler_embedding(const WeightedGraph& supergraph) {
    supergraph.validate();
    const int n = supergraph.n;
    if (n < 1) throw ParamError("empty supergraph");

    ClusterEmbedding emb;
    if (n == 1) {
        emb.order = {0};
        emb.positions = {1.0};
        return emb;
    }

    const auto comps = supergraph.components();
    if (comps.size() > 1) {
        std::string msg = "supergraph splits into " + std::to_string(comps.size()) +
                          " components; lower theta or reduce k";
        throw DisconnectedSupergraphError(msg, comps);
    }

    const auto L = laplacian(supergraph, LaplacianKind::Unnormalized);
    const auto eig = eigen_symmetric(L, n);
    std::vector<double> fiedler(eig.vector(1), eig.vector(1) + n);

    int max_idx = 0;
    for (int i = 1; i < n; ++i)
        if (std::abs(fiedler[static_cast<std::size_t>(i)]) >
            std::abs(fiedler[static_cast<std::size_t>(max_idx)]))
            max_idx = i;
    if (fiedler[static_cast<std::size_t>(max_idx)] < 0.0)
        for (auto& v : fiedler) v = -v;

    emb.order.resize(static_cast<std::size_t>(n));
    std::iota(emb.order.begin(), emb.order.end(), 0);
    std::stable_sort(emb.order.begin(), emb.order.end(), [&](int a, int b) {
        const double va = fiedler[static_cast<std::size_t>(a)];
        const double vb = fiedler[static_cast<std::size_t>(b)];
        if (va != vb) return va < vb;
        return a < b;
    });
    emb.positions.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) emb.positions[static_cast<std::size_t>(i)] = 1.0 + i;
    return emb;
}

}  // namespace chaincast

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "chaincast/errors.hpp"
#include "chaincast/rng.hpp"
#include "chaincast/spectral.hpp"

using namespace chaincast;

namespace {

// Adjusted Rand index between two labelings (pair-counting definition).
double adjusted_rand_index(const std::vector<int>& a, const std::vector<int>& b) {
    const std::size_t n = a.size();
    const int ka = 1 + *std::max_element(a.begin(), a.end());
    const int kb = 1 + *std::max_element(b.begin(), b.end());
    std::vector<std::vector<long>> table(static_cast<std::size_t>(ka),
                                         std::vector<long>(static_cast<std::size_t>(kb), 0));
    for (std::size_t i = 0; i < n; ++i)
        ++table[static_cast<std::size_t>(a[i])][static_cast<std::size_t>(b[i])];
    auto choose2 = [](long v) { return static_cast<double>(v) * (v - 1) / 2.0; };
    double sum_ij = 0, sum_a = 0, sum_b = 0;
    for (int i = 0; i < ka; ++i) {
        long row = 0;
        for (int j = 0; j < kb; ++j) {
            row += table[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
            sum_ij += choose2(table[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]);
        }
        sum_a += choose2(row);
    }
    for (int j = 0; j < kb; ++j) {
        long col = 0;
        for (int i = 0; i < ka; ++i)
            col += table[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
        sum_b += choose2(col);
    }
    const double expected = sum_a * sum_b / choose2(static_cast<long>(n));
    const double max_index = 0.5 * (sum_a + sum_b);
    return (sum_ij - expected) / (max_index - expected);
}

WeightedGraph planted_two_blocks() {
    WeightedGraph g(10);
    for (int i = 0; i < 10; ++i)
        for (int j = i + 1; j < 10; ++j)
            if ((i < 5) == (j < 5)) g.set(i, j, 0.9);
    return g;
}

}  // namespace

TEST_CASE("laplacian") {
    SUBCASE("single unit edge") {
        WeightedGraph g(2);
        g.set(0, 1, 1.0);
        const auto L = laplacian(g, LaplacianKind::Unnormalized);
        CHECK(L == std::vector<double>{1.0, -1.0, -1.0, 1.0});
    }

    SUBCASE("empty graph") {
        WeightedGraph g(3);
        const auto L = laplacian(g, LaplacianKind::Unnormalized);
        CHECK(L == std::vector<double>(9, 0.0));
        // Isolated nodes get identity rows in the symmetric variant.
        const auto Ls = laplacian(g, LaplacianKind::Symmetric);
        CHECK(Ls == std::vector<double>{1, 0, 0, 0, 1, 0, 0, 0, 1});
    }

    SUBCASE("unit triangle eigenvalues are 0, 3, 3") {
        WeightedGraph g(3);
        g.set(0, 1, 1.0);
        g.set(0, 2, 1.0);
        g.set(1, 2, 1.0);
        const auto eig = eigen_symmetric(laplacian(g, LaplacianKind::Unnormalized), 3);
        CHECK(eig.values[0] == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
        CHECK(eig.values[1] == doctest::Approx(3.0).epsilon(1e-12));
        CHECK(eig.values[2] == doctest::Approx(3.0).epsilon(1e-12));
    }

    SUBCASE("negative weights are rejected") {
        WeightedGraph g(2);
        g.set(0, 1, -0.5);
        CHECK_THROWS_AS(laplacian(g, LaplacianKind::Unnormalized), ParamError);
    }
}

TEST_CASE("eigensolver residual and reconstruction on random symmetric matrices") {
    Rng rng(59);
    for (const int n : {2, 5, 17, 40}) {
        const auto sz = static_cast<std::size_t>(n);
        std::vector<double> a(sz * sz);
        for (int i = 0; i < n; ++i)
            for (int j = i; j < n; ++j) {
                const double v = rng.uniform(-3, 3);
                a[static_cast<std::size_t>(i) * sz + static_cast<std::size_t>(j)] = v;
                a[static_cast<std::size_t>(j) * sz + static_cast<std::size_t>(i)] = v;
            }
        const auto eig = eigen_symmetric(a, n);

        double norm_inf = 0.0;
        for (int i = 0; i < n; ++i) {
            double row = 0.0;
            for (int j = 0; j < n; ++j)
                row += std::abs(a[static_cast<std::size_t>(i) * sz + static_cast<std::size_t>(j)]);
            norm_inf = std::max(norm_inf, row);
        }

        for (int p = 0; p < n; ++p) {
            const bool sorted = p == 0 || eig.values[static_cast<std::size_t>(p - 1)] <=
                                              eig.values[static_cast<std::size_t>(p)];
            CHECK(sorted);
            const double* v = eig.vector(p);
            double residual = 0.0;
            for (int i = 0; i < n; ++i) {
                double lv = 0.0;
                for (int j = 0; j < n; ++j)
                    lv += a[static_cast<std::size_t>(i) * sz + static_cast<std::size_t>(j)] *
                          v[j];
                residual = std::max(residual,
                                    std::abs(lv - eig.values[static_cast<std::size_t>(p)] * v[i]));
            }
            CHECK(residual <= 1e-8 * norm_inf);
        }
    }
}

TEST_CASE("spectral_cluster") {
    SUBCASE("two disconnected triangles split exactly") {
        WeightedGraph g(6);
        g.set(0, 1, 1.0);
        g.set(0, 2, 1.0);
        g.set(1, 2, 1.0);
        g.set(3, 4, 1.0);
        g.set(3, 5, 1.0);
        g.set(4, 5, 1.0);
        const auto c = spectral_cluster(g, 2, 7);
        CHECK(c.assignment[0] == c.assignment[1]);
        CHECK(c.assignment[0] == c.assignment[2]);
        CHECK(c.assignment[3] == c.assignment[4]);
        CHECK(c.assignment[3] == c.assignment[5]);
        CHECK(c.assignment[0] != c.assignment[3]);
    }

    SUBCASE("k=1 puts everything in one cluster") {
        WeightedGraph g(5);
        g.set(0, 1, 0.7);
        const auto c = spectral_cluster(g, 1, 0);
        CHECK(c.assignment == std::vector<int>(5, 0));
    }

    SUBCASE("planted blocks recovered with ARI 1 across 10 seeds") {
        const auto g = planted_two_blocks();
        std::vector<int> truth(10);
        for (int i = 0; i < 10; ++i) truth[static_cast<std::size_t>(i)] = i < 5 ? 0 : 1;
        for (std::uint64_t seed = 0; seed < 10; ++seed) {
            const auto c = spectral_cluster(g, 2, seed);
            CHECK(adjusted_rand_index(c.assignment, truth) == doctest::Approx(1.0));
            const auto cu = spectral_cluster(g, 2, seed, LaplacianKind::Unnormalized);
            CHECK(adjusted_rand_index(cu.assignment, truth) == doctest::Approx(1.0));
        }
    }

    SUBCASE("invariant under node relabeling up to cluster permutation") {
        const auto g = planted_two_blocks();
        // Relabel nodes by the permutation i -> (3i + 1) mod 10.
        std::vector<int> perm(10);
        for (int i = 0; i < 10; ++i) perm[static_cast<std::size_t>(i)] = (3 * i + 1) % 10;
        WeightedGraph h(10);
        for (int i = 0; i < 10; ++i)
            for (int j = i + 1; j < 10; ++j)
                if (g.at(i, j) != 0.0)
                    h.set(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(j)],
                          g.at(i, j));
        const auto ca = spectral_cluster(g, 2, 3);
        const auto cb = spectral_cluster(h, 2, 3);
        std::vector<int> cb_pulled_back(10);
        for (int i = 0; i < 10; ++i)
            cb_pulled_back[static_cast<std::size_t>(i)] =
                cb.assignment[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])];
        CHECK(adjusted_rand_index(ca.assignment, cb_pulled_back) == doctest::Approx(1.0));
    }

    SUBCASE("k larger than usable nodes is rejected") {
        WeightedGraph g(4);
        g.set(0, 1, 1.0);  // nodes 2, 3 isolated
        CHECK_THROWS_AS(spectral_cluster(g, 3, 0), ParamError);
    }

    SUBCASE("isolated nodes attach to the Manhattan-nearest cluster") {
        WeightedGraph g(4);
        g.coords = {{1, 1}, {1, 2}, {10, 10}, {1, 3}};
        g.set(0, 1, 1.0);
        g.set(2, 3, 0.0);  // no edge: nodes 2 and 3 isolated
        g.set(0, 3, 0.9);
        const auto c = spectral_cluster(g, 2, 1);
        // Node 2 is far from everything but must join its nearest member.
        const int nearest = c.assignment[3];
        CHECK(c.assignment[2] == nearest);
    }
}

TEST_CASE("cluster_supergraph") {
    WeightedGraph g(4);
    g.set(0, 2, 0.7);
    g.set(1, 3, 0.8);
    g.set(0, 1, 0.9);  // inside cluster A
    Clustering c;
    c.k = 2;
    c.assignment = {0, 0, 1, 1};
    const auto super = cluster_supergraph(g, c);
    CHECK(super.at(0, 1) == doctest::Approx(1.5));  // 0.7 + 0.8
    CHECK(super.at(0, 0) == 0.0);
    CHECK(super.at(1, 1) == 0.0);

    SUBCASE("no cross edges gives zero weight") {
        WeightedGraph h(4);
        h.set(0, 1, 0.9);
        h.set(2, 3, 0.9);
        const auto s = cluster_supergraph(h, c);
        CHECK(s.at(0, 1) == 0.0);
    }

    SUBCASE("singleton clusters reproduce the graph") {
        WeightedGraph tri(3);
        tri.set(0, 1, 1.0);
        tri.set(0, 2, 1.0);
        tri.set(1, 2, 1.0);
        Clustering singles;
        singles.k = 3;
        singles.assignment = {0, 1, 2};
        const auto s = cluster_supergraph(tri, singles);
        CHECK(s.w == tri.w);
    }
}

TEST_CASE("fiedler_embedding") {
    SUBCASE("path graph keeps the middle node in the middle") {
        // Fiedler vector of the 3-path is proportional to (-1, 0, 1)
        // (eigen-decomposition of the path Laplacian), so B sits between
        // A and C.
        WeightedGraph g(3);
        g.set(0, 1, 1.0);
        g.set(1, 2, 1.0);
        const auto emb = fiedler_embedding(g);
        CHECK(emb.order[1] == 1);
        CHECK(emb.positions == std::vector<double>{1.0, 2.0, 3.0});
    }

    SUBCASE("two-node supergraph has a deterministic canonical orientation") {
        WeightedGraph g(2);
        g.set(0, 1, 0.5);
        const auto a = fiedler_embedding(g);
        const auto b = fiedler_embedding(g);
        CHECK(a.order == b.order);
        CHECK((a.order == std::vector<int>{0, 1} || a.order == std::vector<int>{1, 0}));
    }

    SUBCASE("disconnected supergraph is an error with component listing") {
        WeightedGraph g(4);
        g.set(0, 1, 1.0);
        g.set(2, 3, 1.0);
        try {
            fiedler_embedding(g);
            FAIL("expected DisconnectedSupergraphError");
        } catch (const DisconnectedSupergraphError& e) {
            REQUIRE(e.components().size() == 2);
            CHECK(e.components()[0] == std::vector<int>{0, 1});
            CHECK(e.components()[1] == std::vector<int>{2, 3});
        }
    }
}

TEST_CASE("lambda_2 positive iff connected, against a union-find oracle") {
    Rng rng(61);
    for (int trial = 0; trial < 30; ++trial) {
        const int n = 3 + static_cast<int>(rng.uniform_int(8));
        WeightedGraph g(n);
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j)
                if (rng.uniform() < 0.3) g.set(i, j, rng.uniform(0.2, 1.0));
        const bool connected = g.components().size() == 1;
        const auto eig = eigen_symmetric(laplacian(g, LaplacianKind::Unnormalized), n);
        const double lambda2 = eig.values[1];
        if (connected)
            CHECK(lambda2 > 1e-10);
        else
            CHECK(std::abs(lambda2) <= 1e-10);
    }
}

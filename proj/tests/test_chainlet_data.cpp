#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <numeric>

#include "chaincast/chainlet_data.hpp"
#include "chaincast/csv.hpp"
#include "chaincast/errors.hpp"
#include "chaincast/rng.hpp"

using namespace chaincast;
namespace fs = std::filesystem;

namespace {

Clustering striped_clustering(int k) {
    Clustering c;
    c.k = k;
    c.assignment.resize(kBucketCount);
    for (int node = 0; node < kBucketCount; ++node)
        c.assignment[static_cast<std::size_t>(node)] = node % k;
    return c;
}

ClusterEmbedding identity_embedding(int n) {
    ClusterEmbedding e;
    for (int i = 0; i < n; ++i) {
        e.order.push_back(i);
        e.positions.push_back(1.0 + i);
    }
    return e;
}

fs::path temp_dir() {
    const auto dir = fs::temp_directory_path() / "chaincast_test_data";
    fs::create_directories(dir);
    return dir;
}

}  // namespace

TEST_CASE("canonical_bucket caps at 20 and rejects bad counts") {
    CHECK(canonical_bucket(3, 2) == ChainletBucket{3, 2});
    CHECK(canonical_bucket(25, 3) == ChainletBucket{20, 3});
    CHECK(canonical_bucket(1, 1) == ChainletBucket{1, 1});
    CHECK(canonical_bucket(20, 20) == ChainletBucket{20, 20});
    CHECK(canonical_bucket(5000, 120) == ChainletBucket{20, 20});
    CHECK_THROWS_AS(canonical_bucket(0, 1), IngestError);
    CHECK_THROWS_AS(canonical_bucket(1, 0), IngestError);
    CHECK_THROWS_AS(canonical_bucket(-3, 2), IngestError);

    // Idempotence over the whole grid.
    for (int i = 1; i <= 20; ++i)
        for (int o = 1; o <= 20; ++o) {
            const auto b = canonical_bucket(i, o);
            CHECK(canonical_bucket(b.inputs, b.outputs) == b);
        }
}

TEST_CASE("aggregate_transactions") {
    SUBCASE("empty input gives empty output") {
        CHECK(aggregate_transactions({}).empty());
    }

    SUBCASE("single transaction") {
        const std::vector<TransactionRecord> txs = {{Date(2017, 1, 5), 2, 3, 5}};
        const auto days = aggregate_transactions(txs);
        REQUIRE(days.size() == 1);
        CHECK(days[0].date == Date(2017, 1, 5));
        const int idx = ChainletBucket{2, 3}.index();
        CHECK(days[0].occurrence[static_cast<std::size_t>(idx)] == 1);
        CHECK(days[0].amount[static_cast<std::size_t>(idx)] == 5);
        const std::int64_t occ_total = std::accumulate(days[0].occurrence.begin(),
                                                       days[0].occurrence.end(), std::int64_t{0});
        CHECK(occ_total == 1);
    }

    SUBCASE("capped buckets accumulate") {
        // Hand aggregation: both transactions canonicalize to bucket (20,2).
        const std::vector<TransactionRecord> txs = {{Date(2017, 1, 5), 21, 2, 3},
                                                    {Date(2017, 1, 5), 30, 2, 4}};
        const auto days = aggregate_transactions(txs);
        REQUIRE(days.size() == 1);
        const int idx = ChainletBucket{20, 2}.index();
        CHECK(days[0].occurrence[static_cast<std::size_t>(idx)] == 2);
        CHECK(days[0].amount[static_cast<std::size_t>(idx)] == 7);
    }

    SUBCASE("permutation invariance and amount conservation") {
        Rng rng(5);
        std::vector<TransactionRecord> txs;
        std::int64_t total = 0;
        for (int i = 0; i < 200; ++i) {
            TransactionRecord tx;
            tx.date = Date(2017, 1, 1) + static_cast<int>(rng.uniform_int(5));
            tx.input_count = 1 + static_cast<std::int64_t>(rng.uniform_int(30));
            tx.output_count = 1 + static_cast<std::int64_t>(rng.uniform_int(30));
            tx.amount = static_cast<std::int64_t>(rng.uniform_int(100000));
            total += tx.amount;
            txs.push_back(tx);
        }
        const auto days = aggregate_transactions(txs);

        std::vector<TransactionRecord> shuffled = txs;
        for (std::size_t i = shuffled.size(); i-- > 1;)
            std::swap(shuffled[i], shuffled[rng.uniform_int(i + 1)]);
        const auto days2 = aggregate_transactions(shuffled);

        REQUIRE(days.size() == days2.size());
        std::int64_t aggregated = 0;
        for (std::size_t d = 0; d < days.size(); ++d) {
            CHECK(days[d].date == days2[d].date);
            CHECK(days[d].occurrence == days2[d].occurrence);
            CHECK(days[d].amount == days2[d].amount);
            for (const auto a : days[d].amount) aggregated += a;
        }
        CHECK(aggregated == total);
        for (std::size_t d = 1; d < days.size(); ++d) CHECK(days[d - 1].date < days[d].date);
    }
}

TEST_CASE("cluster_volume_shares") {
    const auto clustering = striped_clustering(2);

    SUBCASE("all volume in one cluster") {
        DailyChainletMatrix day;
        day.date = Date(2017, 2, 1);
        day.occurrence[0] = 3;  // node 0 -> cluster 0
        day.amount[0] = 900;
        const auto shares = cluster_volume_shares(day, clustering, VolumeMode::Amount);
        CHECK(shares == std::vector<double>{1.0, 0.0});
    }

    SUBCASE("even split") {
        DailyChainletMatrix day;
        day.date = Date(2017, 2, 1);
        day.occurrence[0] = 1;
        day.amount[0] = 10;  // cluster 0
        day.occurrence[1] = 1;
        day.amount[1] = 10;  // cluster 1
        const auto shares = cluster_volume_shares(day, clustering, VolumeMode::Amount);
        CHECK(shares == std::vector<double>{0.5, 0.5});
    }

    SUBCASE("zero volume day is an error") {
        DailyChainletMatrix day;
        day.date = Date(2017, 2, 1);
        CHECK_THROWS_AS(cluster_volume_shares(day, clustering, VolumeMode::Amount),
                        ZeroVolumeDayError);
    }

    SUBCASE("shares sum to one") {
        Rng rng(9);
        const auto clustering10 = striped_clustering(10);
        for (int trial = 0; trial < 10; ++trial) {
            DailyChainletMatrix day;
            day.date = Date(2017, 2, 1);
            for (int node = 0; node < kBucketCount; ++node)
                if (rng.uniform() < 0.3) {
                    day.occurrence[static_cast<std::size_t>(node)] =
                        1 + static_cast<std::int64_t>(rng.uniform_int(5));
                    day.amount[static_cast<std::size_t>(node)] =
                        static_cast<std::int64_t>(rng.uniform_int(1000000)) + 1;
                }
            for (const auto mode : {VolumeMode::Occurrence, VolumeMode::Amount}) {
                const auto shares = cluster_volume_shares(day, clustering10, mode);
                const double total = std::accumulate(shares.begin(), shares.end(), 0.0);
                CHECK(std::abs(total - 1.0) <= 1e-12);
                for (const double s : shares) CHECK(s >= 0.0);
            }
        }
    }
}

TEST_CASE("build_m_field") {
    const auto clustering = striped_clustering(2);
    const auto embedding = identity_embedding(2);

    MarketSeries market;
    market.dates = {Date(2017, 3, 1), Date(2017, 3, 2)};
    market.price = {1000.0, 1010.0};
    market.trends = {50.0, 0.0};

    std::vector<DailyChainletMatrix> days(2);
    days[0].date = Date(2017, 3, 1);
    days[0].occurrence[0] = 1;
    days[0].amount[0] = 20;  // cluster 0 share 0.2
    days[0].occurrence[1] = 1;
    days[0].amount[1] = 80;  // cluster 1 share 0.8
    days[1].date = Date(2017, 3, 2);
    days[1].occurrence[0] = 1;
    days[1].amount[0] = 1;

    SUBCASE("trend times share, zero trend zeroes the column") {
        const auto field = build_m_field(days, market, clustering, embedding,
                                         VolumeMode::Amount);
        CHECK(field.at(0, 0) == doctest::Approx(10.0));  // 50 * 0.2
        CHECK(field.at(1, 0) == doctest::Approx(40.0));  // 50 * 0.8
        CHECK(field.at(0, 1) == 0.0);
        CHECK(field.at(1, 1) == 0.0);
    }

    SUBCASE("shares 0.25/0.75 with trend 80") {
        market.trends = {80.0, 80.0};
        days[0].amount[0] = 25;
        days[0].amount[1] = 75;
        const auto field = build_m_field(days, market, clustering, embedding,
                                         VolumeMode::Amount);
        CHECK(field.at(0, 0) == doctest::Approx(20.0));
        CHECK(field.at(1, 0) == doctest::Approx(60.0));
    }

    SUBCASE("rows follow embedding order") {
        ClusterEmbedding flipped = embedding;
        std::reverse(flipped.order.begin(), flipped.order.end());
        const auto field = build_m_field(days, market, clustering, flipped,
                                         VolumeMode::Amount);
        CHECK(field.at(0, 0) == doctest::Approx(40.0));  // cluster 1 first now
        CHECK(field.at(1, 0) == doctest::Approx(10.0));
    }

    SUBCASE("rows sum to the trend") {
        const auto field = build_m_field(days, market, clustering, embedding,
                                         VolumeMode::Amount);
        for (std::size_t j = 0; j < field.n_cols(); ++j) {
            double col = 0.0;
            for (std::size_t i = 0; i < field.n_rows(); ++i) col += field.at(i, j);
            CHECK(std::abs(col - market.trends[j]) <= 1e-9);
        }
    }

    SUBCASE("missing market date is an alignment error") {
        days[1].date = Date(2017, 3, 9);
        CHECK_THROWS_AS(
            build_m_field(days, market, clustering, embedding, VolumeMode::Amount),
            AlignmentError);
        try {
            build_m_field(days, market, clustering, embedding, VolumeMode::Amount);
        } catch (const AlignmentError& e) {
            CHECK(std::string(e.what()).find("2017-03-09") != std::string::npos);
        }
    }
}

TEST_CASE("file contracts") {
    const auto dir = temp_dir();

    SUBCASE("transaction log with bad row reports the line") {
        const auto path = dir / "txs.csv";
        csv::write_file(path,
                        "date,input_count,output_count,amount\n"
                        "2017-01-01,2,3,100\n"
                        "2017-01-01,0,3,50\n");
        try {
            load_transaction_log(path);
            FAIL("expected IngestError");
        } catch (const IngestError& e) {
            CHECK(e.line() == 3);
        }
    }

    SUBCASE("matrices round trip via writer and loader") {
        const std::vector<TransactionRecord> txs = {{Date(2017, 1, 2), 2, 3, 100},
                                                    {Date(2017, 1, 1), 40, 1, 7},
                                                    {Date(2017, 1, 1), 2, 3, 11}};
        const auto days = aggregate_transactions(txs);
        const auto path = dir / "matrices.csv";
        write_matrices(path, days);
        const auto loaded = load_matrices(path);
        REQUIRE(loaded.size() == days.size());
        for (std::size_t d = 0; d < days.size(); ++d) {
            CHECK(loaded[d].date == days[d].date);
            CHECK(loaded[d].occurrence == days[d].occurrence);
            CHECK(loaded[d].amount == days[d].amount);
        }
    }

    SUBCASE("market loader validates") {
        const auto path = dir / "market.csv";
        csv::write_file(path, "date,price_usd,trends\n2017-01-01,100.5,42\n2017-01-02,99,41\n");
        const auto market = load_market(path);
        CHECK(market.price[0] == doctest::Approx(100.5));
        csv::write_file(path, "date,price_usd,trends\n2017-01-01,-5,42\n");
        CHECK_THROWS_AS(load_market(path), ParamError);
        csv::write_file(path, "date,price,trends\n2017-01-01,5,42\n");
        CHECK_THROWS_AS(load_market(path), IngestError);
    }

    SUBCASE("clustering and embedding round trips") {
        const auto clustering = striped_clustering(10);
        const auto cpath = dir / "clustering.csv";
        write_clustering(cpath, clustering);
        const auto loaded = load_clustering(cpath);
        CHECK(loaded.k == 10);
        CHECK(loaded.assignment == clustering.assignment);

        ClusterEmbedding emb = identity_embedding(4);
        std::swap(emb.order[0], emb.order[2]);
        const auto epath = dir / "embedding.csv";
        write_embedding(epath, emb);
        const auto eloaded = load_embedding(epath);
        CHECK(eloaded.order == emb.order);
        CHECK(eloaded.positions == emb.positions);
    }
}

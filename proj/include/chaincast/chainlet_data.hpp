#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "chaincast/clustering.hpp"
#include "chaincast/date.hpp"

namespace chaincast {

inline constexpr int kBucketCap = 20;
inline constexpr int kBucketCount = kBucketCap * kBucketCap;  // 400

// One cell of the 20x20 bucket grid; counts of 20 or more inputs/outputs
// are capped at 20.
struct ChainletBucket {
    int inputs = 1;
    int outputs = 1;

    // Row-major, inputs-major node index in [0, 400).
    [[nodiscard]] int index() const noexcept { return (inputs - 1) * kBucketCap + (outputs - 1); }
    static ChainletBucket from_index(int idx) {
        return {idx / kBucketCap + 1, idx % kBucketCap + 1};
    }
    friend bool operator==(ChainletBucket a, ChainletBucket b) {
        return a.inputs == b.inputs && a.outputs == b.outputs;
    }
};

struct TransactionRecord {
    Date date;
    std::int64_t input_count = 0;
    std::int64_t output_count = 0;
    std::int64_t amount = 0;  // satoshi
};

// Per-day transaction counts and transferred value per bucket.
struct DailyChainletMatrix {
    Date date;
    std::array<std::int64_t, kBucketCount> occurrence{};
    std::array<std::int64_t, kBucketCount> amount{};
};

enum class VolumeMode { Occurrence, Amount };

VolumeMode parse_volume_mode(const std::string& text);
std::string to_string(VolumeMode mode);

// Aligned daily price and search-interest series.
struct MarketSeries {
    std::vector<Date> dates;
    std::vector<double> price;   // USD, intraday open; > 0
    std::vector<double> trends;  // search-interest index in [0, 100]

    void validate() const;
    // Index of date, or -1.
    [[nodiscard]] int find(Date d) const;
};

// Observed predictive-utility surface m(x_i, t_j): one row per cluster in
// embedding order, one column per day.
struct MField {
    std::vector<double> positions;  // x_1..x_n
    std::vector<Date> dates;        // t_1..t_N
    std::vector<double> values;     // row-major n x N

    [[nodiscard]] std::size_t n_rows() const noexcept { return positions.size(); }
    [[nodiscard]] std::size_t n_cols() const noexcept { return dates.size(); }
    [[nodiscard]] double at(std::size_t i, std::size_t j) const {
        return values[i * n_cols() + j];
    }
    double& at(std::size_t i, std::size_t j) { return values[i * n_cols() + j]; }
};

// min(count, 20) on both axes; rejects nonpositive counts.
ChainletBucket canonical_bucket(std::int64_t input_count, std::int64_t output_count);

// Groups transactions by UTC day and accumulates occurrence/amount per
// canonical bucket; output sorted by date. Permutation-invariant.
std::vector<DailyChainletMatrix> aggregate_transactions(std::span<const TransactionRecord> txs);

// Per-cluster share of the day's total volume in the chosen mode.
// Throws ZeroVolumeDayError when the day has no volume.
std::vector<double> cluster_volume_shares(const DailyChainletMatrix& day,
                                          const Clustering& clustering, VolumeMode mode);

// m(x_i, t_j) = trends(t_j) * share of the cluster at position x_i.
// Throws AlignmentError listing dates missing from the market series.
MField build_m_field(std::span<const DailyChainletMatrix> days, const MarketSeries& market,
                     const Clustering& clustering, const ClusterEmbedding& embedding,
                     VolumeMode mode);

// --- file contracts -------------------------------------------------------

// Transaction log CSV: date,input_count,output_count,amount
std::vector<TransactionRecord> load_transaction_log(const std::filesystem::path& path);

// Aggregated matrices CSV: date,inputs,outputs,occurrence,amount (one row
// per nonzero bucket; buckets above the cap are canonicalized on load).
std::vector<DailyChainletMatrix> load_matrices(const std::filesystem::path& path);
void write_matrices(const std::filesystem::path& path,
                    std::span<const DailyChainletMatrix> days);

// Market CSV: date,price_usd,trends
MarketSeries load_market(const std::filesystem::path& path);
void write_market(const std::filesystem::path& path, const MarketSeries& market);

// Clustering CSV: inputs,outputs,cluster_id
Clustering load_clustering(const std::filesystem::path& path);
void write_clustering(const std::filesystem::path& path, const Clustering& clustering);

// Embedding CSV: cluster_id,position
ClusterEmbedding load_embedding(const std::filesystem::path& path);
void write_embedding(const std::filesystem::path& path, const ClusterEmbedding& embedding);

}  // namespace chaincast

#include "chaincast/chainlet_data.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <map>
#include <string>

#include "chaincast/csv.hpp"
#include "chaincast/errors.hpp"

namespace chaincast {

VolumeMode parse_volume_mode(const std::string& text) {
    if (text == "occurrence") return VolumeMode::Occurrence;
    if (text == "amount") return VolumeMode::Amount;
    throw ParamError("unknown volume mode '" + text + "' (occurrence|amount)");
}

std::string to_string(VolumeMode mode) {
    return mode == VolumeMode::Occurrence ? "occurrence" : "amount";
}

void MarketSeries::validate() const {
    if (dates.size() != price.size() || dates.size() != trends.size())
        throw ParamError("market series columns have mismatched lengths");
    for (std::size_t i = 0; i + 1 < dates.size(); ++i)
        if (!(dates[i] < dates[i + 1]))
            throw ParamError("market dates must be strictly increasing at " +
                             dates[i + 1].to_string());
    for (std::size_t i = 0; i < dates.size(); ++i) {
        if (!(price[i] > 0.0))
            throw ParamError("nonpositive price on " + dates[i].to_string());
        if (!(trends[i] >= 0.0 && trends[i] <= 100.0))
            throw ParamError("trends outside [0,100] on " + dates[i].to_string());
    }
}

int MarketSeries::find(Date d) const {
    auto it = std::lower_bound(dates.begin(), dates.end(), d);
    if (it == dates.end() || *it != d) return -1;
    return static_cast<int>(it - dates.begin());
}

ChainletBucket canonical_bucket(std::int64_t input_count, std::int64_t output_count) {
    if (input_count < 1 || output_count < 1)
        throw IngestError("transaction must have at least one input and one output");
    return {static_cast<int>(std::min<std::int64_t>(input_count, kBucketCap)),
            static_cast<int>(std::min<std::int64_t>(output_count, kBucketCap))};
}

std::vector<DailyChainletMatrix> aggregate_transactions(std::span<const TransactionRecord> txs) {
    std::map<std::int32_t, DailyChainletMatrix> by_day;
    for (const auto& tx : txs) {
        if (tx.amount < 0) throw IngestError("negative amount on " + tx.date.to_string());
        const ChainletBucket b = canonical_bucket(tx.input_count, tx.output_count);
        auto& day = by_day[tx.date.serial()];
        day.date = tx.date;
        day.occurrence[static_cast<std::size_t>(b.index())] += 1;
        day.amount[static_cast<std::size_t>(b.index())] += tx.amount;
    }
    std::vector<DailyChainletMatrix> out;
    out.reserve(by_day.size());
    for (auto& [serial, day] : by_day) out.push_back(std::move(day));
    return out;
}

std::vector<double> cluster_volume_shares(const DailyChainletMatrix& day,
                                          const Clustering& clustering, VolumeMode mode) {
    clustering.validate(kBucketCount);
    const auto& volume = mode == VolumeMode::Occurrence ? day.occurrence : day.amount;
    std::vector<std::int64_t> cluster_sum(static_cast<std::size_t>(clustering.k), 0);
    std::int64_t total = 0;
    for (int node = 0; node < kBucketCount; ++node) {
        const std::int64_t v = volume[static_cast<std::size_t>(node)];
        cluster_sum[static_cast<std::size_t>(clustering.assignment[static_cast<std::size_t>(
            node)])] += v;
        total += v;
    }
    if (total == 0) throw ZeroVolumeDayError(day.date.to_string());
    std::vector<double> shares(cluster_sum.size());
    for (std::size_t c = 0; c < cluster_sum.size(); ++c)
        shares[c] = static_cast<double>(cluster_sum[c]) / static_cast<double>(total);
    return shares;
}

MField build_m_field(std::span<const DailyChainletMatrix> days, const MarketSeries& market,
                     const Clustering& clustering, const ClusterEmbedding& embedding,
                     VolumeMode mode) {
    embedding.validate();
    if (static_cast<int>(embedding.order.size()) != clustering.k)
        throw ParamError("embedding covers " + std::to_string(embedding.order.size()) +
                         " clusters, clustering has " + std::to_string(clustering.k));

    std::string missing;
    for (const auto& day : days)
        if (market.find(day.date) < 0) missing += (missing.empty() ? "" : ", ") +
            day.date.to_string();
    if (!missing.empty())
        throw AlignmentError("market series is missing dates: " + missing);

    MField field;
    field.positions = embedding.positions;
    field.dates.reserve(days.size());
    for (const auto& day : days) field.dates.push_back(day.date);
    field.values.assign(embedding.order.size() * days.size(), 0.0);

    for (std::size_t j = 0; j < days.size(); ++j) {
        const auto shares = cluster_volume_shares(days[j], clustering, mode);
        const double trend = market.trends[static_cast<std::size_t>(market.find(days[j].date))];
        for (std::size_t i = 0; i < embedding.order.size(); ++i)
            field.at(i, j) = trend * shares[static_cast<std::size_t>(embedding.order[i])];
    }
    return field;
}

// --- file contracts -------------------------------------------------------

std::vector<TransactionRecord> load_transaction_log(const std::filesystem::path& path) {
    const auto table = csv::read_file(path, {"date", "input_count", "output_count", "amount"});
    std::vector<TransactionRecord> txs;
    txs.reserve(table.rows.size());
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        const long line = table.line_numbers[r];
        TransactionRecord tx;
        try {
            tx.date = Date::parse(row[0]);
        } catch (const IngestError& e) {
            throw IngestError(e.what(), line);
        }
        tx.input_count = csv::parse_int(row[1], line, "input_count");
        tx.output_count = csv::parse_int(row[2], line, "output_count");
        tx.amount = csv::parse_int(row[3], line, "amount");
        if (tx.input_count < 1 || tx.output_count < 1)
            throw IngestError("input_count and output_count must be >= 1", line);
        if (tx.amount < 0) throw IngestError("amount must be nonnegative", line);
        txs.push_back(tx);
    }
    return txs;
}

std::vector<DailyChainletMatrix> load_matrices(const std::filesystem::path& path) {
    const auto table =
        csv::read_file(path, {"date", "inputs", "outputs", "occurrence", "amount"});
    std::map<std::int32_t, DailyChainletMatrix> by_day;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        const long line = table.line_numbers[r];
        Date date;
        try {
            date = Date::parse(row[0]);
        } catch (const IngestError& e) {
            throw IngestError(e.what(), line);
        }
        const std::int64_t inputs = csv::parse_int(row[1], line, "inputs");
        const std::int64_t outputs = csv::parse_int(row[2], line, "outputs");
        const std::int64_t occurrence = csv::parse_int(row[3], line, "occurrence");
        const std::int64_t amount = csv::parse_int(row[4], line, "amount");
        if (inputs < 1 || outputs < 1) throw IngestError("bucket counts must be >= 1", line);
        if (occurrence < 0 || amount < 0)
            throw IngestError("occurrence and amount must be nonnegative", line);
        if (occurrence == 0 && amount > 0)
            throw IngestError("amount without occurrence violates the matrix contract", line);
        const ChainletBucket b = canonical_bucket(inputs, outputs);
        auto& day = by_day[date.serial()];
        day.date = date;
        day.occurrence[static_cast<std::size_t>(b.index())] += occurrence;
        day.amount[static_cast<std::size_t>(b.index())] += amount;
    }
    std::vector<DailyChainletMatrix> out;
    out.reserve(by_day.size());
    for (auto& [serial, day] : by_day) out.push_back(std::move(day));
    return out;
}

void write_matrices(const std::filesystem::path& path,
                    std::span<const DailyChainletMatrix> days) {
    std::string text = "date,inputs,outputs,occurrence,amount\n";
    for (const auto& day : days) {
        const std::string date = day.date.to_string();
        for (int idx = 0; idx < kBucketCount; ++idx) {
            const auto i = static_cast<std::size_t>(idx);
            if (day.occurrence[i] == 0 && day.amount[i] == 0) continue;
            const ChainletBucket b = ChainletBucket::from_index(idx);
            text += date;
            text += ',' + std::to_string(b.inputs) + ',' + std::to_string(b.outputs);
            text += ',' + std::to_string(day.occurrence[i]) + ',' + std::to_string(day.amount[i]);
            text += '\n';
        }
    }
    csv::write_file(path, text);
}

MarketSeries load_market(const std::filesystem::path& path) {
    const auto table = csv::read_file(path, {"date", "price_usd", "trends"});
    MarketSeries market;
    bool warned_2017 = false;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        const long line = table.line_numbers[r];
        Date date;
        try {
            date = Date::parse(row[0]);
        } catch (const IngestError& e) {
            throw IngestError(e.what(), line);
        }
        const double price = csv::parse_double(row[1], line, "price_usd");
        const double trends = csv::parse_double(row[2], line, "trends");
        // Sanity band for 2017 data: half the observed yearly low to twice
        // the observed yearly high.
        if (!warned_2017 && date.year() == 2017 && (price < 775.98 * 0.5 || price > 19498.68 * 2)) {
            std::cerr << "warning: 2017 price " << csv::format_double(price) << " on "
                      << date.to_string() << " is outside the plausible range\n";
            warned_2017 = true;
        }
        market.dates.push_back(date);
        market.price.push_back(price);
        market.trends.push_back(trends);
    }
    market.validate();
    return market;
}

void write_market(const std::filesystem::path& path, const MarketSeries& market) {
    std::string text = "date,price_usd,trends\n";
    for (std::size_t i = 0; i < market.dates.size(); ++i) {
        text += market.dates[i].to_string();
        text += ',' + csv::format_double(market.price[i]);
        text += ',' + csv::format_double(market.trends[i]);
        text += '\n';
    }
    csv::write_file(path, text);
}

Clustering load_clustering(const std::filesystem::path& path) {
    const auto table = csv::read_file(path, {"inputs", "outputs", "cluster_id"});
    Clustering clustering;
    clustering.assignment.assign(kBucketCount, -1);
    int max_id = -1;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        const long line = table.line_numbers[r];
        const std::int64_t inputs = csv::parse_int(row[0], line, "inputs");
        const std::int64_t outputs = csv::parse_int(row[1], line, "outputs");
        const std::int64_t id = csv::parse_int(row[2], line, "cluster_id");
        if (inputs < 1 || inputs > kBucketCap || outputs < 1 || outputs > kBucketCap)
            throw IngestError("bucket outside the 20x20 grid", line);
        const int idx = ChainletBucket{static_cast<int>(inputs), static_cast<int>(outputs)}.index();
        if (clustering.assignment[static_cast<std::size_t>(idx)] != -1)
            throw IngestError("duplicate bucket assignment", line);
        clustering.assignment[static_cast<std::size_t>(idx)] = static_cast<int>(id);
        max_id = std::max(max_id, static_cast<int>(id));
    }
    clustering.k = max_id + 1;
    clustering.validate(kBucketCount);
    return clustering;
}

void write_clustering(const std::filesystem::path& path, const Clustering& clustering) {
    clustering.validate(kBucketCount);
    std::string text = "inputs,outputs,cluster_id\n";
    for (int idx = 0; idx < kBucketCount; ++idx) {
        const ChainletBucket b = ChainletBucket::from_index(idx);
        text += std::to_string(b.inputs) + ',' + std::to_string(b.outputs) + ',' +
                std::to_string(clustering.assignment[static_cast<std::size_t>(idx)]) + '\n';
    }
    csv::write_file(path, text);
}

ClusterEmbedding load_embedding(const std::filesystem::path& path) {
    const auto table = csv::read_file(path, {"cluster_id", "position"});
    std::vector<std::pair<double, int>> by_position;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        const long line = table.line_numbers[r];
        const std::int64_t id = csv::parse_int(row[0], line, "cluster_id");
        const double pos = csv::parse_double(row[1], line, "position");
        by_position.emplace_back(pos, static_cast<int>(id));
    }
    std::sort(by_position.begin(), by_position.end());
    ClusterEmbedding emb;
    for (std::size_t i = 0; i < by_position.size(); ++i) {
        emb.positions.push_back(1.0 + static_cast<double>(i));
        emb.order.push_back(by_position[i].second);
    }
    emb.validate();
    return emb;
}

void write_embedding(const std::filesystem::path& path, const ClusterEmbedding& embedding) {
    embedding.validate();
    std::string text = "cluster_id,position\n";
    for (std::size_t i = 0; i < embedding.order.size(); ++i)
        text += std::to_string(embedding.order[i]) + ',' +
                csv::format_double(embedding.positions[i]) + '\n';
    csv::write_file(path, text);
}

}  // namespace chaincast

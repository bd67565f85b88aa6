#include "chaincast/correlation_graph.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "chaincast/csv.hpp"
#include "chaincast/errors.hpp"
#include "chaincast/kernels.hpp"
#include "chaincast/parallel.hpp"

namespace chaincast {

RelativeVolumeSeries relative_volume_series(std::span<const DailyChainletMatrix> days,
                                            VolumeMode mode) {
    RelativeVolumeSeries out;
    std::vector<const DailyChainletMatrix*> kept;
    for (const auto& day : days) {
        const auto& volume = mode == VolumeMode::Occurrence ? day.occurrence : day.amount;
        std::int64_t total = 0;
        for (const auto v : volume) total += v;
        if (total == 0) {
            out.dropped.push_back(day.date);
        } else {
            kept.push_back(&day);
            out.dates.push_back(day.date);
        }
    }
    if (kept.size() < 3)
        throw InsufficientDataError("need at least 3 days with positive volume, have " +
                                    std::to_string(kept.size()));

    const std::size_t T = kept.size();
    out.values.assign(static_cast<std::size_t>(kBucketCount) * T, 0.0);
    for (std::size_t t = 0; t < T; ++t) {
        const auto& volume =
            mode == VolumeMode::Occurrence ? kept[t]->occurrence : kept[t]->amount;
        std::int64_t total = 0;
        for (const auto v : volume) total += v;
        for (int b = 0; b < kBucketCount; ++b)
            out.values[static_cast<std::size_t>(b) * T + t] =
                static_cast<double>(volume[static_cast<std::size_t>(b)]) /
                static_cast<double>(total);
    }
    return out;
}

std::optional<double> pearson(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw ParamError("pearson: length mismatch");
    if (a.size() < 3) throw ParamError("pearson: need at least 3 samples");
    const auto n = a.size();
    const double ma = kernels::sum(a.data(), n) / static_cast<double>(n);
    const double mb = kernels::sum(b.data(), n) / static_cast<double>(n);
    const auto mom = kernels::centered_moments(a.data(), b.data(), ma, mb, n);
    if (mom.saa == 0.0 || mom.sbb == 0.0) return std::nullopt;
    const double r = mom.sab / std::sqrt(mom.saa * mom.sbb);
    return std::clamp(r, -1.0, 1.0);
}

ChainletGraph build_graph(const RelativeVolumeSeries& series, double theta, bool abs_corr,
                          int workers) {
    if (!(theta > 0.0 && theta <= 1.0)) throw ParamError("theta must be in (0, 1]");
    const std::size_t T = series.days();
    if (T < 3) throw InsufficientDataError("need at least 3 days to correlate");

    ChainletGraph out;
    out.theta = theta;
    out.window_start = series.dates.front();
    out.window_end = series.dates.back();
    out.dropped_days = series.dropped;
    out.graph = WeightedGraph(kBucketCount);
    out.graph.coords.resize(kBucketCount);
    for (int idx = 0; idx < kBucketCount; ++idx) {
        const ChainletBucket b = ChainletBucket::from_index(idx);
        out.graph.coords[static_cast<std::size_t>(idx)] = {b.inputs, b.outputs};
    }

    // Center rows once; each pair then needs a single dot product. The
    // rounding matches pearson() because both paths feed identical addends
    // through the same blocked reduction.
    std::vector<double> centered(static_cast<std::size_t>(kBucketCount) * T);
    std::vector<double> row_ss(kBucketCount);
    for (int b = 0; b < kBucketCount; ++b) {
        const double* row = series.row(b);
        const double mean = kernels::sum(row, T) / static_cast<double>(T);
        double* c = centered.data() + static_cast<std::size_t>(b) * T;
        for (std::size_t t = 0; t < T; ++t) c[t] = row[t] - mean;
        row_ss[static_cast<std::size_t>(b)] = kernels::dot(c, c, T);
        if (row_ss[static_cast<std::size_t>(b)] == 0.0)
            out.zero_variance_nodes.push_back(b);
    }

    parallel_for(static_cast<std::size_t>(kBucketCount), workers, [&](std::size_t i_) {
        const int i = static_cast<int>(i_);
        if (row_ss[i_] == 0.0) return;
        const double* ci = centered.data() + i_ * T;
        for (int j = i + 1; j < kBucketCount; ++j) {
            const auto j_ = static_cast<std::size_t>(j);
            if (row_ss[j_] == 0.0) continue;  // UndefinedCorrelation: no edge
            const double sab = kernels::dot(ci, centered.data() + j_ * T, T);
            double r = std::clamp(sab / std::sqrt(row_ss[i_] * row_ss[j_]), -1.0, 1.0);
            if (abs_corr) r = std::abs(r);
            if (r >= theta) out.graph.set(i, j, r);
        }
    });
    return out;
}

void write_graph_edges(const std::filesystem::path& path, const ChainletGraph& g) {
    std::string text = "src_inputs,src_outputs,dst_inputs,dst_outputs,weight\n";
    for (int i = 0; i < g.graph.n; ++i) {
        const ChainletBucket src = ChainletBucket::from_index(i);
        for (int j = i + 1; j < g.graph.n; ++j) {
            const double w = g.graph.at(i, j);
            if (w == 0.0) continue;
            const ChainletBucket dst = ChainletBucket::from_index(j);
            text += std::to_string(src.inputs) + ',' + std::to_string(src.outputs) + ',' +
                    std::to_string(dst.inputs) + ',' + std::to_string(dst.outputs) + ',' +
                    csv::format_double(w) + '\n';
        }
    }
    csv::write_file(path, text);
}

void write_graph_meta(const std::filesystem::path& path, const ChainletGraph& g) {
    nlohmann::json meta;
    meta["theta"] = g.theta;
    meta["window_start"] = g.window_start.to_string();
    meta["window_end"] = g.window_end.to_string();
    auto& dropped = meta["dropped_days"] = nlohmann::json::array();
    for (const Date d : g.dropped_days) dropped.push_back(d.to_string());
    auto& isolated = meta["isolated_nodes"] = nlohmann::json::array();
    for (const int idx : g.graph.isolated_nodes()) {
        const ChainletBucket b = ChainletBucket::from_index(idx);
        isolated.push_back({{"inputs", b.inputs}, {"outputs", b.outputs}});
    }
    auto& zero_var = meta["zero_variance_nodes"] = nlohmann::json::array();
    for (const int idx : g.zero_variance_nodes) {
        const ChainletBucket b = ChainletBucket::from_index(idx);
        zero_var.push_back({{"inputs", b.inputs}, {"outputs", b.outputs}});
    }
    csv::write_file(path, meta.dump(2) + "\n");
}

}  // namespace chaincast

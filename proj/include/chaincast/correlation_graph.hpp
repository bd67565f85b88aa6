#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "chaincast/chainlet_data.hpp"
#include "chaincast/graph.hpp"

namespace chaincast {

// Relative daily volume per bucket: series.value(b, t) is bucket b's share
// of day t's total volume. Days with zero total are dropped and reported.
struct RelativeVolumeSeries {
    std::vector<double> values;  // row-major 400 x T
    std::vector<Date> dates;     // kept days
    std::vector<Date> dropped;   // zero-volume days

    [[nodiscard]] std::size_t days() const noexcept { return dates.size(); }
    [[nodiscard]] const double* row(int bucket) const {
        return values.data() + static_cast<std::size_t>(bucket) * dates.size();
    }
};

RelativeVolumeSeries relative_volume_series(std::span<const DailyChainletMatrix> days,
                                            VolumeMode mode);

// Sample Pearson correlation, clamped to [-1, 1]. nullopt when either
// sequence has zero variance (UndefinedCorrelation).
std::optional<double> pearson(std::span<const double> a, std::span<const double> b);

// 400-node chainlet network thresholded at theta.
struct ChainletGraph {
    WeightedGraph graph;
    double theta = 0.6;
    Date window_start, window_end;
    std::vector<Date> dropped_days;
    std::vector<int> zero_variance_nodes;
};

// Edge (i, j) exists iff the correlation of rows i and j passes the cut:
// r >= theta by default, |r| >= theta (weight |r|) when abs_corr is set.
// Zero-variance rows produce no edges and are flagged. Deterministic for
// any worker count.
ChainletGraph build_graph(const RelativeVolumeSeries& series, double theta, bool abs_corr = false,
                          int workers = 1);

// Edge list CSV: src_inputs,src_outputs,dst_inputs,dst_outputs,weight
void write_graph_edges(const std::filesystem::path& path, const ChainletGraph& g);
// JSON metadata: theta, window, dropped days, isolated nodes.
void write_graph_meta(const std::filesystem::path& path, const ChainletGraph& g);

}  // namespace chaincast

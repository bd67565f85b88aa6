#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "chaincast/calibration.hpp"
#include "chaincast/chainlet_data.hpp"

namespace chaincast {

// RA = 1 - |actual - predicted| / actual; <= 1, negative when the error
// exceeds 100%. Throws ParamError for nonpositive actual.
double relative_accuracy(double actual, double predicted);

struct ForecastRecord {
    Date date;
    double predicted = 0.0;
    double actual = 0.0;
    double ra = 0.0;
    bool ok = false;
    std::string reason;  // failure reason when !ok
};

struct BacktestSummary {
    int total_days = 0;  // successful predictions
    int failed_days = 0;
    double mean_ra = 0.0;
    int count_gt_09 = 0, count_gt_08 = 0, count_gt_07 = 0;
    double frac_gt_09 = 0.0, frac_gt_08 = 0.0, frac_gt_07 = 0.0;
};

// Mean RA and threshold statistics over the successful records; failures are
// excluded from the denominator and reported separately. Throws on empty or
// all-failed input.
BacktestSummary summarize(std::span<const ForecastRecord> records);

// Fit on the window then integrate one further day; returns the price at
// t_{N+1}.
double one_step_forecast(const FitWindow& window, const FitConfig& cfg);

// Per-day aligned inputs for a backtest.
struct ForecastDataset {
    MField mfield;               // all days
    std::vector<double> prices;  // aligned with mfield.dates
    ClusterEmbedding embedding;
    std::vector<bool> usable;    // false marks skipped zero-volume days

    void validate() const;
};

struct BacktestConfig {
    FitConfig fit;
    int window_length = 3;
    int workers = 1;
};

// One-step-ahead walk over every date in [first, last] that has
// window_length predecessors inside the dataset range. Per-day fits use
// seed = base_seed XOR day_index; per-day failures are recorded, not fatal.
// Bitwise identical for any worker count.
std::vector<ForecastRecord> rolling_forecast(const ForecastDataset& dataset, Date first,
                                             Date last, const BacktestConfig& cfg);

// --- synthetic data (test oracle and `synth` command) ----------------------

struct SyntheticSpec {
    int n_clusters = 10;
    int days = 365;
    double noise_sigma = 0.0;
    std::uint64_t seed = 0;
    Date start_date = Date(2017, 1, 1);
    double dx = 0.1;
    double dt_max = 0.05;
    PdeParams true_params;  // empty alpha -> seeded defaults
};

struct SyntheticDataset {
    MField mfield;
    MarketSeries market;
    ClusterEmbedding embedding;
    Clustering clustering;
    std::vector<DailyChainletMatrix> matrices;
    PdeParams true_params;
};

// Evolves the model from a seeded smooth initial profile, samples it at the
// cluster positions, and quantizes the samples through integer bucket
// amounts so that re-ingesting the emitted files reproduces the m-field
// bit for bit. trends(t) = sum_i m(x_i, t); prices via the price integral.
SyntheticDataset generate_synthetic(const SyntheticSpec& spec);

// Default well-behaved generator parameters (alpha seeded per cluster).
PdeParams default_synthetic_params(int n_clusters, std::uint64_t seed);

// Builds the per-day dataset from ingested inputs. Zero-volume days abort
// unless skip_zero_volume is set, in which case they are marked unusable.
ForecastDataset make_dataset(std::span<const DailyChainletMatrix> days,
                             const MarketSeries& market, const Clustering& clustering,
                             const ClusterEmbedding& embedding, VolumeMode mode,
                             bool skip_zero_volume);

// forecast CSV contract: date,predicted,actual,ra,status
std::string records_to_csv(std::span<const ForecastRecord> records);
std::vector<ForecastRecord> records_from_csv(const std::filesystem::path& path);

}  // namespace chaincast

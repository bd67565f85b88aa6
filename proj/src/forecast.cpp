#include "chaincast/forecast.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>

#include "chaincast/csv.hpp"
#include "chaincast/errors.hpp"
#include "chaincast/parallel.hpp"
#include "chaincast/rng.hpp"

namespace chaincast {

double relative_accuracy(double actual, double predicted) {
    if (!(actual > 0.0)) throw ParamError("relative accuracy needs a positive actual price");
    return 1.0 - std::abs(actual - predicted) / actual;
}

BacktestSummary summarize(std::span<const ForecastRecord> records) {
    if (records.empty()) throw ParamError("cannot summarize an empty backtest");
    BacktestSummary s;
    double total_ra = 0.0;
    for (const auto& r : records) {
        if (!r.ok) {
            ++s.failed_days;
            continue;
        }
        ++s.total_days;
        total_ra += r.ra;
        if (r.ra > 0.9) ++s.count_gt_09;
        if (r.ra > 0.8) ++s.count_gt_08;
        if (r.ra > 0.7) ++s.count_gt_07;
    }
    if (s.total_days == 0) throw ParamError("no successful predictions to summarize");
    s.mean_ra = total_ra / s.total_days;
    s.frac_gt_09 = static_cast<double>(s.count_gt_09) / s.total_days;
    s.frac_gt_08 = static_cast<double>(s.count_gt_08) / s.total_days;
    s.frac_gt_07 = static_cast<double>(s.count_gt_07) / s.total_days;
    return s;
}

double one_step_forecast(const FitWindow& window, const FitConfig& cfg) {
    const FitResult fit = fit_window(window, cfg);
    const auto& emb = window.embedding;
    const int n = emb.n_clusters();
    const int N = window.window_length();

    std::vector<double> alpha_at_position(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        alpha_at_position[static_cast<std::size_t>(i)] =
            fit.params.alpha[static_cast<std::size_t>(emb.order[static_cast<std::size_t>(i)])];
    std::vector<double> phi_values(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        phi_values[static_cast<std::size_t>(i)] = window.mfield.at(static_cast<std::size_t>(i), 0);

    const CubicSpline alpha = CubicSpline::fit_clamped(emb.positions, alpha_at_position);
    const CubicSpline phi = CubicSpline::fit_clamped(emb.positions, phi_values);
    const Grid grid = discretize(emb, cfg.dx);

    PdeIntegrator integ(grid, fit.params, alpha, cfg.dt_max);
    std::vector<double> state(grid.points());
    for (std::size_t i = 0; i < grid.points(); ++i) state[i] = phi.eval(grid.x[i]);
    for (int day = 1; day <= N; ++day) integ.advance_day(state, static_cast<double>(day));
    return integ.price_of(state);
}

void ForecastDataset::validate() const {
    embedding.validate();
    if (mfield.n_rows() != embedding.order.size())
        throw ParamError("dataset m-field does not match the embedding");
    if (mfield.n_cols() != prices.size() || mfield.n_cols() != usable.size())
        throw ParamError("dataset columns have mismatched lengths");
    for (std::size_t j = 0; j < prices.size(); ++j)
        if (!(prices[j] > 0.0))
            throw ParamError("nonpositive price on " + mfield.dates[j].to_string());
}

std::vector<ForecastRecord> rolling_forecast(const ForecastDataset& dataset, Date first,
                                             Date last, const BacktestConfig& cfg) {
    dataset.validate();
    if (cfg.window_length < 1) throw ParamError("window length must be >= 1");
    const int w = cfg.window_length;
    const auto& dates = dataset.mfield.dates;
    const auto D = static_cast<int>(dates.size());

    std::vector<int> targets;
    for (int j = 0; j < D; ++j)
        if (dates[static_cast<std::size_t>(j)] >= first &&
            dates[static_cast<std::size_t>(j)] <= last && j >= w)
            targets.push_back(j);
    if (targets.empty()) {
        std::cerr << "warning: no target day has " << w
                  << " preceding days in the dataset; nothing to forecast\n";
        return {};
    }

    std::vector<ForecastRecord> records(targets.size());
    parallel_for(targets.size(), cfg.workers, [&](std::size_t slot) {
        const int j = targets[slot];
        ForecastRecord& rec = records[slot];
        rec.date = dates[static_cast<std::size_t>(j)];
        rec.actual = dataset.prices[static_cast<std::size_t>(j)];

        bool window_ok = true;
        std::string reason;
        for (int i = j - w; i < j; ++i) {
            if (!dataset.usable[static_cast<std::size_t>(i)]) {
                window_ok = false;
                reason = "window contains skipped zero-volume day " +
                         dates[static_cast<std::size_t>(i)].to_string();
                break;
            }
            if (dates[static_cast<std::size_t>(i + 1)] - dates[static_cast<std::size_t>(i)] != 1) {
                window_ok = false;
                reason = "non-consecutive dates in window before " +
                         dates[static_cast<std::size_t>(i + 1)].to_string();
                break;
            }
        }
        if (!window_ok) {
            rec.ok = false;
            rec.reason = reason;
            return;
        }

        FitWindow window;
        window.embedding = dataset.embedding;
        window.prices.assign(dataset.prices.begin() + (j - w), dataset.prices.begin() + j);
        window.mfield.positions = dataset.mfield.positions;
        window.mfield.dates.assign(dates.begin() + (j - w), dates.begin() + j);
        const std::size_t n = dataset.mfield.n_rows();
        window.mfield.values.resize(n * static_cast<std::size_t>(w));
        for (std::size_t i = 0; i < n; ++i)
            for (int col = 0; col < w; ++col)
                window.mfield.at(i, static_cast<std::size_t>(col)) =
                    dataset.mfield.at(i, static_cast<std::size_t>(j - w + col));

        FitConfig day_cfg = cfg.fit;
        day_cfg.seed = cfg.fit.seed ^ static_cast<std::uint64_t>(j);
        day_cfg.workers = 1;  // day-level parallelism owns the threads
        try {
            rec.predicted = one_step_forecast(window, day_cfg);
            rec.ra = relative_accuracy(rec.actual, rec.predicted);
            rec.ok = true;
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::Model) throw;
            rec.ok = false;
            rec.reason = e.what();
        }
    });
    return records;
}

PdeParams default_synthetic_params(int n_clusters, std::uint64_t seed) {
    // Sized so a 365-day run keeps trends = sum_i m(x_i, t) well below the
    // 100 cap: initial profile ~1.4 per cluster and a yearly reaction growth
    // factor around 4-5.
    PdeParams p;
    p.d = 0.4;
    p.b0 = 120.0;
    p.b1 = 0.012;
    p.b2 = 0.0;
    p.k_coupling = 0.7;
    std::uint64_t stream = seed ^ 0x5deece66dULL;
    Rng rng(Rng::splitmix64(stream));
    p.alpha.resize(static_cast<std::size_t>(n_clusters));
    for (auto& a : p.alpha) a = rng.uniform(0.2, 0.45);
    return p;
}

ForecastDataset make_dataset(std::span<const DailyChainletMatrix> days,
                             const MarketSeries& market, const Clustering& clustering,
                             const ClusterEmbedding& embedding, VolumeMode mode,
                             bool skip_zero_volume) {
    embedding.validate();
    if (static_cast<int>(embedding.order.size()) != clustering.k)
        throw ParamError("embedding and clustering disagree on cluster count");

    std::string missing;
    for (const auto& day : days)
        if (market.find(day.date) < 0)
            missing += (missing.empty() ? "" : ", ") + day.date.to_string();
    if (!missing.empty()) throw AlignmentError("market series is missing dates: " + missing);

    ForecastDataset out;
    out.embedding = embedding;
    const std::size_t n = embedding.order.size();
    out.mfield.positions = embedding.positions;
    out.mfield.values.assign(n * days.size(), 0.0);
    out.usable.assign(days.size(), true);
    // dates must be complete before any at() write: n_cols() reads it.
    for (const auto& day : days) out.mfield.dates.push_back(day.date);
    for (std::size_t j = 0; j < days.size(); ++j) {
        const int mi = market.find(days[j].date);
        out.prices.push_back(market.price[static_cast<std::size_t>(mi)]);
        try {
            const auto shares = cluster_volume_shares(days[j], clustering, mode);
            const double trend = market.trends[static_cast<std::size_t>(mi)];
            for (std::size_t i = 0; i < n; ++i)
                out.mfield.at(i, j) =
                    trend * shares[static_cast<std::size_t>(embedding.order[i])];
        } catch (const ZeroVolumeDayError&) {
            if (!skip_zero_volume) throw;
            out.usable[j] = false;
        }
    }
    return out;
}

SyntheticDataset generate_synthetic(const SyntheticSpec& spec) {
    if (spec.n_clusters < 2) throw ParamError("synthetic data needs at least 2 clusters");
    if (spec.days < 2) throw ParamError("synthetic data needs at least 2 days");
    const int n = spec.n_clusters;

    SyntheticDataset out;
    out.true_params = spec.true_params.alpha.empty()
                          ? default_synthetic_params(n, spec.seed)
                          : spec.true_params;
    if (static_cast<int>(out.true_params.alpha.size()) != n)
        throw ParamError("true params alpha count does not match n_clusters");
    out.true_params.validate();

    out.embedding.order.resize(static_cast<std::size_t>(n));
    out.embedding.positions.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        out.embedding.order[static_cast<std::size_t>(i)] = i;
        out.embedding.positions[static_cast<std::size_t>(i)] = 1.0 + i;
    }

    // Buckets striped over clusters: node % n. Every cluster is nonempty
    // (400 >= n) and members of one cluster share the day's split volume.
    out.clustering.k = n;
    out.clustering.seed = spec.seed;
    out.clustering.assignment.resize(kBucketCount);
    for (int node = 0; node < kBucketCount; ++node)
        out.clustering.assignment[static_cast<std::size_t>(node)] = node % n;

    // Smooth seeded initial profile at the cluster positions.
    std::uint64_t stream = spec.seed;
    Rng phi_rng(Rng::splitmix64(stream));
    std::vector<double> phi_values(static_cast<std::size_t>(n));
    for (auto& v : phi_values) v = phi_rng.uniform(1.0, 1.8);

    std::vector<double> alpha_at_position(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        alpha_at_position[static_cast<std::size_t>(i)] =
            out.true_params.alpha[static_cast<std::size_t>(
                out.embedding.order[static_cast<std::size_t>(i)])];
    const CubicSpline alpha =
        CubicSpline::fit_clamped(out.embedding.positions, alpha_at_position);
    const CubicSpline phi = CubicSpline::fit_clamped(out.embedding.positions, phi_values);
    const Grid grid = discretize(out.embedding, spec.dx);
    const auto idx = sample_indices(grid, out.embedding.positions);

    PdeIntegrator integ(grid, out.true_params, alpha, spec.dt_max);
    std::vector<double> state(grid.points());
    for (std::size_t i = 0; i < grid.points(); ++i) state[i] = phi.eval(grid.x[i]);

    Rng noise_rng(Rng::splitmix64(stream));
    std::vector<std::int64_t> amounts(static_cast<std::size_t>(n));
    for (int day = 0; day < spec.days; ++day) {
        if (day > 0) integ.advance_day(state, static_cast<double>(day));
        const Date date = spec.start_date + day;

        double trend = 0.0;
        for (int c = 0; c < n; ++c) {
            double m = state[idx[static_cast<std::size_t>(c)]];
            if (spec.noise_sigma > 0.0) m *= 1.0 + spec.noise_sigma * noise_rng.gaussian();
            trend += m;
            amounts[static_cast<std::size_t>(c)] =
                m > 0.0 ? std::llround(m * 1e9) : 0;
        }
        if (!(trend >= 0.0 && trend <= 100.0))
            throw ParamError("synthetic trends left [0,100] on " + date.to_string() +
                             "; use fewer days or milder true parameters");

        DailyChainletMatrix matrix;
        matrix.date = date;
        for (int c = 0; c < n; ++c) {
            const std::int64_t total = amounts[static_cast<std::size_t>(c)];
            if (total == 0) continue;
            std::int64_t members = 0;
            for (int node = c; node < kBucketCount; node += n) ++members;
            const std::int64_t base = total / members;
            std::int64_t remainder = total % members;
            for (int node = c; node < kBucketCount; node += n) {
                std::int64_t part = base + (remainder > 0 ? 1 : 0);
                if (remainder > 0) --remainder;
                if (part == 0) continue;
                matrix.amount[static_cast<std::size_t>(node)] = part;
                matrix.occurrence[static_cast<std::size_t>(node)] = 1;
            }
        }
        out.matrices.push_back(matrix);

        out.market.dates.push_back(date);
        out.market.trends.push_back(trend);
        out.market.price.push_back(integ.price_of(state));
    }
    out.market.validate();  // catches runaway trends or nonpositive prices

    // The emitted m-field is the one a consumer reconstructs from the files:
    // trends * integer-amount shares, not the raw solver samples.
    out.mfield.positions = out.embedding.positions;
    out.mfield.dates = out.market.dates;
    out.mfield.values.assign(static_cast<std::size_t>(n) * out.matrices.size(), 0.0);
    for (std::size_t j = 0; j < out.matrices.size(); ++j) {
        const auto shares = cluster_volume_shares(out.matrices[j], out.clustering,
                                                  VolumeMode::Amount);
        for (int i = 0; i < n; ++i)
            out.mfield.at(static_cast<std::size_t>(i), j) =
                out.market.trends[j] *
                shares[static_cast<std::size_t>(out.embedding.order[static_cast<std::size_t>(i)])];
    }
    return out;
}

std::string records_to_csv(std::span<const ForecastRecord> records) {
    std::string text = "date,predicted,actual,ra,status\n";
    for (const auto& r : records) {
        text += r.date.to_string();
        if (r.ok) {
            text += ',' + csv::format_double(r.predicted);
            text += ',' + csv::format_double(r.actual);
            text += ',' + csv::format_double(r.ra);
            text += ",ok";
        } else {
            std::string reason = r.reason;
            std::replace(reason.begin(), reason.end(), ',', ';');
            text += ",," + csv::format_double(r.actual) + ",," + reason;
        }
        text += '\n';
    }
    return text;
}

std::vector<ForecastRecord> records_from_csv(const std::filesystem::path& path) {
    const auto table = csv::read_file(path, {"date", "predicted", "actual", "ra", "status"});
    std::vector<ForecastRecord> records;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        const long line = table.line_numbers[r];
        ForecastRecord rec;
        try {
            rec.date = Date::parse(row[0]);
        } catch (const IngestError& e) {
            throw IngestError(e.what(), line);
        }
        rec.actual = csv::parse_double(row[2], line, "actual");
        rec.ok = row[4] == "ok";
        if (rec.ok) {
            rec.predicted = csv::parse_double(row[1], line, "predicted");
            rec.ra = csv::parse_double(row[3], line, "ra");
        } else {
            rec.reason = row[4];
        }
        records.push_back(rec);
    }
    return records;
}

}  // namespace chaincast

// chaincast command-line pipeline:
//   ingest    validate/canonicalize transaction or matrix CSVs
//   graph     correlation network from relative daily volumes
//   cluster   spectral clustering + Fiedler embedding of the network
//   fit       calibrate the reaction-diffusion model on one window
//   backtest  rolling one-step-ahead forecast with RA statistics
//   synth     deterministic synthetic dataset generation
//   evaluate  recompute summary statistics from a forecast CSV
//
// Exit codes: 0 success, 2 input/parameter error, 3 model/data
// infeasibility, 4 internal error.

#include <algorithm>
#include <chrono>
#include <fstream>
#include <filesystem>
#include <map>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "chaincast/calibration.hpp"
#include "chaincast/chainlet_data.hpp"
#include "chaincast/correlation_graph.hpp"
#include "chaincast/csv.hpp"
#include "chaincast/errors.hpp"
#include "chaincast/forecast.hpp"
#include "chaincast/spectral.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace chaincast;

namespace {

int default_workers() {
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

// Line-oriented `key = value` config support. Values fill in any flag the
// command line leaves unset, so explicit flags always win. Keys map to long
// option names with '_' accepted for '-'.
std::vector<std::string> apply_config_file(const std::vector<std::string>& args) {
    std::string config_path;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) config_path = args[i + 1];
        else if (args[i].rfind("--config=", 0) == 0) config_path = args[i].substr(9);
    }
    if (config_path.empty()) return args;

    std::ifstream in(config_path);
    if (!in) throw ParamError("cannot open config file " + config_path);

    std::map<std::string, std::string> values;
    std::string line;
    while (std::getline(in, line)) {
        const auto comment = line.find('#');
        if (comment != std::string::npos) line.erase(comment);
        line = trim(line);
        if (line.empty() || line.front() == '[') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ParamError("config line is not `key = value`: " + line);
        std::string key = trim(line.substr(0, eq));
        std::replace(key.begin(), key.end(), '_', '-');
        std::string value = trim(line.substr(eq + 1));
        if (value.size() >= 2 && value.front() == '"' && value.back() == '"')
            value = value.substr(1, value.size() - 2);
        values[key] = value;
    }

    std::vector<std::string> out = args;
    for (const auto& [key, value] : values) {
        const std::string flag = "--" + key;
        bool given = false;
        for (const auto& arg : args)
            if (arg == flag || arg.rfind(flag + "=", 0) == 0) given = true;
        if (!given) out.push_back(flag + "=" + value);
    }
    return out;
}

void write_effective_config(CLI::App* cmd, const fs::path& out_dir) {
    // Reproducibility manifest: every option with its effective value, in
    // the same key = value format the --config file accepts.
    csv::write_file(out_dir / "effective_config.txt", cmd->config_to_str(true, false));
}

json params_to_json(const PdeParams& p) {
    return json{{"d", p.d},           {"b0", p.b0},       {"b1", p.b1},
                {"b2", p.b2},         {"k", p.k_coupling}, {"alpha", p.alpha}};
}

json summary_to_json(const BacktestSummary& s) {
    return json{{"total_days", s.total_days},
                {"failed_days", s.failed_days},
                {"mean_ra", s.mean_ra},
                {"count_gt_09", s.count_gt_09},
                {"count_gt_08", s.count_gt_08},
                {"count_gt_07", s.count_gt_07},
                {"frac_gt_09", s.frac_gt_09},
                {"frac_gt_08", s.frac_gt_08},
                {"frac_gt_07", s.frac_gt_07}};
}

struct GraphArgs {
    std::string matrices_path;
    std::string window_start = "2016-12-01";
    std::string window_end = "2016-12-30";
    double theta = 0.6;
    std::string mode = "amount";
    bool abs_corr = false;
};

void add_graph_options(CLI::App* cmd, GraphArgs& args) {
    cmd->add_option("--matrices", args.matrices_path, "aggregated matrices CSV")->required();
    cmd->add_option("--window-start", args.window_start, "graph window first day")
        ->capture_default_str();
    cmd->add_option("--window-end", args.window_end, "graph window last day")
        ->capture_default_str();
    cmd->add_option("--theta", args.theta, "Pearson correlation cut threshold")
        ->capture_default_str();
    cmd->add_option("--mode", args.mode, "volume mode: occurrence|amount")
        ->capture_default_str();
    cmd->add_flag("--abs-corr", args.abs_corr, "threshold |r| instead of r, weight = |r|");
}

LaplacianKind parse_laplacian(const std::string& text) {
    if (text == "symmetric") return LaplacianKind::Symmetric;
    if (text == "unnormalized") return LaplacianKind::Unnormalized;
    throw ParamError("unknown Laplacian variant '" + text + "' (symmetric|unnormalized)");
}

ChainletGraph build_graph_from_args(const GraphArgs& args, int workers) {
    const Date start = Date::parse(args.window_start);
    const Date end = Date::parse(args.window_end);
    if (end < start) throw ParamError("window end precedes window start");
    const auto all_days = load_matrices(args.matrices_path);
    std::vector<DailyChainletMatrix> window_days;
    for (const auto& day : all_days)
        if (day.date >= start && day.date <= end) window_days.push_back(day);
    if (window_days.empty())
        throw InsufficientDataError("no matrix days inside the graph window");
    const auto series = relative_volume_series(window_days, parse_volume_mode(args.mode));
    return build_graph(series, args.theta, args.abs_corr, workers);
}

struct FitArgs {
    double dx = 0.1;
    double dt_max = 0.05;
    double lambda_price = 1.0;
    int budget = 256;
    bool pin_k = false;
    double nm_tol = 1e-10;
    int nm_max_iter = 5000;
    double box_d_lo = 0.0, box_d_hi = 5.0;
    double box_b0_lo = 1.0, box_b0_hi = 1e4;
    double box_b1_lo = -1.0, box_b1_hi = 1.0;
    double box_b2_lo = 0.0, box_b2_hi = 10.0;
    double box_k_lo = -5.0, box_k_hi = 5.0;
    double box_alpha_lo = -10.0, box_alpha_hi = 10.0;
};

void add_fit_options(CLI::App* cmd, FitArgs& args) {
    cmd->add_option("--dx", args.dx, "grid spacing")->capture_default_str();
    cmd->add_option("--dt-max", args.dt_max, "time step cap (days)")->capture_default_str();
    cmd->add_option("--lambda-price", args.lambda_price, "price-term weight in the loss")
        ->capture_default_str();
    cmd->add_option("--budget", args.budget, "global search samples")->capture_default_str();
    cmd->add_flag("--pin-k", args.pin_k, "pin the heterogeneity coupling k to 1");
    cmd->add_option("--nm-tol", args.nm_tol, "simplex spread tolerance")->capture_default_str();
    cmd->add_option("--nm-max-iter", args.nm_max_iter, "simplex iteration cap")
        ->capture_default_str();
    cmd->add_option("--box-d-lo", args.box_d_lo, "search box: d lower")->capture_default_str();
    cmd->add_option("--box-d-hi", args.box_d_hi, "search box: d upper")->capture_default_str();
    cmd->add_option("--box-b0-lo", args.box_b0_lo, "search box: b0 lower")->capture_default_str();
    cmd->add_option("--box-b0-hi", args.box_b0_hi, "search box: b0 upper")->capture_default_str();
    cmd->add_option("--box-b1-lo", args.box_b1_lo, "search box: b1 lower")->capture_default_str();
    cmd->add_option("--box-b1-hi", args.box_b1_hi, "search box: b1 upper")->capture_default_str();
    cmd->add_option("--box-b2-lo", args.box_b2_lo, "search box: b2 lower")->capture_default_str();
    cmd->add_option("--box-b2-hi", args.box_b2_hi, "search box: b2 upper")->capture_default_str();
    cmd->add_option("--box-k-lo", args.box_k_lo, "search box: k lower")->capture_default_str();
    cmd->add_option("--box-k-hi", args.box_k_hi, "search box: k upper")->capture_default_str();
    cmd->add_option("--box-alpha-lo", args.box_alpha_lo, "search box: alpha lower")
        ->capture_default_str();
    cmd->add_option("--box-alpha-hi", args.box_alpha_hi, "search box: alpha upper")
        ->capture_default_str();
}

FitConfig make_fit_config(const FitArgs& args, int n_clusters, std::uint64_t seed, int workers) {
    FitConfig cfg;
    cfg.dx = args.dx;
    cfg.dt_max = args.dt_max;
    cfg.lambda_price = args.lambda_price;
    cfg.budget = args.budget;
    cfg.seed = seed;
    cfg.pin_k = args.pin_k;
    cfg.nm_tol = args.nm_tol;
    cfg.nm_max_iter = args.nm_max_iter;
    cfg.workers = workers;

    ParamBox box;
    auto dim = [&](double lo, double hi) {
        box.lower.push_back(lo);
        box.upper.push_back(hi);
    };
    dim(args.box_d_lo, args.box_d_hi);
    dim(args.box_b0_lo, args.box_b0_hi);
    dim(args.box_b1_lo, args.box_b1_hi);
    dim(args.box_b2_lo, args.box_b2_hi);
    if (!args.pin_k) dim(args.box_k_lo, args.box_k_hi);
    for (int i = 0; i < n_clusters; ++i) dim(args.box_alpha_lo, args.box_alpha_hi);
    box.validate();
    cfg.box = box;
    return cfg;
}

struct DatasetArgs {
    std::string matrices_path, market_path, clustering_path, embedding_path;
    std::string mode = "amount";
    bool skip_zero_volume = false;
};

void add_dataset_options(CLI::App* cmd, DatasetArgs& args, bool require_clustering = true) {
    cmd->add_option("--matrices", args.matrices_path, "aggregated matrices CSV")->required();
    cmd->add_option("--market", args.market_path, "market CSV (date,price_usd,trends)")
        ->required();
    auto* clustering = cmd->add_option("--clustering", args.clustering_path, "clustering CSV");
    auto* embedding = cmd->add_option("--embedding", args.embedding_path, "embedding CSV");
    if (require_clustering) {
        clustering->required();
        embedding->required();
    }
    cmd->add_option("--mode", args.mode, "volume mode: occurrence|amount")
        ->capture_default_str();
    cmd->add_flag("--skip-zero-volume", args.skip_zero_volume,
                  "skip zero-volume days instead of aborting");
}

ForecastDataset load_dataset(const DatasetArgs& args) {
    const auto days = load_matrices(args.matrices_path);
    const auto market = load_market(args.market_path);
    const auto clustering = load_clustering(args.clustering_path);
    const auto embedding = load_embedding(args.embedding_path);
    return make_dataset(days, market, clustering, embedding, parse_volume_mode(args.mode),
                        args.skip_zero_volume);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"chaincast: chainlet-network PDE forecasting pipeline"};
    app.require_subcommand(1);
    std::string config_path_opt;

    // --- ingest -------------------------------------------------------------
    auto* ingest = app.add_subcommand("ingest", "validate and canonicalize input CSVs");
    std::string ingest_tx, ingest_matrices, ingest_out = "out";
    std::uint64_t ingest_seed = 0;
    ingest->add_option("--config", config_path_opt, "key = value config file");
    ingest->add_option("--transactions", ingest_tx, "transaction log CSV");
    ingest->add_option("--matrices", ingest_matrices, "pre-aggregated matrices CSV");
    ingest->add_option("--out", ingest_out, "output directory")->capture_default_str();
    ingest->add_option("--seed", ingest_seed, "recorded in the manifest; ingest itself is deterministic")
        ->capture_default_str();
    ingest->callback([&] {
        if (ingest_tx.empty() == ingest_matrices.empty())
            throw ParamError("ingest needs exactly one of --transactions or --matrices");
        std::vector<DailyChainletMatrix> days;
        std::size_t records = 0;
        if (!ingest_tx.empty()) {
            const auto txs = load_transaction_log(ingest_tx);
            records = txs.size();
            days = aggregate_transactions(txs);
        } else {
            days = load_matrices(ingest_matrices);
            for (const auto& day : days)
                for (const auto occ : day.occurrence) records += occ != 0 ? 1 : 0;
        }
        const fs::path out_dir(ingest_out);
        write_matrices(out_dir / "matrices.csv", days);

        std::int64_t total_amount = 0;
        for (const auto& day : days)
            for (const auto a : day.amount) total_amount += a;
        json manifest{{"source", ingest_tx.empty() ? ingest_matrices : ingest_tx},
                      {"records", records},
                      {"days", days.size()},
                      {"total_amount", total_amount}};
        if (!days.empty()) {
            manifest["first_day"] = days.front().date.to_string();
            manifest["last_day"] = days.back().date.to_string();
        }
        csv::write_file(out_dir / "ingest_manifest.json", manifest.dump(2) + "\n");
        write_effective_config(ingest, out_dir);
        std::cout << "ingested " << days.size() << " day(s) -> "
                  << (out_dir / "matrices.csv").string() << "\n";
    });

    // --- graph ---------------------------------------------------------------
    auto* graph_cmd = app.add_subcommand("graph", "build the chainlet correlation network");
    GraphArgs graph_args;
    std::string graph_out = "out";
    int graph_workers = default_workers();
    graph_cmd->add_option("--config", config_path_opt, "key = value config file");
    add_graph_options(graph_cmd, graph_args);
    graph_cmd->add_option("--out", graph_out, "output directory")->capture_default_str();
    graph_cmd->add_option("--workers", graph_workers, "worker threads")->capture_default_str();
    graph_cmd->callback([&] {
        const auto g = build_graph_from_args(graph_args, graph_workers);
        const fs::path out_dir(graph_out);
        write_graph_edges(out_dir / "edges.csv", g);
        write_graph_meta(out_dir / "graph_meta.json", g);
        write_effective_config(graph_cmd, out_dir);
        std::size_t edges = 0;
        for (int i = 0; i < g.graph.n; ++i)
            for (int j = i + 1; j < g.graph.n; ++j) edges += g.graph.at(i, j) != 0.0 ? 1 : 0;
        std::cout << "graph: " << edges << " edges, " << g.graph.isolated_nodes().size()
                  << " isolated nodes -> " << (out_dir / "edges.csv").string() << "\n";
    });

    // --- cluster ---------------------------------------------------------------
    auto* cluster_cmd =
        app.add_subcommand("cluster", "spectral clustering and Fiedler embedding");
    GraphArgs cluster_graph_args;
    int cluster_k = 10;
    std::uint64_t cluster_seed = 0;
    std::string cluster_out = "out";
    std::string cluster_laplacian = "symmetric";
    int cluster_workers = default_workers();
    cluster_cmd->add_option("--config", config_path_opt, "key = value config file");
    add_graph_options(cluster_cmd, cluster_graph_args);
    cluster_cmd->add_option("--k", cluster_k, "number of clusters")->capture_default_str();
    cluster_cmd->add_option("--seed", cluster_seed, "k-means seed")->capture_default_str();
    cluster_cmd->add_option("--laplacian", cluster_laplacian,
                            "Laplacian variant: symmetric|unnormalized")
        ->capture_default_str();
    cluster_cmd->add_option("--out", cluster_out, "output directory")->capture_default_str();
    cluster_cmd->add_option("--workers", cluster_workers, "worker threads")
        ->capture_default_str();
    cluster_cmd->callback([&] {
        const auto g = build_graph_from_args(cluster_graph_args, cluster_workers);
        const auto clustering =
            spectral_cluster(g.graph, cluster_k, cluster_seed, parse_laplacian(cluster_laplacian));
        const auto super = cluster_supergraph(g.graph, clustering);
        const auto embedding = fiedler_embedding(super);
        const fs::path out_dir(cluster_out);
        write_graph_edges(out_dir / "edges.csv", g);
        write_graph_meta(out_dir / "graph_meta.json", g);
        write_clustering(out_dir / "clustering.csv", clustering);
        write_embedding(out_dir / "embedding.csv", embedding);
        write_effective_config(cluster_cmd, out_dir);
        std::cout << "clustered 400 buckets into " << clustering.k << " clusters -> "
                  << (out_dir / "clustering.csv").string() << "\n";
    });

    // --- fit ---------------------------------------------------------------
    auto* fit_cmd = app.add_subcommand("fit", "calibrate the model on one window");
    DatasetArgs fit_data;
    FitArgs fit_args;
    std::string fit_target;
    int fit_window_len = 3;
    std::uint64_t fit_seed = 0;
    std::string fit_out = "out";
    int fit_workers = default_workers();
    fit_cmd->add_option("--config", config_path_opt, "key = value config file");
    add_dataset_options(fit_cmd, fit_data);
    add_fit_options(fit_cmd, fit_args);
    fit_cmd->add_option("--target", fit_target, "day to predict (window ends the day before)")
        ->required();
    fit_cmd->add_option("--window", fit_window_len, "window length in days")
        ->capture_default_str();
    fit_cmd->add_option("--seed", fit_seed, "search seed")->capture_default_str();
    fit_cmd->add_option("--out", fit_out, "output directory")->capture_default_str();
    fit_cmd->add_option("--workers", fit_workers, "worker threads")->capture_default_str();
    fit_cmd->callback([&] {
        const auto t0 = std::chrono::steady_clock::now();
        const auto dataset = load_dataset(fit_data);
        const Date target = Date::parse(fit_target);

        int target_idx = -1;
        for (std::size_t j = 0; j < dataset.mfield.dates.size(); ++j)
            if (dataset.mfield.dates[j] == target) target_idx = static_cast<int>(j);
        if (target_idx < 0)
            throw ParamError("target day " + target.to_string() + " is not in the dataset");
        if (target_idx < fit_window_len)
            throw ParamError("target day lacks " + std::to_string(fit_window_len) +
                             " preceding days in the dataset");

        FitWindow window;
        window.embedding = dataset.embedding;
        const int j = target_idx, w = fit_window_len;
        window.prices.assign(dataset.prices.begin() + (j - w), dataset.prices.begin() + j);
        window.mfield.positions = dataset.mfield.positions;
        window.mfield.dates.assign(dataset.mfield.dates.begin() + (j - w),
                                   dataset.mfield.dates.begin() + j);
        const std::size_t n = dataset.mfield.n_rows();
        window.mfield.values.resize(n * static_cast<std::size_t>(w));
        for (std::size_t i = 0; i < n; ++i)
            for (int col = 0; col < w; ++col)
                window.mfield.at(i, static_cast<std::size_t>(col)) =
                    dataset.mfield.at(i, static_cast<std::size_t>(j - w + col));

        const FitConfig cfg = make_fit_config(fit_args, static_cast<int>(n), fit_seed,
                                              fit_workers);
        const FitResult fit = fit_window(window, cfg);
        const double predicted = one_step_forecast(window, cfg);
        const double wall =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

        // Fitted-model trajectory over the window plus the predicted day,
        // written as plot-ready t,x,m rows.
        std::vector<double> alpha_at_position(n), phi_values(n);
        for (std::size_t i = 0; i < n; ++i) {
            alpha_at_position[i] =
                fit.params.alpha[static_cast<std::size_t>(window.embedding.order[i])];
            phi_values[i] = window.mfield.at(i, 0);
        }
        const auto alpha =
            CubicSpline::fit_clamped(window.embedding.positions, alpha_at_position);
        const auto phi = CubicSpline::fit_clamped(window.embedding.positions, phi_values);
        const auto grid = discretize(window.embedding, cfg.dx);
        const auto solution = solve(phi, 1.0, static_cast<double>(w + 1), fit.params, alpha,
                                    grid, cfg.dt_max);

        auto spline_to_json = [](const CubicSpline& s) {
            return json{{"knots", s.knots()}, {"values", s.values()}};
        };
        json report{{"target", target.to_string()},
                    {"window_length", fit_window_len},
                    {"params", params_to_json(fit.params)},
                    {"loss", fit.achieved_loss},
                    {"global_stage_loss", fit.global_stage_loss},
                    {"budget", fit_args.budget},
                    {"evaluations", fit.evaluations},
                    {"seed", fit_seed},
                    {"predicted_price", predicted},
                    {"alpha_spline", spline_to_json(alpha)},
                    {"phi_spline", spline_to_json(phi)},
                    {"wall_time_s", wall}};
        if (target_idx >= 0) {
            report["actual_price"] = dataset.prices[static_cast<std::size_t>(target_idx)];
            report["ra"] = relative_accuracy(dataset.prices[static_cast<std::size_t>(target_idx)],
                                             predicted);
        }
        const fs::path out_dir(fit_out);
        csv::write_file(out_dir / "fit_report.json", report.dump(2) + "\n");
        csv::write_file(out_dir / "solution.csv", solution_to_csv(solution));
        write_effective_config(fit_cmd, out_dir);
        std::cout << "fit loss " << csv::format_double(fit.achieved_loss) << ", predicted "
                  << csv::format_double(predicted) << " for " << target.to_string() << "\n";
    });

    // --- backtest ---------------------------------------------------------------
    auto* backtest_cmd = app.add_subcommand("backtest", "rolling one-step-ahead forecast");
    DatasetArgs bt_data;
    FitArgs bt_args;
    std::string bt_start = "2017-01-01", bt_end = "2017-12-31";
    int bt_window = 3;
    std::uint64_t bt_seed = 0;
    std::string bt_out = "out";
    int bt_workers = default_workers();
    bool bt_recluster = false;
    double bt_theta = 0.6;
    bool bt_abs_corr = false;
    int bt_graph_days = 30;
    std::uint64_t bt_cluster_seed = 0;
    int bt_k = 10;
    std::string bt_laplacian = "symmetric";
    backtest_cmd->add_option("--config", config_path_opt, "key = value config file");
    add_dataset_options(backtest_cmd, bt_data, /*require_clustering=*/false);
    add_fit_options(backtest_cmd, bt_args);
    backtest_cmd->add_option("--range-start", bt_start, "first target day")
        ->capture_default_str();
    backtest_cmd->add_option("--range-end", bt_end, "last target day")->capture_default_str();
    backtest_cmd->add_option("--window", bt_window, "window length in days")
        ->capture_default_str();
    backtest_cmd->add_option("--seed", bt_seed, "base search seed")->capture_default_str();
    backtest_cmd->add_option("--out", bt_out, "output directory")->capture_default_str();
    backtest_cmd->add_option("--workers", bt_workers, "worker threads")->capture_default_str();
    backtest_cmd->add_flag("--recluster-monthly", bt_recluster,
                           "rebuild graph/clustering/embedding per calendar month from the "
                           "trailing --graph-days instead of using fixed files");
    backtest_cmd->add_option("--theta", bt_theta, "recluster: correlation cut threshold")
        ->capture_default_str();
    backtest_cmd->add_flag("--abs-corr", bt_abs_corr,
                           "recluster: threshold |r| instead of r");
    backtest_cmd->add_option("--k", bt_k, "recluster: number of clusters")
        ->capture_default_str();
    backtest_cmd->add_option("--graph-days", bt_graph_days,
                             "recluster: trailing graph window length")
        ->capture_default_str();
    backtest_cmd->add_option("--cluster-seed", bt_cluster_seed, "recluster: k-means seed")
        ->capture_default_str();
    backtest_cmd->add_option("--laplacian", bt_laplacian,
                             "recluster: Laplacian variant symmetric|unnormalized")
        ->capture_default_str();
    backtest_cmd->callback([&] {
        const Date first = Date::parse(bt_start);
        const Date last = Date::parse(bt_end);
        std::vector<ForecastRecord> records;

        if (!bt_recluster) {
            if (bt_data.clustering_path.empty() || bt_data.embedding_path.empty())
                throw ParamError(
                    "backtest needs --clustering and --embedding unless --recluster-monthly");
            const auto dataset = load_dataset(bt_data);
            BacktestConfig cfg;
            cfg.fit =
                make_fit_config(bt_args, static_cast<int>(dataset.mfield.n_rows()), bt_seed, 1);
            cfg.window_length = bt_window;
            cfg.workers = bt_workers;
            records = rolling_forecast(dataset, first, last, cfg);
        } else {
            const auto matrices = load_matrices(bt_data.matrices_path);
            const auto market = load_market(bt_data.market_path);
            const auto mode = parse_volume_mode(bt_data.mode);
            const auto kind = parse_laplacian(bt_laplacian);

            // One clustering per calendar month, built from the trailing
            // window that ends the day before the month starts.
            for (Date month_first(first.year(), first.month(), 1); month_first <= last;) {
                const Date next_month = month_first.month() == 12
                                            ? Date(month_first.year() + 1, 1, 1)
                                            : Date(month_first.year(), month_first.month() + 1, 1);
                const Date span_first = std::max(first, month_first);
                const Date span_last = std::min(last, next_month - 1);
                const Date graph_end = month_first - 1;
                const Date graph_start = graph_end - (bt_graph_days - 1);

                std::vector<DailyChainletMatrix> window_days;
                for (const auto& day : matrices)
                    if (day.date >= graph_start && day.date <= graph_end)
                        window_days.push_back(day);
                if (window_days.size() < 3)
                    throw InsufficientDataError("fewer than 3 matrix days in the graph window " +
                                                graph_start.to_string() + ".." +
                                                graph_end.to_string());

                const auto series = relative_volume_series(window_days, mode);
                const auto graph = build_graph(series, bt_theta, bt_abs_corr,
                                               bt_workers);
                const auto clustering =
                    spectral_cluster(graph.graph, bt_k, bt_cluster_seed, kind);
                const auto embedding =
                    fiedler_embedding(cluster_supergraph(graph.graph, clustering));
                const auto dataset = make_dataset(matrices, market, clustering, embedding,
                                                  mode, bt_data.skip_zero_volume);

                BacktestConfig cfg;
                cfg.fit = make_fit_config(bt_args, static_cast<int>(dataset.mfield.n_rows()),
                                          bt_seed, 1);
                cfg.window_length = bt_window;
                cfg.workers = bt_workers;
                auto month_records = rolling_forecast(dataset, span_first, span_last, cfg);
                records.insert(records.end(), month_records.begin(), month_records.end());
                month_first = next_month;
            }
        }

        const fs::path out_dir(bt_out);
        csv::write_file(out_dir / "forecast.csv", records_to_csv(records));
        if (!records.empty()) {
            const auto summary = summarize(records);
            csv::write_file(out_dir / "summary.json", summary_to_json(summary).dump(2) + "\n");
            std::cout << "backtest: " << summary.total_days << " day(s), mean RA "
                      << csv::format_double(summary.mean_ra) << " -> "
                      << (out_dir / "forecast.csv").string() << "\n";
        } else {
            std::cout << "backtest produced no records\n";
        }
        write_effective_config(backtest_cmd, out_dir);
    });

    // --- synth ---------------------------------------------------------------
    auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic dataset");
    int synth_days = 365, synth_clusters = 10, synth_window = 3;
    int synth_workers = default_workers();
    double synth_noise = 0.0;
    std::string synth_start = "2017-01-01", synth_out = "out";
    std::uint64_t synth_seed = 0;
    synth_cmd->add_option("--config", config_path_opt, "key = value config file");
    synth_cmd->add_option("--days", synth_days, "number of days")->capture_default_str();
    synth_cmd->add_option("--clusters", synth_clusters, "number of clusters")
        ->capture_default_str();
    synth_cmd->add_option("--noise", synth_noise, "relative Gaussian noise sigma")
        ->capture_default_str();
    synth_cmd->add_option("--window", synth_window, "window the dataset must support")
        ->capture_default_str();
    synth_cmd->add_option("--start-date", synth_start, "first day")->capture_default_str();
    synth_cmd->add_option("--seed", synth_seed, "generator seed")->capture_default_str();
    synth_cmd->add_option("--workers", synth_workers, "accepted for interface uniformity")
        ->capture_default_str();
    synth_cmd->add_option("--out", synth_out, "output directory")->capture_default_str();
    synth_cmd->callback([&] {
        if (synth_days < synth_window + 1)
            throw ParamError("--days must be at least window + 1 = " +
                             std::to_string(synth_window + 1));
        SyntheticSpec spec;
        spec.n_clusters = synth_clusters;
        spec.days = synth_days;
        spec.noise_sigma = synth_noise;
        spec.seed = synth_seed;
        spec.start_date = Date::parse(synth_start);
        const auto data = generate_synthetic(spec);

        const fs::path out_dir(synth_out);
        write_matrices(out_dir / "matrices.csv", data.matrices);
        write_market(out_dir / "market.csv", data.market);
        write_clustering(out_dir / "clustering.csv", data.clustering);
        write_embedding(out_dir / "embedding.csv", data.embedding);
        json manifest{{"days", synth_days},
                      {"clusters", synth_clusters},
                      {"noise_sigma", synth_noise},
                      {"seed", synth_seed},
                      {"start_date", spec.start_date.to_string()},
                      {"true_params", params_to_json(data.true_params)}};
        csv::write_file(out_dir / "synth_manifest.json", manifest.dump(2) + "\n");
        write_effective_config(synth_cmd, out_dir);
        std::cout << "synthetic dataset: " << synth_days << " day(s), " << synth_clusters
                  << " cluster(s) -> " << out_dir.string() << "\n";
    });

    // --- evaluate ---------------------------------------------------------------
    auto* eval_cmd = app.add_subcommand("evaluate", "summarize a forecast CSV");
    std::string eval_forecast, eval_out = "out";
    std::uint64_t eval_seed = 0;
    int eval_workers = default_workers();
    eval_cmd->add_option("--config", config_path_opt, "key = value config file");
    eval_cmd->add_option("--forecast", eval_forecast, "forecast CSV to summarize")->required();
    eval_cmd->add_option("--seed", eval_seed, "accepted for interface uniformity")
        ->capture_default_str();
    eval_cmd->add_option("--workers", eval_workers, "accepted for interface uniformity")
        ->capture_default_str();
    eval_cmd->add_option("--out", eval_out, "output directory")->capture_default_str();
    eval_cmd->callback([&] {
        const auto records = records_from_csv(eval_forecast);
        const auto summary = summarize(records);
        const fs::path out_dir(eval_out);
        csv::write_file(out_dir / "summary.json", summary_to_json(summary).dump(2) + "\n");
        write_effective_config(eval_cmd, out_dir);
        std::cout << "summary: " << summary.total_days << " day(s), mean RA "
                  << csv::format_double(summary.mean_ra) << "\n";
    });

    try {
        std::vector<std::string> args(argv + 1, argv + argc);
        args = apply_config_file(args);
        std::vector<const char*> ptrs;
        ptrs.push_back(argv[0]);
        for (const auto& arg : args) ptrs.push_back(arg.c_str());
        app.parse(static_cast<int>(ptrs.size()), ptrs.data());
        return 0;
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        switch (e.kind()) {
            case ErrorKind::Input: return 2;
            case ErrorKind::Model: return 3;
            case ErrorKind::Internal: return 4;
        }
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 4;
    }
}

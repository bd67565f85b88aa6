// Acceptance suite: runs every release criterion at its pinned tolerance and
// prints one PASS/FAIL line each. Exit code is the number of failed blocking
// criteria. The real-data replication criterion is report-only: it needs
// externally supplied 2017 CSVs (CHAINCAST_REAL_DATA_DIR) and its target is
// informational because the upstream fitting choices are under-specified.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include <json.hpp>

#include "chaincast/calibration.hpp"
#include "chaincast/chainlet_data.hpp"
#include "chaincast/forecast.hpp"
#include "chaincast/pde.hpp"
#include "chaincast/spectral.hpp"
#include "chaincast/spline.hpp"

using namespace chaincast;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path work_dir() {
    const auto dir = fs::temp_directory_path() / "chaincast_acceptance";
    fs::create_directories(dir);
    return dir;
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string(CHAINCAST_CLI_PATH) + " " + args + " > " +
                            (work_dir() / "cli.out").string() + " 2> " +
                            (work_dir() / "cli.err").string();
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

CubicSpline constant_spline(double lo, double hi, double value) {
    return CubicSpline::fit_clamped(std::vector<double>{lo, hi},
                                    std::vector<double>{value, value});
}

CubicSpline cosine_mode_spline() {
    std::vector<double> knots, values;
    for (int i = 0; i <= 360; ++i) {
        const double x = 1.0 + 9.0 * i / 360.0;
        knots.push_back(x);
        values.push_back(std::cos(std::numbers::pi * (x - 1.0) / 9.0));
    }
    return CubicSpline::fit_clamped(knots, values);
}

double cosine_mode_error(double dx, double dt_max, double t_end) {
    PdeParams p;
    p.d = 1.0;
    p.b0 = 1.0;
    p.alpha.assign(2, 0.0);
    const auto alpha = constant_spline(1.0, 10.0, 0.0);
    const auto grid = make_grid(1.0, 10.0, dx);
    const auto sol = solve(cosine_mode_spline(), 1.0, t_end, p, alpha, grid, dt_max);
    double err = 0.0;
    const double decay = std::exp(-std::numbers::pi * std::numbers::pi * (t_end - 1.0) / 81.0);
    for (std::size_t i = 0; i < grid.points(); ++i) {
        const double exact = decay * std::cos(std::numbers::pi * (grid.x[i] - 1.0) / 9.0);
        err = std::max(err, std::abs(sol.states.back()[i] - exact));
    }
    return err;
}

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
    return (sum_ij - expected) / (0.5 * (sum_a + sum_b) - expected);
}

// --- criteria ----------------------------------------------------------------

bool pde_cosine_mode(std::string& detail) {
    const auto t0 = std::chrono::steady_clock::now();
    const double err = cosine_mode_error(0.05, 1e-3, 11.0);
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    detail = "max error " + std::to_string(err) + " over 10 days, " + std::to_string(wall) +
             " s";
    return err <= 1e-4 && wall < 1.0;
}

bool conservation(std::string& detail) {
    PdeParams p;
    p.d = 1.0;
    p.b0 = 1.0;
    p.alpha.assign(2, 0.0);
    const auto alpha = constant_spline(1.0, 10.0, 0.0);
    const auto grid = make_grid(1.0, 10.0, 0.1);
    const auto sol = solve(cosine_mode_spline(), 1.0, 11.0, p, alpha, grid, 0.05);
    auto mass = [&](const std::vector<double>& s) {
        double total = 0.0;
        for (std::size_t i = 0; i + 1 < s.size(); ++i) total += 0.5 * (s[i] + s[i + 1]);
        return total * grid.dx;
    };
    const double m0 = mass(sol.states.front());
    double drift = 0.0;
    for (const auto& s : sol.states)
        drift = std::max(drift, std::abs(mass(s) - m0) / std::max(1.0, std::abs(m0)));
    detail = "relative mass drift " + std::to_string(drift);
    return drift <= 1e-6;
}

bool convergence_orders(std::string& detail) {
    const double s1 = cosine_mode_error(0.2, 1e-4, 3.0);
    const double s2 = cosine_mode_error(0.1, 1e-4, 3.0);
    const double s3 = cosine_mode_error(0.05, 1e-4, 3.0);
    const double spatial1 = std::log2(s1 / s2);
    const double spatial2 = std::log2(s2 / s3);

    PdeParams p;
    p.d = 1.0;
    p.b0 = 50.0;
    p.b1 = 0.5;
    p.b2 = 1.0;
    p.k_coupling = 1.0;
    std::vector<double> knots, alpha_v;
    for (int i = 0; i < 10; ++i) {
        knots.push_back(1.0 + i);
        alpha_v.push_back(1.0 + 0.2 * i + 0.5 * ((i * 7) % 3));
    }
    p.alpha = alpha_v;
    const auto alpha = CubicSpline::fit_clamped(knots, alpha_v);
    const auto grid = make_grid(1.0, 10.0, 0.3);
    const auto phi = cosine_mode_spline();
    auto run = [&](double dt) { return solve(phi, 1.0, 3.0, p, alpha, grid, dt).states.back(); };
    const auto ref = run(0.02 / 32.0);
    auto err = [&](const std::vector<double>& s) {
        double e = 0.0;
        for (std::size_t i = 0; i < s.size(); ++i) e = std::max(e, std::abs(s[i] - ref[i]));
        return e;
    };
    const double t1 = err(run(0.02));
    const double t2 = err(run(0.01));
    const double t3 = err(run(0.005));
    const double temporal1 = std::log2(t1 / t2);
    const double temporal2 = std::log2(t2 / t3);

    detail = "spatial " + std::to_string(spatial1) + ", " + std::to_string(spatial2) +
             "; temporal " + std::to_string(temporal1) + ", " + std::to_string(temporal2);
    auto in = [](double v, double target, double tol) { return std::abs(v - target) <= tol; };
    return in(spatial1, 2.0, 0.2) && in(spatial2, 2.0, 0.2) && in(temporal1, 4.0, 0.5) &&
           in(temporal2, 4.0, 0.5);
}

bool spline_exactness(std::string& detail) {
    const double L1 = 1.0, L2 = 10.0, c = 0.7;
    auto p = [&](double x) {
        return c * (x * x * x / 3.0 - (L1 + L2) * x * x / 2.0 + L1 * L2 * x);
    };
    std::vector<double> knots, values;
    for (int i = 0; i < 10; ++i) {
        knots.push_back(L1 + i);
        values.push_back(p(L1 + i));
    }
    const auto s = CubicSpline::fit_clamped(knots, values);
    double cubic_err = 0.0;
    for (double x = L1; x <= L2; x += 0.005) cubic_err = std::max(cubic_err, std::abs(s.eval(x) - p(x)));
    double knot_err = 0.0;
    for (std::size_t i = 0; i < knots.size(); ++i)
        knot_err = std::max(knot_err, std::abs(s.eval(knots[i]) - values[i]));
    detail = "cubic reproduction " + std::to_string(cubic_err) + ", knot residual " +
             std::to_string(knot_err);
    return cubic_err <= 1e-10 && knot_err <= 1e-12;
}

bool spectral_recovery(std::string& detail) {
    WeightedGraph g(10);
    for (int i = 0; i < 10; ++i)
        for (int j = i + 1; j < 10; ++j)
            if ((i < 5) == (j < 5)) g.set(i, j, 0.9);
    std::vector<int> truth(10);
    for (int i = 0; i < 10; ++i) truth[static_cast<std::size_t>(i)] = i < 5 ? 0 : 1;
    double min_ari = 1.0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto c = spectral_cluster(g, 2, seed);
        min_ari = std::min(min_ari, adjusted_rand_index(c.assignment, truth));
    }
    detail = "min ARI over 10 seeds " + std::to_string(min_ari);
    return min_ari == 1.0;
}

bool optimizer(std::string& detail) {
    const Objective rosenbrock = [](std::span<const double> x) {
        const double a = 1.0 - x[0];
        const double b = x[1] - x[0] * x[0];
        return a * a + 100.0 * b * b;
    };
    const std::vector<double> start = {-1.2, 1.0};
    const std::vector<double> scale2 = {0.5, 0.5};
    const auto r = nelder_mead(rosenbrock, start, scale2, 1e-14, 5000);
    const double rosen_err = std::max(std::abs(r.x[0] - 1.0), std::abs(r.x[1] - 1.0));

    const Objective quad = [](std::span<const double> x) {
        double v = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i)
            v += (x[i] - static_cast<double>(i + 1)) * (x[i] - static_cast<double>(i + 1));
        return v;
    };
    const std::vector<double> start6(6, 0.0);
    const std::vector<double> scale6(6, 1.0);
    const auto q = nelder_mead(quad, start6, scale6, 1e-16, 2000);
    double quad_err = 0.0;
    for (std::size_t i = 0; i < 6; ++i)
        quad_err = std::max(quad_err, std::abs(q.x[i] - static_cast<double>(i + 1)));

    detail = "Rosenbrock |x-1| " + std::to_string(rosen_err) + "; quadratic error " +
             std::to_string(quad_err) + " in " + std::to_string(q.iterations) + " iters";
    return rosen_err <= 1e-4 && quad_err <= 1e-6 && q.iterations <= 2000;
}

bool end_to_end(std::string& detail) {
    const auto dir = work_dir() / "year";
    fs::remove_all(dir);
    fs::create_directories(dir);
    const auto t0 = std::chrono::steady_clock::now();
    if (run_cli("synth --days 365 --clusters 10 --seed 2024 --out " + (dir / "data").string()) !=
        0) {
        detail = "synth failed";
        return false;
    }
    const std::string args = "backtest --matrices " + (dir / "data" / "matrices.csv").string() +
                             " --market " + (dir / "data" / "market.csv").string() +
                             " --clustering " + (dir / "data" / "clustering.csv").string() +
                             " --embedding " + (dir / "data" / "embedding.csv").string() +
                             " --budget 256 --seed 2024 --out " + (dir / "bt").string();
    if (run_cli(args) != 0) {
        detail = "backtest failed";
        return false;
    }
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    const auto summary = json::parse(slurp(dir / "bt" / "summary.json"));
    const int total = summary["total_days"].get<int>() + summary["failed_days"].get<int>();
    const double mean_ra = summary["mean_ra"].get<double>();
    detail = "records " + std::to_string(total) + ", mean RA " + std::to_string(mean_ra) +
             ", " + std::to_string(wall) + " s";
    return total == 362 && mean_ra >= 0.95 && wall <= 600.0;
}

bool reflection_invariance(std::string& detail) {
    SyntheticSpec spec;
    spec.n_clusters = 10;
    spec.days = 30;
    spec.seed = 77;
    const auto data = generate_synthetic(spec);

    BacktestConfig cfg;
    cfg.fit.seed = 99;
    cfg.workers = 2;

    const auto forward = make_dataset(data.matrices, data.market, data.clustering,
                                      data.embedding, VolumeMode::Amount, false);
    const auto reversed = make_dataset(data.matrices, data.market, data.clustering,
                                       data.embedding.reversed(), VolumeMode::Amount, false);
    const auto a = rolling_forecast(forward, data.market.dates.front(),
                                    data.market.dates.back(), cfg);
    const auto b = rolling_forecast(reversed, data.market.dates.front(),
                                    data.market.dates.back(), cfg);
    if (a.size() != b.size() || a.empty()) {
        detail = "record count mismatch";
        return false;
    }
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (!a[i].ok || !b[i].ok) {
            detail = "failed day in reflection run";
            return false;
        }
        worst = std::max(worst,
                         std::abs(a[i].predicted - b[i].predicted) / std::abs(a[i].predicted));
    }
    detail = "worst relative prediction difference " + std::to_string(worst) + " over " +
             std::to_string(a.size()) + " days";
    return worst <= 1e-9;
}

bool determinism(std::string& detail) {
    const auto dir = work_dir() / "det";
    fs::remove_all(dir);
    fs::create_directories(dir);
    if (run_cli("synth --days 12 --clusters 10 --seed 5 --out " + (dir / "data").string()) !=
        0) {
        detail = "synth failed";
        return false;
    }
    const std::string common = "backtest --matrices " +
                               (dir / "data" / "matrices.csv").string() + " --market " +
                               (dir / "data" / "market.csv").string() + " --clustering " +
                               (dir / "data" / "clustering.csv").string() + " --embedding " +
                               (dir / "data" / "embedding.csv").string() + " --seed 31 --out ";
    if (run_cli(common + (dir / "a").string()) != 0 ||
        run_cli(common + (dir / "b").string()) != 0) {
        detail = "backtest failed";
        return false;
    }
    const bool forecast_equal =
        slurp(dir / "a" / "forecast.csv") == slurp(dir / "b" / "forecast.csv");
    const bool summary_equal =
        slurp(dir / "a" / "summary.json") == slurp(dir / "b" / "summary.json");
    detail = std::string("forecast.csv ") + (forecast_equal ? "identical" : "differs") +
             ", summary.json " + (summary_equal ? "identical" : "differs");
    return forecast_equal && summary_equal;
}

// Report-only: replicates the 2017 table shape when real CSVs are supplied.
bool real_data_replication(std::string& detail) {
    const char* dir_env = std::getenv("CHAINCAST_REAL_DATA_DIR");
    if (dir_env == nullptr) {
        detail = "skipped: set CHAINCAST_REAL_DATA_DIR to matrices/market/clustering CSVs";
        return true;
    }
    const fs::path dir(dir_env);
    const auto out = work_dir() / "real";
    fs::remove_all(out);
    fs::create_directories(out);
    const std::string args = "backtest --matrices " + (dir / "matrices.csv").string() +
                             " --market " + (dir / "market.csv").string() + " --clustering " +
                             (dir / "clustering.csv").string() + " --embedding " +
                             (dir / "embedding.csv").string() +
                             " --range-start 2017-01-04 --range-end 2017-12-31 --out " +
                             out.string();
    if (run_cli(args) != 0) {
        detail = "backtest failed on the supplied data";
        return true;
    }
    const auto summary = json::parse(slurp(out / "summary.json"));
    const double mean_ra = summary["mean_ra"].get<double>();
    detail = "mean RA " + std::to_string(mean_ra) + " vs target 0.82 +/- 0.10" +
             (std::abs(mean_ra - 0.82) <= 0.10 ? " (within tolerance)"
                                               : " (outside tolerance, reported only)");
    return true;
}

}  // namespace

int main() {
    struct Criterion {
        const char* name;
        std::function<bool(std::string&)> run;
        bool blocking;
    };
    const std::vector<Criterion> criteria = {
        {"pde-cosine-mode", pde_cosine_mode, true},
        {"conservation", conservation, true},
        {"convergence-orders", convergence_orders, true},
        {"spline-exactness", spline_exactness, true},
        {"spectral-recovery", spectral_recovery, true},
        {"optimizer", optimizer, true},
        {"end-to-end-synthetic", end_to_end, true},
        {"reflection-invariance", reflection_invariance, true},
        {"determinism", determinism, true},
        {"real-data-replication", real_data_replication, false},
    };

    int failures = 0;
    for (const auto& criterion : criteria) {
        std::string detail;
        bool ok = false;
        try {
            ok = criterion.run(detail);
        } catch (const std::exception& e) {
            detail = std::string("exception: ") + e.what();
        }
        const char* verdict = ok ? "PASS" : (criterion.blocking ? "FAIL" : "REPORT");
        std::printf("%s  %-24s %s\n", verdict, criterion.name, detail.c_str());
        std::fflush(stdout);
        if (!ok && criterion.blocking) ++failures;
    }
    return failures;
}

#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "chaincast/chainlet_data.hpp"
#include "chaincast/clustering.hpp"
#include "chaincast/pde.hpp"

namespace chaincast {

// Historical window the parameters are fitted against: N days of observed
// m-field (N >= 2) plus the matching prices.
struct FitWindow {
    MField mfield;               // n x N, rows in embedding order
    std::vector<double> prices;  // length N
    ClusterEmbedding embedding;

    void validate() const;
    [[nodiscard]] int window_length() const { return static_cast<int>(prices.size()); }
};

// Search box for the global stage, one [lower, upper] per dimension in the
// packing order below.
struct ParamBox {
    std::vector<double> lower, upper;

    void validate() const;
    [[nodiscard]] bool contains(std::span<const double> x) const;
};

// Parameter vector layout: [d, b0, b1, b2, k?, alpha_0..alpha_{n-1}];
// k is omitted (pinned to 1) when pin_k is set.
struct ParamPacking {
    int n_clusters = 0;
    bool pin_k = false;

    [[nodiscard]] int dims() const { return 4 + (pin_k ? 0 : 1) + n_clusters; }
    [[nodiscard]] PdeParams unpack(std::span<const double> v) const;
    [[nodiscard]] std::vector<double> pack(const PdeParams& p) const;
    [[nodiscard]] ParamBox default_box() const;
};

inline constexpr double kDivergencePenalty = 1e30;

// Forward-model mismatch: solve from phi = spline of the first observed day,
// then
//   sum_{j>=2} sum_i (m_model(x_i, t_j) - m_obs(x_i, t_j))^2
//   + lambda_price * sum_{j>=1} (price_model(t_j) - price_obs(t_j))^2 / price_obs(t_j)^2.
// Divergent or invalid parameter vectors cost kDivergencePenalty; the
// function is total over finite inputs.
double loss(const PdeParams& p, const FitWindow& window, double lambda_price, double dx,
            double dt_max);

struct LossParts {
    double m_term = 0.0;
    double price_term = 0.0;  // includes the lambda_price weight
    bool divergent = false;
};
LossParts loss_parts(const PdeParams& p, const FitWindow& window, double lambda_price,
                     double dx, double dt_max);

using Objective = std::function<double(std::span<const double>)>;

struct SearchCandidate {
    std::vector<double> x;
    double value = 0.0;
};

struct SearchResult {
    std::vector<double> x;
    double value = 0.0;
    int evaluations = 0;
    // Best dims+1 samples by (value, sample index); seeds the refinement
    // simplex downstream.
    std::vector<SearchCandidate> top;
};

// Deterministic centered Latin-hypercube multistart: `budget` samples with
// seeded per-dimension stratum permutations; returns the first best sample.
// Evaluations may run in parallel; the reduction is by sample index.
SearchResult global_search(const Objective& objective, const ParamBox& box, int budget,
                           std::uint64_t seed, int workers = 1);

// Nelder-Mead simplex with the standard coefficients (reflection 1,
// expansion 2, contraction 0.5, shrink 0.5). Stops when the function-value
// spread falls below tol or after max_iter iterations; returns best seen.
struct NelderMeadResult {
    std::vector<double> x;
    double value = 0.0;
    int iterations = 0;
    int evaluations = 0;
};
NelderMeadResult nelder_mead(const Objective& objective, std::span<const double> start,
                             std::span<const double> scale, double tol, int max_iter);

// Same algorithm, explicitly supplied initial simplex (dims+1 vertices).
NelderMeadResult nelder_mead_simplex(const Objective& objective,
                                     std::vector<std::vector<double>> vertices, double tol,
                                     int max_iter);

struct FitConfig {
    double dx = 0.1;
    double dt_max = 0.05;
    double lambda_price = 1.0;
    int budget = 256;
    std::uint64_t seed = 0;
    bool pin_k = false;
    double nm_tol = 1e-10;
    int nm_max_iter = 5000;
    double nm_scale_frac = 0.1;  // initial simplex step as a fraction of box width
    int workers = 1;
    std::optional<ParamBox> box;
};

struct FitResult {
    PdeParams params;
    double achieved_loss = 0.0;
    double global_stage_loss = 0.0;
    int evaluations = 0;
    std::uint64_t seed = 0;
};

// Global stage then simplex refinement on the loss; bitwise deterministic
// for a fixed (window, config, seed).
FitResult fit_window(const FitWindow& window, const FitConfig& cfg);

}  // namespace chaincast

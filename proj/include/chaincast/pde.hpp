#pragma once

#include <span>
#include <string>
#include <vector>

#include "chaincast/clustering.hpp"
#include "chaincast/spline.hpp"

namespace chaincast {

// Model parameters: diffusion d, price scale b0, reaction rate r(t) = b1 +
// exp(-(t - b2)), heterogeneity coupling k, and the per-cluster alpha values
// (indexed by cluster id, placed on the line by the embedding).
struct PdeParams {
    double d = 0.0;
    double b0 = 1.0;
    double b1 = 0.0;
    double b2 = 0.0;
    double k_coupling = 1.0;
    std::vector<double> alpha;

    void validate() const;  // finite, d >= 0, b0 > 0
};

double reaction_rate(const PdeParams& p, double t);

struct Grid {
    double x0 = 0.0, x1 = 0.0, dx = 0.0;
    std::vector<double> x;  // both ends included

    [[nodiscard]] std::size_t points() const noexcept { return x.size(); }
};

// Uniform grid over [x0, x1]; (x1 - x0) / dx must be a whole number >= 1.
Grid make_grid(double x0, double x1, double dx);
Grid discretize(const ClusterEmbedding& embedding, double dx);

// Grid indices of the cluster positions; every position must land on a grid
// point (choose dx with 1/dx integral), else ParamError.
std::vector<std::size_t> sample_indices(const Grid& grid, std::span<const double> positions);

// Right-hand side of the method-of-lines system at time t (mirror-ghost
// Neumann ends). Exposed for tests; the integrator uses the same kernel.
std::vector<double> rhs(std::span<const double> state, double t, const PdeParams& p,
                        const CubicSpline& alpha, const Grid& grid);

struct GridSolution {
    Grid grid;
    std::vector<double> times;                // integer days t_start..t_end
    std::vector<std::vector<double>> states;  // one state per saved day
};

// Classical RK4 with fixed step dt = min(dt_max, 0.25 dx^2 / max(d, eps)),
// sub-stepped so every integer day is hit exactly; state saved at each day.
// Throws DivergenceError (with the offending time) on NaN/Inf blow-up.
GridSolution solve(const CubicSpline& phi, double t_start, double t_end, const PdeParams& p,
                   const CubicSpline& alpha, const Grid& grid, double dt_max);

// Trapezoidal quadrature of b0 * m(x) + alpha(x) over the grid.
double price(std::span<const double> state, const Grid& grid, const PdeParams& p,
             const CubicSpline& alpha);

// Reusable integrator for the calibration hot path: alpha-dependent
// coefficient arrays are built once, then each day advances in place.
class PdeIntegrator {
public:
    PdeIntegrator(const Grid& grid, const PdeParams& p, const CubicSpline& alpha,
                  double dt_max);

    // Advances state from day t to day t+1; throws DivergenceError.
    void advance_day(std::vector<double>& state, double t);

    [[nodiscard]] int steps_per_day() const noexcept { return steps_per_day_; }
    [[nodiscard]] double price_of(std::span<const double> state) const;

private:
    const Grid& grid_;
    double b0_, b1_, b2_, k_;
    double dxx_;  // d / dx^2
    int steps_per_day_;
    double dt_;
    std::vector<double> ag_;   // alpha on the grid
    std::vector<double> gb_;   // alpha^2 / b0
    std::vector<double> dd_;   // (d / b0) * alpha''
    std::vector<double> k1_, k2_, k3_, k4_, tmp_;
    mutable std::vector<double> price_buf_;
};

// CSV export `t,x,m` at save points.
std::string solution_to_csv(const GridSolution& solution);

}  // namespace chaincast

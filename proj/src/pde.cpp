#include "chaincast/pde.hpp"

#include <cmath>
#include <string>

#include "chaincast/csv.hpp"
#include "chaincast/errors.hpp"
#include "chaincast/kernels.hpp"

namespace chaincast {

namespace {
constexpr double kDiffusionEps = 1e-12;
constexpr double kBlowupLimit = 1e200;
constexpr int kMaxStepsPerDay = 10'000'000;
}  // namespace

void PdeParams::validate() const {
    auto finite = [](double v) { return std::isfinite(v); };
    if (!finite(d) || !finite(b0) || !finite(b1) || !finite(b2) || !finite(k_coupling))
        throw ParamError("PDE parameters must be finite");
    for (const double a : alpha)
        if (!finite(a)) throw ParamError("alpha values must be finite");
    if (d < 0.0) throw ParamError("diffusion coefficient must be >= 0");
    if (!(b0 > 0.0)) throw ParamError("price scale b0 must be > 0");
}

double reaction_rate(const PdeParams& p, double t) { return p.b1 + std::exp(-(t - p.b2)); }

Grid make_grid(double x0, double x1, double dx) {
    if (!(dx > 0.0)) throw ParamError("dx must be > 0");
    if (!(x1 > x0)) throw ParamError("grid needs x1 > x0");
    const double ratio = (x1 - x0) / dx;
    const double rounded = std::round(ratio);
    if (rounded < 1.0 || std::abs(ratio - rounded) > 1e-9 * std::max(1.0, ratio))
        throw ParamError("(x1 - x0) / dx must be a whole number of intervals");
    const int intervals = static_cast<int>(rounded);

    Grid g;
    g.x0 = x0;
    g.x1 = x1;
    g.dx = dx;
    g.x.resize(static_cast<std::size_t>(intervals) + 1);
    for (int i = 0; i <= intervals; ++i) g.x[static_cast<std::size_t>(i)] = x0 + i * dx;
    g.x.back() = x1;
    return g;
}

Grid discretize(const ClusterEmbedding& embedding, double dx) {
    embedding.validate();
    if (embedding.order.size() < 2)
        throw ParamError("embedding needs at least 2 clusters to span a domain");
    return make_grid(embedding.L1(), embedding.L2(), dx);
}

std::vector<std::size_t> sample_indices(const Grid& grid, std::span<const double> positions) {
    std::vector<std::size_t> idx;
    idx.reserve(positions.size());
    for (const double x : positions) {
        const double offset = (x - grid.x0) / grid.dx;
        const double rounded = std::round(offset);
        if (rounded < 0.0 || rounded > static_cast<double>(grid.points() - 1) ||
            std::abs(offset - rounded) > 1e-9)
            throw ParamError("cluster position " + std::to_string(x) +
                             " is not a grid point; pick dx so 1/dx is an integer");
        idx.push_back(static_cast<std::size_t>(rounded));
    }
    return idx;
}

namespace {

void check_finite(std::span<const double> state, double t) {
    const double total = kernels::sum(state.data(), state.size());
    if (!(std::abs(total) < kBlowupLimit)) throw DivergenceError(t);
}

}  // namespace

std::vector<double> rhs(std::span<const double> state, double t, const PdeParams& p,
                        const CubicSpline& alpha, const Grid& grid) {
    p.validate();
    if (state.size() != grid.points()) throw ParamError("state length does not match grid");
    check_finite(state, t);

    const std::size_t n = grid.points();
    std::vector<double> ag(n), gb(n), dd(n), out(n);
    const double inv_b0 = 1.0 / p.b0;
    const double d_over_b0 = p.d * inv_b0;
    for (std::size_t i = 0; i < n; ++i) {
        ag[i] = alpha.eval(grid.x[i]);
        gb[i] = ag[i] * ag[i] * inv_b0;
        dd[i] = d_over_b0 * alpha.eval_d2(grid.x[i]);
    }
    const double dxx = p.d / (grid.dx * grid.dx);
    const double kr = p.k_coupling * reaction_rate(p, t);
    kernels::reaction_diffusion_rhs(state.data(), ag.data(), gb.data(), dd.data(), dxx, kr,
                                    out.data(), n);
    return out;
}

PdeIntegrator::PdeIntegrator(const Grid& grid, const PdeParams& p, const CubicSpline& alpha,
                             double dt_max)
    : grid_(grid), b0_(p.b0), b1_(p.b1), b2_(p.b2), k_(p.k_coupling) {
    p.validate();
    if (!(dt_max > 0.0)) throw ParamError("dt_max must be > 0");

    const std::size_t n = grid.points();
    ag_.resize(n);
    gb_.resize(n);
    dd_.resize(n);
    const double inv_b0 = 1.0 / p.b0;
    const double d_over_b0 = p.d * inv_b0;
    for (std::size_t i = 0; i < n; ++i) {
        ag_[i] = alpha.eval(grid.x[i]);
        gb_[i] = ag_[i] * ag_[i] * inv_b0;
        dd_[i] = d_over_b0 * alpha.eval_d2(grid.x[i]);
    }
    dxx_ = p.d / (grid.dx * grid.dx);

    const double stability = 0.25 * grid.dx * grid.dx / std::max(p.d, kDiffusionEps);
    const double dt_raw = std::min(dt_max, stability);
    const double steps = std::ceil(1.0 / dt_raw - 1e-12);
    if (!(steps >= 1.0) || steps > kMaxStepsPerDay)
        throw ParamError("time step infeasible: " + std::to_string(dt_raw) + " per day");
    steps_per_day_ = static_cast<int>(steps);
    dt_ = 1.0 / static_cast<double>(steps_per_day_);

    k1_.resize(n);
    k2_.resize(n);
    k3_.resize(n);
    k4_.resize(n);
    tmp_.resize(n);
    price_buf_.resize(n);
}

void PdeIntegrator::advance_day(std::vector<double>& state, double t) {
    const std::size_t n = state.size();
    const double half = 0.5 * dt_;
    for (int s = 0; s < steps_per_day_; ++s) {
        const double ts = t + s * dt_;
        auto eval = [&](const double* m, double tt, double* out) {
            const double kr = k_ * (b1_ + std::exp(-(tt - b2_)));
            kernels::reaction_diffusion_rhs(m, ag_.data(), gb_.data(), dd_.data(), dxx_, kr, out,
                                            n);
        };
        eval(state.data(), ts, k1_.data());
        kernels::rk4_stage(state.data(), k1_.data(), half, tmp_.data(), n);
        eval(tmp_.data(), ts + half, k2_.data());
        kernels::rk4_stage(state.data(), k2_.data(), half, tmp_.data(), n);
        eval(tmp_.data(), ts + half, k3_.data());
        kernels::rk4_stage(state.data(), k3_.data(), dt_, tmp_.data(), n);
        eval(tmp_.data(), ts + dt_, k4_.data());
        kernels::rk4_update(state.data(), k1_.data(), k2_.data(), k3_.data(), k4_.data(),
                            dt_ / 6.0, n);

        const double probe = kernels::sum(state.data(), n);
        if (!(std::abs(probe) < kBlowupLimit)) throw DivergenceError(ts + dt_);
    }
}

double PdeIntegrator::price_of(std::span<const double> state) const {
    for (std::size_t i = 0; i < state.size(); ++i) price_buf_[i] = b0_ * state[i] + ag_[i];
    return kernels::trapezoid(price_buf_.data(), state.size(), grid_.dx);
}

GridSolution solve(const CubicSpline& phi, double t_start, double t_end, const PdeParams& p,
                   const CubicSpline& alpha, const Grid& grid, double dt_max) {
    if (!(t_end > t_start)) throw ParamError("t_end must be after t_start");
    const double span = t_end - t_start;
    const double days = std::round(span);
    if (std::abs(span - days) > 1e-9) throw ParamError("time span must be whole days");

    PdeIntegrator integ(grid, p, alpha, dt_max);

    GridSolution sol;
    sol.grid = grid;
    std::vector<double> state(grid.points());
    for (std::size_t i = 0; i < grid.points(); ++i) state[i] = phi.eval(grid.x[i]);
    check_finite(state, t_start);
    sol.times.push_back(t_start);
    sol.states.push_back(state);

    for (int day = 0; day < static_cast<int>(days); ++day) {
        integ.advance_day(state, t_start + day);
        sol.times.push_back(t_start + day + 1);
        sol.states.push_back(state);
    }
    return sol;
}

double price(std::span<const double> state, const Grid& grid, const PdeParams& p,
             const CubicSpline& alpha) {
    p.validate();
    if (state.size() != grid.points()) throw ParamError("state length does not match grid");
    std::vector<double> u(state.size());
    for (std::size_t i = 0; i < state.size(); ++i)
        u[i] = p.b0 * state[i] + alpha.eval(grid.x[i]);
    return kernels::trapezoid(u.data(), u.size(), grid.dx);
}

std::string solution_to_csv(const GridSolution& solution) {
    std::string text = "t,x,m\n";
    for (std::size_t s = 0; s < solution.times.size(); ++s) {
        const std::string t = csv::format_double(solution.times[s]);
        for (std::size_t i = 0; i < solution.grid.points(); ++i) {
            text += t;
            text += ',' + csv::format_double(solution.grid.x[i]);
            text += ',' + csv::format_double(solution.states[s][i]);
            text += '\n';
        }
    }
    return text;
}

}  // namespace chaincast

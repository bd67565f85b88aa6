#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace chaincast {

// Clamped cubic spline: C^2 piecewise cubic through (x_i, y_i) with zero
// first derivative at both ends. Used for the heterogeneity profile and the
// initial condition, whose zero end slopes match the Neumann boundaries.
// Evaluation outside [x_front, x_back] is a hard error; the PDE grid never
// leaves the domain, so extrapolation requests indicate a bug upstream.
class CubicSpline {
public:
    CubicSpline() = default;

    // Throws ParamError unless knots are strictly increasing and n >= 2.
    static CubicSpline fit_clamped(std::span<const double> knots, std::span<const double> values);

    [[nodiscard]] double eval(double x) const;
    [[nodiscard]] double eval_d1(double x) const;
    [[nodiscard]] double eval_d2(double x) const;

    [[nodiscard]] const std::vector<double>& knots() const noexcept { return x_; }
    [[nodiscard]] const std::vector<double>& values() const noexcept { return y_; }
    [[nodiscard]] std::size_t size() const noexcept { return x_.size(); }

private:
    // Interval i covers [x_i, x_{i+1}] with s = y_i + t*(b + t*(c + t*d)).
    std::vector<double> x_, y_, b_, c_, d_;

    [[nodiscard]] std::size_t interval(double x) const;
};

}  // namespace chaincast

#include "chaincast/spline.hpp"

#include <algorithm>
#include <cmath>

#include "chaincast/errors.hpp"

namespace chaincast {

CubicSpline CubicSpline::fit_clamped(std::span<const double> knots,
                                     std::span<const double> values) {
    const std::size_t n = knots.size();
    if (n < 2) throw ParamError("spline needs at least 2 knots");
    if (values.size() != n) throw ParamError("spline knot/value count mismatch");
    for (std::size_t i = 0; i + 1 < n; ++i)
        if (!(knots[i] < knots[i + 1]))
            throw ParamError("spline knots must be strictly increasing");

    std::vector<double> h(n - 1), slope(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        h[i] = knots[i + 1] - knots[i];
        slope[i] = (values[i + 1] - values[i]) / h[i];
    }

    // Tridiagonal system for the second derivatives M_i, clamped rows at
    // both ends (prescribed end slopes are zero).
    std::vector<double> diag(n), upper(n), lower(n), rhs(n);
    diag[0] = 2.0 * h[0];
    upper[0] = h[0];
    rhs[0] = 6.0 * slope[0];
    for (std::size_t i = 1; i + 1 < n; ++i) {
        lower[i] = h[i - 1];
        diag[i] = 2.0 * (h[i - 1] + h[i]);
        upper[i] = h[i];
        rhs[i] = 6.0 * (slope[i] - slope[i - 1]);
    }
    lower[n - 1] = h[n - 2];
    diag[n - 1] = 2.0 * h[n - 2];
    rhs[n - 1] = -6.0 * slope[n - 2];

    // Thomas sweep.
    for (std::size_t i = 1; i < n; ++i) {
        const double w = lower[i] / diag[i - 1];
        diag[i] -= w * upper[i - 1];
        rhs[i] -= w * rhs[i - 1];
    }
    std::vector<double> m2(n);
    m2[n - 1] = rhs[n - 1] / diag[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) m2[i] = (rhs[i] - upper[i] * m2[i + 1]) / diag[i];

    CubicSpline s;
    s.x_.assign(knots.begin(), knots.end());
    s.y_.assign(values.begin(), values.end());
    s.b_.resize(n - 1);
    s.c_.resize(n - 1);
    s.d_.resize(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        s.b_[i] = slope[i] - h[i] * (2.0 * m2[i] + m2[i + 1]) / 6.0;
        s.c_[i] = m2[i] / 2.0;
        s.d_[i] = (m2[i + 1] - m2[i]) / (6.0 * h[i]);
    }
    return s;
}

std::size_t CubicSpline::interval(double x) const {
    const double lo = x_.front(), hi = x_.back();
    const double snap = 1e-12 * std::max(1.0, std::abs(hi - lo));
    if (x < lo - snap || x > hi + snap)
        throw InternalError("spline evaluation outside domain: x = " + std::to_string(x));
    auto it = std::upper_bound(x_.begin(), x_.end(), x);
    std::size_t idx = static_cast<std::size_t>(it - x_.begin());
    if (idx == 0) return 0;
    if (idx >= x_.size()) return x_.size() - 2;
    return idx - 1;
}

double CubicSpline::eval(double x) const {
    const std::size_t i = interval(x);
    const double t = x - x_[i];
    return y_[i] + t * (b_[i] + t * (c_[i] + t * d_[i]));
}

double CubicSpline::eval_d1(double x) const {
    const std::size_t i = interval(x);
    const double t = x - x_[i];
    return b_[i] + t * (2.0 * c_[i] + t * (3.0 * d_[i]));
}

double CubicSpline::eval_d2(double x) const {
    const std::size_t i = interval(x);
    const double t = x - x_[i];
    return 2.0 * c_[i] + t * (6.0 * d_[i]);
}

}  // namespace chaincast

#include "chaincast/kernels.hpp"

// Scalar reference kernels. The 4-lane accumulator pattern in the reductions
// is part of the contract, not an optimization: the AVX2 variants reproduce
// it lane for lane, so both backends round identically.

namespace chaincast::kernels {
namespace {

void rk4_stage_scalar(const double* x, const double* k, double c, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] = x[i] + c * k[i];
}

void rk4_update_scalar(double* m, const double* k1, const double* k2, const double* k3,
                       const double* k4, double c, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i)
        m[i] = m[i] + c * ((k1[i] + k4[i]) + 2.0 * (k2[i] + k3[i]));
}

void rhs_scalar(const double* m, const double* ag, const double* gb, const double* dd,
                double dxx, double kr, double* out, std::size_t n) {
    out[0] = dxx * ((m[1] + m[1]) - 2.0 * m[0]) + (kr * (ag[0] * m[0] + gb[0]) + dd[0]);
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const double diff = (m[i - 1] + m[i + 1]) - 2.0 * m[i];
        out[i] = dxx * diff + (kr * (ag[i] * m[i] + gb[i]) + dd[i]);
    }
    const std::size_t e = n - 1;
    out[e] = dxx * ((m[e - 1] + m[e - 1]) - 2.0 * m[e]) + (kr * (ag[e] * m[e] + gb[e]) + dd[e]);
}

double sum_scalar(const double* x, std::size_t n) {
    double acc[4] = {0.0, 0.0, 0.0, 0.0};
    const std::size_t n4 = n & ~std::size_t(3);
    for (std::size_t i = 0; i < n4; i += 4) {
        acc[0] += x[i];
        acc[1] += x[i + 1];
        acc[2] += x[i + 2];
        acc[3] += x[i + 3];
    }
    for (std::size_t i = n4; i < n; ++i) acc[i - n4] += x[i];
    return (acc[0] + acc[1]) + (acc[2] + acc[3]);
}

double dot_scalar(const double* x, const double* y, std::size_t n) {
    double acc[4] = {0.0, 0.0, 0.0, 0.0};
    const std::size_t n4 = n & ~std::size_t(3);
    for (std::size_t i = 0; i < n4; i += 4) {
        acc[0] += x[i] * y[i];
        acc[1] += x[i + 1] * y[i + 1];
        acc[2] += x[i + 2] * y[i + 2];
        acc[3] += x[i + 3] * y[i + 3];
    }
    for (std::size_t i = n4; i < n; ++i) acc[i - n4] += x[i] * y[i];
    return (acc[0] + acc[1]) + (acc[2] + acc[3]);
}

double sum_sq_diff_scalar(const double* a, const double* b, std::size_t n) {
    double acc[4] = {0.0, 0.0, 0.0, 0.0};
    const std::size_t n4 = n & ~std::size_t(3);
    for (std::size_t i = 0; i < n4; i += 4) {
        const double d0 = a[i] - b[i];
        const double d1 = a[i + 1] - b[i + 1];
        const double d2 = a[i + 2] - b[i + 2];
        const double d3 = a[i + 3] - b[i + 3];
        acc[0] += d0 * d0;
        acc[1] += d1 * d1;
        acc[2] += d2 * d2;
        acc[3] += d3 * d3;
    }
    for (std::size_t i = n4; i < n; ++i) {
        const double d = a[i] - b[i];
        acc[i - n4] += d * d;
    }
    return (acc[0] + acc[1]) + (acc[2] + acc[3]);
}

Moments centered_moments_scalar(const double* a, const double* b, double ma, double mb,
                                std::size_t n) {
    double saa[4] = {0, 0, 0, 0}, sbb[4] = {0, 0, 0, 0}, sab[4] = {0, 0, 0, 0};
    const std::size_t n4 = n & ~std::size_t(3);
    for (std::size_t i = 0; i < n4; i += 4) {
        for (std::size_t l = 0; l < 4; ++l) {
            const double da = a[i + l] - ma;
            const double db = b[i + l] - mb;
            saa[l] += da * da;
            sbb[l] += db * db;
            sab[l] += da * db;
        }
    }
    for (std::size_t i = n4; i < n; ++i) {
        const double da = a[i] - ma;
        const double db = b[i] - mb;
        saa[i - n4] += da * da;
        sbb[i - n4] += db * db;
        sab[i - n4] += da * db;
    }
    Moments out;
    out.saa = (saa[0] + saa[1]) + (saa[2] + saa[3]);
    out.sbb = (sbb[0] + sbb[1]) + (sbb[2] + sbb[3]);
    out.sab = (sab[0] + sab[1]) + (sab[2] + sab[3]);
    return out;
}

// Mirrored-pair fold: lane l accumulates pair i = l mod 4 over i < n/2.
// Reversing y swaps the two addends of every pair, which FP addition
// tolerates bit-exactly.
double trapezoid_scalar(const double* y, std::size_t n, double dx) {
    double acc[4] = {0.0, 0.0, 0.0, 0.0};
    const std::size_t half = n / 2;
    const std::size_t h4 = half & ~std::size_t(3);
    for (std::size_t i = 0; i < h4; i += 4) {
        acc[0] += y[i] + y[n - 1 - i];
        acc[1] += y[i + 1] + y[n - 2 - i];
        acc[2] += y[i + 2] + y[n - 3 - i];
        acc[3] += y[i + 3] + y[n - 4 - i];
    }
    for (std::size_t i = h4; i < half; ++i) acc[i - h4] += y[i] + y[n - 1 - i];
    double s = (acc[0] + acc[1]) + (acc[2] + acc[3]);
    if (n & 1) s += y[half];
    return dx * (s - 0.5 * (y[0] + y[n - 1]));
}

}  // namespace

namespace detail {

const Vtable scalar_vtable = {
    rk4_stage_scalar, rk4_update_scalar, rhs_scalar,           sum_scalar,
    dot_scalar,       sum_sq_diff_scalar, centered_moments_scalar, trapezoid_scalar,
};

}  // namespace detail
}  // namespace chaincast::kernels

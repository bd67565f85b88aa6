#pragma once

#include <cstddef>
#include <string>

namespace chaincast::kernels {

// Data-parallel inner loops behind the PDE stepper, the quadrature, and the
// correlation pass. Every kernel has a scalar reference implementation and an
// AVX2 variant selected at runtime; both produce bit-identical results:
//
//  - element-wise kernels evaluate the same expression tree per element
//    (the project builds with -ffp-contract=off so neither side fuses);
//  - reductions accumulate into four fixed lanes (lane = index mod 4) and
//    combine as (l0 + l1) + (l2 + l3), which is exactly what one 4-wide
//    vector accumulator does;
//  - trapezoid() folds mirrored pairs y[i] + y[n-1-i] so that reversing the
//    input array reverses nothing in the rounding (FP addition commutes),
//    which the embedding-reflection invariant downstream relies on.
//
// The active backend is detected once (CHAINCAST_KERNELS=scalar|avx2
// overrides); force_backend() exists for the equivalence tests.

enum class Backend { Scalar, Avx2 };

Backend active_backend() noexcept;
bool backend_available(Backend b) noexcept;
void force_backend(Backend b);  // throws ParamError if unavailable
void reset_backend() noexcept;  // back to auto-detection
std::string backend_name(Backend b);

// y[i] = x[i] + c * k[i]
void rk4_stage(const double* x, const double* k, double c, double* y, std::size_t n);

// m[i] += c * ((k1[i] + k4[i]) + 2 * (k2[i] + k3[i]))   with c = dt / 6
void rk4_update(double* m, const double* k1, const double* k2, const double* k3,
                const double* k4, double c, std::size_t n);

// Method-of-lines right-hand side on a uniform grid with mirror-ghost
// Neumann ends:
//   out[i] = dxx * ((m[i-1] + m[i+1]) - 2 m[i]) + (kr * (ag[i] m[i] + gb[i]) + dd[i])
// where dxx = d / dx^2, kr = k * r(t), ag = alpha on the grid,
// gb = alpha^2 / b0, dd = (d / b0) * alpha''.  n >= 2.
void reaction_diffusion_rhs(const double* m, const double* ag, const double* gb,
                            const double* dd, double dxx, double kr, double* out,
                            std::size_t n);

double sum(const double* x, std::size_t n);
double dot(const double* x, const double* y, std::size_t n);
double sum_sq_diff(const double* a, const double* b, std::size_t n);

struct Moments {
    double saa = 0.0;  // sum (a - ma)^2
    double sbb = 0.0;  // sum (b - mb)^2
    double sab = 0.0;  // sum (a - ma)(b - mb)
};
Moments centered_moments(const double* a, const double* b, double ma, double mb,
                         std::size_t n);

// Trapezoid rule on a uniform grid: dx * (sum(y) - (y[0] + y[n-1]) / 2),
// summed over mirrored pairs as described above.  n >= 2.
double trapezoid(const double* y, std::size_t n, double dx);

namespace detail {

struct Vtable {
    void (*rk4_stage)(const double*, const double*, double, double*, std::size_t);
    void (*rk4_update)(double*, const double*, const double*, const double*, const double*,
                       double, std::size_t);
    void (*reaction_diffusion_rhs)(const double*, const double*, const double*, const double*,
                                   double, double, double*, std::size_t);
    double (*sum)(const double*, std::size_t);
    double (*dot)(const double*, const double*, std::size_t);
    double (*sum_sq_diff)(const double*, const double*, std::size_t);
    Moments (*centered_moments)(const double*, const double*, double, double, std::size_t);
    double (*trapezoid)(const double*, std::size_t, double);
};

extern const Vtable scalar_vtable;
const Vtable* avx2_vtable() noexcept;  // nullptr when AVX2 is unavailable

}  // namespace detail

}  // namespace chaincast::kernels

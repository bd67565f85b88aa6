// AVX2 kernel variants. Compiled with -mavx2 on x86 only; on other targets
// this TU is empty and dispatch falls back to the scalar reference.
//
// Bit-identity with the scalar kernels is a hard requirement (see
// kernels.hpp), so no FMA: every _mm256_mul_pd/_mm256_add_pd below mirrors
// one multiply/add in the scalar expression tree, and reduction lanes map to
// index mod 4 exactly as the scalar 4-accumulator loops do.

#include "chaincast/kernels.hpp"

#if defined(__AVX2__)

#include <immintrin.h>

namespace chaincast::kernels {
namespace {

inline double combine_lanes(__m256d acc) {
    alignas(32) double l[4];
    _mm256_store_pd(l, acc);
    return (l[0] + l[1]) + (l[2] + l[3]);
}

void rk4_stage_avx2(const double* x, const double* k, double c, double* y, std::size_t n) {
    const __m256d vc = _mm256_set1_pd(c);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d vx = _mm256_loadu_pd(x + i);
        const __m256d vk = _mm256_loadu_pd(k + i);
        _mm256_storeu_pd(y + i, _mm256_add_pd(vx, _mm256_mul_pd(vc, vk)));
    }
    for (; i < n; ++i) y[i] = x[i] + c * k[i];
}

void rk4_update_avx2(double* m, const double* k1, const double* k2, const double* k3,
                     const double* k4, double c, std::size_t n) {
    const __m256d vc = _mm256_set1_pd(c);
    const __m256d two = _mm256_set1_pd(2.0);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d v14 = _mm256_add_pd(_mm256_loadu_pd(k1 + i), _mm256_loadu_pd(k4 + i));
        const __m256d v23 = _mm256_add_pd(_mm256_loadu_pd(k2 + i), _mm256_loadu_pd(k3 + i));
        const __m256d t = _mm256_add_pd(v14, _mm256_mul_pd(two, v23));
        _mm256_storeu_pd(m + i, _mm256_add_pd(_mm256_loadu_pd(m + i), _mm256_mul_pd(vc, t)));
    }
    for (; i < n; ++i) m[i] = m[i] + c * ((k1[i] + k4[i]) + 2.0 * (k2[i] + k3[i]));
}

void rhs_avx2(const double* m, const double* ag, const double* gb, const double* dd,
              double dxx, double kr, double* out, std::size_t n) {
    out[0] = dxx * ((m[1] + m[1]) - 2.0 * m[0]) + (kr * (ag[0] * m[0] + gb[0]) + dd[0]);
    const __m256d vdxx = _mm256_set1_pd(dxx);
    const __m256d vkr = _mm256_set1_pd(kr);
    const __m256d two = _mm256_set1_pd(2.0);
    std::size_t i = 1;
    for (; i + 4 <= n - 1; i += 4) {
        const __m256d mm = _mm256_loadu_pd(m + i);
        const __m256d ml = _mm256_loadu_pd(m + i - 1);
        const __m256d mr = _mm256_loadu_pd(m + i + 1);
        const __m256d diff = _mm256_sub_pd(_mm256_add_pd(ml, mr), _mm256_mul_pd(two, mm));
        const __m256d react = _mm256_add_pd(
            _mm256_mul_pd(vkr, _mm256_add_pd(_mm256_mul_pd(_mm256_loadu_pd(ag + i), mm),
                                             _mm256_loadu_pd(gb + i))),
            _mm256_loadu_pd(dd + i));
        _mm256_storeu_pd(out + i, _mm256_add_pd(_mm256_mul_pd(vdxx, diff), react));
    }
    for (; i + 1 < n; ++i) {
        const double diff = (m[i - 1] + m[i + 1]) - 2.0 * m[i];
        out[i] = dxx * diff + (kr * (ag[i] * m[i] + gb[i]) + dd[i]);
    }
    const std::size_t e = n - 1;
    out[e] = dxx * ((m[e - 1] + m[e - 1]) - 2.0 * m[e]) + (kr * (ag[e] * m[e] + gb[e]) + dd[e]);
}

double sum_avx2(const double* x, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    const std::size_t n4 = n & ~std::size_t(3);
    for (std::size_t i = 0; i < n4; i += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(x + i));
    alignas(32) double l[4];
    _mm256_store_pd(l, acc);
    for (std::size_t i = n4; i < n; ++i) l[i - n4] += x[i];
    return (l[0] + l[1]) + (l[2] + l[3]);
}

double dot_avx2(const double* x, const double* y, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    const std::size_t n4 = n & ~std::size_t(3);
    for (std::size_t i = 0; i < n4; i += 4)
        acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
    alignas(32) double l[4];
    _mm256_store_pd(l, acc);
    for (std::size_t i = n4; i < n; ++i) l[i - n4] += x[i] * y[i];
    return (l[0] + l[1]) + (l[2] + l[3]);
}

double sum_sq_diff_avx2(const double* a, const double* b, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    const std::size_t n4 = n & ~std::size_t(3);
    for (std::size_t i = 0; i < n4; i += 4) {
        const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
        acc = _mm256_add_pd(acc, _mm256_mul_pd(d, d));
    }
    alignas(32) double l[4];
    _mm256_store_pd(l, acc);
    for (std::size_t i = n4; i < n; ++i) {
        const double d = a[i] - b[i];
        l[i - n4] += d * d;
    }
    return (l[0] + l[1]) + (l[2] + l[3]);
}

Moments centered_moments_avx2(const double* a, const double* b, double ma, double mb,
                              std::size_t n) {
    __m256d vsaa = _mm256_setzero_pd(), vsbb = _mm256_setzero_pd(), vsab = _mm256_setzero_pd();
    const __m256d vma = _mm256_set1_pd(ma);
    const __m256d vmb = _mm256_set1_pd(mb);
    const std::size_t n4 = n & ~std::size_t(3);
    for (std::size_t i = 0; i < n4; i += 4) {
        const __m256d da = _mm256_sub_pd(_mm256_loadu_pd(a + i), vma);
        const __m256d db = _mm256_sub_pd(_mm256_loadu_pd(b + i), vmb);
        vsaa = _mm256_add_pd(vsaa, _mm256_mul_pd(da, da));
        vsbb = _mm256_add_pd(vsbb, _mm256_mul_pd(db, db));
        vsab = _mm256_add_pd(vsab, _mm256_mul_pd(da, db));
    }
    alignas(32) double laa[4], lbb[4], lab[4];
    _mm256_store_pd(laa, vsaa);
    _mm256_store_pd(lbb, vsbb);
    _mm256_store_pd(lab, vsab);
    for (std::size_t i = n4; i < n; ++i) {
        const double da = a[i] - ma;
        const double db = b[i] - mb;
        laa[i - n4] += da * da;
        lbb[i - n4] += db * db;
        lab[i - n4] += da * db;
    }
    Moments out;
    out.saa = (laa[0] + laa[1]) + (laa[2] + laa[3]);
    out.sbb = (lbb[0] + lbb[1]) + (lbb[2] + lbb[3]);
    out.sab = (lab[0] + lab[1]) + (lab[2] + lab[3]);
    return out;
}

double trapezoid_avx2(const double* y, std::size_t n, double dx) {
    __m256d acc = _mm256_setzero_pd();
    const std::size_t half = n / 2;
    const std::size_t h4 = half & ~std::size_t(3);
    for (std::size_t i = 0; i < h4; i += 4) {
        const __m256d fwd = _mm256_loadu_pd(y + i);
        // Reverse so lane l holds y[n-1-(i+l)], mirroring the scalar pairs.
        const __m256d bwd =
            _mm256_permute4x64_pd(_mm256_loadu_pd(y + n - 4 - i), _MM_SHUFFLE(0, 1, 2, 3));
        acc = _mm256_add_pd(acc, _mm256_add_pd(fwd, bwd));
    }
    alignas(32) double l[4];
    _mm256_store_pd(l, acc);
    for (std::size_t i = h4; i < half; ++i) l[i - h4] += y[i] + y[n - 1 - i];
    double s = (l[0] + l[1]) + (l[2] + l[3]);
    if (n & 1) s += y[half];
    return dx * (s - 0.5 * (y[0] + y[n - 1]));
}

const detail::Vtable avx2_table = {
    rk4_stage_avx2, rk4_update_avx2,  rhs_avx2,              sum_avx2,
    dot_avx2,       sum_sq_diff_avx2, centered_moments_avx2, trapezoid_avx2,
};

}  // namespace

namespace detail {

const Vtable* avx2_vtable() noexcept { return &avx2_table; }

}  // namespace detail
}  // namespace chaincast::kernels

#else

namespace chaincast::kernels::detail {

const Vtable* avx2_vtable() noexcept { return nullptr; }

}  // namespace chaincast::kernels::detail

#endif  // __AVX2__

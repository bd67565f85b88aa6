#include <atomic>
#include <cstdlib>
#include <cstring>

#include "chaincast/errors.hpp"
#include "chaincast/kernels.hpp"

namespace chaincast::kernels {
namespace {

bool cpu_has_avx2() noexcept {
#if (defined(__x86_64__) || defined(__i386__)) && (defined(__GNUC__) || defined(__clang__))
    return __builtin_cpu_supports("avx2") && detail::avx2_vtable() != nullptr;
#else
    return false;
#endif
}

Backend detect() noexcept {
    if (const char* env = std::getenv("CHAINCAST_KERNELS")) {
        if (std::strcmp(env, "scalar") == 0) return Backend::Scalar;
        if (std::strcmp(env, "avx2") == 0 && cpu_has_avx2()) return Backend::Avx2;
    }
    return cpu_has_avx2() ? Backend::Avx2 : Backend::Scalar;
}

std::atomic<const detail::Vtable*> g_vtable{nullptr};
std::atomic<Backend> g_backend{Backend::Scalar};

const detail::Vtable* table() noexcept {
    const detail::Vtable* t = g_vtable.load(std::memory_order_acquire);
    if (t == nullptr) {
        const Backend b = detect();
        t = (b == Backend::Avx2) ? detail::avx2_vtable() : &detail::scalar_vtable;
        g_backend.store(b, std::memory_order_relaxed);
        g_vtable.store(t, std::memory_order_release);
    }
    return t;
}

}  // namespace

Backend active_backend() noexcept {
    table();
    return g_backend.load(std::memory_order_relaxed);
}

bool backend_available(Backend b) noexcept {
    return b == Backend::Scalar || cpu_has_avx2();
}

void force_backend(Backend b) {
    if (!backend_available(b)) throw ParamError("kernel backend unavailable: " + backend_name(b));
    g_backend.store(b, std::memory_order_relaxed);
    g_vtable.store(b == Backend::Avx2 ? detail::avx2_vtable() : &detail::scalar_vtable,
                   std::memory_order_release);
}

void reset_backend() noexcept { g_vtable.store(nullptr, std::memory_order_release); }

std::string backend_name(Backend b) { return b == Backend::Avx2 ? "avx2" : "scalar"; }

void rk4_stage(const double* x, const double* k, double c, double* y, std::size_t n) {
    table()->rk4_stage(x, k, c, y, n);
}

void rk4_update(double* m, const double* k1, const double* k2, const double* k3,
                const double* k4, double c, std::size_t n) {
    table()->rk4_update(m, k1, k2, k3, k4, c, n);
}

void reaction_diffusion_rhs(const double* m, const double* ag, const double* gb,
                            const double* dd, double dxx, double kr, double* out,
                            std::size_t n) {
    table()->reaction_diffusion_rhs(m, ag, gb, dd, dxx, kr, out, n);
}

double sum(const double* x, std::size_t n) { return table()->sum(x, n); }

double dot(const double* x, const double* y, std::size_t n) { return table()->dot(x, y, n); }

double sum_sq_diff(const double* a, const double* b, std::size_t n) {
    return table()->sum_sq_diff(a, b, n);
}

Moments centered_moments(const double* a, const double* b, double ma, double mb,
                         std::size_t n) {
    return table()->centered_moments(a, b, ma, mb, n);
}

double trapezoid(const double* y, std::size_t n, double dx) {
    return table()->trapezoid(y, n, dx);
}

}  // namespace chaincast::kernels

#include "cogbridge/kernels.hpp"

#include <cstdlib>
#include <cstring>
#include <stdexcept>

namespace cogbridge::kernels {

namespace scalar {

double dot(const double* x, const double* y, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += x[i] * y[i];
    return acc;
}

void axpy(double a, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void add(const double* a, const double* b, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = a[i] + b[i];
}

void mul(const double* a, const double* b, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = a[i] * b[i];
}

void scale(const double* a, double c, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = a[i] * c;
}

double sum(const double* x, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += x[i];
    return acc;
}

}  // namespace scalar

bool cpu_has_avx2() {
#if defined(__x86_64__) || defined(__i386__)
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

namespace {

Isa pick_initial_isa() {
    if (const char* env = std::getenv("COGBRIDGE_SIMD")) {
        if (std::strcmp(env, "scalar") == 0) return Isa::Scalar;
        if (std::strcmp(env, "avx2") == 0 && cpu_has_avx2()) return Isa::Avx2;
        return Isa::Scalar;
    }
    return cpu_has_avx2() ? Isa::Avx2 : Isa::Scalar;
}

Isa g_isa = pick_initial_isa();

}  // namespace

Isa active_isa() { return g_isa; }

void force_isa(Isa isa) {
    if (isa == Isa::Avx2 && !cpu_has_avx2())
        throw std::runtime_error("force_isa: AVX2 not supported on this CPU");
    g_isa = isa;
}

double dot(const double* x, const double* y, std::size_t n) {
    return g_isa == Isa::Avx2 ? avx2::dot(x, y, n) : scalar::dot(x, y, n);
}

void axpy(double a, const double* x, double* y, std::size_t n) {
    g_isa == Isa::Avx2 ? avx2::axpy(a, x, y, n) : scalar::axpy(a, x, y, n);
}

void add(const double* a, const double* b, double* out, std::size_t n) {
    g_isa == Isa::Avx2 ? avx2::add(a, b, out, n) : scalar::add(a, b, out, n);
}

void mul(const double* a, const double* b, double* out, std::size_t n) {
    g_isa == Isa::Avx2 ? avx2::mul(a, b, out, n) : scalar::mul(a, b, out, n);
}

void scale(const double* a, double c, double* out, std::size_t n) {
    g_isa == Isa::Avx2 ? avx2::scale(a, c, out, n) : scalar::scale(a, c, out, n);
}

double sum(const double* x, std::size_t n) {
    return g_isa == Isa::Avx2 ? avx2::sum(x, n) : scalar::sum(x, n);
}

}  // namespace cogbridge::kernels

#pragma once
// Dense double-precision kernels used by the tensor/graph layer.
//
// Every kernel has a scalar reference implementation and, on x86-64 with
// AVX2+FMA, a vectorized variant. Dispatch is resolved once at startup and
// can be forced with COGBRIDGE_SIMD=scalar|avx2 for equivalence testing.

#include <cstddef>

namespace cogbridge::kernels {

enum class Isa { Scalar, Avx2 };

// Active implementation (after env override, if any).
Isa active_isa();
// True if the CPU reports AVX2+FMA.
bool cpu_has_avx2();
// Force a specific ISA (throws if unsupported on this CPU). Test hook.
void force_isa(Isa isa);

// y = sum_i x[i] * y[i]
double dot(const double* x, const double* y, std::size_t n);
// y[i] += a * x[i]
void axpy(double a, const double* x, double* y, std::size_t n);
// out[i] = a[i] + b[i]
void add(const double* a, const double* b, double* out, std::size_t n);
// out[i] = a[i] * b[i]
void mul(const double* a, const double* b, double* out, std::size_t n);
// out[i] = a[i] * c
void scale(const double* a, double c, double* out, std::size_t n);
// sum_i x[i]
double sum(const double* x, std::size_t n);

namespace scalar {
double dot(const double* x, const double* y, std::size_t n);
void axpy(double a, const double* x, double* y, std::size_t n);
void add(const double* a, const double* b, double* out, std::size_t n);
void mul(const double* a, const double* b, double* out, std::size_t n);
void scale(const double* a, double c, double* out, std::size_t n);
double sum(const double* x, std::size_t n);
}  // namespace scalar

namespace avx2 {
double dot(const double* x, const double* y, std::size_t n);
void axpy(double a, const double* x, double* y, std::size_t n);
void add(const double* a, const double* b, double* out, std::size_t n);
void mul(const double* a, const double* b, double* out, std::size_t n);
void scale(const double* a, double c, double* out, std::size_t n);
double sum(const double* x, std::size_t n);
}  // namespace avx2

}  // namespace cogbridge::kernels

#pragma once

#include <cstddef>

namespace agglom::kernels {

// Dense reduction kernels behind runtime dispatch. The scalar variants are
// the reference semantics; the AVX2 variants must agree with them within
// floating-point reassociation noise and are equivalence-tested against them.
// Dispatch is resolved once, at first use, from CPUID (or from the
// AGGLOM_KERNELS environment variable / force_backend, for tests).
enum class Backend { Scalar, Avx2 };

Backend active_backend();
bool backend_supported(Backend b);
void force_backend(Backend b);  // throws Error(Input) if unsupported
const char* backend_name(Backend b);

// sum_i x[i]
double vsum(const double* x, std::size_t n);
// sum_i x[i] * y[i]
double vdot(const double* x, const double* y, std::size_t n);
// sum_i x[i] * w[i] * y[i]
double vdot3(const double* x, const double* w, const double* y, std::size_t n);
// y[i] += a * x[i]
void vaxpy(double a, const double* x, double* y, std::size_t n);

namespace detail {
double vsum_scalar(const double* x, std::size_t n);
double vdot_scalar(const double* x, const double* y, std::size_t n);
double vdot3_scalar(const double* x, const double* w, const double* y, std::size_t n);
void vaxpy_scalar(double a, const double* x, double* y, std::size_t n);
#ifdef AGGLOM_HAVE_AVX2
double vsum_avx2(const double* x, std::size_t n);
double vdot_avx2(const double* x, const double* y, std::size_t n);
double vdot3_avx2(const double* x, const double* w, const double* y, std::size_t n);
void vaxpy_avx2(double a, const double* x, double* y, std::size_t n);
#endif
}  // namespace detail

}  // namespace agglom::kernels

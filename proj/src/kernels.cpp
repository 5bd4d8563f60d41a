#include "agglom/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <cstring>
#include <string>

#include "agglom/error.hpp"

namespace agglom::kernels {

namespace {

struct Table {
  double (*sum)(const double*, std::size_t);
  double (*dot)(const double*, const double*, std::size_t);
  double (*dot3)(const double*, const double*, const double*, std::size_t);
  void (*axpy)(double, const double*, double*, std::size_t);
};

constexpr Table kScalar{detail::vsum_scalar, detail::vdot_scalar, detail::vdot3_scalar,
                        detail::vaxpy_scalar};
#ifdef AGGLOM_HAVE_AVX2
constexpr Table kAvx2{detail::vsum_avx2, detail::vdot_avx2, detail::vdot3_avx2,
                      detail::vaxpy_avx2};
#endif

bool cpu_has_avx2() {
#if defined(AGGLOM_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Backend pick_default() {
  if (const char* env = std::getenv("AGGLOM_KERNELS")) {
    if (std::strcmp(env, "scalar") == 0) return Backend::Scalar;
    if (std::strcmp(env, "avx2") == 0 && backend_supported(Backend::Avx2)) return Backend::Avx2;
    // anything else (including "auto") falls through to detection
  }
  return cpu_has_avx2() ? Backend::Avx2 : Backend::Scalar;
}

std::atomic<const Table*> g_table{nullptr};
std::atomic<Backend> g_backend{Backend::Scalar};

const Table& table() {
  const Table* t = g_table.load(std::memory_order_acquire);
  if (!t) {
    Backend b = pick_default();
#ifdef AGGLOM_HAVE_AVX2
    t = (b == Backend::Avx2) ? &kAvx2 : &kScalar;
#else
    t = &kScalar;
#endif
    g_backend.store(b, std::memory_order_relaxed);
    g_table.store(t, std::memory_order_release);
  }
  return *t;
}

}  // namespace

bool backend_supported(Backend b) {
  switch (b) {
    case Backend::Scalar:
      return true;
    case Backend::Avx2:
      return cpu_has_avx2();
  }
  return false;
}

Backend active_backend() {
  table();
  return g_backend.load(std::memory_order_relaxed);
}

void force_backend(Backend b) {
  if (!backend_supported(b))
    fail_input(std::string("kernel backend not supported on this CPU: ") + backend_name(b));
#ifdef AGGLOM_HAVE_AVX2
  g_table.store(b == Backend::Avx2 ? &kAvx2 : &kScalar, std::memory_order_release);
#else
  g_table.store(&kScalar, std::memory_order_release);
#endif
  g_backend.store(b, std::memory_order_relaxed);
}

const char* backend_name(Backend b) {
  switch (b) {
    case Backend::Scalar:
      return "scalar";
    case Backend::Avx2:
      return "avx2";
  }
  return "?";
}

double vsum(const double* x, std::size_t n) { return table().sum(x, n); }
double vdot(const double* x, const double* y, std::size_t n) { return table().dot(x, y, n); }
double vdot3(const double* x, const double* w, const double* y, std::size_t n) {
  return table().dot3(x, w, y, n);
}
void vaxpy(double a, const double* x, double* y, std::size_t n) { table().axpy(a, x, y, n); }

}  // namespace agglom::kernels

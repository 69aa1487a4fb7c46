#include "mekit/kernels.hpp"

#include <atomic>
#include <cstdlib>

namespace mekit::kernels {

namespace scalar {

double dot(const double* x, const double* y, std::size_t n) {
  double l0 = 0.0, l1 = 0.0, l2 = 0.0, l3 = 0.0;
  const std::size_t m = n - n % 4;
  for (std::size_t i = 0; i < m; i += 4) {
    l0 += x[i] * y[i];
    l1 += x[i + 1] * y[i + 1];
    l2 += x[i + 2] * y[i + 2];
    l3 += x[i + 3] * y[i + 3];
  }
  double s = (l0 + l2) + (l1 + l3);
  for (std::size_t i = m; i < n; ++i) s += x[i] * y[i];
  return s;
}

double sum(const double* x, std::size_t n) {
  double l0 = 0.0, l1 = 0.0, l2 = 0.0, l3 = 0.0;
  const std::size_t m = n - n % 4;
  for (std::size_t i = 0; i < m; i += 4) {
    l0 += x[i];
    l1 += x[i + 1];
    l2 += x[i + 2];
    l3 += x[i + 3];
  }
  double s = (l0 + l2) + (l1 + l3);
  for (std::size_t i = m; i < n; ++i) s += x[i];
  return s;
}

void axpy(double a, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void scale(double a, double* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) x[i] *= a;
}

void mul(const double* x, const double* y, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = x[i] * y[i];
}

}  // namespace scalar

namespace {

struct Vtable {
  double (*dot)(const double*, const double*, std::size_t);
  double (*sum)(const double*, std::size_t);
  void (*axpy)(double, const double*, double*, std::size_t);
  void (*scale)(double, double*, std::size_t);
  void (*mul)(const double*, const double*, double*, std::size_t);
};

constexpr Vtable kScalar{scalar::dot, scalar::sum, scalar::axpy, scalar::scale, scalar::mul};

#if defined(MEKIT_HAVE_AVX2)
constexpr Vtable kAvx2{avx2::dot, avx2::sum, avx2::axpy, avx2::scale, avx2::mul};
#endif

std::atomic<const Vtable*> g_active{nullptr};
std::atomic<Backend> g_backend{Backend::scalar};

bool apply_backend(Backend backend) {
  switch (backend) {
    case Backend::scalar:
      g_active.store(&kScalar, std::memory_order_release);
      g_backend.store(Backend::scalar, std::memory_order_release);
      return true;
    case Backend::avx2:
#if defined(MEKIT_HAVE_AVX2)
      if (avx2::supported()) {
        g_active.store(&kAvx2, std::memory_order_release);
        g_backend.store(Backend::avx2, std::memory_order_release);
        return true;
      }
#endif
      return false;
  }
  return false;
}

void auto_select() {
#if defined(MEKIT_HAVE_AVX2)
  if (apply_backend(Backend::avx2)) return;
#endif
  apply_backend(Backend::scalar);
}

const Vtable* active() {
  const Vtable* v = g_active.load(std::memory_order_acquire);
  if (v) return v;
  if (const char* env = std::getenv("ME_KIT_SIMD"); env && !select_backend(env)) {
    auto_select();
  } else if (!env) {
    auto_select();
  }
  return g_active.load(std::memory_order_acquire);
}

}  // namespace

Backend active_backend() {
  active();
  return g_backend.load(std::memory_order_acquire);
}

std::string_view backend_name(Backend backend) {
  switch (backend) {
    case Backend::scalar: return "scalar";
    case Backend::avx2: return "avx2";
  }
  return "unknown";
}

bool select_backend(std::string_view name) {
  if (name == "auto") {
    auto_select();
    return true;
  }
  if (name == "scalar") return apply_backend(Backend::scalar);
  if (name == "avx2") return apply_backend(Backend::avx2);
  return false;
}

double dot(const double* x, const double* y, std::size_t n) { return active()->dot(x, y, n); }
double sum(const double* x, std::size_t n) { return active()->sum(x, n); }
void axpy(double a, const double* x, double* y, std::size_t n) { active()->axpy(a, x, y, n); }
void scale(double a, double* x, std::size_t n) { active()->scale(a, x, n); }
void mul(const double* x, const double* y, double* out, std::size_t n) { active()->mul(x, y, out, n); }

void matvec(const double* a, std::size_t rows, std::size_t cols, const double* x, double* y) {
  for (std::size_t r = 0; r < rows; ++r) y[r] = dot(a + r * cols, x, cols);
}

}  // namespace mekit::kernels

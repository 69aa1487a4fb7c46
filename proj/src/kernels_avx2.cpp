// AVX2 backend. Mirrors the scalar lane-blocked accumulation exactly: vector
// lane j holds the scalar accumulator l<j>, the horizontal reduce is
// (l0+l2)+(l1+l3), tails fold sequentially. No fma, so every partial result
// rounds exactly like the scalar backend's.

#include "mekit/kernels.hpp"

#if defined(MEKIT_HAVE_AVX2)

#include <immintrin.h>

namespace mekit::kernels::avx2 {

bool supported() {
#if defined(__GNUC__)
  return __builtin_cpu_supports("avx2") != 0;
#else
  return false;
#endif
}

namespace {

inline double reduce_lanes(__m256d acc) {
  __m128d lo = _mm256_castpd256_pd128(acc);      // (l0, l1)
  __m128d hi = _mm256_extractf128_pd(acc, 1);    // (l2, l3)
  __m128d pair = _mm_add_pd(lo, hi);             // (l0+l2, l1+l3)
  return _mm_cvtsd_f64(pair) + _mm_cvtsd_f64(_mm_unpackhi_pd(pair, pair));
}

}  // namespace

double dot(const double* x, const double* y, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  const std::size_t m = n - n % 4;
  for (std::size_t i = 0; i < m; i += 4) {
    __m256d vx = _mm256_loadu_pd(x + i);
    __m256d vy = _mm256_loadu_pd(y + i);
    acc = _mm256_add_pd(acc, _mm256_mul_pd(vx, vy));
  }
  double s = reduce_lanes(acc);
  for (std::size_t i = m; i < n; ++i) s += x[i] * y[i];
  return s;
}

double sum(const double* x, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  const std::size_t m = n - n % 4;
  for (std::size_t i = 0; i < m; i += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(x + i));
  double s = reduce_lanes(acc);
  for (std::size_t i = m; i < n; ++i) s += x[i];
  return s;
}

void axpy(double a, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(a);
  const std::size_t m = n - n % 4;
  for (std::size_t i = 0; i < m; i += 4) {
    __m256d prod = _mm256_mul_pd(va, _mm256_loadu_pd(x + i));
    _mm256_storeu_pd(y + i, _mm256_add_pd(_mm256_loadu_pd(y + i), prod));
  }
  for (std::size_t i = m; i < n; ++i) y[i] += a * x[i];
}

void scale(double a, double* x, std::size_t n) {
  const __m256d va = _mm256_set1_pd(a);
  const std::size_t m = n - n % 4;
  for (std::size_t i = 0; i < m; i += 4)
    _mm256_storeu_pd(x + i, _mm256_mul_pd(_mm256_loadu_pd(x + i), va));
  for (std::size_t i = m; i < n; ++i) x[i] *= a;
}

void mul(const double* x, const double* y, double* out, std::size_t n) {
  const std::size_t m = n - n % 4;
  for (std::size_t i = 0; i < m; i += 4)
    _mm256_storeu_pd(out + i, _mm256_mul_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  for (std::size_t i = m; i < n; ++i) out[i] = x[i] * y[i];
}

}  // namespace mekit::kernels::avx2

#endif  // MEKIT_HAVE_AVX2

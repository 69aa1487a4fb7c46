#pragma once

#include <cstddef>
#include <string_view>

// Data-parallel primitives behind the numeric inner loops (trainer forward and
// backward passes, penalization, aggregation). Every backend must produce
// bit-identical results so decoded intervals and report files never depend on
// the machine the tool runs on:
//
//   - reductions accumulate into four independent lanes (index mod 4) over the
//     leading multiple-of-4 prefix, reduce lanes as (l0+l2)+(l1+l3), then fold
//     the tail in index order;
//   - elementwise ops round once per element (separate mul and add, no fma).
//
// The library is compiled with -ffp-contract=off so the scalar backend honors
// the same rounding. Backend selection happens once, at first use: AVX2 when
// the CPU supports it, overridable with ME_KIT_SIMD=scalar|avx2|auto or
// select_backend().
namespace mekit::kernels {

enum class Backend { scalar, avx2 };

Backend active_backend();
std::string_view backend_name(Backend backend);

// "scalar", "avx2" or "auto"; returns false (and keeps the current backend)
// when the request cannot be honored on this machine.
bool select_backend(std::string_view name);

double dot(const double* x, const double* y, std::size_t n);
double sum(const double* x, std::size_t n);
void axpy(double a, const double* x, double* y, std::size_t n);  // y += a*x
void scale(double a, double* x, std::size_t n);                  // x *= a
void mul(const double* x, const double* y, double* out, std::size_t n);

// y[r] = dot(a_row_r, x); `a` is row-major rows x cols
void matvec(const double* a, std::size_t rows, std::size_t cols, const double* x, double* y);

// Reference implementations; always available and the semantics every other
// backend is tested against.
namespace scalar {
double dot(const double* x, const double* y, std::size_t n);
double sum(const double* x, std::size_t n);
void axpy(double a, const double* x, double* y, std::size_t n);
void scale(double a, double* x, std::size_t n);
void mul(const double* x, const double* y, double* out, std::size_t n);
}  // namespace scalar

#if defined(MEKIT_HAVE_AVX2)
namespace avx2 {
bool supported();  // runtime CPUID check
double dot(const double* x, const double* y, std::size_t n);
double sum(const double* x, std::size_t n);
void axpy(double a, const double* x, double* y, std::size_t n);
void scale(double a, double* x, std::size_t n);
void mul(const double* x, const double* y, double* out, std::size_t n);
}  // namespace avx2
#endif

}  // namespace mekit::kernels

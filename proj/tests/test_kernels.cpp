#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "mekit/kernels.hpp"
#include "mekit/rng.hpp"

using namespace mekit;
namespace k = mekit::kernels;

namespace {

std::vector<double> random_vec(SplitMix64& rng, std::size_t n, double lo = -10.0,
                               double hi = 10.0) {
  std::vector<double> v(n);
  for (auto& x : v) x = rng.next_range(lo, hi);
  return v;
}

const std::size_t kLengths[] = {0, 1, 2, 3, 4, 5, 7, 8, 9, 15, 16, 17, 31, 33, 100, 1023};

}  // namespace

TEST_CASE("scalar reductions match a plain loop within fp slack") {
  SplitMix64 rng(11);
  auto x = random_vec(rng, 57);
  auto y = random_vec(rng, 57);
  double plain = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) plain += x[i] * y[i];
  CHECK(k::scalar::dot(x.data(), y.data(), x.size()) ==
        doctest::Approx(plain).epsilon(1e-12));
  double plain_sum = 0.0;
  for (double v : x) plain_sum += v;
  CHECK(k::scalar::sum(x.data(), x.size()) == doctest::Approx(plain_sum).epsilon(1e-12));
}

TEST_CASE("dot is exactly symmetric") {
  SplitMix64 rng(12);
  for (int it = 0; it < 50; ++it) {
    const std::size_t n = rng.next_below(200);
    auto x = random_vec(rng, n);
    auto y = random_vec(rng, n);
    CHECK(k::dot(x.data(), y.data(), n) == k::dot(y.data(), x.data(), n));
  }
}

TEST_CASE("axpy and scale basics") {
  std::vector<double> y{1.0, 2.0, 3.0, 4.0, 5.0};
  std::vector<double> x{1.0, 1.0, 1.0, 1.0, 1.0};
  k::axpy(2.0, x.data(), y.data(), y.size());
  CHECK(y == std::vector<double>{3.0, 4.0, 5.0, 6.0, 7.0});
  k::scale(0.5, y.data(), y.size());
  CHECK(y == std::vector<double>{1.5, 2.0, 2.5, 3.0, 3.5});
}

#if defined(MEKIT_HAVE_AVX2)
TEST_CASE("avx2 backend is bit-identical to scalar") {
  if (!k::avx2::supported()) return;
  SplitMix64 rng(13);
  for (std::size_t n : kLengths) {
    for (int rep = 0; rep < 8; ++rep) {
      auto x = random_vec(rng, n);
      auto y = random_vec(rng, n);
      CHECK(k::avx2::dot(x.data(), y.data(), n) == k::scalar::dot(x.data(), y.data(), n));
      CHECK(k::avx2::sum(x.data(), n) == k::scalar::sum(x.data(), n));

      const double a = rng.next_range(-3.0, 3.0);
      auto y1 = y, y2 = y;
      k::avx2::axpy(a, x.data(), y1.data(), n);
      k::scalar::axpy(a, x.data(), y2.data(), n);
      CHECK(y1 == y2);

      auto x1 = x, x2 = x;
      k::avx2::scale(a, x1.data(), n);
      k::scalar::scale(a, x2.data(), n);
      CHECK(x1 == x2);

      std::vector<double> o1(n), o2(n);
      k::avx2::mul(x.data(), y.data(), o1.data(), n);
      k::scalar::mul(x.data(), y.data(), o2.data(), n);
      CHECK(o1 == o2);
    }
  }
}
#endif

TEST_CASE("backend selection honors requests and falls back") {
  CHECK(k::select_backend("scalar"));
  CHECK(k::active_backend() == k::Backend::scalar);
  CHECK_FALSE(k::select_backend("bogus"));
  CHECK(k::select_backend("auto"));
#if defined(MEKIT_HAVE_AVX2)
  if (k::avx2::supported()) {
    CHECK(k::select_backend("avx2"));
    CHECK(k::active_backend() == k::Backend::avx2);
  }
#endif
  CHECK(k::select_backend("auto"));
}

TEST_CASE("matvec equals per-row dot") {
  SplitMix64 rng(14);
  const std::size_t rows = 7, cols = 13;
  auto a = random_vec(rng, rows * cols);
  auto x = random_vec(rng, cols);
  std::vector<double> y(rows);
  k::matvec(a.data(), rows, cols, x.data(), y.data());
  for (std::size_t r = 0; r < rows; ++r)
    CHECK(y[r] == k::dot(a.data() + r * cols, x.data(), cols));
}

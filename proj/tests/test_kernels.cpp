#include <doctest.h>

#include <array>
#include <random>
#include <vector>

#include "multiwave/kernels.hpp"

using namespace multiwave;

namespace {

std::vector<double> random_vec(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  std::vector<double> out(n);
  for (auto& x : out) x = d(rng);
  return out;
}

}  // namespace

TEST_CASE("hand convolution oracle") {
  // valid cross-correlation of [1,2,3,4] with [1,1] -> [3,5,7]
  const std::vector<double> x = {1.0, 2.0, 3.0, 4.0};
  const std::vector<double> w = {1.0, 1.0};
  std::vector<double> y(3);
  kernels::conv1d_serial(x.data(), w.data(), nullptr, y.data(), 4, 1, 1, 2);
  CHECK(y[0] == doctest::Approx(3.0));
  CHECK(y[1] == doctest::Approx(5.0));
  CHECK(y[2] == doctest::Approx(7.0));
}

TEST_CASE("matmul oracle") {
  const std::vector<double> a = {1.0, 2.0, 3.0, 4.0};  // [2,2]
  const std::vector<double> b = {5.0, 6.0, 7.0, 8.0};
  std::vector<double> c(4);
  kernels::matmul_serial(a.data(), b.data(), c.data(), 2, 2, 2);
  CHECK(c == std::vector<double>{19.0, 22.0, 43.0, 50.0});
}

TEST_CASE("serial and openmp matmul agree bit for bit") {
  const std::vector<std::array<std::size_t, 3>> shapes = {
      {3, 4, 5}, {17, 9, 13}, {64, 64, 64}};
  for (const auto& [m, k, n] : shapes) {
    const auto a = random_vec(m * k, 100 + m);
    const auto b = random_vec(k * n, 200 + n);
    std::vector<double> c1(m * n), c2(m * n);
    kernels::matmul_serial(a.data(), b.data(), c1.data(), m, k, n);
    kernels::matmul_omp(a.data(), b.data(), c2.data(), m, k, n);
    CHECK(c1 == c2);
  }
}

TEST_CASE("serial and openmp conv1d agree bit for bit") {
  const std::size_t t = 40, cin = 3, cout = 5, kw = 7;
  const auto x = random_vec(t * cin, 1);
  const auto w = random_vec(cout * cin * kw, 2);
  const auto bias = random_vec(cout, 3);
  const std::size_t out_t = t - kw + 1;
  std::vector<double> y1(out_t * cout), y2(out_t * cout);
  kernels::conv1d_serial(x.data(), w.data(), bias.data(), y1.data(), t, cin,
                         cout, kw);
  kernels::conv1d_omp(x.data(), w.data(), bias.data(), y2.data(), t, cin,
                      cout, kw);
  CHECK(y1 == y2);
}

TEST_CASE("serial and openmp dwt steps agree bit for bit") {
  const std::size_t n = 128;
  const auto x = random_vec(n, 9);
  const std::vector<double> lo = {0.70710678118654752,
                                  0.70710678118654752};
  const std::vector<double> hi = {0.70710678118654752,
                                  -0.70710678118654752};
  std::vector<double> a1(n / 2), d1(n / 2), a2(n / 2), d2(n / 2);
  kernels::dwt_step_serial(x.data(), n, lo.data(), hi.data(), 2, a1.data(),
                           d1.data());
  kernels::dwt_step_omp(x.data(), n, lo.data(), hi.data(), 2, a2.data(),
                        d2.data());
  CHECK(a1 == a2);
  CHECK(d1 == d2);
}

TEST_CASE("auto dispatch matches the serial reference") {
  const std::size_t m = 80, k = 80, n = 80;
  const auto a = random_vec(m * k, 4);
  const auto b = random_vec(k * n, 5);
  std::vector<double> c1(m * n), c2(m * n);
  kernels::matmul_serial(a.data(), b.data(), c1.data(), m, k, n);
  kernels::matmul_auto(a.data(), b.data(), c2.data(), m, k, n);
  CHECK(c1 == c2);
}

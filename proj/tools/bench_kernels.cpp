// Compares the serial reference kernels with their OpenMP variants and
// verifies that both produce identical output.
#include <chrono>
#include <cstdio>
#include <random>
#include <vector>

#include "multiwave/kernels.hpp"

using namespace multiwave;
using clock_type = std::chrono::steady_clock;

namespace {

std::vector<double> random_vec(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  std::vector<double> out(n);
  for (auto& x : out) x = d(rng);
  return out;
}

template <typename F>
double time_ms(F&& f, int reps) {
  const auto t0 = clock_type::now();
  for (int i = 0; i < reps; ++i) f();
  const auto t1 = clock_type::now();
  return std::chrono::duration<double, std::milli>(t1 - t0).count() / reps;
}

bool identical(const std::vector<double>& a, const std::vector<double>& b) {
  return a == b;
}

}  // namespace

int main() {
  std::printf("%-28s %12s %12s %10s %8s\n", "kernel", "serial_ms", "omp_ms",
              "speedup", "match");

  {
    const std::size_t m = 256, k = 256, n = 256;
    const auto a = random_vec(m * k, 1), b = random_vec(k * n, 2);
    std::vector<double> c1(m * n), c2(m * n);
    const double ts = time_ms(
        [&] { kernels::matmul_serial(a.data(), b.data(), c1.data(), m, k, n); },
        5);
    const double tp = time_ms(
        [&] { kernels::matmul_omp(a.data(), b.data(), c2.data(), m, k, n); },
        5);
    std::printf("%-28s %12.3f %12.3f %9.2fx %8s\n", "matmul 256x256x256", ts,
                tp, ts / tp, identical(c1, c2) ? "yes" : "NO");
  }
  {
    const std::size_t t = 4096, cin = 8, cout = 16, kw = 9;
    const auto x = random_vec(t * cin, 3);
    const auto w = random_vec(cout * cin * kw, 4);
    const auto bias = random_vec(cout, 5);
    const std::size_t out_t = t - kw + 1;
    std::vector<double> y1(out_t * cout), y2(out_t * cout);
    const double ts = time_ms(
        [&] {
          kernels::conv1d_serial(x.data(), w.data(), bias.data(), y1.data(),
                                 t, cin, cout, kw);
        },
        5);
    const double tp = time_ms(
        [&] {
          kernels::conv1d_omp(x.data(), w.data(), bias.data(), y2.data(), t,
                              cin, cout, kw);
        },
        5);
    std::printf("%-28s %12.3f %12.3f %9.2fx %8s\n", "conv1d 4096x8 -> 16", ts,
                tp, ts / tp, identical(y1, y2) ? "yes" : "NO");
  }
  {
    const std::size_t n = 1 << 20;
    const auto x = random_vec(n, 6);
    const std::vector<double> lo = {0.70710678118654752, 0.70710678118654752};
    const std::vector<double> hi = {0.70710678118654752, -0.70710678118654752};
    std::vector<double> a1(n / 2), d1(n / 2), a2(n / 2), d2(n / 2);
    const double ts = time_ms(
        [&] {
          kernels::dwt_step_serial(x.data(), n, lo.data(), hi.data(), 2,
                                   a1.data(), d1.data());
        },
        10);
    const double tp = time_ms(
        [&] {
          kernels::dwt_step_omp(x.data(), n, lo.data(), hi.data(), 2,
                                a2.data(), d2.data());
        },
        10);
    std::printf("%-28s %12.3f %12.3f %9.2fx %8s\n", "dwt_step 2^20", ts, tp,
                ts / tp,
                identical(a1, a2) && identical(d1, d2) ? "yes" : "NO");
  }
  return 0;
}

#include "multiwave/kernels.hpp"

namespace multiwave::kernels {

namespace {
// Below these sizes the fork/join cost exceeds the loop body.
constexpr std::size_t kMatmulParThreshold = 64 * 64;
constexpr std::size_t kConvParThreshold = 4096;
constexpr std::size_t kDwtParThreshold = 8192;

inline void matmul_row(const double* a, const double* b, double* c,
                       std::size_t i, std::size_t k, std::size_t n) {
  const double* ai = a + i * k;
  double* ci = c + i * n;
  for (std::size_t j = 0; j < n; ++j) ci[j] = 0.0;
  for (std::size_t p = 0; p < k; ++p) {
    const double aip = ai[p];
    const double* bp = b + p * n;
    for (std::size_t j = 0; j < n; ++j) ci[j] += aip * bp[j];
  }
}

inline void conv1d_at(const double* x, const double* w, const double* bias,
                      double* y, std::size_t ti, std::size_t cin,
                      std::size_t cout, std::size_t kw) {
  for (std::size_t co = 0; co < cout; ++co) {
    double acc = bias ? bias[co] : 0.0;
    const double* wc = w + co * cin * kw;
    for (std::size_t ci = 0; ci < cin; ++ci)
      for (std::size_t q = 0; q < kw; ++q)
        acc += x[(ti + q) * cin + ci] * wc[ci * kw + q];
    y[ti * cout + co] = acc;
  }
}

inline void dwt_at(const double* x, std::size_t n, const double* lo,
                   const double* hi, std::size_t flen, double* approx,
                   double* detail, std::size_t k) {
  double a = 0.0, d = 0.0;
  for (std::size_t t = 0; t < flen; ++t) {
    const double xv = x[(2 * k + t) % n];
    a += lo[t] * xv;
    d += hi[t] * xv;
  }
  approx[k] = a;
  detail[k] = d;
}
}  // namespace

void matmul_serial(const double* a, const double* b, double* c, std::size_t m,
                   std::size_t k, std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) matmul_row(a, b, c, i, k, n);
}

void matmul_omp(const double* a, const double* b, double* c, std::size_t m,
                std::size_t k, std::size_t n) {
#pragma omp parallel for schedule(static)
  for (long long i = 0; i < static_cast<long long>(m); ++i)
    matmul_row(a, b, c, static_cast<std::size_t>(i), k, n);
}

void matmul_auto(const double* a, const double* b, double* c, std::size_t m,
                 std::size_t k, std::size_t n) {
#ifdef _OPENMP
  if (m * n >= kMatmulParThreshold && m > 1) {
    matmul_omp(a, b, c, m, k, n);
    return;
  }
#endif
  matmul_serial(a, b, c, m, k, n);
}

void conv1d_serial(const double* x, const double* w, const double* bias,
                   double* y, std::size_t t, std::size_t cin, std::size_t cout,
                   std::size_t kw) {
  const std::size_t tout = t - kw + 1;
  for (std::size_t ti = 0; ti < tout; ++ti)
    conv1d_at(x, w, bias, y, ti, cin, cout, kw);
}

void conv1d_omp(const double* x, const double* w, const double* bias,
                double* y, std::size_t t, std::size_t cin, std::size_t cout,
                std::size_t kw) {
  const std::size_t tout = t - kw + 1;
#pragma omp parallel for schedule(static)
  for (long long ti = 0; ti < static_cast<long long>(tout); ++ti)
    conv1d_at(x, w, bias, y, static_cast<std::size_t>(ti), cin, cout, kw);
}

void conv1d_auto(const double* x, const double* w, const double* bias,
                 double* y, std::size_t t, std::size_t cin, std::size_t cout,
                 std::size_t kw) {
#ifdef _OPENMP
  if ((t - kw + 1) * cout * cin * kw >= kConvParThreshold) {
    conv1d_omp(x, w, bias, y, t, cin, cout, kw);
    return;
  }
#endif
  conv1d_serial(x, w, bias, y, t, cin, cout, kw);
}

void dwt_step_serial(const double* x, std::size_t n, const double* lo,
                     const double* hi, std::size_t flen, double* approx,
                     double* detail) {
  for (std::size_t k = 0; k < n / 2; ++k)
    dwt_at(x, n, lo, hi, flen, approx, detail, k);
}

void dwt_step_omp(const double* x, std::size_t n, const double* lo,
                  const double* hi, std::size_t flen, double* approx,
                  double* detail) {
#pragma omp parallel for schedule(static)
  for (long long k = 0; k < static_cast<long long>(n / 2); ++k)
    dwt_at(x, n, lo, hi, flen, approx, detail, static_cast<std::size_t>(k));
}

void dwt_step_auto(const double* x, std::size_t n, const double* lo,
                   const double* hi, std::size_t flen, double* approx,
                   double* detail) {
#ifdef _OPENMP
  if (n * flen >= kDwtParThreshold) {
    dwt_step_omp(x, n, lo, hi, flen, approx, detail);
    return;
  }
#endif
  dwt_step_serial(x, n, lo, hi, flen, approx, detail);
}

}  // namespace multiwave::kernels

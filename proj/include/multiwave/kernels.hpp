#pragma once

#include <cstddef>
#include <vector>

namespace multiwave::kernels {

// Dense inner loops used by the autodiff ops and the wavelet filter bank.
// Each kernel has a serial reference implementation and an OpenMP variant
// over independent output elements; both produce bit-identical results.
// The *_auto entry points pick the OpenMP path above a size threshold.

// C[m,n] = A[m,k] * B[k,n]
void matmul_serial(const double* a, const double* b, double* c,
                   std::size_t m, std::size_t k, std::size_t n);
void matmul_omp(const double* a, const double* b, double* c,
                std::size_t m, std::size_t k, std::size_t n);
void matmul_auto(const double* a, const double* b, double* c,
                 std::size_t m, std::size_t k, std::size_t n);

// Valid cross-correlation, stride 1.
// x: [T, cin], w: [cout, cin, kw], bias: [cout] (nullable), y: [T-kw+1, cout]
void conv1d_serial(const double* x, const double* w, const double* bias,
                   double* y, std::size_t t, std::size_t cin,
                   std::size_t cout, std::size_t kw);
void conv1d_omp(const double* x, const double* w, const double* bias,
                double* y, std::size_t t, std::size_t cin, std::size_t cout,
                std::size_t kw);
void conv1d_auto(const double* x, const double* w, const double* bias,
                 double* y, std::size_t t, std::size_t cin, std::size_t cout,
                 std::size_t kw);

// One analysis step of a periodized filter bank: convolve with the two
// decimation filters and downsample by 2. n must be even; outputs have n/2.
void dwt_step_serial(const double* x, std::size_t n, const double* lo,
                     const double* hi, std::size_t flen, double* approx,
                     double* detail);
void dwt_step_omp(const double* x, std::size_t n, const double* lo,
                  const double* hi, std::size_t flen, double* approx,
                  double* detail);
void dwt_step_auto(const double* x, std::size_t n, const double* lo,
                   const double* hi, std::size_t flen, double* approx,
                   double* detail);

}  // namespace multiwave::kernels

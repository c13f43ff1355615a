// Compiled with -mavx2 -mfma; only reached after the dispatcher has
// confirmed both features at runtime.
#include <immintrin.h>

#include "kernels_impl.hpp"

namespace eigenrec::kernels::avx2 {

namespace {

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

}  // namespace

double dot(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
  }
  for (; i + 4 <= n; i += 4) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
  }
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void gemv(const double* w, std::size_t rows, std::size_t cols, const double* x, const double* b,
          double* y) {
  if (cols < 4) {
    scalar::gemv(w, rows, cols, x, b, y);
    return;
  }
  for (std::size_t r = 0; r < rows; ++r) y[r] = (b ? b[r] : 0.0) + dot(w + r * cols, x, cols);
}

void gemv_t(const double* w, std::size_t rows, std::size_t cols, const double* dy, double* dx) {
  for (std::size_t c = 0; c < cols; ++c) dx[c] = 0.0;
  for (std::size_t r = 0; r < rows; ++r) axpy(dy[r], w + r * cols, dx, cols);
}

void ger(double* g, std::size_t rows, std::size_t cols, const double* dy, const double* x) {
  for (std::size_t r = 0; r < rows; ++r) axpy(dy[r], x, g + r * cols, cols);
}

double herm_quadratic(const double* a, const double* psi, std::size_t dim) {
  if (dim < 2) return scalar::herm_quadratic(a, psi, dim);
  double total = 0.0;
  for (std::size_t i = 0; i < dim; ++i) {
    const double* row = a + 2 * i * dim;
    // acc_pp lanes: [ar*pr, ai*pi, ...]; acc_px lanes: [ar*pi, ai*pr, ...]
    __m256d acc_pp = _mm256_setzero_pd();
    __m256d acc_px = _mm256_setzero_pd();
    std::size_t j = 0;
    for (; j + 2 <= dim; j += 2) {
      const __m256d va = _mm256_loadu_pd(row + 2 * j);
      const __m256d vp = _mm256_loadu_pd(psi + 2 * j);
      const __m256d vs = _mm256_permute_pd(vp, 0b0101);
      acc_pp = _mm256_fmadd_pd(va, vp, acc_pp);
      acc_px = _mm256_fmadd_pd(va, vs, acc_px);
    }
    alignas(32) double pp[4];
    _mm256_store_pd(pp, acc_pp);
    double re = (pp[0] + pp[2]) - (pp[1] + pp[3]);
    double im = hsum(acc_px);
    for (; j < dim; ++j) {
      const double ar = row[2 * j], ai = row[2 * j + 1];
      const double pr = psi[2 * j], pi = psi[2 * j + 1];
      re += ar * pr - ai * pi;
      im += ar * pi + ai * pr;
    }
    total += psi[2 * i] * re + psi[2 * i + 1] * im;
  }
  return total;
}

}  // namespace eigenrec::kernels::avx2

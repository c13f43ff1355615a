#pragma once

#include <complex>
#include <cstddef>
#include <span>

// Data-parallel inner loops. Every kernel has a scalar reference
// implementation; wider variants are picked once at startup from CPU
// features and can be forced with EIGENREC_SIMD=scalar|avx2.
//
// Matrices are dense row-major. Complex arrays are interleaved (re, im).

namespace eigenrec::kernels {

enum class Isa { scalar, avx2 };

struct KernelTable {
  Isa isa;
  const char* name;
  // sum_i a[i] * b[i]
  double (*dot)(const double* a, const double* b, std::size_t n);
  // y += alpha * x
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  // y = W x + b   (b may be null)
  void (*gemv)(const double* w, std::size_t rows, std::size_t cols, const double* x, const double* b,
               double* y);
  // dx = W^T dy   (overwrites dx)
  void (*gemv_t)(const double* w, std::size_t rows, std::size_t cols, const double* dy, double* dx);
  // G += dy x^T
  void (*ger)(double* g, std::size_t rows, std::size_t cols, const double* dy, const double* x);
  // Re(psi^H A psi) for a dim x dim complex A and complex psi.
  double (*herm_quadratic)(const double* a, const double* psi, std::size_t dim);
};

const KernelTable& scalar_table() noexcept;
/// Null when not compiled in or the CPU lacks AVX2+FMA.
const KernelTable* avx2_table() noexcept;

const KernelTable& active() noexcept;
/// Forces a variant; throws InvalidInput if it is unavailable.
void select(Isa isa);

inline double dot(std::span<const double> a, std::span<const double> b) {
  return active().dot(a.data(), b.data(), a.size());
}

inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  active().axpy(alpha, x.data(), y.data(), x.size());
}

inline double herm_quadratic(std::span<const std::complex<double>> a,
                             std::span<const std::complex<double>> psi) {
  return active().herm_quadratic(reinterpret_cast<const double*>(a.data()),
                                 reinterpret_cast<const double*>(psi.data()), psi.size());
}

}  // namespace eigenrec::kernels

#pragma once

#include <cstddef>

namespace eigenrec::kernels {

namespace scalar {
double dot(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
void gemv(const double* w, std::size_t rows, std::size_t cols, const double* x, const double* b,
          double* y);
void gemv_t(const double* w, std::size_t rows, std::size_t cols, const double* dy, double* dx);
void ger(double* g, std::size_t rows, std::size_t cols, const double* dy, const double* x);
double herm_quadratic(const double* a, const double* psi, std::size_t dim);
}  // namespace scalar

namespace avx2 {
double dot(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
void gemv(const double* w, std::size_t rows, std::size_t cols, const double* x, const double* b,
          double* y);
void gemv_t(const double* w, std::size_t rows, std::size_t cols, const double* dy, double* dx);
void ger(double* g, std::size_t rows, std::size_t cols, const double* dy, const double* x);
double herm_quadratic(const double* a, const double* psi, std::size_t dim);
}  // namespace avx2

}  // namespace eigenrec::kernels

#include "kernels_impl.hpp"

namespace eigenrec::kernels::scalar {

double dot(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void gemv(const double* w, std::size_t rows, std::size_t cols, const double* x, const double* b,
          double* y) {
  for (std::size_t r = 0; r < rows; ++r) {
    const double* row = w + r * cols;
    double s = b ? b[r] : 0.0;
    for (std::size_t c = 0; c < cols; ++c) s += row[c] * x[c];
    y[r] = s;
  }
}

void gemv_t(const double* w, std::size_t rows, std::size_t cols, const double* dy, double* dx) {
  for (std::size_t c = 0; c < cols; ++c) dx[c] = 0.0;
  for (std::size_t r = 0; r < rows; ++r) {
    const double* row = w + r * cols;
    const double g = dy[r];
    for (std::size_t c = 0; c < cols; ++c) dx[c] += g * row[c];
  }
}

void ger(double* g, std::size_t rows, std::size_t cols, const double* dy, const double* x) {
  for (std::size_t r = 0; r < rows; ++r) {
    double* row = g + r * cols;
    const double d = dy[r];
    for (std::size_t c = 0; c < cols; ++c) row[c] += d * x[c];
  }
}

double herm_quadratic(const double* a, const double* psi, std::size_t dim) {
  double total = 0.0;
  for (std::size_t i = 0; i < dim; ++i) {
    const double* row = a + 2 * i * dim;
    double re = 0.0, im = 0.0;
    for (std::size_t j = 0; j < dim; ++j) {
      const double ar = row[2 * j], ai = row[2 * j + 1];
      const double pr = psi[2 * j], pi = psi[2 * j + 1];
      re += ar * pr - ai * pi;
      im += ar * pi + ai * pr;
    }
    total += psi[2 * i] * re + psi[2 * i + 1] * im;
  }
  return total;
}

}  // namespace eigenrec::kernels::scalar

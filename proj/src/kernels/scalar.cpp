#include "qnlab/kernels.hpp"

namespace qnlab::kernels::scalar {

double dot(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

void symv(const double* m, const double* x, double* y, std::size_t n) {
  // Row i of a symmetric matrix equals column i.
  for (std::size_t i = 0; i < n; ++i) y[i] = dot(m + i * n, x, n);
}

void sym_rank2(double* m, const double* u, const double* v, double a, double b,
               double c, std::size_t n) {
  for (std::size_t j = 0; j < n; ++j) {
    const double p = a * v[j] + b * u[j];
    const double q = a * u[j] + c * v[j];
    double* col = m + j * n;
    for (std::size_t i = 0; i <= j; ++i) col[i] += u[i] * p + v[i] * q;
  }
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = j + 1; i < n; ++i) m[j * n + i] = m[i * n + j];
}

}  // namespace qnlab::kernels::scalar

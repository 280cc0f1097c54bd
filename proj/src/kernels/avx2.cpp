#include <immintrin.h>

#include "qnlab/kernels.hpp"

namespace qnlab::kernels::avx2 {

namespace {

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d sh = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, sh));
}

}  // namespace

double dot(const double* a, const double* b, std::size_t n) {
  __m256d s0 = _mm256_setzero_pd();
  __m256d s1 = _mm256_setzero_pd();
  __m256d s2 = _mm256_setzero_pd();
  __m256d s3 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 16 <= n; i += 16) {
    s0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), s0);
    s1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), s1);
    s2 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 8), _mm256_loadu_pd(b + i + 8), s2);
    s3 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 12), _mm256_loadu_pd(b + i + 12), s3);
  }
  for (; i + 4 <= n; i += 4)
    s0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), s0);
  double s = hsum(_mm256_add_pd(_mm256_add_pd(s0, s1), _mm256_add_pd(s2, s3)));
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

void symv(const double* m, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] = dot(m + i * n, x, n);
}

void sym_rank2(double* m, const double* u, const double* v, double a, double b,
               double c, std::size_t n) {
  for (std::size_t j = 0; j < n; ++j) {
    const double p = a * v[j] + b * u[j];
    const double q = a * u[j] + c * v[j];
    const __m256d vp = _mm256_set1_pd(p);
    const __m256d vq = _mm256_set1_pd(q);
    double* col = m + j * n;
    const std::size_t len = j + 1;
    std::size_t i = 0;
    for (; i + 4 <= len; i += 4) {
      __m256d acc = _mm256_loadu_pd(col + i);
      acc = _mm256_fmadd_pd(_mm256_loadu_pd(u + i), vp, acc);
      acc = _mm256_fmadd_pd(_mm256_loadu_pd(v + i), vq, acc);
      _mm256_storeu_pd(col + i, acc);
    }
    for (; i < len; ++i) col[i] += u[i] * p + v[i] * q;
  }
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = j + 1; i < n; ++i) m[j * n + i] = m[i * n + j];
}

}  // namespace qnlab::kernels::avx2

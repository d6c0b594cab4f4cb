// AVX2 kernels, 4 doubles per vector. Compiled with -mavx2 but never with
// FMA: a fused multiply-add would round differently from the scalar path.

#include <immintrin.h>

#include "pin/kernels.h"

namespace pin::kernels {
namespace {

inline void axpy_row(double alpha, const double *x, double *y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t j = 0;
  for (; j + 8 <= n; j += 8) {
    __m256d y0 = _mm256_loadu_pd(y + j);
    __m256d y1 = _mm256_loadu_pd(y + j + 4);
    y0 = _mm256_add_pd(y0, _mm256_mul_pd(va, _mm256_loadu_pd(x + j)));
    y1 = _mm256_add_pd(y1, _mm256_mul_pd(va, _mm256_loadu_pd(x + j + 4)));
    _mm256_storeu_pd(y + j, y0);
    _mm256_storeu_pd(y + j + 4, y1);
  }
  for (; j + 4 <= n; j += 4) {
    __m256d y0 = _mm256_loadu_pd(y + j);
    y0 = _mm256_add_pd(y0, _mm256_mul_pd(va, _mm256_loadu_pd(x + j)));
    _mm256_storeu_pd(y + j, y0);
  }
  for (; j < n; ++j) y[j] += alpha * x[j];
}

// Each output tile stays in registers across the whole k loop; products are
// still added in increasing p, so rounding matches the scalar kernel.
void gemm_acc(const double *a, const double *b, double *c, std::size_t m,
              std::size_t k, std::size_t n) {
  std::size_t i = 0;
  for (; i + 2 <= m; i += 2) {
    const double *a0 = a + i * k;
    const double *a1 = a0 + k;
    double *c0 = c + i * n;
    double *c1 = c0 + n;
    std::size_t j = 0;
    for (; j + 8 <= n; j += 8) {
      __m256d x0 = _mm256_loadu_pd(c0 + j), x1 = _mm256_loadu_pd(c0 + j + 4);
      __m256d y0 = _mm256_loadu_pd(c1 + j), y1 = _mm256_loadu_pd(c1 + j + 4);
      for (std::size_t p = 0; p < k; ++p) {
        const __m256d b0 = _mm256_loadu_pd(b + p * n + j);
        const __m256d b1 = _mm256_loadu_pd(b + p * n + j + 4);
        const __m256d s0 = _mm256_set1_pd(a0[p]);
        const __m256d s1 = _mm256_set1_pd(a1[p]);
        x0 = _mm256_add_pd(x0, _mm256_mul_pd(s0, b0));
        x1 = _mm256_add_pd(x1, _mm256_mul_pd(s0, b1));
        y0 = _mm256_add_pd(y0, _mm256_mul_pd(s1, b0));
        y1 = _mm256_add_pd(y1, _mm256_mul_pd(s1, b1));
      }
      _mm256_storeu_pd(c0 + j, x0);
      _mm256_storeu_pd(c0 + j + 4, x1);
      _mm256_storeu_pd(c1 + j, y0);
      _mm256_storeu_pd(c1 + j + 4, y1);
    }
    for (; j + 4 <= n; j += 4) {
      __m256d x0 = _mm256_loadu_pd(c0 + j);
      __m256d y0 = _mm256_loadu_pd(c1 + j);
      for (std::size_t p = 0; p < k; ++p) {
        const __m256d b0 = _mm256_loadu_pd(b + p * n + j);
        x0 = _mm256_add_pd(x0, _mm256_mul_pd(_mm256_set1_pd(a0[p]), b0));
        y0 = _mm256_add_pd(y0, _mm256_mul_pd(_mm256_set1_pd(a1[p]), b0));
      }
      _mm256_storeu_pd(c0 + j, x0);
      _mm256_storeu_pd(c1 + j, y0);
    }
    for (; j < n; ++j) {
      double x = c0[j], y = c1[j];
      for (std::size_t p = 0; p < k; ++p) {
        x += a0[p] * b[p * n + j];
        y += a1[p] * b[p * n + j];
      }
      c0[j] = x;
      c1[j] = y;
    }
  }
  for (; i < m; ++i) {
    double *crow = c + i * n;
    for (std::size_t p = 0; p < k; ++p) axpy_row(a[i * k + p], b + p * n, crow, n);
  }
}

void axpy(double alpha, const double *x, double *y, std::size_t n) {
  axpy_row(alpha, x, y, n);
}

template <typename Op, typename ScalarOp>
inline void binary(const double *a, const double *b, double *out, std::size_t n,
                   Op op, ScalarOp sop) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(out + i, op(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  for (; i < n; ++i) out[i] = sop(a[i], b[i]);
}

void add(const double *a, const double *b, double *out, std::size_t n) {
  binary(a, b, out, n, [](__m256d x, __m256d y) { return _mm256_add_pd(x, y); },
         [](double x, double y) { return x + y; });
}

void sub(const double *a, const double *b, double *out, std::size_t n) {
  binary(a, b, out, n, [](__m256d x, __m256d y) { return _mm256_sub_pd(x, y); },
         [](double x, double y) { return x - y; });
}

void mul(const double *a, const double *b, double *out, std::size_t n) {
  binary(a, b, out, n, [](__m256d x, __m256d y) { return _mm256_mul_pd(x, y); },
         [](double x, double y) { return x * y; });
}

void mul_acc(const double *a, const double *b, double *y, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d prod = _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    _mm256_storeu_pd(y + i, _mm256_add_pd(_mm256_loadu_pd(y + i), prod));
  }
  for (; i < n; ++i) y[i] += a[i] * b[i];
}

void acc(const double *x, double *y, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(y + i, _mm256_add_pd(_mm256_loadu_pd(y + i), _mm256_loadu_pd(x + i)));
  for (; i < n; ++i) y[i] += x[i];
}

}  // namespace

const KernelTable &avx2_table() {
  static const KernelTable table{Isa::kAvx2, "avx2", gemm_acc, axpy, add,
                                 sub,        mul,    mul_acc,  acc};
  return table;
}

}  // namespace pin::kernels

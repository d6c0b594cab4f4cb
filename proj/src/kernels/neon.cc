// NEON kernels, 2 doubles per vector. vmlaq/vfmaq are avoided so rounding
// matches the scalar path.

#include <arm_neon.h>

#include "pin/kernels.h"

namespace pin::kernels {
namespace {

inline void axpy_row(double alpha, const double *x, double *y, std::size_t n) {
  const float64x2_t va = vdupq_n_f64(alpha);
  std::size_t j = 0;
  for (; j + 2 <= n; j += 2) {
    float64x2_t prod = vmulq_f64(va, vld1q_f64(x + j));
    vst1q_f64(y + j, vaddq_f64(vld1q_f64(y + j), prod));
  }
  for (; j < n; ++j) y[j] += alpha * x[j];
}

void gemm_acc(const double *a, const double *b, double *c, std::size_t m,
              std::size_t k, std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    const double *arow = a + i * k;
    double *crow = c + i * n;
    std::size_t j = 0;
    for (; j + 4 <= n; j += 4) {
      float64x2_t x0 = vld1q_f64(crow + j), x1 = vld1q_f64(crow + j + 2);
      for (std::size_t p = 0; p < k; ++p) {
        const float64x2_t s = vdupq_n_f64(arow[p]);
        x0 = vaddq_f64(x0, vmulq_f64(s, vld1q_f64(b + p * n + j)));
        x1 = vaddq_f64(x1, vmulq_f64(s, vld1q_f64(b + p * n + j + 2)));
      }
      vst1q_f64(crow + j, x0);
      vst1q_f64(crow + j + 2, x1);
    }
    for (; j < n; ++j) {
      double x = crow[j];
      for (std::size_t p = 0; p < k; ++p) x += arow[p] * b[p * n + j];
      crow[j] = x;
    }
  }
}

void axpy(double alpha, const double *x, double *y, std::size_t n) {
  axpy_row(alpha, x, y, n);
}

void add(const double *a, const double *b, double *out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(out + i, vaddq_f64(vld1q_f64(a + i), vld1q_f64(b + i)));
  for (; i < n; ++i) out[i] = a[i] + b[i];
}

void sub(const double *a, const double *b, double *out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(out + i, vsubq_f64(vld1q_f64(a + i), vld1q_f64(b + i)));
  for (; i < n; ++i) out[i] = a[i] - b[i];
}

void mul(const double *a, const double *b, double *out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(out + i, vmulq_f64(vld1q_f64(a + i), vld1q_f64(b + i)));
  for (; i < n; ++i) out[i] = a[i] * b[i];
}

void mul_acc(const double *a, const double *b, double *y, std::size_t n) {
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    float64x2_t prod = vmulq_f64(vld1q_f64(a + i), vld1q_f64(b + i));
    vst1q_f64(y + i, vaddq_f64(vld1q_f64(y + i), prod));
  }
  for (; i < n; ++i) y[i] += a[i] * b[i];
}

void acc(const double *x, double *y, std::size_t n) {
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(y + i, vaddq_f64(vld1q_f64(y + i), vld1q_f64(x + i)));
  for (; i < n; ++i) y[i] += x[i];
}

}  // namespace

const KernelTable &neon_table() {
  static const KernelTable table{Isa::kNeon, "neon", gemm_acc, axpy, add,
                                 sub,        mul,    mul_acc,  acc};
  return table;
}

}  // namespace pin::kernels

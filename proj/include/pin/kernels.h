// Dense double-precision kernels behind the tensor engine.
//
// Every kernel has a scalar reference implementation. SIMD variants vectorize
// across independent output elements only, so each output element sees the
// same sequence of operations as in the scalar code and results are
// bit-identical between variants. The active table is picked once at startup
// from the CPU features and may be overridden with PIN_KERNELS=scalar|avx2|neon.

#ifndef PIN_KERNELS_H_
#define PIN_KERNELS_H_

#include <cstddef>
#include <string_view>
#include <vector>

namespace pin::kernels {

enum class Isa { kScalar, kAvx2, kNeon };

struct KernelTable {
  Isa isa;
  const char *name;

  // c[m x n] += a[m x k] * b[k x n], row-major. The k-loop is sequential for
  // every output element.
  void (*gemm_acc)(const double *a, const double *b, double *c, std::size_t m,
                   std::size_t k, std::size_t n);
  // y += alpha * x
  void (*axpy)(double alpha, const double *x, double *y, std::size_t n);
  // out = a + b, out = a - b, out = a * b
  void (*add)(const double *a, const double *b, double *out, std::size_t n);
  void (*sub)(const double *a, const double *b, double *out, std::size_t n);
  void (*mul)(const double *a, const double *b, double *out, std::size_t n);
  // y += a * b
  void (*mul_acc)(const double *a, const double *b, double *y, std::size_t n);
  // y += x
  void (*acc)(const double *x, double *y, std::size_t n);
};

const KernelTable &scalar_table();
#if defined(__x86_64__) || defined(_M_X64)
const KernelTable &avx2_table();
#endif
#if defined(__aarch64__)
const KernelTable &neon_table();
#endif

// Tables usable on this machine, scalar first.
std::vector<const KernelTable *> available();

// Currently selected table.
const KernelTable &active();

// Selects a table by ISA. Returns false (and leaves the selection unchanged)
// if the ISA is not supported here.
bool select(Isa isa);
bool select(std::string_view name);

// Restores the startup choice.
void select_default();

// b_t[n x m] = transpose of a[m x n].
void transpose(const double *a, double *b_t, std::size_t m, std::size_t n);

}  // namespace pin::kernels

#endif  // PIN_KERNELS_H_

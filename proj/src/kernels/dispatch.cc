#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <string>

#include "pin/kernels.h"

namespace pin::kernels {
namespace {

bool cpu_has(Isa isa) {
  switch (isa) {
    case Isa::kScalar:
      return true;
    case Isa::kAvx2:
#if defined(PIN_HAVE_AVX2)
      return __builtin_cpu_supports("avx2");
#else
      return false;
#endif
    case Isa::kNeon:
#if defined(PIN_HAVE_NEON)
      return true;
#else
      return false;
#endif
  }
  return false;
}

const KernelTable *table_for(Isa isa) {
  switch (isa) {
    case Isa::kScalar:
      return &scalar_table();
    case Isa::kAvx2:
#if defined(PIN_HAVE_AVX2)
      return &avx2_table();
#else
      return nullptr;
#endif
    case Isa::kNeon:
#if defined(PIN_HAVE_NEON)
      return &neon_table();
#else
      return nullptr;
#endif
  }
  return nullptr;
}

const KernelTable *best_table() {
  if (const char *env = std::getenv("PIN_KERNELS")) {
    const std::string want(env);
    for (Isa isa : {Isa::kScalar, Isa::kAvx2, Isa::kNeon}) {
      const KernelTable *t = table_for(isa);
      if (t != nullptr && cpu_has(isa) && want == t->name) return t;
    }
  }
  for (Isa isa : {Isa::kAvx2, Isa::kNeon}) {
    if (cpu_has(isa)) return table_for(isa);
  }
  return &scalar_table();
}

std::atomic<const KernelTable *> &current() {
  static std::atomic<const KernelTable *> table{best_table()};
  return table;
}

}  // namespace

std::vector<const KernelTable *> available() {
  std::vector<const KernelTable *> out;
  for (Isa isa : {Isa::kScalar, Isa::kAvx2, Isa::kNeon}) {
    if (cpu_has(isa)) out.push_back(table_for(isa));
  }
  return out;
}

const KernelTable &active() { return *current().load(std::memory_order_relaxed); }

bool select(Isa isa) {
  if (!cpu_has(isa)) return false;
  current().store(table_for(isa), std::memory_order_relaxed);
  return true;
}

bool select(std::string_view name) {
  for (const KernelTable *t : available()) {
    if (name == t->name) return select(t->isa);
  }
  return false;
}

void select_default() { current().store(best_table(), std::memory_order_relaxed); }

void transpose(const double *a, double *b_t, std::size_t m, std::size_t n) {
  constexpr std::size_t kTile = 32;
  for (std::size_t i0 = 0; i0 < m; i0 += kTile)
    for (std::size_t j0 = 0; j0 < n; j0 += kTile) {
      const std::size_t i1 = std::min(m, i0 + kTile), j1 = std::min(n, j0 + kTile);
      for (std::size_t i = i0; i < i1; ++i)
        for (std::size_t j = j0; j < j1; ++j) b_t[j * m + i] = a[i * n + j];
    }
}

}  // namespace pin::kernels

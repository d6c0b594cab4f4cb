#include "pin/ops.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "pin/kernels.h"

namespace pin {
namespace {

void require_same_shape(const char *op, const Tensor &a, const Tensor &b) {
  if (a.shape() != b.shape()) {
    throw DimensionError(std::string(op) + ": shape mismatch " + shape_string(a.shape()) +
                         " vs " + shape_string(b.shape()));
  }
}

void require_rank(const char *op, const Tensor &x, std::size_t rank) {
  if (x.rank() != rank) {
    throw DimensionError(std::string(op) + ": expected rank " + std::to_string(rank) +
                         ", got " + shape_string(x.shape()));
  }
}

struct AxisSplit {
  std::size_t outer = 1;
  std::size_t length = 1;
  std::size_t inner = 1;
};

AxisSplit split_at(const Shape &shape, std::size_t axis) {
  AxisSplit s;
  for (std::size_t i = 0; i < axis; ++i) s.outer *= shape[i];
  s.length = shape[axis];
  for (std::size_t i = axis + 1; i < shape.size(); ++i) s.inner *= shape[i];
  return s;
}

double sigmoid_value(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

Tensor matmul(Tape &tape, const Tensor &a, const Tensor &b) {
  if (a.rank() != 2 || b.rank() != 2 || a.dim(1) != b.dim(0)) {
    throw DimensionError("matmul: cannot multiply " + shape_string(a.shape()) + " by " +
                         shape_string(b.shape()));
  }
  const std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
  std::vector<double> out(m * n, 0.0);
  const auto &kt = kernels::active();
  kt.gemm_acc(a.data(), b.data(), out.data(), m, k, n);
  return tape.record("matmul", {a, b}, {m, n}, std::move(out),
                     [a = a, b = b, m, k, n](const Tensor &c) mutable {
                       const auto &kt = kernels::active();
                       if (a.requires_grad()) {
                         // dA += dC * B^T
                         std::vector<double> bt(n * k);
                         kernels::transpose(b.data(), bt.data(), k, n);
                         kt.gemm_acc(c.grad_data(), bt.data(), a.grad_data(), m, n, k);
                       }
                       if (b.requires_grad()) {
                         // dB += A^T * dC
                         std::vector<double> at(k * m);
                         kernels::transpose(a.data(), at.data(), m, k);
                         kt.gemm_acc(at.data(), c.grad_data(), b.grad_data(), k, m, n);
                       }
                     });
}

Tensor elementwise(Tape &tape, const Tensor &a, const Tensor &b, Elementwise kind) {
  require_same_shape("elementwise", a, b);
  const std::size_t n = a.size();
  std::vector<double> out(n);
  const auto &kt = kernels::active();
  switch (kind) {
    case Elementwise::kAdd:
      kt.add(a.data(), b.data(), out.data(), n);
      break;
    case Elementwise::kSub:
      kt.sub(a.data(), b.data(), out.data(), n);
      break;
    case Elementwise::kMul:
      kt.mul(a.data(), b.data(), out.data(), n);
      break;
  }
  static constexpr const char *kNames[] = {"add", "sub", "mul"};
  return tape.record(kNames[static_cast<int>(kind)], {a, b}, a.shape(), std::move(out),
                     [a = a, b = b, kind, n](const Tensor &c) mutable {
                       const auto &kt = kernels::active();
                       const double *g = c.grad_data();
                       switch (kind) {
                         case Elementwise::kAdd:
                           if (a.requires_grad()) kt.acc(g, a.grad_data(), n);
                           if (b.requires_grad()) kt.acc(g, b.grad_data(), n);
                           break;
                         case Elementwise::kSub:
                           if (a.requires_grad()) kt.acc(g, a.grad_data(), n);
                           if (b.requires_grad()) kt.axpy(-1.0, g, b.grad_data(), n);
                           break;
                         case Elementwise::kMul:
                           if (a.requires_grad()) kt.mul_acc(g, b.data(), a.grad_data(), n);
                           if (b.requires_grad()) kt.mul_acc(g, a.data(), b.grad_data(), n);
                           break;
                       }
                     });
}

Tensor add_bias(Tape &tape, const Tensor &x, const Tensor &bias) {
  require_rank("add_bias", x, 2);
  if (bias.size() != x.dim(1)) {
    throw DimensionError("add_bias: bias " + shape_string(bias.shape()) +
                         " does not match rows of " + shape_string(x.shape()));
  }
  const std::size_t m = x.dim(0), n = x.dim(1);
  std::vector<double> out(m * n);
  const auto &kt = kernels::active();
  for (std::size_t i = 0; i < m; ++i) kt.add(x.data() + i * n, bias.data(), out.data() + i * n, n);
  return tape.record("add_bias", {x, bias}, x.shape(), std::move(out),
                     [x = x, bias = bias, m, n](const Tensor &c) mutable {
                       const auto &kt = kernels::active();
                       if (x.requires_grad()) kt.acc(c.grad_data(), x.grad_data(), m * n);
                       if (bias.requires_grad()) {
                         for (std::size_t i = 0; i < m; ++i)
                           kt.acc(c.grad_data() + i * n, bias.grad_data(), n);
                       }
                     });
}

Tensor affine(Tape &tape, const Tensor &x, double scale, double shift) {
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = scale * x[i] + shift;
  return tape.record("affine", {x}, x.shape(), std::move(out),
                     [x = x, scale](const Tensor &c) mutable {
                       kernels::active().axpy(scale, c.grad_data(), x.grad_data(), x.size());
                     });
}

Tensor scale_rows(Tape &tape, const Tensor &x, std::span<const double> factors) {
  require_rank("scale_rows", x, 2);
  if (factors.size() != x.dim(0)) {
    throw DimensionError("scale_rows: " + std::to_string(factors.size()) +
                         " factors for " + shape_string(x.shape()));
  }
  const std::size_t m = x.dim(0), n = x.dim(1);
  std::vector<double> f(factors.begin(), factors.end());
  std::vector<double> out(m * n);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) out[i * n + j] = f[i] * x.data()[i * n + j];
  return tape.record("scale_rows", {x}, x.shape(), std::move(out),
                     [x = x, f = std::move(f), m, n](const Tensor &c) mutable {
                       const auto &kt = kernels::active();
                       for (std::size_t i = 0; i < m; ++i) {
                         if (f[i] == 0.0) continue;
                         kt.axpy(f[i], c.grad_data() + i * n, x.grad_data() + i * n, n);
                       }
                     });
}

Tensor concat(Tape &tape, const std::vector<Tensor> &parts, std::size_t axis) {
  if (parts.empty()) throw DimensionError("concat: no inputs");
  const Shape &first = parts.front().shape();
  if (axis >= first.size()) throw DimensionError("concat: axis out of range");
  Shape out_shape = first;
  out_shape[axis] = 0;
  for (const Tensor &p : parts) {
    const Shape &s = p.shape();
    bool ok = s.size() == first.size();
    for (std::size_t i = 0; ok && i < s.size(); ++i) ok = i == axis || s[i] == first[i];
    if (!ok) {
      throw DimensionError("concat: inconsistent shapes " + shape_string(first) + " and " +
                           shape_string(s) + " along axis " + std::to_string(axis));
    }
    out_shape[axis] += s[axis];
  }
  const AxisSplit out_split = split_at(out_shape, axis);
  const std::size_t out_block = out_split.length * out_split.inner;
  std::vector<double> out(shape_size(out_shape));
  std::size_t offset = 0;
  std::vector<std::size_t> offsets;
  for (const Tensor &p : parts) {
    const std::size_t block = p.dim(axis) * out_split.inner;
    for (std::size_t o = 0; o < out_split.outer; ++o)
      std::copy_n(p.data() + o * block, block, out.data() + o * out_block + offset);
    offsets.push_back(offset);
    offset += block;
  }
  return tape.record("concat", parts, out_shape, std::move(out),
                     [parts = parts, offsets, out_split, out_block, axis](const Tensor &c) mutable {
                       const auto &kt = kernels::active();
                       for (std::size_t p = 0; p < parts.size(); ++p) {
                         if (!parts[p].requires_grad()) continue;
                         const std::size_t block = parts[p].dim(axis) * out_split.inner;
                         for (std::size_t o = 0; o < out_split.outer; ++o)
                           kt.acc(c.grad_data() + o * out_block + offsets[p],
                                  parts[p].grad_data() + o * block, block);
                       }
                     });
}

Tensor slice(Tape &tape, const Tensor &x, std::size_t axis, std::size_t begin,
             std::size_t length) {
  if (axis >= x.rank() || begin + length > x.dim(axis)) {
    throw DimensionError("slice: range [" + std::to_string(begin) + ", " +
                         std::to_string(begin + length) + ") on axis " + std::to_string(axis) +
                         " of " + shape_string(x.shape()));
  }
  const AxisSplit s = split_at(x.shape(), axis);
  Shape out_shape = x.shape();
  out_shape[axis] = length;
  const std::size_t in_block = s.length * s.inner;
  const std::size_t out_block = length * s.inner;
  const std::size_t start = begin * s.inner;
  std::vector<double> out(s.outer * out_block);
  for (std::size_t o = 0; o < s.outer; ++o)
    std::copy_n(x.data() + o * in_block + start, out_block, out.data() + o * out_block);
  return tape.record("slice", {x}, out_shape, std::move(out),
                     [x = x, s, in_block, out_block, start](const Tensor &c) mutable {
                       const auto &kt = kernels::active();
                       for (std::size_t o = 0; o < s.outer; ++o)
                         kt.acc(c.grad_data() + o * out_block,
                                x.grad_data() + o * in_block + start, out_block);
                     });
}

Tensor stack(Tape &tape, const std::vector<Tensor> &parts) {
  if (parts.empty()) throw DimensionError("stack: no inputs");
  const Shape &inner = parts.front().shape();
  const std::size_t block = shape_size(inner);
  std::vector<double> out(parts.size() * block);
  for (std::size_t p = 0; p < parts.size(); ++p) {
    if (parts[p].shape() != inner) {
      throw DimensionError("stack: shape mismatch " + shape_string(inner) + " vs " +
                           shape_string(parts[p].shape()));
    }
    std::copy_n(parts[p].data(), block, out.data() + p * block);
  }
  Shape out_shape{parts.size()};
  out_shape.insert(out_shape.end(), inner.begin(), inner.end());
  return tape.record("stack", parts, out_shape, std::move(out),
                     [parts = parts, block](const Tensor &c) mutable {
                       const auto &kt = kernels::active();
                       for (std::size_t p = 0; p < parts.size(); ++p)
                         if (parts[p].requires_grad())
                           kt.acc(c.grad_data() + p * block, parts[p].grad_data(), block);
                     });
}

Tensor select(Tape &tape, const Tensor &x, std::size_t index) {
  if (x.rank() < 2 || index >= x.dim(0)) {
    throw DimensionError("select: index " + std::to_string(index) + " into " +
                         shape_string(x.shape()));
  }
  Shape out_shape(x.shape().begin() + 1, x.shape().end());
  const std::size_t block = shape_size(out_shape);
  std::vector<double> out(x.data() + index * block, x.data() + (index + 1) * block);
  return tape.record("select", {x}, out_shape, std::move(out),
                     [x = x, block, index](const Tensor &c) mutable {
                       kernels::active().acc(c.grad_data(), x.grad_data() + index * block, block);
                     });
}

Tensor activation(Tape &tape, const Tensor &x, Activation kind) {
  std::vector<double> out(x.size());
  if (kind == Activation::kSigmoid) {
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = sigmoid_value(x[i]);
  } else {
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::tanh(x[i]);
  }
  return tape.record(kind == Activation::kSigmoid ? "sigmoid" : "tanh", {x}, x.shape(),
                     std::move(out), [x = x, kind](const Tensor &y) mutable {
                       const double *g = y.grad_data();
                       double *dx = x.grad_data();
                       const std::size_t n = x.size();
                       if (kind == Activation::kSigmoid) {
                         for (std::size_t i = 0; i < n; ++i) dx[i] += g[i] * (y[i] * (1.0 - y[i]));
                       } else {
                         for (std::size_t i = 0; i < n; ++i) dx[i] += g[i] * (1.0 - y[i] * y[i]);
                       }
                     });
}

Tensor softmax(Tape &tape, const Tensor &x, std::size_t axis) {
  if (axis >= x.rank()) throw DimensionError("softmax: axis out of range for " + shape_string(x.shape()));
  const AxisSplit s = split_at(x.shape(), axis);
  std::vector<double> out(x.size());
  for (std::size_t o = 0; o < s.outer; ++o) {
    for (std::size_t in = 0; in < s.inner; ++in) {
      const std::size_t base = o * s.length * s.inner + in;
      double mx = -std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < s.length; ++j) mx = std::max(mx, x[base + j * s.inner]);
      double total = 0.0;
      for (std::size_t j = 0; j < s.length; ++j) {
        const double e = std::exp(x[base + j * s.inner] - mx);
        out[base + j * s.inner] = e;
        total += e;
      }
      for (std::size_t j = 0; j < s.length; ++j) out[base + j * s.inner] /= total;
    }
  }
  return tape.record("softmax", {x}, x.shape(), std::move(out), [x = x, s](const Tensor &y) mutable {
    const double *g = y.grad_data();
    double *dx = x.grad_data();
    for (std::size_t o = 0; o < s.outer; ++o) {
      for (std::size_t in = 0; in < s.inner; ++in) {
        const std::size_t base = o * s.length * s.inner + in;
        double dot = 0.0;
        for (std::size_t j = 0; j < s.length; ++j) {
          const std::size_t idx = base + j * s.inner;
          dot += g[idx] * y[idx];
        }
        for (std::size_t j = 0; j < s.length; ++j) {
          const std::size_t idx = base + j * s.inner;
          dx[idx] += y[idx] * (g[idx] - dot);
        }
      }
    }
  });
}

Tensor dropout(Tape &tape, const Tensor &x, double rate, Rng &rng, bool training) {
  if (!(rate >= 0.0 && rate < 1.0)) {
    throw std::invalid_argument("dropout: rate must be in [0, 1), got " + std::to_string(rate));
  }
  std::vector<double> keep(x.size(), 1.0);
  if (training && rate > 0.0) {
    const double scale = 1.0 / (1.0 - rate);
    for (double &k : keep) k = rng.uniform() < rate ? 0.0 : scale;
  }
  std::vector<double> out(x.size());
  kernels::active().mul(x.data(), keep.data(), out.data(), x.size());
  return tape.record("dropout", {x}, x.shape(), std::move(out),
                     [x = x, keep = std::move(keep)](const Tensor &y) mutable {
                       kernels::active().mul_acc(y.grad_data(), keep.data(), x.grad_data(),
                                                 x.size());
                     });
}

Tensor sum(Tape &tape, const Tensor &x) {
  double total = 0.0;
  for (double v : x.values()) total += v;
  return tape.record("sum", {x}, {1}, {total}, [x = x](const Tensor &y) mutable {
    const double g = y.grad()[0];
    for (double &d : x.grad()) d += g;
  });
}

Tensor embedding(Tape &tape, const Tensor &table, std::span<const int> ids) {
  require_rank("embedding", table, 2);
  const std::size_t vocab = table.dim(0), width = table.dim(1);
  std::vector<int> rows(ids.begin(), ids.end());
  std::vector<double> out(rows.size() * width);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r] < 0 || static_cast<std::size_t>(rows[r]) >= vocab) {
      throw std::out_of_range("embedding: id " + std::to_string(rows[r]) +
                              " outside vocabulary of size " + std::to_string(vocab));
    }
    std::copy_n(table.data() + rows[r] * width, width, out.data() + r * width);
  }
  const std::size_t n = rows.size();
  return tape.record("embedding", {table}, {n, width}, std::move(out),
                     [table = table, rows = std::move(rows), width](const Tensor &y) mutable {
                       const auto &kt = kernels::active();
                       for (std::size_t r = 0; r < rows.size(); ++r)
                         kt.acc(y.grad_data() + r * width,
                                table.grad_data() + static_cast<std::size_t>(rows[r]) * width,
                                width);
                     });
}

Tensor nll(Tape &tape, const Tensor &probs, std::span<const int> targets) {
  require_rank("nll", probs, 2);
  const std::size_t m = probs.dim(0), k = probs.dim(1);
  if (targets.size() != m) {
    throw DimensionError("nll: " + std::to_string(targets.size()) + " targets for " +
                         shape_string(probs.shape()));
  }
  std::vector<int> gold(targets.begin(), targets.end());
  double total = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    if (gold[i] < 0) continue;
    if (static_cast<std::size_t>(gold[i]) >= k) {
      throw std::out_of_range("nll: gold label " + std::to_string(gold[i]) +
                              " outside " + std::to_string(k) + " classes");
    }
    total -= std::log(probs.at(i, static_cast<std::size_t>(gold[i])));
  }
  return tape.record("nll", {probs}, {1}, {total},
                     [probs = probs, gold = std::move(gold), k](const Tensor &y) mutable {
                       const double g = y.grad()[0];
                       for (std::size_t i = 0; i < gold.size(); ++i) {
                         if (gold[i] < 0) continue;
                         const std::size_t idx = i * k + static_cast<std::size_t>(gold[i]);
                         probs.grad_data()[idx] -= g / probs[idx];
                       }
                     });
}

}  // namespace pin

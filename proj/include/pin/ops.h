// Differentiable operations. Every op records itself on the given tape.

#ifndef PIN_OPS_H_
#define PIN_OPS_H_

#include <cstddef>
#include <span>
#include <vector>

#include "pin/rng.h"
#include "pin/tensor.h"

namespace pin {

enum class Elementwise { kAdd, kSub, kMul };
enum class Activation { kSigmoid, kTanh };

// [m x k] * [k x n] -> [m x n]
Tensor matmul(Tape &tape, const Tensor &a, const Tensor &b);

Tensor elementwise(Tape &tape, const Tensor &a, const Tensor &b, Elementwise kind);
inline Tensor add(Tape &tape, const Tensor &a, const Tensor &b) {
  return elementwise(tape, a, b, Elementwise::kAdd);
}
inline Tensor sub(Tape &tape, const Tensor &a, const Tensor &b) {
  return elementwise(tape, a, b, Elementwise::kSub);
}
inline Tensor mul(Tape &tape, const Tensor &a, const Tensor &b) {
  return elementwise(tape, a, b, Elementwise::kMul);
}

// x[m x n] + bias[n] on every row.
Tensor add_bias(Tape &tape, const Tensor &x, const Tensor &bias);

// scale * x + shift, elementwise with constant coefficients.
Tensor affine(Tape &tape, const Tensor &x, double scale, double shift);

// Row i of x[m x n] multiplied by the constant factors[i].
Tensor scale_rows(Tape &tape, const Tensor &x, std::span<const double> factors);

Tensor concat(Tape &tape, const std::vector<Tensor> &parts, std::size_t axis);

// Sub-range [begin, begin + length) along axis.
Tensor slice(Tape &tape, const Tensor &x, std::size_t axis, std::size_t begin,
             std::size_t length);

// Stacks equally shaped tensors along a new leading axis, and the inverse:
// picks index i of the leading axis, dropping that axis.
Tensor stack(Tape &tape, const std::vector<Tensor> &parts);
Tensor select(Tape &tape, const Tensor &x, std::size_t index);

Tensor activation(Tape &tape, const Tensor &x, Activation kind);
inline Tensor sigmoid(Tape &tape, const Tensor &x) {
  return activation(tape, x, Activation::kSigmoid);
}
inline Tensor tanh(Tape &tape, const Tensor &x) { return activation(tape, x, Activation::kTanh); }

// Max-subtracted softmax along axis.
Tensor softmax(Tape &tape, const Tensor &x, std::size_t axis);

// Inverted dropout: in training, each element is zeroed with probability
// rate and survivors are scaled by 1 / (1 - rate). Identity otherwise.
Tensor dropout(Tape &tape, const Tensor &x, double rate, Rng &rng, bool training);

// Sequential left-to-right sum of all elements, shape [1].
Tensor sum(Tape &tape, const Tensor &x);

// Rows of table[v x d] picked by ids -> [ids.size() x d].
Tensor embedding(Tape &tape, const Tensor &table, std::span<const int> ids);

// -sum_i log(probs[i, targets[i]]) over rows of probs[m x k]; rows whose
// target is negative are skipped. Shape [1].
Tensor nll(Tape &tape, const Tensor &probs, std::span<const int> targets);

}  // namespace pin

#endif  // PIN_OPS_H_

#include "pin/encoder.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "pin/kernels.h"

namespace pin {

SequenceMask SequenceMask::from_batch(const UtteranceBatch &batch) {
  SequenceMask m(batch.max_len, batch.batch);
  for (std::size_t b = 0; b < batch.batch; ++b)
    for (std::size_t t = 0; t < batch.max_len; ++t) m.set(t, b, batch.valid(b, t));
  return m;
}

Tensor uniform_tensor(Shape shape, double bound, Rng &rng) {
  std::vector<double> v(shape_size(shape));
  for (double &x : v) x = rng.uniform(-bound, bound);
  return Tensor::from(std::move(shape), std::move(v), true);
}

EmbeddingTable EmbeddingTable::create(std::size_t vocab, std::size_t dim, Rng &rng) {
  EmbeddingTable e{uniform_tensor({vocab, dim}, 1.0 / std::sqrt(static_cast<double>(dim)), rng)};
  e.rezero_pad();
  return e;
}

void EmbeddingTable::rezero_pad() {
  const std::size_t dim = table.dim(1);
  std::fill_n(table.data() + static_cast<std::size_t>(pad_id) * dim, dim, 0.0);
}

LstmParams LstmParams::create(std::size_t input_size, std::size_t hidden_size, Rng &rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(hidden_size));
  LstmParams p;
  p.w_input = uniform_tensor({input_size, 4 * hidden_size}, bound, rng);
  p.w_hidden = uniform_tensor({hidden_size, 4 * hidden_size}, bound, rng);
  p.bias = Tensor::zeros({4 * hidden_size}, true);
  std::fill_n(p.bias.data() + hidden_size, hidden_size, 1.0);
  return p;
}

LstmState LstmState::zeros(std::size_t batch, std::size_t hidden) {
  return {Tensor::zeros({batch, hidden}), Tensor::zeros({batch, hidden})};
}

LstmState lstm_step(Tape &tape, const Tensor &x, const LstmState &prev, const LstmParams &p,
                    std::span<const double> row_mask) {
  if (x.rank() != 2 || x.dim(1) != p.input_size()) {
    throw DimensionError("lstm_step: input " + shape_string(x.shape()) + " for input size " +
                         std::to_string(p.input_size()));
  }
  if (prev.h.shape() != prev.c.shape() || prev.h.rank() != 2 || prev.h.dim(1) != p.hidden_size() ||
      prev.h.dim(0) != x.dim(0)) {
    throw DimensionError("lstm_step: state " + shape_string(prev.h.shape()) + " for input " +
                         shape_string(x.shape()) + " and hidden size " +
                         std::to_string(p.hidden_size()));
  }
  const std::size_t hs = p.hidden_size();
  Tensor gates = add_bias(tape, add(tape, matmul(tape, x, p.w_input), matmul(tape, prev.h, p.w_hidden)),
                          p.bias);
  Tensor i = sigmoid(tape, slice(tape, gates, 1, 0, hs));
  Tensor f = sigmoid(tape, slice(tape, gates, 1, hs, hs));
  Tensor g = tanh(tape, slice(tape, gates, 1, 2 * hs, hs));
  Tensor o = sigmoid(tape, slice(tape, gates, 1, 3 * hs, hs));
  Tensor c = add(tape, mul(tape, f, prev.c), mul(tape, i, g));
  Tensor h = mul(tape, o, tanh(tape, c));
  if (!row_mask.empty()) {
    h = scale_rows(tape, h, row_mask);
    c = scale_rows(tape, c, row_mask);
  }
  return {h, c};
}

std::vector<Tensor> bilstm_forward(Tape &tape, const std::vector<Tensor> &inputs,
                                   const SequenceMask &mask, const LstmParams &forward,
                                   const LstmParams &backward) {
  const std::size_t steps = inputs.size();
  if (steps == 0) throw std::invalid_argument("bilstm_forward: empty sequence");
  const std::size_t batch = inputs.front().dim(0);
  std::vector<Tensor> fwd(steps), bwd(steps);
  LstmState state = LstmState::zeros(batch, forward.hidden_size());
  for (std::size_t t = 0; t < steps; ++t) {
    state = lstm_step(tape, inputs[t], state, forward, mask.step(t));
    fwd[t] = state.h;
  }
  // Padding sits at the end, so masking keeps the reverse state at zero until
  // each utterance's last real token.
  state = LstmState::zeros(batch, backward.hidden_size());
  for (std::size_t t = steps; t-- > 0;) {
    state = lstm_step(tape, inputs[t], state, backward, mask.step(t));
    bwd[t] = state.h;
  }
  std::vector<Tensor> out(steps);
  for (std::size_t t = 0; t < steps; ++t) out[t] = concat(tape, {fwd[t], bwd[t]}, 1);
  return out;
}

// w = 1, b = -0.5: w d^2 + b is never zero at integer distances, so training
// starts away from the kink of |.|.
GaussianAttentionParams GaussianAttentionParams::create() {
  return {Tensor::scalar(0.0, true), Tensor::scalar(std::log(0.5), true)};
}

double GaussianAttentionParams::w() const { return std::exp(w_raw.item()); }
double GaussianAttentionParams::b() const { return -std::exp(b_raw.item()); }

namespace {

double dot(const double *a, const double *b, std::size_t n) {
  double s = 0.0;
  for (std::size_t k = 0; k < n; ++k) s += a[k] * b[k];
  return s;
}

// Softmax weights of query i against every valid key; invalid keys get 0.
// `row(j)` returns a pointer to token j's vector.
template <typename RowFn>
void attention_row(RowFn row, std::size_t steps, std::size_t width, std::size_t i,
                   const std::vector<bool> &valid, double w, double b, double *weights) {
  double mx = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < steps; ++j) {
    if (!valid[j]) {
      weights[j] = -std::numeric_limits<double>::infinity();
      continue;
    }
    const double d = static_cast<double>(i > j ? i - j : j - i);
    weights[j] = -std::abs(w * d * d + b) + dot(row(i), row(j), width);
    mx = std::max(mx, weights[j]);
  }
  double total = 0.0;
  for (std::size_t j = 0; j < steps; ++j) {
    weights[j] = valid[j] ? std::exp(weights[j] - mx) : 0.0;
    total += weights[j];
  }
  for (std::size_t j = 0; j < steps; ++j) weights[j] /= total;
}

}  // namespace

std::vector<double> gaussian_attention_weights(std::span<const double> x, std::size_t steps,
                                               std::size_t width, std::span<const bool> valid,
                                               double w, double b) {
  std::vector<bool> v(valid.begin(), valid.end());
  std::vector<double> out(steps * steps, 0.0);
  auto row = [&](std::size_t j) { return x.data() + j * width; };
  for (std::size_t i = 0; i < steps; ++i)
    if (v[i]) attention_row(row, steps, width, i, v, w, b, out.data() + i * steps);
  return out;
}

Tensor gaussian_self_attention(Tape &tape, const Tensor &x, const SequenceMask &mask,
                               const GaussianAttentionParams &p) {
  if (x.rank() != 2 && x.rank() != 3) {
    throw DimensionError("gaussian_self_attention: expected [T x B x d] or [T x d], got " +
                         shape_string(x.shape()));
  }
  const std::size_t steps = x.dim(0);
  const std::size_t batch = x.rank() == 3 ? x.dim(1) : 1;
  const std::size_t width = x.shape().back();
  if (steps == 0) throw std::invalid_argument("gaussian_self_attention: empty sequence");
  if (mask.steps() != steps || mask.batch() != batch) {
    throw DimensionError("gaussian_self_attention: mask " + std::to_string(mask.steps()) + " x " +
                         std::to_string(mask.batch()) + " for input " + shape_string(x.shape()));
  }
  const double w = p.w(), b = p.b();
  // Row (t, b) of x lives at (t * batch + b) * width.
  std::vector<double> weights(batch * steps * steps, 0.0);
  std::vector<double> out(x.size(), 0.0);
  const auto &kt = kernels::active();
  for (std::size_t n = 0; n < batch; ++n) {
    std::vector<bool> valid(steps);
    for (std::size_t t = 0; t < steps; ++t) valid[t] = mask.valid(t, n);
    auto row = [&](std::size_t j) { return x.data() + (j * batch + n) * width; };
    for (std::size_t i = 0; i < steps; ++i) {
      if (!valid[i]) continue;
      double *a = weights.data() + (n * steps + i) * steps;
      attention_row(row, steps, width, i, valid, w, b, a);
      double *ci = out.data() + (i * batch + n) * width;
      for (std::size_t j = 0; j < steps; ++j)
        if (valid[j]) kt.axpy(a[j], row(j), ci, width);
    }
  }

  Tensor w_raw = p.w_raw, b_raw = p.b_raw;
  return tape.record(
      "gaussian_self_attention", {x, w_raw, b_raw}, x.shape(), std::move(out),
      [x = x, w_raw, b_raw, weights = std::move(weights), mask, steps, batch, width, w,
       b](const Tensor &c) mutable {
        const auto &kt = kernels::active();
        double dw = 0.0, db = 0.0;
        std::vector<double> da(steps);
        for (std::size_t n = 0; n < batch; ++n) {
          auto row = [&](std::size_t j) { return x.data() + (j * batch + n) * width; };
          auto grow = [&](std::size_t j) { return x.grad_data() + (j * batch + n) * width; };
          for (std::size_t i = 0; i < steps; ++i) {
            if (!mask.valid(i, n)) continue;
            const double *a = weights.data() + (n * steps + i) * steps;
            const double *dc = c.grad_data() + (i * batch + n) * width;
            // c_i = sum_j a_j x_j
            double expected = 0.0;
            for (std::size_t j = 0; j < steps; ++j) {
              if (!mask.valid(j, n)) continue;
              da[j] = dot(dc, row(j), width);
              expected += a[j] * da[j];
            }
            for (std::size_t j = 0; j < steps; ++j) {
              if (!mask.valid(j, n)) continue;
              const double score_grad = a[j] * (da[j] - expected);
              if (x.requires_grad()) {
                kt.axpy(a[j], dc, grow(j), width);
                // d<x_i, x_j> reaches both operands.
                kt.axpy(score_grad, row(j), grow(i), width);
                kt.axpy(score_grad, row(i), grow(j), width);
              }
              const double d = static_cast<double>(i > j ? i - j : j - i);
              const double arg = w * d * d + b;
              const double sign = arg > 0.0 ? 1.0 : (arg < 0.0 ? -1.0 : 0.0);
              dw -= score_grad * sign * d * d;
              db -= score_grad * sign;
            }
          }
        }
        // w = exp(w_raw), b = -exp(b_raw)
        if (w_raw.requires_grad()) w_raw.grad()[0] += dw * w;
        if (b_raw.requires_grad()) b_raw.grad()[0] += db * b;
      });
}

std::vector<Tensor> embed_steps(Tape &tape, const EmbeddingTable &table, const UtteranceBatch &batch) {
  std::vector<Tensor> steps;
  steps.reserve(batch.max_len);
  std::vector<int> ids(batch.batch);
  for (std::size_t t = 0; t < batch.max_len; ++t) {
    for (std::size_t b = 0; b < batch.batch; ++b) ids[b] = batch.token(b, t);
    steps.push_back(embedding(tape, table.table, ids));
  }
  return steps;
}

EncodedUtterance encode_utterance(Tape &tape, const UtteranceBatch &batch, const EncoderParams &p,
                                  const EncoderOptions &options) {
  if (batch.max_len == 0) throw std::invalid_argument("encode_utterance: empty batch");
  EncodedUtterance enc;
  enc.mask = SequenceMask::from_batch(batch);
  std::vector<Tensor> emb = embed_steps(tape, p.embedding, batch);
  if (options.training && options.dropout_rate > 0.0) {
    if (options.rng == nullptr) throw std::invalid_argument("encode_utterance: dropout needs an rng");
    for (Tensor &e : emb) e = dropout(tape, e, options.dropout_rate, *options.rng, true);
  }
  enc.h = bilstm_forward(tape, emb, enc.mask, p.forward, p.backward);
  if (options.use_attention) {
    Tensor context = gaussian_self_attention(tape, stack(tape, emb), enc.mask, p.attention);
    for (std::size_t t = 0; t < batch.max_len; ++t) {
      enc.c.push_back(select(tape, context, t));
      enc.e.push_back(concat(tape, {enc.h[t], enc.c[t]}, 1));
    }
  } else {
    enc.e = enc.h;
  }
  enc.width = enc.e.front().dim(1);
  return enc;
}

}  // namespace pin

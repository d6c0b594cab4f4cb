// Utterance encoder: word embeddings, a bidirectional LSTM and Gaussian
// self-attention, concatenated per token into E = H (+) C.
//
// Sequences are time-major: step t of a batch is a [batch x width] tensor.

#ifndef PIN_ENCODER_H_
#define PIN_ENCODER_H_

#include <cstddef>
#include <span>
#include <vector>

#include "pin/data.h"
#include "pin/ops.h"
#include "pin/rng.h"
#include "pin/tensor.h"

namespace pin {

// 0/1 validity per (step, batch row), stored step-major so that one step's
// factors can feed scale_rows directly.
class SequenceMask {
 public:
  SequenceMask() = default;
  SequenceMask(std::size_t steps, std::size_t batch) : steps_(steps), batch_(batch), v_(steps * batch, 0.0) {}
  static SequenceMask from_batch(const UtteranceBatch &batch);

  std::size_t steps() const { return steps_; }
  std::size_t batch() const { return batch_; }
  std::span<const double> step(std::size_t t) const { return {v_.data() + t * batch_, batch_}; }
  bool valid(std::size_t t, std::size_t b) const { return v_[t * batch_ + b] != 0.0; }
  void set(std::size_t t, std::size_t b, bool on) { v_[t * batch_ + b] = on ? 1.0 : 0.0; }

 private:
  std::size_t steps_ = 0;
  std::size_t batch_ = 0;
  std::vector<double> v_;
};

// Uniform in [-bound, bound].
Tensor uniform_tensor(Shape shape, double bound, Rng &rng);

struct EmbeddingTable {
  Tensor table;  // [vocab x emb_dim]
  int pad_id = kPadId;

  static EmbeddingTable create(std::size_t vocab, std::size_t dim, Rng &rng);
  void rezero_pad();
};

// Gate blocks are laid out (input, forget, cell, output) along the 4h axis.
// Weights are stored input-major, [in x 4h] and [h x 4h], so a batch of row
// vectors multiplies them directly.
struct LstmParams {
  Tensor w_input;
  Tensor w_hidden;
  Tensor bias;  // forget block starts at 1

  static LstmParams create(std::size_t input_size, std::size_t hidden_size, Rng &rng);
  std::size_t input_size() const { return w_input.dim(0); }
  std::size_t hidden_size() const { return w_hidden.dim(0); }
};

struct LstmState {
  Tensor h;
  Tensor c;

  static LstmState zeros(std::size_t batch, std::size_t hidden);
};

// c = f*c_prev + i*g, h = o*tanh(c). With a row mask, rows whose factor is
// zero come out as exact zeros in both h and c.
LstmState lstm_step(Tape &tape, const Tensor &x, const LstmState &prev, const LstmParams &p,
                    std::span<const double> row_mask = {});

// Left-to-right and right-to-left passes from zero states, concatenated per
// step into [batch x 2h]. Padded positions are zero.
std::vector<Tensor> bilstm_forward(Tape &tape, const std::vector<Tensor> &inputs,
                                   const SequenceMask &mask, const LstmParams &forward,
                                   const LstmParams &backward);

// w = exp(w_raw) > 0 and b = -exp(b_raw) < 0.
struct GaussianAttentionParams {
  Tensor w_raw;
  Tensor b_raw;

  static GaussianAttentionParams create();
  double w() const;
  double b() const;
};

// c_i = sum_j softmax_j(-|w d_ij^2 + b| + <x_i, x_j>) x_j with d_ij = |i - j|.
// Masked keys are excluded from the softmax and masked query rows are zero.
// x is [T x B x d] (or [T x d] for a single utterance); mask is T x B.
Tensor gaussian_self_attention(Tape &tape, const Tensor &x, const SequenceMask &mask,
                               const GaussianAttentionParams &p);

// Attention weights of one utterance (row i = query i), for inspection.
std::vector<double> gaussian_attention_weights(std::span<const double> x, std::size_t steps,
                                               std::size_t width, std::span<const bool> valid,
                                               double w, double b);

struct EncoderParams {
  EmbeddingTable embedding;
  LstmParams forward;
  LstmParams backward;
  GaussianAttentionParams attention;
};

struct EncoderOptions {
  bool use_attention = true;
  bool training = false;
  double dropout_rate = 0.0;
  Rng *rng = nullptr;  // required when training with dropout
};

struct EncodedUtterance {
  std::vector<Tensor> e;  // per step [B x width]
  std::vector<Tensor> h;  // per step [B x 2 hidden]
  std::vector<Tensor> c;  // per step [B x emb_dim]; empty without attention
  SequenceMask mask;
  std::size_t width = 0;
};

// Embedding rows for one step of the batch, [B x emb_dim].
std::vector<Tensor> embed_steps(Tape &tape, const EmbeddingTable &table, const UtteranceBatch &batch);

EncodedUtterance encode_utterance(Tape &tape, const UtteranceBatch &batch, const EncoderParams &p,
                                  const EncoderOptions &options);

}  // namespace pin

#endif  // PIN_ENCODER_H_

// Dense tensors and the reverse-mode tape.
//
// A Tensor is a shared handle to a value buffer and a gradient buffer of the
// same length. Leaf tensors (parameters, constants) live outside any tape;
// every op result is recorded on exactly one Tape together with a backward
// rule. Tape::backward walks the records in reverse, so records are
// topologically ordered by construction.

#ifndef PIN_TENSOR_H_
#define PIN_TENSOR_H_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace pin {

using Shape = std::vector<std::size_t>;

std::size_t shape_size(const Shape &shape);
std::string shape_string(const Shape &shape);

// Raised on incompatible operand shapes; the message names both shapes.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor filled(Shape shape, double value, bool requires_grad = false);
  static Tensor from(Shape shape, std::vector<double> values, bool requires_grad = false);
  static Tensor scalar(double value, bool requires_grad = false);

  bool defined() const { return s_ != nullptr; }

  const Shape &shape() const { return s_->shape; }
  std::size_t rank() const { return s_->shape.size(); }
  std::size_t dim(std::size_t axis) const { return s_->shape.at(axis); }
  std::size_t size() const { return s_->value.size(); }

  std::span<double> values() { return s_->value; }
  std::span<const double> values() const { return s_->value; }
  std::span<double> grad() { return s_->grad; }
  std::span<const double> grad() const { return s_->grad; }

  double *data() { return s_->value.data(); }
  const double *data() const { return s_->value.data(); }
  double *grad_data() { return s_->grad.data(); }
  const double *grad_data() const { return s_->grad.data(); }

  double item() const;
  double &operator[](std::size_t i) { return s_->value[i]; }
  double operator[](std::size_t i) const { return s_->value[i]; }
  double at(std::size_t row, std::size_t col) const {
    return s_->value[row * s_->shape.back() + col];
  }

  bool requires_grad() const { return s_->requires_grad; }
  void set_requires_grad(bool on) { s_->requires_grad = on; }
  void zero_grad();

  // Identifier of the tape that produced this tensor, or -1 for leaves.
  std::int64_t tape_id() const { return s_->tape_id; }
  std::int64_t node_index() const { return s_->node; }

  bool same_storage(const Tensor &other) const { return s_ == other.s_; }

  // Independent copy of shape and values; gradient starts at zero.
  Tensor clone() const;

 private:
  friend class Tape;
  struct Storage {
    Shape shape;
    std::vector<double> value;
    std::vector<double> grad;
    bool requires_grad = false;
    std::int64_t tape_id = -1;
    std::int64_t node = -1;
  };
  explicit Tensor(std::shared_ptr<Storage> s) : s_(std::move(s)) {}
  std::shared_ptr<Storage> s_;
};

class Tape {
 public:
  // Receives the recorded output; reads its gradient, accumulates into inputs.
  using BackwardFn = std::function<void(const Tensor &out)>;

  Tape();
  Tape(const Tape &) = delete;
  Tape &operator=(const Tape &) = delete;
  Tape(Tape &&) = default;
  Tape &operator=(Tape &&) = default;

  std::int64_t id() const { return id_; }
  std::size_t size() const { return nodes_.size(); }

  // Creates an output tensor owned by this tape. It requires grad iff any
  // input does; `backward` is only run in that case.
  Tensor record(const char *op, std::vector<Tensor> inputs, Shape out_shape,
                std::vector<double> out_values, BackwardFn backward);

  // Accumulates d(loss)/d(leaf) into every requires-grad leaf reachable from
  // loss. Intermediate gradients are reset first, so repeated calls add the
  // same contribution to the leaves each time.
  void backward(Tensor &loss);

  // Name of the first op whose output holds a NaN or infinity, if any.
  std::optional<std::string> first_non_finite() const;

  void clear();

 private:
  struct Node {
    const char *op;
    std::vector<Tensor> inputs;
    Tensor output;
    BackwardFn backward;
  };
  std::int64_t id_;
  std::vector<Node> nodes_;
};

}  // namespace pin

#endif  // PIN_TENSOR_H_

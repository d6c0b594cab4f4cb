#include "pin/tensor.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <sstream>

namespace pin {

std::size_t shape_size(const Shape &shape) {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  return n;
}

std::string shape_string(const Shape &shape) {
  std::ostringstream out;
  out << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i > 0) out << " x ";
    out << shape[i];
  }
  out << ']';
  return out.str();
}

Tensor Tensor::zeros(Shape shape, bool requires_grad) {
  return filled(std::move(shape), 0.0, requires_grad);
}

Tensor Tensor::filled(Shape shape, double value, bool requires_grad) {
  const std::size_t n = shape_size(shape);
  return from(std::move(shape), std::vector<double>(n, value), requires_grad);
}

Tensor Tensor::from(Shape shape, std::vector<double> values, bool requires_grad) {
  if (shape_size(shape) != values.size()) {
    throw DimensionError("tensor shape " + shape_string(shape) + " does not hold " +
                         std::to_string(values.size()) + " values");
  }
  auto s = std::make_shared<Storage>();
  s->shape = std::move(shape);
  s->grad.assign(values.size(), 0.0);
  s->value = std::move(values);
  s->requires_grad = requires_grad;
  return Tensor(std::move(s));
}

Tensor Tensor::scalar(double value, bool requires_grad) {
  return from({1}, {value}, requires_grad);
}

double Tensor::item() const {
  if (size() != 1) throw DimensionError("item() on tensor of shape " + shape_string(shape()));
  return s_->value[0];
}

void Tensor::zero_grad() { std::fill(s_->grad.begin(), s_->grad.end(), 0.0); }

Tensor Tensor::clone() const { return from(shape(), s_->value, s_->requires_grad); }

namespace {
std::atomic<std::int64_t> next_tape_id{0};
}  // namespace

Tape::Tape() : id_(next_tape_id.fetch_add(1)) {}

Tensor Tape::record(const char *op, std::vector<Tensor> inputs, Shape out_shape,
                    std::vector<double> out_values, BackwardFn backward) {
  const bool needs_grad = std::any_of(inputs.begin(), inputs.end(),
                                      [](const Tensor &t) { return t.requires_grad(); });
  Tensor out = Tensor::from(std::move(out_shape), std::move(out_values), needs_grad);
  out.s_->tape_id = id_;
  out.s_->node = static_cast<std::int64_t>(nodes_.size());
  nodes_.push_back(Node{op, std::move(inputs), out, needs_grad ? std::move(backward) : nullptr});
  return out;
}

void Tape::backward(Tensor &loss) {
  if (loss.size() != 1) {
    throw DimensionError("backward needs a scalar loss, got " + shape_string(loss.shape()));
  }
  if (loss.tape_id() != id_) throw std::invalid_argument("loss is not recorded on this tape");
  const auto last = static_cast<std::size_t>(loss.node_index());
  for (std::size_t i = 0; i <= last; ++i) nodes_[i].output.zero_grad();
  if (!loss.requires_grad()) return;
  loss.grad()[0] = 1.0;
  for (std::size_t i = last + 1; i-- > 0;) {
    if (nodes_[i].backward) nodes_[i].backward(nodes_[i].output);
  }
}

std::optional<std::string> Tape::first_non_finite() const {
  for (const Node &node : nodes_) {
    for (double v : node.output.values()) {
      if (!std::isfinite(v)) {
        return std::string(node.op) + " (tape node " +
               std::to_string(node.output.node_index()) + ", shape " +
               shape_string(node.output.shape()) + ")";
      }
    }
  }
  return std::nullopt;
}

void Tape::clear() { nodes_.clear(); }

}  // namespace pin

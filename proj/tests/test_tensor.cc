#include <cmath>
#include <stdexcept>

#include "doctest.h"
#include "pin/gradcheck.h"
#include "pin/ops.h"
#include "test_util.h"

namespace pin {
namespace {

using testing::random_tensor;

TEST_CASE("tensor invariants") {
  Tensor t = Tensor::zeros({2, 3}, true);
  CHECK(t.size() == 6);
  CHECK(t.grad().size() == 6);
  for (double g : t.grad()) CHECK(g == 0.0);
  CHECK(t.tape_id() == -1);
  CHECK_THROWS_AS(Tensor::from({2, 2}, {1, 2, 3}), DimensionError);
}

TEST_CASE("matmul") {
  Tape tape;
  SUBCASE("identity") {
    Tensor eye = Tensor::from({2, 2}, {1, 0, 0, 1});
    Tensor m = Tensor::from({2, 2}, {1, 2, 3, 4});
    Tensor c = matmul(tape, eye, m);
    CHECK(c.shape() == Shape{2, 2});
    CHECK(std::vector<double>(c.values().begin(), c.values().end()) ==
          std::vector<double>{1, 2, 3, 4});
  }
  SUBCASE("selector row") {
    Tensor c = matmul(tape, Tensor::from({1, 2}, {1, 0}), Tensor::from({2, 1}, {2, 5}));
    CHECK(c.item() == 2.0);
  }
  SUBCASE("shape mismatch names both shapes") {
    try {
      matmul(tape, Tensor::zeros({2, 3}), Tensor::zeros({2, 3}));
      FAIL("expected DimensionError");
    } catch (const DimensionError &e) {
      const std::string msg = e.what();
      CHECK(msg.find("[2 x 3]") != std::string::npos);
    }
  }
  SUBCASE("gradient of sum w.r.t. A is the row-broadcast of B's row sums") {
    Rng rng(1);
    Tensor a = random_tensor(rng, {3, 4});
    Tensor b = random_tensor(rng, {4, 2});
    Tensor loss = sum(tape, matmul(tape, a, b));
    tape.backward(loss);
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t p = 0; p < 4; ++p)
        CHECK(a.grad()[i * 4 + p] == doctest::Approx(b[p * 2] + b[p * 2 + 1]).epsilon(1e-14));
    const double err = grad_check([&](Tape &t) { return sum(t, matmul(t, a, b)); }, {a, b}, 1e-5);
    CHECK(err <= 1e-6);
  }
}

TEST_CASE("elementwise") {
  Tape tape;
  Tensor s = add(tape, Tensor::from({2}, {1, 2}), Tensor::from({2}, {3, 4}));
  CHECK(s[0] == 4.0);
  CHECK(s[1] == 6.0);
  Rng rng(2);
  Tensor x = random_tensor(rng, {3, 3});
  Tensor y = mul(tape, x, Tensor::filled({3, 3}, 1.0));
  CHECK(testing::bit_equal(x.values(), y.values()));
  CHECK_THROWS_AS(add(tape, Tensor::zeros({2}), Tensor::zeros({3})), DimensionError);

  Tensor a = random_tensor(rng, {3, 3});
  Tensor b = random_tensor(rng, {3, 3});
  for (Elementwise kind : {Elementwise::kAdd, Elementwise::kSub, Elementwise::kMul}) {
    const double err = grad_check(
        [&](Tape &t) { return sum(t, mul(t, elementwise(t, a, b, kind), a)); }, {a, b}, 1e-5);
    CHECK(err <= 1e-6);
  }
}

TEST_CASE("concat") {
  Tape tape;
  Tensor c = concat(tape, {Tensor::from({1}, {1}), Tensor::from({1}, {2})}, 0);
  CHECK(c.shape() == Shape{2});
  CHECK(c[0] == 1.0);
  CHECK(c[1] == 2.0);

  Rng rng(3);
  const std::size_t d = 5;
  Tensor fwd = random_tensor(rng, {4, d});
  Tensor bwd = random_tensor(rng, {4, d});
  Tensor h = concat(tape, {fwd, bwd}, 1);
  CHECK(h.shape() == Shape{4, 2 * d});
  CHECK(h.at(2, d + 1) == bwd.at(2, 1));

  CHECK_THROWS_AS(concat(tape, {Tensor::zeros({2, 3}), Tensor::zeros({3, 3})}, 1), DimensionError);

  Tensor w = random_tensor(rng, {4, 2 * d});
  const double err = grad_check(
      [&](Tape &t) { return sum(t, mul(t, concat(t, {fwd, bwd}, 1), w)); }, {fwd, bwd}, 1e-5);
  CHECK(err <= 1e-6);
  Tensor w0 = random_tensor(rng, {8, d});
  const double err0 = grad_check(
      [&](Tape &t) { return sum(t, mul(t, concat(t, {fwd, bwd}, 0), w0)); }, {fwd, bwd}, 1e-5);
  CHECK(err0 <= 1e-6);
}

TEST_CASE("slice, stack and select route gradients") {
  Rng rng(4);
  Tensor x = random_tensor(rng, {3, 4, 2});
  Tensor w = random_tensor(rng, {3, 2, 2});
  const double err = grad_check(
      [&](Tape &t) {
        Tensor s = slice(t, x, 1, 1, 2);
        Tensor parts = stack(t, {select(t, s, 2), select(t, s, 0), select(t, s, 1)});
        return sum(t, mul(t, parts, w));
      },
      {x}, 1e-5);
  CHECK(err <= 1e-6);
  Tape tape;
  CHECK_THROWS_AS(slice(tape, x, 1, 3, 2), DimensionError);
}

TEST_CASE("activations") {
  Tape tape;
  CHECK(sigmoid(tape, Tensor::scalar(0.0)).item() == 0.5);
  CHECK(tanh(tape, Tensor::scalar(0.0)).item() == 0.0);
  CHECK(std::isfinite(sigmoid(tape, Tensor::scalar(-800.0)).item()));
  Rng rng(5);
  Tensor x = random_tensor(rng, {7}, 2.0);
  for (Activation kind : {Activation::kSigmoid, Activation::kTanh}) {
    const double err =
        grad_check([&](Tape &t) { return sum(t, activation(t, x, kind)); }, {x}, 1e-5);
    CHECK(err <= 1e-6);
  }
}

TEST_CASE("softmax") {
  Tape tape;
  Tensor u = softmax(tape, Tensor::from({2}, {0, 0}), 0);
  CHECK(u[0] == 0.5);
  CHECK(u[1] == 0.5);
  Tensor p = softmax(tape, Tensor::from({2}, {1, -1}), 0);
  CHECK(p[0] == doctest::Approx(0.88080).epsilon(1e-4));
  CHECK(p[1] == doctest::Approx(0.11920).epsilon(1e-4));
  Tensor big = softmax(tape, Tensor::from({2}, {1000, 0}), 0);
  CHECK(std::isfinite(big[0]));
  CHECK(std::isfinite(big[1]));
  CHECK(big[0] == 1.0);

  Rng rng(6);
  for (std::size_t axis : {0u, 1u}) {
    Tensor x = random_tensor(rng, {3, 5}, 4.0);
    Tensor y = softmax(tape, x, axis);
    const std::size_t rows = axis == 1 ? 3 : 5;
    for (std::size_t r = 0; r < rows; ++r) {
      double total = 0.0;
      for (std::size_t j = 0; j < (axis == 1 ? 5u : 3u); ++j) {
        const double v = axis == 1 ? y.at(r, j) : y.at(j, r);
        CHECK(v > 0.0);
        CHECK(v < 1.0);
        total += v;
      }
      CHECK(std::abs(total - 1.0) <= 1e-12);
    }
    Tensor w = random_tensor(rng, {3, 5});
    const double err =
        grad_check([&](Tape &t) { return sum(t, mul(t, softmax(t, x, axis), w)); }, {x}, 1e-5);
    CHECK(err <= 1e-6);
  }
}

TEST_CASE("dropout") {
  Tape tape;
  Rng rng(7);
  Tensor x = random_tensor(rng, {4, 4});
  CHECK(testing::bit_equal(dropout(tape, x, 0.0, rng, true).values(), x.values()));
  CHECK(testing::bit_equal(dropout(tape, x, 0.9, rng, false).values(), x.values()));
  CHECK_THROWS_AS(dropout(tape, x, 1.0, rng, true), std::invalid_argument);

  const double rate = 0.4;
  Tensor ones = Tensor::filled({100000}, 1.0);
  Tensor y = dropout(tape, ones, rate, rng, true);
  std::size_t zeros = 0;
  for (double v : y.values()) {
    if (v == 0.0) {
      ++zeros;
    } else {
      CHECK(v == doctest::Approx(1.0 / (1.0 - rate)));
    }
  }
  const double frac = static_cast<double>(zeros) / 100000.0;
  CHECK(frac >= rate - 0.01);
  CHECK(frac <= rate + 0.01);
}

TEST_CASE("backward") {
  SUBCASE("x^2 at 3") {
    Tensor x = Tensor::scalar(3.0, true);
    Tape tape;
    Tensor loss = mul(tape, x, x);
    tape.backward(loss);
    CHECK(x.grad()[0] == 6.0);
  }
  SUBCASE("sum of sigmoid matches finite differences") {
    Rng rng(8);
    Tensor x = random_tensor(rng, {6});
    CHECK(grad_check([&](Tape &t) { return sum(t, sigmoid(t, x)); }, {x}, 1e-5) <= 1e-5);
  }
  SUBCASE("two backward calls double the gradient; zero_grad resets") {
    Rng rng(9);
    Tensor x = random_tensor(rng, {5});
    Tensor w = random_tensor(rng, {5});
    Tape tape;
    Tensor loss = sum(tape, mul(tape, tanh(tape, x), w));
    tape.backward(loss);
    const std::vector<double> once(x.grad().begin(), x.grad().end());
    tape.backward(loss);
    for (std::size_t i = 0; i < 5; ++i) CHECK(x.grad()[i] == 2.0 * once[i]);
    x.zero_grad();
    tape.backward(loss);
    CHECK(testing::bit_equal(x.grad(), once));
  }
  SUBCASE("non-scalar loss is rejected") {
    Tape tape;
    Tensor v = affine(tape, Tensor::zeros({3}, true), 1.0, 0.0);
    CHECK_THROWS_AS(tape.backward(v), DimensionError);
  }
  SUBCASE("loss from another tape is rejected") {
    Tape a, b;
    Tensor loss = sum(a, Tensor::zeros({2}, true));
    CHECK_THROWS_AS(b.backward(loss), std::invalid_argument);
  }
}

TEST_CASE("grad_check harness") {
  Tensor x = Tensor::scalar(3.0, true);
  CHECK(grad_check([&](Tape &t) { return mul(t, x, x); }, {x}, 1e-4) <= 1e-6);
  Tensor c = Tensor::scalar(1.5, true);
  CHECK(grad_check([&](Tape &t) { return sum(t, Tensor::scalar(2.0)); }, {c}, 1e-4) == 0.0);
  CHECK_THROWS_AS(grad_check([&](Tape &t) { return mul(t, x, x); }, {x}, 0.0),
                  std::invalid_argument);
}

TEST_CASE("gradient checks over random small instances") {
  // Ten trials per op family, dimensions up to 8.
  for (std::uint64_t trial = 0; trial < 10; ++trial) {
    Rng rng(100 + trial);
    const std::size_t m = 1 + rng.below(8), k = 1 + rng.below(8), n = 1 + rng.below(8);
    Tensor a = random_tensor(rng, {m, k});
    Tensor b = random_tensor(rng, {k, n});
    Tensor bias = random_tensor(rng, {n});
    Tensor w = random_tensor(rng, {m, n});
    std::vector<double> rows(m);
    for (double &r : rows) r = rng.uniform(-1, 1);
    const std::vector<int> ids{0, static_cast<int>(m - 1), 0};
    std::vector<int> targets(m);
    for (int &t : targets) t = static_cast<int>(rng.below(n));
    targets[0] = -1;
    const double err = grad_check(
        [&](Tape &t) {
          Tensor z = add_bias(t, matmul(t, a, b), bias);
          Tensor h = tanh(t, scale_rows(t, z, rows));
          Tensor p = softmax(t, mul(t, h, w), 1);
          Tensor e = embedding(t, a, ids);
          return add(t, nll(t, p, targets), sum(t, sigmoid(t, affine(t, e, 0.5, 0.1))));
        },
        {a, b, bias, w}, 1e-5);
    CHECK(err <= 1e-5);
  }
}

TEST_CASE("embedding and nll errors") {
  Tape tape;
  Tensor table = Tensor::zeros({3, 2}, true);
  const std::vector<int> bad{3};
  CHECK_THROWS_AS(embedding(tape, table, bad), std::out_of_range);
  Tensor probs = Tensor::from({1, 2}, {0.5, 0.5});
  const std::vector<int> gold{2};
  CHECK_THROWS_AS(nll(tape, probs, gold), std::out_of_range);
}

TEST_CASE("replay is deterministic") {
  Rng rng(10);
  Tensor a = random_tensor(rng, {5, 6});
  Tensor b = random_tensor(rng, {6, 7});
  auto run = [&] {
    Tape t;
    return softmax(t, tanh(t, matmul(t, a, b)), 1);
  };
  CHECK(testing::bit_equal(run().values(), run().values()));
}

TEST_CASE("first_non_finite names the offending op") {
  Tape tape;
  Tensor p = Tensor::from({1, 2}, {0.0, 1.0});
  const std::vector<int> gold{0};
  Tensor loss = nll(tape, p, gold);
  CHECK(std::isinf(loss.item()));
  const auto where = tape.first_non_finite();
  REQUIRE(where.has_value());
  CHECK(where->find("nll") == 0);
}

}  // namespace
}  // namespace pin

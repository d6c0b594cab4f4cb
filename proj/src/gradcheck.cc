#include "pin/gradcheck.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace pin {

namespace {
double evaluate(const LossFn &f) {
  Tape tape;
  return f(tape).item();
}
}  // namespace

GradCheckReport grad_check_report(const LossFn &f, std::vector<Tensor> params, double epsilon) {
  return grad_check_report(f, std::move(params), std::span<const double>(&epsilon, 1));
}

GradCheckReport grad_check_report(const LossFn &f, std::vector<Tensor> params,
                                  std::span<const double> epsilons) {
  if (epsilons.empty()) throw std::invalid_argument("grad_check: no step sizes");
  for (double e : epsilons)
    if (!(e > 0.0)) throw std::invalid_argument("grad_check: epsilon must be positive");
  for (Tensor &p : params) p.zero_grad();
  {
    Tape tape;
    Tensor loss = f(tape);
    tape.backward(loss);
  }

  GradCheckReport report;
  for (Tensor &p : params) {
    const std::vector<double> analytic(p.grad().begin(), p.grad().end());
    double worst = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double saved = p[i];
      double best = std::numeric_limits<double>::infinity();
      for (double epsilon : epsilons) {
        p[i] = saved + epsilon;
        const double up = evaluate(f);
        p[i] = saved - epsilon;
        const double down = evaluate(f);
        p[i] = saved;
        const double numeric = (up - down) / (2.0 * epsilon);
        const double denom = std::max({std::abs(analytic[i]), std::abs(numeric), 1e-8});
        best = std::min(best, std::abs(analytic[i] - numeric) / denom);
      }
      worst = std::max(worst, best);
    }
    report.per_param.push_back(worst);
    report.zero_grad.push_back(
        std::all_of(analytic.begin(), analytic.end(), [](double g) { return g == 0.0; }));
    report.max_error = std::max(report.max_error, worst);
  }
  return report;
}

}  // namespace pin

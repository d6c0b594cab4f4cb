#include "pin/model_check.h"

#include <algorithm>

#include "pin/gradcheck.h"
#include "pin/loss.h"

namespace pin {

UtteranceBatch gradcheck_batch() {
  const std::vector<EncodedSample> samples{{{2, 3, 4, 5, 6}, {1, 2, 0, 3, 4}, 1}, {{7, 8, 9}, {0, 1, 2}, 2}};
  return pad_batch(std::span<const EncodedSample>(samples));
}

PinModel gradcheck_model(const Ablation &ablation, std::uint64_t seed) {
  ModelDims dims;
  dims.vocab = 12;
  dims.emb_dim = 8;
  dims.hidden = 8;
  dims.n_slots = 5;
  dims.n_intents = 3;
  return PinModel(dims, ablation, seed);
}

std::vector<GroupCheck> check_model_gradients(const PinModel &model, const UtteranceBatch &batch) {
  LossFn loss = [&](Tape &tape) {
    ForwardOutput out = model.forward(tape, batch, ForwardOptions::evaluation());
    return model_loss(tape, out, batch, 0.5).total;
  };

  const std::vector<NamedParam> params = model.parameters();
  std::vector<GroupCheck> groups;
  auto group_of = [&](const std::string &name) -> GroupCheck & {
    for (GroupCheck &g : groups)
      if (g.group == name) return g;
    groups.push_back({name, model.is_active_group(name), true, 0.0});
    return groups.back();
  };

  for (const NamedParam &p : params) Tensor(p.tensor).zero_grad();
  {
    Tape tape;
    Tensor total = loss(tape);
    tape.backward(total);
  }
  for (const NamedParam &p : params) {
    GroupCheck &g = group_of(p.group);
    for (double v : p.tensor.grad()) g.zero_grad = g.zero_grad && v == 0.0;
  }

  std::vector<Tensor> active;
  std::vector<std::string> active_groups;
  for (const NamedParam &p : params) {
    if (!model.is_active_group(p.group)) continue;
    active.push_back(p.tensor);
    active_groups.push_back(p.group);
  }
  const GradCheckReport report = grad_check_report(loss, active, kGradcheckEpsilons);
  for (std::size_t i = 0; i < active.size(); ++i) {
    GroupCheck &g = group_of(active_groups[i]);
    g.max_error = std::max(g.max_error, report.per_param[i]);
  }
  return groups;
}

}  // namespace pin

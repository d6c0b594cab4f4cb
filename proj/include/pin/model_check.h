// Finite-difference check of the full model's gradients, grouped by
// parameter group.

#ifndef PIN_MODEL_CHECK_H_
#define PIN_MODEL_CHECK_H_

#include <cstdint>
#include <string>
#include <vector>

#include "pin/data.h"
#include "pin/model.h"

namespace pin {

struct GroupCheck {
  std::string group;
  bool active = true;
  // True if every analytic gradient entry of the group is exactly zero.
  bool zero_grad = false;
  double max_error = 0.0;  // finite-difference error; 0 for inactive groups
};

// Two utterances of five and three tokens over a 12-word vocabulary with five
// slot tags and three intents.
UtteranceBatch gradcheck_batch();

inline constexpr double kGradcheckEpsilons[] = {1e-3, 1e-4, 1e-5};

// Joint loss (lambda 0.5) in evaluation mode. Active groups are compared
// against central differences at each step size in kGradcheckEpsilons;
// inactive groups only have their analytic gradients inspected.
std::vector<GroupCheck> check_model_gradients(const PinModel &model, const UtteranceBatch &batch);

// Hidden and embedding width 8, sized for gradcheck_batch().
PinModel gradcheck_model(const Ablation &ablation, std::uint64_t seed);

}  // namespace pin

#endif  // PIN_MODEL_CHECK_H_

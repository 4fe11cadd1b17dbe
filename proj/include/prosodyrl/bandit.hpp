#pragma once

#include <array>
#include <cstdint>

namespace prosody {

// Validation suite for the policy-gradient estimator on a 3-armed bandit
// with rewards (1, 0, -1): Monte-Carlo gradient against the enumerated
// gradient, variance reduction from a mean-reward baseline, and REINFORCE
// convergence onto the best arm.
struct BanditReport {
  std::array<double, 3> exact_grad{};  // at the uniform policy
  std::array<double, 3> mc_grad{};     // 10^4-sample estimate
  std::array<double, 3> mc_se{};       // standard error per component
  bool estimator_within_2se = false;

  // Estimator component variance at a skewed policy, with and without the
  // expected-reward baseline.
  double variance_without_baseline = 0.0;
  double variance_with_baseline = 0.0;

  int steps_to_confident = -1;  // first training step with pi[0] >= 0.95
  std::array<double, 3> final_policy{};
};

BanditReport reinforce_bandit_check(uint64_t seed);

}  // namespace prosody

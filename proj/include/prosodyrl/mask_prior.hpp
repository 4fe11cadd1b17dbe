#pragma once

#include <cstdint>
#include <vector>

#include "prosodyrl/tape.hpp"

namespace prosody {

// First-order Markov chain over binary mask states: stay with probability
// p_stay, switch with 1 - p_stay; the first frame is Ber(p_init).
struct MarkovPrior {
  double p_stay = 0.93;
  double p_init = 0.01;

  void validate() const;
};

// Mean-field Bernoulli posterior over mask frames, clamped away from {0,1}
// so every KL term stays finite.
struct MaskPosterior {
  std::vector<double> q;

  int64_t frames() const { return static_cast<int64_t>(q.size()); }
};

inline constexpr double kPosteriorFloor = 1e-6;

double kl_bernoulli(double q, double p);

double sparsity_loss(const MaskPosterior& post, double target);

// KL(q || P) via the per-frame decomposition: the first term against the
// initial distribution, then each frame against the transition row mixed
// under the previous frame's posterior.
double prior_kl_chain(const MaskPosterior& post, const MarkovPrior& prior);

// Exact KL by brute-force enumeration over all 2^T mask sequences, T <= 16.
double prior_kl_bruteforce(const MaskPosterior& post, const MarkovPrior& prior);

// Tape builders mirroring the double-precision functions; q is a [T,1]
// column of clamped posterior probabilities.
ad::Var sparsity_loss_op(ad::Tape& t, ad::Var q, double target);
ad::Var prior_kl_chain_op(ad::Tape& t, ad::Var q, const MarkovPrior& prior);

}  // namespace prosody

#pragma once

#include <vector>

#include "prosodyrl/rng.hpp"
#include "prosodyrl/tape.hpp"

namespace prosody {

struct GumbelSample {
  double soft = 0.0;
  float hard = 0.0f;
};

// Binary-concrete sample for one Bernoulli parameter: the soft relaxation
// sigmoid((logit(q) + g1 - g0) / temperature) and its hard rounding.
GumbelSample gumbel_softmax_sample(double q, double temperature, Rng& rng);

// Difference of two standard Gumbel draws per frame (a standard logistic
// variate), precomputed so one tape pass reuses fixed noise.
std::vector<double> gumbel_noise(int64_t frames, Rng& rng);

// Straight-through mask over a [T,1] posterior column: forward is the hard
// rounding, the gradient flows through the soft path.
ad::Var gumbel_mask_op(ad::Tape& t, ad::Var q, double temperature,
                       const std::vector<double>& noise);

// The soft relaxation alone; exposed so finite differences can be run
// through the differentiable path.
ad::Var gumbel_soft_op(ad::Tape& t, ad::Var q, double temperature,
                       const std::vector<double>& noise);

}  // namespace prosody

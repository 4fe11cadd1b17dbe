#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "prosodyrl/audio.hpp"
#include "prosodyrl/emotion.hpp"
#include "prosodyrl/layers.hpp"
#include "prosodyrl/rng.hpp"

namespace prosody {

// One-hot target emotion.
struct EmotionCode {
  std::array<float, kNumEmotions> v{};

  static EmotionCode of(int cls);  // OutOfRange
  int index() const;
  void validate() const;  // InvalidSpec unless exactly one component is 1
};

// Discrete prosody factors. Duration and gain share the 0.25..1.90 range in
// steps of 0.15; pitch covers 0.50..1.50 in steps of 0.10. Index 5 is the
// identity on every grid.
struct ActionGrid {
  std::vector<float> duration;
  std::vector<float> pitch;
  std::vector<float> gain;

  static constexpr int kIdentityIndex = 5;
};

ActionGrid action_grid_default();

struct AgentState {
  AudioBuffer y;
  std::vector<float> segment_mask;  // one contiguous run of 1s, same length as y
  EmotionCode target;

  void validate() const;  // LengthMismatch, InvalidSpec
};

// Convolutional encoder over (waveform, segment mask) channels followed by
// one self-attention block, a global max-pool, and per-factor heads
// conditioned on the target one-hot.
struct AgentModel {
  nn::Conv1d conv1{"agent.c1", 2, 32, 8, 4};
  nn::Conv1d conv2{"agent.c2", 32, 32, 8, 4};
  nn::Conv1d conv3{"agent.c3", 32, 64, 8, 4};
  nn::Conv1d conv4{"agent.c4", 64, 64, 8, 5};
  nn::SelfAttention attn{"agent.attn", 64};
  nn::Linear dur_head{"agent.dur", 64 + kNumEmotions, 12};
  nn::Linear pitch_head{"agent.pitch", 64 + kNumEmotions, 11};
  nn::Linear gain_head{"agent.gain", 64 + kNumEmotions, 12};
  nn::Linear critic_head{"agent.v", 64 + kNumEmotions, 1};

  static constexpr int64_t kMinSamples = 596;  // encoder receptive field

  void init(ad::ParamStore& store, Rng& rng) const;
};

// Tape-level policy outputs for training.
struct PolicyVars {
  ad::Var pi_dur;    // [1,12]
  ad::Var pi_pitch;  // [1,11]
  ad::Var pi_gain;   // [1,12]
  ad::Var value;     // [1,1]
};

PolicyVars policy_forward(nn::Workspace& ws, const AgentModel& model, const AgentState& state);

// Detached policy values for sampling and reporting.
struct PolicyOutput {
  std::vector<double> pi_dur;
  std::vector<double> pi_pitch;
  std::vector<double> pi_gain;
  double value = 0.0;

  void validate() const;  // InvalidSpec when a head is off the simplex
};

PolicyOutput policy_eval(ad::ParamStore& store, const AgentModel& model, const AgentState& state);

struct ActionIndex {
  int dur = 0;
  int pitch = 0;
  int gain = 0;
};

// Independent categorical draw per head.
ActionIndex sample_action(const PolicyOutput& out, Rng& rng);
// Argmax per head, lowest index on ties.
ActionIndex greedy_action(const PolicyOutput& out);

}  // namespace prosody

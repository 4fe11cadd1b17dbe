#pragma once

#include <cstdint>
#include <vector>

#include "prosodyrl/agent.hpp"
#include "prosodyrl/edits.hpp"
#include "prosodyrl/salience.hpp"
#include "prosodyrl/synth.hpp"

namespace prosody {

struct AgentTrainConfig {
  int steps = 5000;
  double lr = 1e-3;
  double entropy_bonus = 0.01;
  bool duration_only = false;
  int reward_window = 200;  // moving-average span for the training log
  uint64_t seed = 4321;
  WsolaParams wsola;
  SalienceConfig salience;

  void validate() const;
};

// Deterministic reward: target-class score of the modified signal minus the
// original, both under the thresholded mask. No gradient flows through here.
double compute_reward(ad::ParamStore& salience_store, const SalienceModel& salience_model,
                      const AudioBuffer& original, const AudioBuffer& modified, int target,
                      const SalienceConfig& cfg, uint64_t eval_seed);

struct ActorCriticLosses {
  double actor = 0.0;
  double critic = 0.0;
};

// One Adam step on actor + critic losses for a single (state, action, reward)
// triple. The advantage uses the critic value as a constant baseline.
ActorCriticLosses actor_critic_update(ad::ParamStore& store, const AgentModel& model,
                                      const AgentState& state, const ActionIndex& action,
                                      double reward, const AgentTrainConfig& cfg);

struct AgentStepLog {
  int step = 0;
  int utterance = 0;
  int target = 0;
  ActionIndex action;
  double reward = 0.0;
  double actor_loss = 0.0;
  double critic_loss = 0.0;
  double reward_avg = 0.0;  // over the last reward_window rewards
  bool skipped = false;     // utterance had no salient segments
};

struct AgentTrainResult {
  ad::ParamStore store;
  std::vector<AgentStepLog> log;
  int skipped = 0;
};

// Single-step episodes: draw an utterance, draw a target class other than the
// labeled one, pick one salient segment uniformly, act, get rewarded by the
// frozen salience model, update.
AgentTrainResult train_agent(const std::vector<CorpusEntry>& corpus,
                             ad::ParamStore& salience_store, const SalienceModel& salience_model,
                             const AgentModel& agent_model, const AgentTrainConfig& cfg);

struct SegmentEditReport {
  int64_t begin = 0;
  int64_t end = 0;
  float duration_factor = 1.0f;
  float pitch_factor = 1.0f;
  float gain = 1.0f;
};

struct ConvertReport {
  std::vector<SegmentEditReport> segments;
  EmotionDistribution before;
  EmotionDistribution after;
  double reward = 0.0;       // after[target] - before[target]
  bool no_segments = false;  // input returned unchanged
};

enum class ConvertPolicy {
  Greedy,  // argmax per head, deterministic
  Sample,  // categorical draw per head
  Random,  // uniform over each grid, agent ignored
};

// Every salient segment gets its own factor triple; the edits are applied in
// one pass and the frozen salience model scores before and after.
AudioBuffer convert(const AudioBuffer& y, int target, ad::ParamStore& agent_store,
                    const AgentModel& agent_model, ad::ParamStore& salience_store,
                    const SalienceModel& salience_model, const AgentTrainConfig& cfg,
                    ConvertPolicy policy, uint64_t seed, ConvertReport* report = nullptr);

struct ConversionEval {
  double mean_reward = 0.0;
  int converted = 0;
  int no_segments = 0;
};

// Mean target-score change over a corpus, one conversion per utterance with
// the target drawn deterministically from classes other than the label.
ConversionEval eval_conversion(const std::vector<CorpusEntry>& corpus,
                               ad::ParamStore& agent_store, const AgentModel& agent_model,
                               ad::ParamStore& salience_store,
                               const SalienceModel& salience_model, const AgentTrainConfig& cfg,
                               ConvertPolicy policy, uint64_t seed);

}  // namespace prosody

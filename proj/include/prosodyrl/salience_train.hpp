#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "prosodyrl/metrics.hpp"
#include "prosodyrl/salience.hpp"
#include "prosodyrl/synth.hpp"

namespace prosody {

struct SalienceTrainConfig {
  int epochs = 30;
  double lr = 1e-3;
  double temperature_start = 1.0;
  double temperature_end = 0.3;
  uint64_t seed = 1234;
  SalienceConfig salience;

  void validate() const;
};

struct SalienceEpochLog {
  int epoch = 0;
  double temperature = 0.0;
  double mean_loss = 0.0;
  double mean_l1 = 0.0;
  double mean_prior = 0.0;
  double mean_sparse = 0.0;
};

struct SalienceTrainResult {
  ad::ParamStore store;
  std::vector<SalienceEpochLog> log;
};

// Batch-size-1 Adam over shuffled epochs with the Gumbel temperature
// annealed linearly from temperature_start to temperature_end.
SalienceTrainResult train_salience(const std::vector<CorpusEntry>& corpus,
                                   const SalienceModel& model, const SalienceTrainConfig& cfg);

struct SalienceMetrics {
  double top1 = 0.0;
  double top2 = 0.0;
  double macro_f1 = 0.0;
  double weighted_f1 = 0.0;
  double median_iou = 0.0;
  ConfusionMatrix confusion;
};

// Deterministic mask sampling from per-item substreams of the eval seed.
SalienceMetrics eval_salience(ad::ParamStore& store, const SalienceModel& model,
                              const std::vector<CorpusEntry>& corpus, const SalienceConfig& cfg,
                              uint64_t seed);

}  // namespace prosody

#pragma once

#include <cstdint>
#include <vector>

#include "prosodyrl/audio.hpp"
#include "prosodyrl/emotion.hpp"
#include "prosodyrl/layers.hpp"
#include "prosodyrl/mask_prior.hpp"
#include "prosodyrl/rng.hpp"

namespace prosody {

struct SalienceConfig {
  double lambda_prior = 1.0;
  double lambda_sparse = 0.1;
  double sparsity_target = 0.01;
  double gumbel_temperature = 1.0;
  double energy_gate_db = -40.0;
  MarkovPrior prior;

  void validate() const;
};

enum class MaskMode {
  Sampled,    // straight-through binary-concrete sample
  Soft,       // posterior probabilities used directly as the mask
  Threshold,  // hard 0/1 at q >= 0.5, detached from the graph
};

struct SampleSpan {
  int64_t begin = 0;  // inclusive
  int64_t end = 0;    // exclusive
  int64_t length() const { return end - begin; }
};

// Raw waveform in, 20 ms feature frames out: four strided convolutions with
// a net hop of 320 samples, then a recurrent mask generator and a masked
// convolutional emotion predictor.
struct SalienceModel {
  static constexpr int64_t kFrameHop = 320;
  static constexpr int64_t kReceptiveField = 596;
  // The predictor convolution needs three feature frames.
  static constexpr int64_t kMinSamples = kReceptiveField + 2 * kFrameHop;

  nn::Conv1d conv1{"ext.c1", 1, 32, 8, 4};
  nn::Conv1d conv2{"ext.c2", 32, 32, 8, 4};
  nn::Conv1d conv3{"ext.c3", 32, 64, 8, 4};
  nn::Conv1d conv4{"ext.c4", 64, 64, 8, 5};
  nn::Gru mask_gru{"mask.gru", 64, 64};
  nn::Linear mask_head{"mask.head", 64, 1};
  nn::Conv1d pred_conv{"pred.conv", 64, 64, 3, 1};
  nn::Linear pred_head{"pred.head", 64, 5};

  void init(ad::ParamStore& store, Rng& rng) const;
  int64_t feature_frames(int64_t samples) const;  // SignalTooShort below kReceptiveField
};

// Frames whose RMS sits below threshold_db relative to the loudest frame.
std::vector<int> energy_gate_mask(const std::vector<float>& energies, double threshold_db);

// Gated frames are forced to the posterior floor; others pass through.
MaskPosterior energy_gate(const MaskPosterior& post, const std::vector<float>& energies,
                          double threshold_db);

// Maximal runs of 1s; runs separated by a single zero frame are merged, runs
// shorter than three frames are dropped, and an inclusive frame run [a,b]
// maps to samples [a*hop, (b+1)*hop + win).
std::vector<SampleSpan> extract_segments(const std::vector<int>& hard_mask, int64_t hop,
                                         int64_t win);

struct SalienceForward {
  ad::Var features;    // [T,64]
  ad::Var posterior;   // [T,1] clamped and energy-gated
  ad::Var mask;        // [T,1]
  ad::Var prediction;  // [1,5] on the simplex
  MaskPosterior posterior_values;
  std::vector<int> hard_mask;
  std::vector<int> gate;
};

SalienceForward salience_forward(nn::Workspace& ws, const SalienceModel& model,
                                 const AudioBuffer& audio, const SalienceConfig& cfg,
                                 MaskMode mode, Rng& rng);

struct SaliencyLossTerms {
  ad::Var total;
  ad::Var l1;
  ad::Var prior;
  ad::Var sparse;
};

// |Y - Yhat|_1 + lambda_prior * chain KL + lambda_sparse * sparsity KL.
SaliencyLossTerms saliency_loss_terms(ad::Tape& t, const EmotionDistribution& label,
                                      const SalienceForward& fwd, const SalienceConfig& cfg);
ad::Var saliency_loss_op(ad::Tape& t, const EmotionDistribution& label,
                         const SalienceForward& fwd, const SalienceConfig& cfg);

struct SalienceOutput {
  MaskPosterior posterior;
  std::vector<int> hard_mask;
  EmotionDistribution prediction;
};

// Inference on a private tape; deterministic given the seed.
SalienceOutput salience_predict(ad::ParamStore& store, const SalienceModel& model,
                                const AudioBuffer& audio, const SalienceConfig& cfg, MaskMode mode,
                                uint64_t seed);

}  // namespace prosody

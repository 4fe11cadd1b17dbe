#include "prosodyrl/salience.hpp"

#include <algorithm>
#include <cmath>

#include "prosodyrl/errors.hpp"
#include "prosodyrl/gumbel.hpp"

namespace prosody {

void SalienceConfig::validate() const {
  require(lambda_prior >= 0.0 && lambda_sparse >= 0.0, Error::Kind::InvalidSpec,
          "loss weights must be nonnegative");
  require(sparsity_target > 0.0 && sparsity_target < 1.0, Error::Kind::InvalidSpec,
          "sparsity target must lie in (0,1)");
  require(gumbel_temperature > 0.0, Error::Kind::InvalidSpec, "temperature must be positive");
  prior.validate();
}

void SalienceModel::init(ad::ParamStore& store, Rng& rng) const {
  conv1.init(store, rng);
  conv2.init(store, rng);
  conv3.init(store, rng);
  conv4.init(store, rng);
  mask_gru.init(store, rng);
  mask_head.init(store, rng);
  pred_conv.init(store, rng);
  pred_head.init(store, rng);
}

int64_t SalienceModel::feature_frames(int64_t samples) const {
  require(samples >= kReceptiveField, Error::Kind::SignalTooShort,
          "signal shorter than the extractor receptive field");
  int64_t t = samples;
  for (const nn::Conv1d* c : {&conv1, &conv2, &conv3, &conv4}) t = c->out_len(t);
  return t;
}

std::vector<int> energy_gate_mask(const std::vector<float>& energies, double threshold_db) {
  float peak = 0.0f;
  for (float e : energies) peak = std::max(peak, e);
  std::vector<int> keep(energies.size(), 0);
  if (peak <= 0.0f) return keep;
  const double floor_rms = static_cast<double>(peak) * std::pow(10.0, threshold_db / 20.0);
  for (std::size_t i = 0; i < energies.size(); ++i)
    keep[i] = static_cast<double>(energies[i]) >= floor_rms ? 1 : 0;
  return keep;
}

MaskPosterior energy_gate(const MaskPosterior& post, const std::vector<float>& energies,
                          double threshold_db) {
  require(static_cast<int64_t>(energies.size()) == post.frames(), Error::Kind::LengthMismatch,
          "one RMS value per posterior frame");
  const std::vector<int> keep = energy_gate_mask(energies, threshold_db);
  MaskPosterior gated = post;
  for (std::size_t i = 0; i < gated.q.size(); ++i)
    if (!keep[i]) gated.q[i] = kPosteriorFloor;
  return gated;
}

std::vector<SampleSpan> extract_segments(const std::vector<int>& hard_mask, int64_t hop,
                                         int64_t win) {
  require(hop > 0 && win > 0, Error::Kind::BadArgument, "hop and win must be positive");

  // Maximal runs as inclusive frame ranges.
  std::vector<std::pair<int64_t, int64_t>> runs;
  const int64_t frames = static_cast<int64_t>(hard_mask.size());
  for (int64_t i = 0; i < frames;) {
    if (!hard_mask[static_cast<std::size_t>(i)]) {
      ++i;
      continue;
    }
    int64_t j = i;
    while (j + 1 < frames && hard_mask[static_cast<std::size_t>(j + 1)]) ++j;
    runs.emplace_back(i, j);
    i = j + 1;
  }

  // Runs separated by fewer than two zero frames belong together.
  std::vector<std::pair<int64_t, int64_t>> merged;
  for (const auto& run : runs) {
    if (!merged.empty() && run.first - merged.back().second - 1 < 2) {
      merged.back().second = run.second;
    } else {
      merged.push_back(run);
    }
  }

  // A run of n frames spans n hops plus one window tail.
  std::vector<SampleSpan> spans;
  for (const auto& [a, b] : merged) {
    if (b - a + 1 < 3) continue;
    spans.push_back({a * hop, (b + 1) * hop + win});
  }
  return spans;
}

namespace {

ad::Tensor audio_column(const AudioBuffer& audio) {
  ad::Tensor x = ad::Tensor::zeros({static_cast<int64_t>(audio.samples.size()), 1});
  std::copy(audio.samples.begin(), audio.samples.end(), x.values.begin());
  return x;
}

}  // namespace

SalienceForward salience_forward(nn::Workspace& ws, const SalienceModel& model,
                                 const AudioBuffer& audio, const SalienceConfig& cfg,
                                 MaskMode mode, Rng& rng) {
  cfg.validate();
  validate_signal(audio);
  ad::Tape& t = ws.tape();

  const int64_t frames = model.feature_frames(static_cast<int64_t>(audio.samples.size()));
  require(frames >= 3, Error::Kind::SignalTooShort, "predictor needs at least three frames");

  SalienceForward out;
  ad::Var x = t.input(audio_column(audio), false);
  ad::Var h = t.relu(model.conv1.forward(ws, x));
  h = t.relu(model.conv2.forward(ws, h));
  h = t.relu(model.conv3.forward(ws, h));
  out.features = t.relu(model.conv4.forward(ws, h));

  ad::Var q_raw = t.clamp(t.sigmoid(model.mask_head.forward(ws, model.mask_gru.forward(ws, out.features))),
                          kPosteriorFloor, 1.0 - kPosteriorFloor);

  // Energy gate as constants on the tape: kept frames pass through, gated
  // frames become the posterior floor with no gradient path.
  constexpr int hop = static_cast<int>(SalienceModel::kFrameHop);
  std::vector<float> energies = frame_energy(audio, hop, hop);
  energies.resize(static_cast<std::size_t>(frames));
  out.gate = energy_gate_mask(energies, cfg.energy_gate_db);
  ad::Tensor keep = ad::Tensor::zeros({frames, 1});
  ad::Tensor floor_fill = ad::Tensor::zeros({frames, 1});
  for (int64_t i = 0; i < frames; ++i) {
    keep.values[static_cast<std::size_t>(i)] = out.gate[static_cast<std::size_t>(i)] ? 1.0f : 0.0f;
    floor_fill.values[static_cast<std::size_t>(i)] =
        out.gate[static_cast<std::size_t>(i)] ? 0.0f : static_cast<float>(kPosteriorFloor);
  }
  out.posterior = t.add(t.mul(q_raw, t.input(keep, false)), t.input(floor_fill, false));

  out.posterior_values.q.resize(static_cast<std::size_t>(frames));
  for (int64_t i = 0; i < frames; ++i)
    out.posterior_values.q[static_cast<std::size_t>(i)] =
        static_cast<double>(out.posterior.val().values[static_cast<std::size_t>(i)]);

  switch (mode) {
    case MaskMode::Sampled: {
      const std::vector<double> noise = gumbel_noise(frames, rng);
      out.mask = gumbel_mask_op(t, out.posterior, cfg.gumbel_temperature, noise);
      break;
    }
    case MaskMode::Soft:
      out.mask = out.posterior;
      break;
    case MaskMode::Threshold: {
      ad::Tensor hard = ad::Tensor::zeros({frames, 1});
      for (int64_t i = 0; i < frames; ++i)
        hard.values[static_cast<std::size_t>(i)] =
            out.posterior_values.q[static_cast<std::size_t>(i)] >= 0.5 ? 1.0f : 0.0f;
      out.mask = t.input(hard, false);
      break;
    }
  }

  out.hard_mask.resize(static_cast<std::size_t>(frames));
  for (int64_t i = 0; i < frames; ++i)
    out.hard_mask[static_cast<std::size_t>(i)] =
        out.mask.val().values[static_cast<std::size_t>(i)] >= 0.5f ? 1 : 0;

  ad::Var masked = t.scale_rows(out.features, out.mask);
  ad::Var p = t.relu(model.pred_conv.forward(ws, masked));
  out.prediction = t.softmax_rows(model.pred_head.forward(ws, t.maxpool_time(p)));
  return out;
}

SaliencyLossTerms saliency_loss_terms(ad::Tape& t, const EmotionDistribution& label,
                                      const SalienceForward& fwd, const SalienceConfig& cfg) {
  ad::Tensor y = ad::Tensor::zeros({1, kNumEmotions});
  for (int i = 0; i < kNumEmotions; ++i)
    y.values[static_cast<std::size_t>(i)] = label.p[static_cast<std::size_t>(i)];

  SaliencyLossTerms terms;
  terms.l1 = t.sum(t.abs(t.sub(t.input(y, false), fwd.prediction)));
  terms.prior = prior_kl_chain_op(t, fwd.posterior, cfg.prior);
  terms.sparse = sparsity_loss_op(t, fwd.posterior, cfg.sparsity_target);
  terms.total = t.add(terms.l1, t.add(t.scale(terms.prior, cfg.lambda_prior, 0.0),
                                      t.scale(terms.sparse, cfg.lambda_sparse, 0.0)));
  return terms;
}

ad::Var saliency_loss_op(ad::Tape& t, const EmotionDistribution& label,
                         const SalienceForward& fwd, const SalienceConfig& cfg) {
  return saliency_loss_terms(t, label, fwd, cfg).total;
}

SalienceOutput salience_predict(ad::ParamStore& store, const SalienceModel& model,
                                const AudioBuffer& audio, const SalienceConfig& cfg, MaskMode mode,
                                uint64_t seed) {
  ad::Tape t;
  nn::Workspace ws(t, store, false);
  Rng rng(seed);
  const SalienceForward fwd = salience_forward(ws, model, audio, cfg, mode, rng);

  SalienceOutput out;
  out.posterior = fwd.posterior_values;
  out.hard_mask = fwd.hard_mask;
  for (int i = 0; i < kNumEmotions; ++i)
    out.prediction.p[static_cast<std::size_t>(i)] =
        fwd.prediction.val().values[static_cast<std::size_t>(i)];
  out.prediction.validate();
  return out;
}

}  // namespace prosody

#include "prosodyrl/salience_train.hpp"

#include <algorithm>
#include <numeric>
#include <utility>

#include "prosodyrl/errors.hpp"
#include "prosodyrl/wav_io.hpp"

namespace prosody {

void SalienceTrainConfig::validate() const {
  require(epochs >= 1, Error::Kind::InvalidSpec, "need at least one epoch");
  require(lr > 0.0, Error::Kind::InvalidSpec, "learning rate must be positive");
  require(temperature_start > 0.0 && temperature_end > 0.0, Error::Kind::InvalidSpec,
          "temperatures must be positive");
  salience.validate();
}

SalienceTrainResult train_salience(const std::vector<CorpusEntry>& corpus,
                                   const SalienceModel& model, const SalienceTrainConfig& cfg) {
  cfg.validate();
  require(!corpus.empty(), Error::Kind::EmptyCorpus, "empty training corpus");

  std::vector<AudioBuffer> audio;
  audio.reserve(corpus.size());
  for (const CorpusEntry& e : corpus) audio.push_back(read_wav(e.path));

  Rng master(cfg.seed);
  SalienceTrainResult result;
  {
    Rng init = master.substream("init");
    model.init(result.store, init);
  }

  const int64_t items = static_cast<int64_t>(corpus.size());
  std::vector<int64_t> order(corpus.size());
  ad::AdamConfig adam;
  adam.lr = cfg.lr;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    SalienceConfig round = cfg.salience;
    const double frac = cfg.epochs > 1 ? static_cast<double>(epoch) / (cfg.epochs - 1) : 1.0;
    round.gumbel_temperature =
        cfg.temperature_start + (cfg.temperature_end - cfg.temperature_start) * frac;

    std::iota(order.begin(), order.end(), 0);
    Rng shuffle = master.substream("shuffle", static_cast<uint64_t>(epoch));
    for (int64_t i = items - 1; i > 0; --i)
      std::swap(order[static_cast<std::size_t>(i)],
                order[static_cast<std::size_t>(shuffle.uniform_int(static_cast<int>(i) + 1))]);

    SalienceEpochLog log;
    log.epoch = epoch;
    log.temperature = round.gumbel_temperature;
    for (int64_t step = 0; step < items; ++step) {
      const int64_t idx = order[static_cast<std::size_t>(step)];
      Rng noise = master.substream("gumbel", static_cast<uint64_t>(epoch) *
                                                     static_cast<uint64_t>(items) +
                                                 static_cast<uint64_t>(step));
      ad::Tape t;
      nn::Workspace ws(t, result.store);
      const SalienceForward fwd = salience_forward(ws, model, audio[static_cast<std::size_t>(idx)],
                                                   round, MaskMode::Sampled, noise);
      const SaliencyLossTerms terms =
          saliency_loss_terms(t, corpus[static_cast<std::size_t>(idx)].saliency, fwd, round);
      t.backward(terms.total);
      result.store.adam_step(ws.grads(), adam);

      log.mean_loss += t.scalar64(terms.total);
      log.mean_l1 += t.scalar64(terms.l1);
      log.mean_prior += t.scalar64(terms.prior);
      log.mean_sparse += t.scalar64(terms.sparse);
    }
    log.mean_loss /= static_cast<double>(items);
    log.mean_l1 /= static_cast<double>(items);
    log.mean_prior /= static_cast<double>(items);
    log.mean_sparse /= static_cast<double>(items);
    result.log.push_back(log);
  }
  return result;
}

SalienceMetrics eval_salience(ad::ParamStore& store, const SalienceModel& model,
                              const std::vector<CorpusEntry>& corpus, const SalienceConfig& cfg,
                              uint64_t seed) {
  cfg.validate();
  require(!corpus.empty(), Error::Kind::EmptyCorpus, "empty evaluation corpus");

  Rng master(seed);
  SalienceMetrics m;
  std::vector<double> ious;
  int64_t top1_hits = 0;
  int64_t top2_hits = 0;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const CorpusEntry& entry = corpus[i];
    const AudioBuffer audio = read_wav(entry.path);
    const uint64_t item_seed = master.substream("eval", static_cast<uint64_t>(i)).seed();
    const SalienceOutput out =
        salience_predict(store, model, audio, cfg, MaskMode::Sampled, item_seed);

    const int truth = entry.saliency.argmax();
    const int predicted = out.prediction.argmax();
    m.confusion.add(truth, predicted);
    if (predicted == truth) ++top1_hits;
    if (out.prediction.in_top2(truth)) ++top2_hits;

    const std::vector<SampleSpan> spans =
        extract_segments(out.hard_mask, SalienceModel::kFrameHop, SalienceModel::kFrameHop);
    ious.push_back(span_iou(spans, SampleSpan{entry.cue_start, entry.cue_end}));
  }

  const double n = static_cast<double>(corpus.size());
  m.top1 = static_cast<double>(top1_hits) / n;
  m.top2 = static_cast<double>(top2_hits) / n;
  m.macro_f1 = macro_f1(m.confusion);
  m.weighted_f1 = weighted_f1(m.confusion);
  m.median_iou = median(std::move(ious));
  return m;
}

}  // namespace prosody

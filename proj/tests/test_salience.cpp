#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <vector>

#include "doctest.h"
#include "prosodyrl/errors.hpp"
#include "prosodyrl/metrics.hpp"
#include "prosodyrl/salience.hpp"
#include "prosodyrl/salience_train.hpp"
#include "prosodyrl/synth.hpp"

using namespace prosody;
using namespace prosody::ad;

namespace {

Error::Kind kind_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an Error");
  return Error::Kind::IoError;
}

AudioBuffer test_utterance(int emotion, uint64_t seed) {
  SyntheticSpec spec;
  return gen_synthetic_utterance(spec, emotion, seed).audio;
}

}  // namespace

TEST_CASE("feature frame arithmetic") {
  SalienceModel model;
  CHECK(model.feature_frames(32000) == 99);
  CHECK(model.feature_frames(SalienceModel::kReceptiveField) == 1);
  // One net hop advances the frame count by one.
  CHECK(model.feature_frames(SalienceModel::kReceptiveField + SalienceModel::kFrameHop) == 2);
  CHECK(kind_of([&] { model.feature_frames(500); }) == Error::Kind::SignalTooShort);
}

TEST_CASE("salience prediction is deterministic and on the simplex") {
  SalienceModel model;
  ParamStore store;
  Rng rng(11);
  model.init(store, rng);
  SalienceConfig cfg;

  const AudioBuffer audio = test_utterance(2, 500);
  const SalienceOutput a = salience_predict(store, model, audio, cfg, MaskMode::Sampled, 9001);
  const SalienceOutput b = salience_predict(store, model, audio, cfg, MaskMode::Sampled, 9001);

  float sum = 0.0f;
  for (int i = 0; i < kNumEmotions; ++i) sum += a.prediction[i];
  CHECK(std::fabs(sum - 1.0f) <= 1e-6f);

  REQUIRE(a.posterior.frames() == 99);
  REQUIRE(b.posterior.frames() == 99);
  for (std::size_t i = 0; i < a.posterior.q.size(); ++i) {
    CHECK(a.posterior.q[i] == b.posterior.q[i]);
    // Slack of one float32 ulp around the clamp bounds.
    CHECK(a.posterior.q[i] >= kPosteriorFloor - 1e-9);
    CHECK(a.posterior.q[i] <= 1.0 - kPosteriorFloor + 1e-7);
  }
  CHECK(a.hard_mask == b.hard_mask);
  for (int m : a.hard_mask) CHECK((m == 0 || m == 1));
  for (int i = 0; i < kNumEmotions; ++i) CHECK(a.prediction[i] == b.prediction[i]);

  AudioBuffer tiny;
  tiny.sample_rate = 16000;
  tiny.samples.assign(1200, 0.1f);
  CHECK(kind_of([&] { salience_predict(store, model, tiny, cfg, MaskMode::Sampled, 1); }) ==
        Error::Kind::SignalTooShort);
}

TEST_CASE("an all-zero mask blocks audio content from the predictor") {
  SalienceModel model;
  ParamStore store;
  Rng rng(12);
  model.init(store, rng);
  // A strongly negative mask-head bias drives every posterior to the floor,
  // so thresholding yields the empty mask.
  store.get("mask.head.b").values[0] = -30.0f;
  SalienceConfig cfg;

  const AudioBuffer first = test_utterance(0, 1000);
  const AudioBuffer second = test_utterance(3, 2000);
  REQUIRE(first.samples.size() == second.samples.size());

  const SalienceOutput pa = salience_predict(store, model, first, cfg, MaskMode::Threshold, 1);
  const SalienceOutput pb = salience_predict(store, model, second, cfg, MaskMode::Threshold, 1);
  for (int m : pa.hard_mask) CHECK(m == 0);
  for (int i = 0; i < kNumEmotions; ++i) CHECK(pa.prediction[i] == pb.prediction[i]);
}

TEST_CASE("loss terms combine l1 and the two divergences") {
  SalienceConfig cfg;

  EmotionDistribution label;
  label.p = {0.1f, 0.6f, 0.1f, 0.1f, 0.1f};

  Tensor pred = Tensor::zeros({1, 5});
  pred.values = {0.2f, 0.5f, 0.1f, 0.1f, 0.1f};

  Tensor q = Tensor::zeros({3, 1});
  for (auto& v : q.values) v = 0.01f;

  Tape t;
  SalienceForward fwd;
  fwd.prediction = t.input(pred, false);
  fwd.posterior = t.input(q, false);

  const SaliencyLossTerms terms = saliency_loss_terms(t, label, fwd, cfg);
  CHECK(t.scalar64(terms.l1) == doctest::Approx(0.2).epsilon(1e-6));
  // The posterior sits at the sparsity target up to float32 quantization.
  CHECK(t.scalar64(terms.sparse) <= 1e-6);

  MaskPosterior post;
  post.q.assign(3, static_cast<double>(q.values[0]));
  CHECK(t.scalar64(terms.prior) ==
        doctest::Approx(prior_kl_chain(post, cfg.prior)).epsilon(1e-5));
  CHECK(t.scalar64(terms.total) ==
        doctest::Approx(0.2 + cfg.lambda_prior * prior_kl_chain(post, cfg.prior)).epsilon(1e-4));
  CHECK(t.scalar64(terms.total) >= 0.0);
}

TEST_CASE("confusion counts produce the textbook f1 scores") {
  ConfusionMatrix cm;
  cm.add(0, 0);
  cm.add(0, 0);
  cm.add(0, 1);
  cm.add(1, 1);
  cm.add(1, 1);
  cm.add(1, 1);

  CHECK(cm.total() == 6);
  CHECK(cm.row_total(0) == 3);
  CHECK(cm.col_total(1) == 4);

  // Class 0: precision 1, recall 2/3. Class 1: precision 3/4, recall 1.
  CHECK(class_f1(cm, 0) == doctest::Approx(0.8).epsilon(1e-9));
  CHECK(class_f1(cm, 1) == doctest::Approx(6.0 / 7.0).epsilon(1e-9));
  CHECK(class_f1(cm, 2) == 0.0);
  CHECK(macro_f1(cm) == doctest::Approx((0.8 + 6.0 / 7.0) / 5.0).epsilon(1e-9));
  CHECK(weighted_f1(cm) == doctest::Approx((3 * 0.8 + 3 * 6.0 / 7.0) / 6.0).epsilon(1e-9));

  CHECK(kind_of([&] { cm.add(5, 0); }) == Error::Kind::OutOfRange);
}

TEST_CASE("span iou and median oracles") {
  const SampleSpan ref{50, 150};
  CHECK(span_iou({{0, 100}}, ref) == doctest::Approx(50.0 / 150.0).epsilon(1e-9));
  CHECK(span_iou({{0, 50}, {100, 150}}, ref) == doctest::Approx(50.0 / 150.0).epsilon(1e-9));
  CHECK(span_iou({{50, 150}}, ref) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(span_iou({}, ref) == 0.0);
  CHECK(span_iou({{300, 400}}, ref) == 0.0);
  CHECK(kind_of([&] { span_iou({{0, 10}}, SampleSpan{20, 20}); }) == Error::Kind::BadArgument);

  CHECK(median({3.0, 1.0, 2.0}) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(median({4.0, 1.0, 3.0, 2.0}) == doctest::Approx(2.5).epsilon(1e-12));
  CHECK(kind_of([&] { median({}); }) == Error::Kind::BadArgument);
}

TEST_CASE("short training run steps the optimizer and reproduces itself") {
  const std::string dir = (std::filesystem::temp_directory_path() / "prosodyrl_sal_test").string();
  std::filesystem::remove_all(dir);
  SyntheticSpec spec;
  const std::string manifest = gen_corpus(spec, 2, dir, 321);
  const std::vector<CorpusEntry> corpus = load_manifest(manifest);
  REQUIRE(corpus.size() == 10);

  SalienceModel model;
  SalienceTrainConfig cfg;
  cfg.epochs = 6;
  cfg.seed = 77;

  const SalienceTrainResult first = train_salience(corpus, model, cfg);
  REQUIRE(static_cast<int>(first.log.size()) == cfg.epochs);
  CHECK(first.store.step_count() == static_cast<int64_t>(cfg.epochs * corpus.size()));
  CHECK(first.log.front().temperature == doctest::Approx(1.0));
  CHECK(first.log.back().temperature == doctest::Approx(0.3));
  for (const SalienceEpochLog& row : first.log) {
    CHECK(std::isfinite(row.mean_loss));
    CHECK(row.mean_l1 >= 0.0);
    CHECK(row.mean_prior >= 0.0);
    CHECK(row.mean_sparse >= 0.0);
  }
  CHECK(first.log.back().mean_loss < first.log.front().mean_loss);

  SalienceTrainResult second = train_salience(corpus, model, cfg);
  for (std::size_t i = 0; i < first.log.size(); ++i)
    CHECK(std::fabs(first.log[i].mean_loss - second.log[i].mean_loss) <= 1e-9);

  const SalienceMetrics metrics =
      eval_salience(second.store, model, corpus, cfg.salience, cfg.seed);
  CHECK(metrics.confusion.total() == 10);
  CHECK(metrics.top1 >= 0.0);
  CHECK(metrics.top1 <= 1.0);
  CHECK(metrics.top2 >= metrics.top1);
  CHECK(metrics.median_iou >= 0.0);
  CHECK(metrics.median_iou <= 1.0);

  std::filesystem::remove_all(dir);
}

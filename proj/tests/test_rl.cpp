#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <vector>

#include "doctest.h"
#include "prosodyrl/agent.hpp"
#include "prosodyrl/bandit.hpp"
#include "prosodyrl/errors.hpp"
#include "prosodyrl/rl_train.hpp"
#include "prosodyrl/synth.hpp"
#include "prosodyrl/wav_io.hpp"

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

AgentState make_state(int64_t len, int64_t span_begin, int64_t span_end, int target) {
  AgentState state;
  state.y.sample_rate = 16000;
  state.y.samples.resize(static_cast<std::size_t>(len));
  for (int64_t i = 0; i < len; ++i)
    state.y.samples[static_cast<std::size_t>(i)] =
        0.3f * std::sin(2.0f * 3.14159265f * 220.0f * static_cast<float>(i) / 16000.0f);
  state.segment_mask.assign(static_cast<std::size_t>(len), 0.0f);
  for (int64_t i = span_begin; i < span_end; ++i)
    state.segment_mask[static_cast<std::size_t>(i)] = 1.0f;
  state.target = EmotionCode::of(target);
  return state;
}

}  // namespace

TEST_CASE("action grids follow the published ranges") {
  const ActionGrid grid = action_grid_default();
  REQUIRE(grid.duration.size() == 12);
  REQUIRE(grid.pitch.size() == 11);
  REQUIRE(grid.gain.size() == 12);

  CHECK(grid.duration.front() == 0.25f);
  CHECK(grid.duration.back() == 1.9f);
  CHECK(grid.pitch.front() == 0.5f);
  CHECK(grid.pitch.back() == 1.5f);
  CHECK(grid.gain == grid.duration);

  // The identity action sits at index 5 on every grid.
  CHECK(grid.duration[ActionGrid::kIdentityIndex] == 1.0f);
  CHECK(grid.pitch[ActionGrid::kIdentityIndex] == 1.0f);
  CHECK(grid.gain[ActionGrid::kIdentityIndex] == 1.0f);

  for (std::size_t i = 0; i < grid.duration.size(); ++i)
    CHECK(grid.duration[i] == doctest::Approx(0.25 + 0.15 * static_cast<double>(i)).epsilon(1e-7));
  for (float f : grid.duration) CHECK(f > 0.0f);
  for (float f : grid.pitch) CHECK(f > 0.0f);
}

TEST_CASE("emotion codes are strict one-hots") {
  const EmotionCode code = EmotionCode::of(3);
  code.validate();
  CHECK(code.index() == 3);
  CHECK(code.v[3] == 1.0f);

  CHECK(kind_of([] { EmotionCode::of(5); }) == Error::Kind::OutOfRange);
  CHECK(kind_of([] { EmotionCode::of(-1); }) == Error::Kind::OutOfRange);

  EmotionCode two = EmotionCode::of(0);
  two.v[4] = 1.0f;
  CHECK(kind_of([&] { two.validate(); }) == Error::Kind::InvalidSpec);

  EmotionCode frac = EmotionCode::of(0);
  frac.v[2] = 0.5f;
  CHECK(kind_of([&] { frac.validate(); }) == Error::Kind::InvalidSpec);
}

TEST_CASE("agent states require one contiguous masked run") {
  AgentState good = make_state(2000, 400, 900, 1);
  good.validate();

  AgentState short_mask = good;
  short_mask.segment_mask.pop_back();
  CHECK(kind_of([&] { short_mask.validate(); }) == Error::Kind::LengthMismatch);

  AgentState split = good;
  split.segment_mask[1500] = 1.0f;
  CHECK(kind_of([&] { split.validate(); }) == Error::Kind::InvalidSpec);

  AgentState empty = good;
  std::fill(empty.segment_mask.begin(), empty.segment_mask.end(), 0.0f);
  CHECK(kind_of([&] { empty.validate(); }) == Error::Kind::InvalidSpec);

  AgentState fractional = good;
  fractional.segment_mask[500] = 0.5f;
  CHECK(kind_of([&] { fractional.validate(); }) == Error::Kind::InvalidSpec);
}

TEST_CASE("policy forward emits simplices and is deterministic") {
  AgentModel model;
  ParamStore store;
  Rng rng(21);
  model.init(store, rng);

  const AgentState state = make_state(2000, 400, 900, 2);
  const PolicyOutput a = policy_eval(store, model, state);
  const PolicyOutput b = policy_eval(store, model, state);

  REQUIRE(a.pi_dur.size() == 12);
  REQUIRE(a.pi_pitch.size() == 11);
  REQUIRE(a.pi_gain.size() == 12);
  a.validate();
  CHECK(a.pi_dur == b.pi_dur);
  CHECK(a.pi_pitch == b.pi_pitch);
  CHECK(a.pi_gain == b.pi_gain);
  CHECK(a.value == b.value);

  const AgentState other = make_state(2000, 100, 700, 2);
  const PolicyOutput c = policy_eval(store, model, other);
  bool differs = false;
  for (std::size_t i = 0; i < a.pi_dur.size(); ++i) differs |= a.pi_dur[i] != c.pi_dur[i];
  CHECK(differs);

  CHECK(kind_of([&] {
          const AgentState tiny = make_state(500, 100, 300, 0);
          policy_eval(store, model, tiny);
        }) == Error::Kind::SignalTooShort);
}

TEST_CASE("action sampling is calibrated and seed-stable") {
  PolicyOutput uniform;
  uniform.pi_dur.assign(12, 1.0 / 12.0);
  uniform.pi_pitch.assign(11, 1.0 / 11.0);
  uniform.pi_gain.assign(12, 1.0 / 12.0);
  uniform.value = 0.0;

  Rng rng(55);
  std::vector<int> counts(12, 0);
  const int draws = 100000;
  for (int i = 0; i < draws; ++i) ++counts[static_cast<std::size_t>(sample_action(uniform, rng).dur)];
  for (int c : counts)
    CHECK(std::fabs(static_cast<double>(c) / draws - 1.0 / 12.0) <= 0.01);

  PolicyOutput degenerate = uniform;
  degenerate.pi_pitch.assign(11, 0.0);
  degenerate.pi_pitch[7] = 1.0;
  for (int i = 0; i < 100; ++i) CHECK(sample_action(degenerate, rng).pitch == 7);

  Rng ra(9), rb(9);
  const ActionIndex ia = sample_action(uniform, ra);
  const ActionIndex ib = sample_action(uniform, rb);
  CHECK(ia.dur == ib.dur);
  CHECK(ia.pitch == ib.pitch);
  CHECK(ia.gain == ib.gain);

  PolicyOutput peaked = uniform;
  peaked.pi_gain.assign(12, 0.001);
  peaked.pi_gain[4] = 1.0 - 0.011;
  CHECK(greedy_action(peaked).gain == 4);
  CHECK(greedy_action(uniform).dur == 0);  // ties break to the lowest index
}

TEST_CASE("reward is zero for the unmodified signal and bounded") {
  SalienceModel smodel;
  ParamStore sstore;
  Rng rng(31);
  smodel.init(sstore, rng);
  SalienceConfig scfg;

  SyntheticSpec spec;
  const AudioBuffer audio = gen_synthetic_utterance(spec, 1, 77).audio;

  CHECK(compute_reward(sstore, smodel, audio, audio, 2, scfg, 5) == 0.0);

  AudioBuffer louder = audio;
  for (float& s : louder.samples) s = std::min(1.0f, std::max(-1.0f, s * 1.4f));
  const double r = compute_reward(sstore, smodel, audio, louder, 2, scfg, 5);
  CHECK(r >= -1.0);
  CHECK(r <= 1.0);

  // Identity factors applied through the editor stay within reward noise.
  AgentTrainConfig cfg;
  SegmentEdit edit;
  edit.begin = 4000;
  edit.end = 12000;
  const AudioBuffer same = apply_edits(audio, {edit}, cfg.wsola);
  CHECK(std::fabs(compute_reward(sstore, smodel, audio, same, 1, scfg, 5)) <= 0.02);
}

TEST_CASE("actor critic updates move the policy the right way") {
  const AgentState state = make_state(2000, 400, 900, 1);
  AgentTrainConfig cfg;
  cfg.entropy_bonus = 0.0;
  cfg.lr = 1e-2;

  // Critic regression: repeated updates on a fixed reward pull V to it.
  {
    AgentModel model;
    ParamStore store;
    Rng rng(41);
    model.init(store, rng);
    const double reward = 0.37;
    ActionIndex action{3, 4, 5};
    for (int i = 0; i < 400; ++i) actor_critic_update(store, model, state, action, reward, cfg);
    const PolicyOutput out = policy_eval(store, model, state);
    CHECK(std::fabs(out.value - reward) <= 1e-2);
  }

  // A positive advantage raises the probability of the taken action.
  {
    AgentModel model;
    ParamStore store;
    Rng rng(42);
    model.init(store, rng);
    AgentTrainConfig slow = cfg;
    slow.lr = 1e-3;
    const PolicyOutput before = policy_eval(store, model, state);
    const ActionIndex action{2, 6, 9};
    const double reward = before.value + 1.0;  // advantage exactly +1
    actor_critic_update(store, model, state, action, reward, slow);
    const PolicyOutput after = policy_eval(store, model, state);
    CHECK(after.pi_dur[2] > before.pi_dur[2]);
    CHECK(after.pi_pitch[6] > before.pi_pitch[6]);
    CHECK(after.pi_gain[9] > before.pi_gain[9]);
  }

  // Zero advantage and zero entropy bonus leave the parameters still.
  {
    AgentModel model;
    ParamStore store;
    Rng rng(43);
    model.init(store, rng);
    const PolicyOutput before = policy_eval(store, model, state);
    actor_critic_update(store, model, state, {1, 1, 1}, before.value, cfg);
    const PolicyOutput after = policy_eval(store, model, state);
    for (std::size_t i = 0; i < before.pi_dur.size(); ++i)
      CHECK(std::fabs(after.pi_dur[i] - before.pi_dur[i]) <= 1e-7);
    CHECK(std::fabs(after.value - before.value) <= 1e-6);
  }

  // Duration-only training leaves the other heads untouched.
  {
    AgentModel model;
    ParamStore store;
    Rng rng(44);
    model.init(store, rng);
    AgentTrainConfig dur_cfg = cfg;
    dur_cfg.duration_only = true;
    const Tensor pitch_before = store.get("agent.pitch.w");
    actor_critic_update(store, model, state, {0, 5, 5}, 0.5, dur_cfg);
    const Tensor& pitch_after = store.get("agent.pitch.w");
    for (std::size_t i = 0; i < pitch_before.values.size(); ++i)
      CHECK(pitch_before.values[i] == pitch_after.values[i]);
  }
}

TEST_CASE("bandit suite validates the policy gradient estimator") {
  const BanditReport report = reinforce_bandit_check(2024);

  CHECK(report.exact_grad[0] == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  CHECK(report.exact_grad[1] == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
  CHECK(report.exact_grad[2] == doctest::Approx(-1.0 / 3.0).epsilon(1e-12));

  CHECK(report.estimator_within_2se);
  for (double se : report.mc_se) CHECK(se > 0.0);
  CHECK(report.variance_with_baseline < report.variance_without_baseline);

  CHECK(report.steps_to_confident >= 0);
  CHECK(report.steps_to_confident <= 2000);
  CHECK(report.final_policy[0] >= 0.95);

  // Degenerate policy: the exact gradient vanishes on a deterministic arm.
  const double er = 1.0;
  for (int j = 0; j < 3; ++j) {
    const double pi_j = j == 0 ? 1.0 : 0.0;
    const double r_j = j == 0 ? 1.0 : (j == 1 ? 0.0 : -1.0);
    CHECK(pi_j * (r_j - er) == 0.0);
  }

  const BanditReport again = reinforce_bandit_check(2024);
  CHECK(again.mc_grad == report.mc_grad);
  CHECK(again.final_policy == report.final_policy);
}

TEST_CASE("short agent training runs are reproducible") {
  const std::string dir = (std::filesystem::temp_directory_path() / "prosodyrl_rl_test").string();
  std::filesystem::remove_all(dir);
  SyntheticSpec spec;
  const std::vector<CorpusEntry> corpus = load_manifest(gen_corpus(spec, 1, dir, 87));
  REQUIRE(corpus.size() == 5);

  SalienceModel smodel;
  ParamStore sstore;
  Rng rng(61);
  smodel.init(sstore, rng);
  // An untrained mask generator rarely crosses the 0.5 threshold; a positive
  // head bias guarantees salient segments for the environment loop.
  sstore.get("mask.head.b").values[0] = 5.0f;

  AgentModel amodel;
  AgentTrainConfig cfg;
  cfg.steps = 12;
  cfg.reward_window = 5;
  cfg.seed = 99;

  AgentTrainResult first = train_agent(corpus, sstore, smodel, amodel, cfg);
  REQUIRE(static_cast<int>(first.log.size()) == cfg.steps);
  int updates = 0;
  for (const AgentStepLog& row : first.log) {
    if (row.skipped) continue;
    ++updates;
    CHECK(row.reward >= -1.0);
    CHECK(row.reward <= 1.0);
    CHECK(row.action.dur >= 0);
    CHECK(row.action.dur < 12);
    CHECK(row.action.pitch >= 0);
    CHECK(row.action.pitch < 11);
    CHECK(row.action.gain >= 0);
    CHECK(row.action.gain < 12);
    CHECK(std::isfinite(row.actor_loss));
    CHECK(std::isfinite(row.critic_loss));
  }
  CHECK(first.store.step_count() == updates);
  CHECK(first.skipped == cfg.steps - updates);
  CHECK(updates > 0);

  const AgentTrainResult second = train_agent(corpus, sstore, smodel, amodel, cfg);
  for (std::size_t i = 0; i < first.log.size(); ++i) {
    CHECK(first.log[i].reward == second.log[i].reward);
    CHECK(first.log[i].utterance == second.log[i].utterance);
    CHECK(first.log[i].target == second.log[i].target);
  }

  // Conversion on a buffer with salient segments: deterministic greedy path.
  const AudioBuffer audio = read_wav(corpus[0].path);
  ConvertReport ra, rb;
  const AudioBuffer ca = convert(audio, 2, first.store, amodel, sstore, smodel, cfg,
                                 ConvertPolicy::Greedy, 7, &ra);
  const AudioBuffer cb = convert(audio, 2, first.store, amodel, sstore, smodel, cfg,
                                 ConvertPolicy::Greedy, 8, &rb);
  CHECK(ca.samples == cb.samples);
  CHECK(ra.reward == rb.reward);
  REQUIRE(!ra.no_segments);
  REQUIRE(!ra.segments.empty());

  const ActionGrid grid = action_grid_default();
  int64_t coverage = 0;
  for (const SegmentEditReport& seg : ra.segments) {
    CHECK(std::count(grid.duration.begin(), grid.duration.end(), seg.duration_factor) == 1);
    CHECK(std::count(grid.pitch.begin(), grid.pitch.end(), seg.pitch_factor) == 1);
    CHECK(std::count(grid.gain.begin(), grid.gain.end(), seg.gain) == 1);
    CHECK(seg.begin < seg.end);
    coverage += seg.end - seg.begin;
  }
  ra.before.validate();
  ra.after.validate();
  CHECK(ra.reward ==
        doctest::Approx(static_cast<double>(ra.after[2]) - static_cast<double>(ra.before[2]))
            .epsilon(1e-12));

  // Output length stays within the grid's stretch bounds over the edited part.
  const int64_t len_in = static_cast<int64_t>(audio.samples.size());
  const int64_t len_out = static_cast<int64_t>(ca.samples.size());
  const int64_t slack = 1024 * static_cast<int64_t>(ra.segments.size());
  CHECK(len_out >= len_in - coverage + static_cast<int64_t>(0.25 * coverage) - slack);
  CHECK(len_out <= len_in - coverage + static_cast<int64_t>(1.9 * coverage) + slack);

  // Silence has no salient segments: input passes through untouched.
  AudioBuffer silent;
  silent.sample_rate = 16000;
  silent.samples.assign(4000, 0.0f);
  ConvertReport rs;
  const AudioBuffer cs = convert(silent, 1, first.store, amodel, sstore, smodel, cfg,
                                 ConvertPolicy::Greedy, 7, &rs);
  CHECK(rs.no_segments);
  CHECK(cs.samples == silent.samples);
  CHECK(rs.reward == 0.0);

  std::filesystem::remove_all(dir);
}

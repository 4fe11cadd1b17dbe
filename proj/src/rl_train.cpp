#include "prosodyrl/rl_train.hpp"

#include <algorithm>
#include <deque>

#include "prosodyrl/errors.hpp"
#include "prosodyrl/wav_io.hpp"

namespace prosody {

void AgentTrainConfig::validate() const {
  require(steps >= 1, Error::Kind::InvalidSpec, "steps must be positive");
  require(lr > 0.0, Error::Kind::InvalidSpec, "learning rate must be positive");
  require(entropy_bonus >= 0.0, Error::Kind::InvalidSpec, "entropy bonus must be non-negative");
  require(reward_window >= 1, Error::Kind::InvalidSpec, "reward window must be positive");
  wsola.validate();
  salience.validate();
}

double compute_reward(ad::ParamStore& salience_store, const SalienceModel& salience_model,
                      const AudioBuffer& original, const AudioBuffer& modified, int target,
                      const SalienceConfig& cfg, uint64_t eval_seed) {
  require(target >= 0 && target < kNumEmotions, Error::Kind::OutOfRange,
          "target class out of range");
  const EmotionDistribution before =
      salience_predict(salience_store, salience_model, original, cfg, MaskMode::Threshold,
                       eval_seed)
          .prediction;
  const EmotionDistribution after =
      salience_predict(salience_store, salience_model, modified, cfg, MaskMode::Threshold,
                       eval_seed)
          .prediction;
  return static_cast<double>(after[target]) - static_cast<double>(before[target]);
}

namespace {

struct AcLossVars {
  ad::Var actor;
  ad::Var critic;
};

// Actor: -A * log pi(action) - c_H * entropy, with the advantage A = r - V held
// constant. Critic: squared error to the reward.
AcLossVars build_ac_loss(ad::Tape& t, const PolicyVars& pv, const ActionIndex& action,
                         double reward, const AgentTrainConfig& cfg) {
  const double advantage = reward - t.scalar64(pv.value);

  auto logp_at = [&t](ad::Var pi, int idx) {
    return t.log(t.slice_cols(pi, idx, idx + 1));
  };
  auto entropy = [&t](ad::Var pi) { return t.scale(t.sum(t.mul(pi, t.log(pi))), -1.0); };

  ad::Var logp = logp_at(pv.pi_dur, action.dur);
  ad::Var ent = entropy(pv.pi_dur);
  if (!cfg.duration_only) {
    logp = t.add(logp, logp_at(pv.pi_pitch, action.pitch));
    logp = t.add(logp, logp_at(pv.pi_gain, action.gain));
    ent = t.add(ent, entropy(pv.pi_pitch));
    ent = t.add(ent, entropy(pv.pi_gain));
  }

  AcLossVars out;
  out.actor = t.sub(t.scale(logp, -advantage), t.scale(ent, cfg.entropy_bonus));
  ad::Var diff = t.sub(t.input(ad::Tensor::scalar(reward), false), pv.value);
  out.critic = t.mul(diff, diff);
  return out;
}

PolicyOutput detach_policy(const ad::Tape& t, const PolicyVars& pv) {
  PolicyOutput out;
  for (float p : t.value(pv.pi_dur).values) out.pi_dur.push_back(static_cast<double>(p));
  for (float p : t.value(pv.pi_pitch).values) out.pi_pitch.push_back(static_cast<double>(p));
  for (float p : t.value(pv.pi_gain).values) out.pi_gain.push_back(static_cast<double>(p));
  out.value = t.scalar64(pv.value);
  out.validate();
  return out;
}

std::vector<SampleSpan> clamped_segments(const std::vector<int>& hard_mask, int64_t len) {
  std::vector<SampleSpan> spans =
      extract_segments(hard_mask, SalienceModel::kFrameHop, SalienceModel::kFrameHop);
  std::vector<SampleSpan> kept;
  for (SampleSpan s : spans) {
    s.end = std::min(s.end, len);
    if (s.begin < s.end) kept.push_back(s);
  }
  return kept;
}

std::vector<float> span_mask(std::size_t len, const SampleSpan& span) {
  std::vector<float> mask(len, 0.0f);
  for (int64_t i = span.begin; i < span.end; ++i) mask[static_cast<std::size_t>(i)] = 1.0f;
  return mask;
}

int draw_target(int truth, Rng& rng) {
  int target = rng.uniform_int(kNumEmotions - 1);
  if (target >= truth) ++target;
  return target;
}

}  // namespace

ActorCriticLosses actor_critic_update(ad::ParamStore& store, const AgentModel& model,
                                      const AgentState& state, const ActionIndex& action,
                                      double reward, const AgentTrainConfig& cfg) {
  cfg.validate();
  ad::Tape t;
  nn::Workspace ws(t, store);
  const PolicyVars pv = policy_forward(ws, model, state);
  const AcLossVars loss = build_ac_loss(t, pv, action, reward, cfg);
  t.backward(t.add(loss.actor, loss.critic));
  ad::AdamConfig adam;
  adam.lr = cfg.lr;
  store.adam_step(ws.grads(), adam);
  return {t.scalar64(loss.actor), t.scalar64(loss.critic)};
}

AgentTrainResult train_agent(const std::vector<CorpusEntry>& corpus,
                             ad::ParamStore& salience_store, const SalienceModel& salience_model,
                             const AgentModel& agent_model, const AgentTrainConfig& cfg) {
  cfg.validate();
  require(!corpus.empty(), Error::Kind::EmptyCorpus, "agent training needs a corpus");

  std::vector<AudioBuffer> audio;
  audio.reserve(corpus.size());
  for (const CorpusEntry& e : corpus) audio.push_back(read_wav(e.path));

  AgentTrainResult res;
  const Rng master(cfg.seed);
  Rng init = master.substream("agent-init");
  agent_model.init(res.store, init);

  const ActionGrid grid = action_grid_default();

  // The thresholded salience pass is deterministic, so the original scores
  // and segments are computed once per utterance.
  std::vector<bool> cached(corpus.size(), false);
  std::vector<EmotionDistribution> original(corpus.size());
  std::vector<std::vector<SampleSpan>> segments(corpus.size());

  std::deque<double> window;
  double window_sum = 0.0;

  res.log.reserve(static_cast<std::size_t>(cfg.steps));
  for (int step = 0; step < cfg.steps; ++step) {
    Rng draw = master.substream("draw", static_cast<uint64_t>(step));
    const std::size_t idx = static_cast<std::size_t>(
        draw.uniform_int(static_cast<int>(corpus.size())));

    if (!cached[idx]) {
      const SalienceOutput out = salience_predict(salience_store, salience_model, audio[idx],
                                                  cfg.salience, MaskMode::Threshold, 0);
      original[idx] = out.prediction;
      segments[idx] =
          clamped_segments(out.hard_mask, static_cast<int64_t>(audio[idx].samples.size()));
      cached[idx] = true;
    }

    AgentStepLog row;
    row.step = step;
    row.utterance = static_cast<int>(idx);
    row.target = draw_target(corpus[idx].saliency.argmax(), draw);

    if (segments[idx].empty()) {
      row.skipped = true;
      row.reward_avg = window.empty() ? 0.0 : window_sum / static_cast<double>(window.size());
      res.log.push_back(row);
      ++res.skipped;
      continue;
    }

    const SampleSpan span =
        segments[idx][static_cast<std::size_t>(draw.uniform_int(static_cast<int>(
            segments[idx].size())))];

    AgentState state;
    state.y = audio[idx];
    state.segment_mask = span_mask(audio[idx].samples.size(), span);
    state.target = EmotionCode::of(row.target);

    // One tape serves both the action sample and the update; the environment
    // step in between never touches it.
    ad::Tape t;
    nn::Workspace ws(t, res.store);
    const PolicyVars pv = policy_forward(ws, agent_model, state);
    ActionIndex action = sample_action(detach_policy(t, pv), draw);
    if (cfg.duration_only) {
      action.pitch = ActionGrid::kIdentityIndex;
      action.gain = ActionGrid::kIdentityIndex;
    }

    SegmentEdit edit;
    edit.begin = span.begin;
    edit.end = span.end;
    edit.duration_factor = grid.duration[static_cast<std::size_t>(action.dur)];
    edit.pitch_factor = grid.pitch[static_cast<std::size_t>(action.pitch)];
    edit.gain = grid.gain[static_cast<std::size_t>(action.gain)];
    const AudioBuffer modified = apply_edits(audio[idx], {edit}, cfg.wsola);

    const double reward =
        static_cast<double>(salience_predict(salience_store, salience_model, modified,
                                             cfg.salience, MaskMode::Threshold, 0)
                                .prediction[row.target]) -
        static_cast<double>(original[idx][row.target]);

    const AcLossVars loss = build_ac_loss(t, pv, action, reward, cfg);
    t.backward(t.add(loss.actor, loss.critic));
    ad::AdamConfig adam;
    adam.lr = cfg.lr;
    res.store.adam_step(ws.grads(), adam);

    window.push_back(reward);
    window_sum += reward;
    if (static_cast<int>(window.size()) > cfg.reward_window) {
      window_sum -= window.front();
      window.pop_front();
    }

    row.action = action;
    row.reward = reward;
    row.actor_loss = t.scalar64(loss.actor);
    row.critic_loss = t.scalar64(loss.critic);
    row.reward_avg = window_sum / static_cast<double>(window.size());
    res.log.push_back(row);
  }
  return res;
}

AudioBuffer convert(const AudioBuffer& y, int target, ad::ParamStore& agent_store,
                    const AgentModel& agent_model, ad::ParamStore& salience_store,
                    const SalienceModel& salience_model, const AgentTrainConfig& cfg,
                    ConvertPolicy policy, uint64_t seed, ConvertReport* report) {
  cfg.validate();
  require(target >= 0 && target < kNumEmotions, Error::Kind::OutOfRange,
          "target class out of range");

  const SalienceOutput orig =
      salience_predict(salience_store, salience_model, y, cfg.salience, MaskMode::Threshold, 0);
  const std::vector<SampleSpan> spans =
      clamped_segments(orig.hard_mask, static_cast<int64_t>(y.samples.size()));

  ConvertReport rep;
  rep.before = orig.prediction;

  if (spans.empty()) {
    rep.no_segments = true;
    rep.after = rep.before;
    if (report) *report = rep;
    return y;
  }

  Rng rng(seed);
  const ActionGrid grid = action_grid_default();
  std::vector<SegmentEdit> edits;
  for (const SampleSpan& span : spans) {
    ActionIndex action;
    if (policy == ConvertPolicy::Random) {
      action.dur = rng.uniform_int(static_cast<int>(grid.duration.size()));
      action.pitch = rng.uniform_int(static_cast<int>(grid.pitch.size()));
      action.gain = rng.uniform_int(static_cast<int>(grid.gain.size()));
    } else {
      AgentState state;
      state.y = y;
      state.segment_mask = span_mask(y.samples.size(), span);
      state.target = EmotionCode::of(target);
      const PolicyOutput out = policy_eval(agent_store, agent_model, state);
      action = policy == ConvertPolicy::Greedy ? greedy_action(out) : sample_action(out, rng);
    }
    if (cfg.duration_only) {
      action.pitch = ActionGrid::kIdentityIndex;
      action.gain = ActionGrid::kIdentityIndex;
    }

    SegmentEdit edit;
    edit.begin = span.begin;
    edit.end = span.end;
    edit.duration_factor = grid.duration[static_cast<std::size_t>(action.dur)];
    edit.pitch_factor = grid.pitch[static_cast<std::size_t>(action.pitch)];
    edit.gain = grid.gain[static_cast<std::size_t>(action.gain)];
    edits.push_back(edit);
    rep.segments.push_back(
        {edit.begin, edit.end, edit.duration_factor, edit.pitch_factor, edit.gain});
  }

  const AudioBuffer out = apply_edits(y, edits, cfg.wsola);
  rep.after = salience_predict(salience_store, salience_model, out, cfg.salience,
                               MaskMode::Threshold, 0)
                  .prediction;
  rep.reward = static_cast<double>(rep.after[target]) - static_cast<double>(rep.before[target]);
  if (report) *report = rep;
  return out;
}

ConversionEval eval_conversion(const std::vector<CorpusEntry>& corpus,
                               ad::ParamStore& agent_store, const AgentModel& agent_model,
                               ad::ParamStore& salience_store,
                               const SalienceModel& salience_model, const AgentTrainConfig& cfg,
                               ConvertPolicy policy, uint64_t seed) {
  require(!corpus.empty(), Error::Kind::EmptyCorpus, "conversion eval needs a corpus");
  const Rng master(seed);

  ConversionEval eval;
  double sum = 0.0;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const AudioBuffer audio = read_wav(corpus[i].path);
    Rng item = master.substream("convert", static_cast<uint64_t>(i));
    const int target = draw_target(corpus[i].saliency.argmax(), item);

    ConvertReport rep;
    convert(audio, target, agent_store, agent_model, salience_store, salience_model, cfg, policy,
            item.substream("actions").seed(), &rep);
    if (rep.no_segments) {
      ++eval.no_segments;
    } else {
      sum += rep.reward;
      ++eval.converted;
    }
  }
  eval.mean_reward = eval.converted > 0 ? sum / eval.converted : 0.0;
  return eval;
}

}  // namespace prosody

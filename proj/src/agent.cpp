#include "prosodyrl/agent.hpp"

#include <cmath>

#include "prosodyrl/errors.hpp"
#include "prosodyrl/tape.hpp"

namespace prosody {

EmotionCode EmotionCode::of(int cls) {
  require(cls >= 0 && cls < kNumEmotions, Error::Kind::OutOfRange, "emotion class out of range");
  EmotionCode code;
  code.v[static_cast<std::size_t>(cls)] = 1.0f;
  return code;
}

int EmotionCode::index() const {
  for (int i = 0; i < kNumEmotions; ++i)
    if (v[static_cast<std::size_t>(i)] == 1.0f) return i;
  fail(Error::Kind::InvalidSpec, "emotion code has no unit component");
}

void EmotionCode::validate() const {
  int ones = 0;
  for (float x : v) {
    require(x == 0.0f || x == 1.0f, Error::Kind::InvalidSpec, "emotion code must be binary");
    ones += x == 1.0f ? 1 : 0;
  }
  require(ones == 1, Error::Kind::InvalidSpec, "emotion code must have exactly one unit");
}

ActionGrid action_grid_default() {
  ActionGrid grid;
  for (int i = 0; i < 12; ++i)
    grid.duration.push_back(static_cast<float>(0.25 + 0.15 * i));
  for (int i = 0; i < 11; ++i) grid.pitch.push_back(static_cast<float>(0.5 + 0.1 * i));
  grid.gain = grid.duration;
  return grid;
}

void AgentState::validate() const {
  validate_signal(y);
  target.validate();
  require(segment_mask.size() == y.samples.size(), Error::Kind::LengthMismatch,
          "segment mask length must match the signal");
  // Exactly one contiguous run of 1s.
  int runs = 0;
  bool inside = false;
  for (float m : segment_mask) {
    require(m == 0.0f || m == 1.0f, Error::Kind::InvalidSpec, "segment mask must be binary");
    if (m == 1.0f && !inside) ++runs;
    inside = m == 1.0f;
  }
  require(runs == 1, Error::Kind::InvalidSpec, "segment mask must be one contiguous run");
}

void AgentModel::init(ad::ParamStore& store, Rng& rng) const {
  conv1.init(store, rng);
  conv2.init(store, rng);
  conv3.init(store, rng);
  conv4.init(store, rng);
  attn.init(store, rng);
  dur_head.init(store, rng);
  pitch_head.init(store, rng);
  gain_head.init(store, rng);
  critic_head.init(store, rng);
}

PolicyVars policy_forward(nn::Workspace& ws, const AgentModel& model, const AgentState& state) {
  state.validate();
  require(static_cast<int64_t>(state.y.samples.size()) >= AgentModel::kMinSamples,
          Error::Kind::SignalTooShort, "signal shorter than the encoder receptive field");
  ad::Tape& t = ws.tape();

  const int64_t len = static_cast<int64_t>(state.y.samples.size());
  ad::Tensor x = ad::Tensor::zeros({len, 2});
  for (int64_t i = 0; i < len; ++i) {
    x.at(i, 0) = state.y.samples[static_cast<std::size_t>(i)];
    x.at(i, 1) = state.segment_mask[static_cast<std::size_t>(i)];
  }

  ad::Var h = t.relu(model.conv1.forward(ws, t.input(std::move(x), false)));
  h = t.relu(model.conv2.forward(ws, h));
  h = t.relu(model.conv3.forward(ws, h));
  h = t.relu(model.conv4.forward(ws, h));
  h = model.attn.forward(ws, h);
  ad::Var pooled = t.maxpool_time(h);

  ad::Tensor one_hot = ad::Tensor::zeros({1, kNumEmotions});
  for (int i = 0; i < kNumEmotions; ++i) one_hot.values[static_cast<std::size_t>(i)] =
      state.target.v[static_cast<std::size_t>(i)];
  ad::Var z = t.concat_cols({pooled, t.input(std::move(one_hot), false)});

  PolicyVars out;
  out.pi_dur = t.softmax_rows(model.dur_head.forward(ws, z));
  out.pi_pitch = t.softmax_rows(model.pitch_head.forward(ws, z));
  out.pi_gain = t.softmax_rows(model.gain_head.forward(ws, z));
  out.value = model.critic_head.forward(ws, z);
  return out;
}

void PolicyOutput::validate() const {
  for (const std::vector<double>* pi : {&pi_dur, &pi_pitch, &pi_gain}) {
    double sum = 0.0;
    for (double p : *pi) {
      require(p >= 0.0, Error::Kind::InvalidSpec, "policy head has a negative probability");
      sum += p;
    }
    require(std::fabs(sum - 1.0) <= 1e-6, Error::Kind::InvalidSpec,
            "policy head is off the simplex");
  }
  require(std::isfinite(value), Error::Kind::NonFinite, "critic value is not finite");
}

PolicyOutput policy_eval(ad::ParamStore& store, const AgentModel& model,
                         const AgentState& state) {
  ad::Tape t;
  nn::Workspace ws(t, store, false);
  const PolicyVars vars = policy_forward(ws, model, state);

  PolicyOutput out;
  for (float p : t.value(vars.pi_dur).values) out.pi_dur.push_back(static_cast<double>(p));
  for (float p : t.value(vars.pi_pitch).values) out.pi_pitch.push_back(static_cast<double>(p));
  for (float p : t.value(vars.pi_gain).values) out.pi_gain.push_back(static_cast<double>(p));
  out.value = t.scalar64(vars.value);
  out.validate();
  return out;
}

namespace {

int categorical_draw(const std::vector<double>& pi, Rng& rng) {
  const double u = rng.uniform();
  double acc = 0.0;
  for (std::size_t i = 0; i < pi.size(); ++i) {
    acc += pi[i];
    if (u < acc) return static_cast<int>(i);
  }
  return static_cast<int>(pi.size() - 1);
}

int argmax_index(const std::vector<double>& pi) {
  int best = 0;
  for (std::size_t i = 1; i < pi.size(); ++i)
    if (pi[i] > pi[static_cast<std::size_t>(best)]) best = static_cast<int>(i);
  return best;
}

}  // namespace

ActionIndex sample_action(const PolicyOutput& out, Rng& rng) {
  out.validate();
  return {categorical_draw(out.pi_dur, rng), categorical_draw(out.pi_pitch, rng),
          categorical_draw(out.pi_gain, rng)};
}

ActionIndex greedy_action(const PolicyOutput& out) {
  out.validate();
  return {argmax_index(out.pi_dur), argmax_index(out.pi_pitch), argmax_index(out.pi_gain)};
}

}  // namespace prosody

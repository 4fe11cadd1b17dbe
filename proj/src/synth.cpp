#include "prosodyrl/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "prosodyrl/errors.hpp"
#include "prosodyrl/rng.hpp"
#include "prosodyrl/wav_io.hpp"

namespace fs = std::filesystem;

namespace prosody {

int emotion_from_name(const std::string& name) {
  for (int i = 0; i < kNumEmotions; ++i)
    if (name == kEmotionNames[static_cast<std::size_t>(i)]) return i;
  return -1;
}

EmotionDistribution EmotionDistribution::one_hot(int cls) {
  EmotionDistribution d;
  d.p[static_cast<std::size_t>(cls)] = 1.0f;
  return d;
}

void EmotionDistribution::validate() const {
  double sum = 0.0;
  for (float x : p) {
    require(x >= 0.0f && std::isfinite(x), Error::Kind::InvalidSpec,
            "emotion distribution has a negative or non-finite component");
    sum += x;
  }
  require(std::abs(sum - 1.0) <= 1e-6, Error::Kind::InvalidSpec,
          "emotion distribution does not sum to 1");
}

int EmotionDistribution::argmax() const {
  int best = 0;
  for (int i = 1; i < kNumEmotions; ++i)
    if (p[static_cast<std::size_t>(i)] > p[static_cast<std::size_t>(best)]) best = i;
  return best;
}

bool EmotionDistribution::in_top2(int cls) const {
  const int first = argmax();
  if (cls == first) return true;
  int second = first == 0 ? 1 : 0;
  for (int i = 0; i < kNumEmotions; ++i) {
    if (i == first || i == second) continue;
    if (p[static_cast<std::size_t>(i)] > p[static_cast<std::size_t>(second)]) second = i;
  }
  return cls == second;
}

std::array<Archetype, kNumEmotions> SyntheticSpec::default_archetypes() {
  std::array<Archetype, kNumEmotions> a;
  a[0] = {140.0f, 0.0f, 1.00f, 1.00f, 0.0f, 0.0f};  // neutral
  a[1] = {190.0f, 0.0f, 1.30f, 1.40f, 0.0f, 0.0f};  // angry
  a[2] = {175.0f, 0.0f, 1.15f, 1.15f, 0.0f, 0.0f};  // happy
  a[3] = {110.0f, 0.0f, 0.80f, 0.70f, 0.0f, 0.0f};  // sad
  a[4] = {200.0f, 0.0f, 1.05f, 0.90f, 6.0f, 20.0f}; // fearful
  return a;
}

void SyntheticSpec::validate() const {
  require(utterance_seconds > 0.2f, Error::Kind::InvalidSpec, "utterance too short");
  require(cue_fraction > 0.0f && cue_fraction < 1.0f, Error::Kind::InvalidSpec,
          "cue_fraction must lie in (0,1)");
  require(label_noise_scale >= 0.0f, Error::Kind::InvalidSpec, "negative label noise");
  require(2.0f * silence_seconds + cue_fraction * utterance_seconds < utterance_seconds,
          Error::Kind::InvalidSpec, "cue span does not fit in the voiced region");
  for (const auto& a : archetypes) {
    require(a.f0_base > 0 && a.rate_factor > 0 && a.gain_factor > 0, Error::Kind::InvalidSpec,
            "archetype parameters must be positive");
  }
  auto rel_apart = [](float x, float y) {
    return std::abs(x - y) >= 0.10f * std::min(std::abs(x), std::abs(y));
  };
  for (int i = 0; i < kNumEmotions; ++i) {
    for (int j = i + 1; j < kNumEmotions; ++j) {
      const auto& a = archetypes[static_cast<std::size_t>(i)];
      const auto& b = archetypes[static_cast<std::size_t>(j)];
      const bool distinct = rel_apart(a.f0_base, b.f0_base) ||
                            rel_apart(a.rate_factor, b.rate_factor) ||
                            rel_apart(a.gain_factor, b.gain_factor);
      require(distinct, Error::Kind::InvalidSpec,
              std::string("archetypes not separable: ") + kEmotionNames[static_cast<std::size_t>(i)] +
                  " vs " + kEmotionNames[static_cast<std::size_t>(j)]);
    }
  }
}

namespace {

// Three-harmonic tone with a syllabic amplitude envelope. Oscillator phases
// are integrated so archetype switches at the cue boundaries stay click-free.
struct ToneState {
  double carrier_phase = 0.0;
  double syllable_phase = 0.0;
  double vibrato_phase = 0.0;
};

float render_sample(ToneState& st, const Archetype& a, double span_pos, double base_amp,
                    double syllable_hz, int rate) {
  double f0 = a.f0_base * (1.0 + a.f0_slope * span_pos);
  if (a.vibrato_depth_hz > 0.0f)
    f0 += a.vibrato_depth_hz * std::sin(2.0 * M_PI * st.vibrato_phase);

  const double h1 = std::sin(2.0 * M_PI * st.carrier_phase);
  const double h2 = 0.5 * std::sin(4.0 * M_PI * st.carrier_phase);
  const double h3 = 0.25 * std::sin(6.0 * M_PI * st.carrier_phase);
  const double tone = (h1 + h2 + h3) / 1.75;

  // Raised-cosine syllable envelope with a floor, so voicing never vanishes.
  const double syl = 0.5 - 0.5 * std::cos(2.0 * M_PI * st.syllable_phase);
  const double env = 0.3 + 0.7 * syl * syl;

  st.carrier_phase += f0 / rate;
  st.syllable_phase += syllable_hz * a.rate_factor / rate;
  st.vibrato_phase += a.vibrato_hz / rate;

  return static_cast<float>(base_amp * a.gain_factor * env * tone);
}

}  // namespace

SyntheticUtterance gen_synthetic_utterance(const SyntheticSpec& spec, int emotion, uint64_t seed) {
  spec.validate();
  require(emotion >= 0 && emotion < kNumEmotions, Error::Kind::InvalidSpec,
          "emotion class out of range");

  Rng rng(seed);
  const int rate = kPipelineRate;
  const int64_t n = std::llround(static_cast<double>(spec.utterance_seconds) * rate);
  const int64_t lead = std::llround(static_cast<double>(spec.silence_seconds) * rate);
  const int64_t voiced_begin = lead;
  const int64_t voiced_end = n - lead;
  const int64_t cue_len = std::llround(static_cast<double>(spec.cue_fraction) * n);

  const int64_t cue_lo = voiced_begin;
  const int64_t cue_hi = voiced_end - cue_len;
  require(cue_hi >= cue_lo, Error::Kind::InvalidSpec, "cue span does not fit");
  const int64_t cue_begin =
      cue_lo + static_cast<int64_t>(rng.uniform() * static_cast<double>(cue_hi - cue_lo + 1));
  const int64_t cue_end = cue_begin + cue_len;

  const Archetype& neutral = spec.archetypes[0];
  const Archetype& cue_arch = spec.archetypes[static_cast<std::size_t>(emotion)];

  AudioBuffer buf;
  buf.sample_rate = rate;
  buf.samples.resize(static_cast<std::size_t>(n), 0.0f);

  ToneState st;
  for (int64_t i = voiced_begin; i < voiced_end; ++i) {
    const bool in_cue = i >= cue_begin && i < cue_end;
    const Archetype& a = in_cue ? cue_arch : neutral;
    const double span_pos =
        in_cue ? static_cast<double>(i - cue_begin) / std::max<int64_t>(1, cue_len) : 0.0;
    buf.samples[static_cast<std::size_t>(i)] =
        render_sample(st, a, span_pos, spec.base_amplitude, spec.syllable_hz, rate);
  }
  if (spec.noise_floor > 0.0f) {
    for (auto& s : buf.samples)
      s += static_cast<float>(spec.noise_floor * rng.normal());
  }
  clip_saturate(buf);

  EmotionDistribution label = EmotionDistribution::one_hot(emotion);
  if (spec.label_noise_scale > 0.0f) {
    double sum = 0.0;
    for (int i = 0; i < kNumEmotions; ++i) {
      label[i] += static_cast<float>(spec.label_noise_scale * rng.uniform());
      sum += label[i];
    }
    for (int i = 0; i < kNumEmotions; ++i)
      label[i] = static_cast<float>(label[i] / sum);
  }
  label.validate();

  return SyntheticUtterance{std::move(buf), label, CueSpan{cue_begin, cue_end}};
}

std::string gen_corpus(const SyntheticSpec& spec, int n_per_class, const std::string& out_dir,
                       uint64_t seed) {
  spec.validate();
  require(n_per_class > 0, Error::Kind::BadArgument, "n_per_class must be positive");

  std::error_code ec;
  fs::create_directories(fs::path(out_dir) / "wav", ec);
  require(!ec, Error::Kind::IoError, "cannot create " + out_dir);

  const std::string manifest_path = (fs::path(out_dir) / "manifest.csv").string();
  std::ofstream manifest(manifest_path);
  require(manifest.good(), Error::Kind::IoError, "cannot write " + manifest_path);
  manifest << "id,path,neutral,angry,happy,sad,fearful,cue_start,cue_end\n";

  Rng master(seed);
  // Round-robin over classes so any contiguous manifest slice stays stratified.
  for (int i = 0; i < n_per_class; ++i) {
    for (int cls = 0; cls < kNumEmotions; ++cls) {
      const uint64_t entry_seed =
          master.substream("corpus", static_cast<uint64_t>(cls * n_per_class + i)).seed();
      const SyntheticUtterance utt = gen_synthetic_utterance(spec, cls, entry_seed);

      char id[64];
      std::snprintf(id, sizeof(id), "%s_%04d", kEmotionNames[static_cast<std::size_t>(cls)], i);
      const std::string rel = std::string("wav/") + id + ".wav";
      write_wav((fs::path(out_dir) / rel).string(), utt.audio);

      manifest << id << ',' << rel;
      for (int k = 0; k < kNumEmotions; ++k) {
        char v[16];
        std::snprintf(v, sizeof(v), "%.6f", static_cast<double>(utt.saliency[k]));
        manifest << ',' << v;
      }
      manifest << ',' << utt.cue.begin << ',' << utt.cue.end << '\n';
    }
  }
  require(manifest.good(), Error::Kind::IoError, "short write to " + manifest_path);
  return manifest_path;
}

std::vector<CorpusEntry> load_manifest(const std::string& manifest_path) {
  std::ifstream in(manifest_path);
  require(in.good(), Error::Kind::IoError, "cannot open " + manifest_path);
  const fs::path base = fs::path(manifest_path).parent_path();

  std::string line;
  require(static_cast<bool>(std::getline(in, line)), Error::Kind::EmptyCorpus,
          manifest_path + ": empty manifest");

  std::vector<CorpusEntry> entries;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string field;
    CorpusEntry e;
    auto next = [&]() {
      require(static_cast<bool>(std::getline(ss, field, ',')), Error::Kind::IoError,
              manifest_path + ": malformed row: " + line);
      return field;
    };
    e.id = next();
    const std::string rel = next();
    e.path = fs::path(rel).is_absolute() ? rel : (base / rel).string();
    double sum = 0.0;
    for (int k = 0; k < kNumEmotions; ++k) {
      e.saliency[k] = std::stof(next());
      sum += e.saliency[k];
    }
    // The manifest stores 6 decimals, so renormalize the quantized simplex.
    require(sum > 0.5 && sum < 1.5, Error::Kind::InvalidSpec,
            manifest_path + ": saliency row does not resemble a distribution");
    for (int k = 0; k < kNumEmotions; ++k)
      e.saliency[k] = static_cast<float>(e.saliency[k] / sum);
    e.cue_start = std::stoll(next());
    e.cue_end = std::stoll(next());
    e.saliency.validate();
    entries.push_back(std::move(e));
  }
  require(!entries.empty(), Error::Kind::EmptyCorpus, manifest_path + ": no entries");
  return entries;
}

}  // namespace prosody

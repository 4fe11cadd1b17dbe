#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "prosodyrl/audio.hpp"
#include "prosodyrl/synth.hpp"

namespace testutil {

// Signal-to-noise ratio in dB over the interior fraction of the signals,
// excluding edge samples where overlap-add has incomplete window coverage.
inline double snr_db(const std::vector<float>& ref, const std::vector<float>& test,
                     double interior = 0.9) {
  const std::size_t n = std::min(ref.size(), test.size());
  const std::size_t skip = static_cast<std::size_t>(static_cast<double>(n) * (1.0 - interior) / 2.0);
  double sig = 0.0, err = 0.0;
  for (std::size_t i = skip; i < n - skip; ++i) {
    const double r = ref[i];
    const double d = r - static_cast<double>(test[i]);
    sig += r * r;
    err += d * d;
  }
  if (err == 0.0) return 200.0;
  return 10.0 * std::log10(sig / err);
}

inline prosody::AudioBuffer make_tone(double freq, double seconds, double amp = 0.5,
                                      int rate = prosody::kPipelineRate) {
  prosody::AudioBuffer buf;
  buf.sample_rate = rate;
  const int64_t n = static_cast<int64_t>(seconds * rate);
  buf.samples.resize(static_cast<std::size_t>(n));
  for (int64_t i = 0; i < n; ++i)
    buf.samples[static_cast<std::size_t>(i)] =
        static_cast<float>(amp * std::sin(2.0 * M_PI * freq * static_cast<double>(i) / rate));
  return buf;
}

inline prosody::AudioBuffer make_sawtooth(double freq, double seconds, double amp = 0.5,
                                          int rate = prosody::kPipelineRate) {
  prosody::AudioBuffer buf;
  buf.sample_rate = rate;
  const int64_t n = static_cast<int64_t>(seconds * rate);
  buf.samples.resize(static_cast<std::size_t>(n));
  for (int64_t i = 0; i < n; ++i) {
    const double phase = std::fmod(freq * static_cast<double>(i) / rate, 1.0);
    buf.samples[static_cast<std::size_t>(i)] = static_cast<float>(amp * (2.0 * phase - 1.0));
  }
  return buf;
}

inline prosody::AudioBuffer make_speech_like(uint64_t seed, int emotion = 2) {
  prosody::SyntheticSpec spec;
  return prosody::gen_synthetic_utterance(spec, emotion, seed).audio;
}

}  // namespace testutil

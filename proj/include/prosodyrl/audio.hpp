#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace prosody {

// Every buffer in the pipeline runs at 16 kHz mono.
inline constexpr int kPipelineRate = 16000;

struct AudioBuffer {
  std::vector<float> samples;
  int sample_rate = kPipelineRate;

  AudioBuffer() = default;
  AudioBuffer(std::vector<float> s, int rate) : samples(std::move(s)), sample_rate(rate) {}

  int64_t size() const { return static_cast<int64_t>(samples.size()); }
  double seconds() const { return static_cast<double>(samples.size()) / sample_rate; }
};

// Clamps samples to [-1, 1] in place and returns how many were clipped.
std::size_t clip_saturate(AudioBuffer& buf);

// Throws NonFinite if any sample is NaN/Inf, EmptySignal if empty.
void validate_signal(const AudioBuffer& buf);

// One RMS value per frame start 0, hop, 2*hop, ... (count = ceil(len/hop));
// the final partial frame is zero-padded so the frame count matches the
// feature extractor's frame count.
std::vector<float> frame_energy(const AudioBuffer& buf, int frame_len, int hop);

}  // namespace prosody

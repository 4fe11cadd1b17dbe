#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "prosodyrl/audio.hpp"

namespace prosody {

struct WsolaParams {
  int window_len = 512;  // 32 ms at 16 kHz, above one period of a 75 Hz voice
  int hop = 256;         // fixed 50% overlap keeps the overlap-add weight constant
  int search_radius = 128;

  // Throws InvalidSpec unless window_len is even and >= 2, hop == window_len/2,
  // and 0 <= search_radius < hop.
  void validate() const;
};

// Monotonic input->output sample mapping. Breakpoints are (input, output)
// pairs, first (0,0), last (len_in, len_out), strictly increasing in both
// coordinates.
struct TimeStretchMap {
  std::vector<std::pair<int64_t, int64_t>> breakpoints;

  static TimeStretchMap uniform(int64_t len_in, double factor);

  int64_t input_len() const { return breakpoints.empty() ? 0 : breakpoints.back().first; }
  int64_t output_len() const { return breakpoints.empty() ? 0 : breakpoints.back().second; }

  // Throws InvalidSpec on violations of the shape invariants above.
  void validate() const;
};

// Periodic Hann w[n] = 0.5 - 0.5*cos(2*pi*n/L). Throws BadLength unless L is
// even and >= 2. At 50% overlap these windows sum to exactly 1.
std::vector<float> hann_window(int len);

// Output-frame anchors 0, hop, 2*hop, ...; count = ceil(out_len/hop).
std::vector<int64_t> output_anchors(int64_t out_len, int hop);

// Maps each output anchor back to an input position by piecewise-linear
// inverse interpolation, rounded to the nearest sample; the result is
// non-decreasing. Throws OutOfRange when an anchor exceeds the map's range.
std::vector<int64_t> invert_map(const TimeStretchMap& map, const std::vector<int64_t>& anchors);

// Refines one analysis position: searches [sigma - radius, sigma + radius]
// (clamped to valid reads) for the start that maximizes normalized
// cross-correlation against `tail`, the natural continuation of the previous
// synthesis frame. Ties break toward the smallest |shift|; a zero-energy tail
// or window leaves sigma unchanged.
int64_t wsola_adjust(const AudioBuffer& y, int64_t sigma, std::span<const float> tail,
                     const WsolaParams& params);

// Weighted overlap-add: z(n) = sum_k w(n-g_k) y(n-g_k+s_k) / sum_k w(n-g_k),
// denominator floored at 1e-8, out-of-range reads of y treated as zero.
// Output length is anchors.back() + window length.
AudioBuffer overlap_add_synthesize(const AudioBuffer& y, const std::vector<int64_t>& sigma,
                                   const std::vector<int64_t>& anchors,
                                   const std::vector<float>& window);

// Full time-scale modification pipeline: anchors -> inverse map -> per-frame
// correlation adjustment -> overlap-add, trimmed to the map's output length.
// Throws SignalTooShort when the signal is shorter than one window and
// LengthMismatch when the map does not cover the signal.
AudioBuffer time_stretch(const AudioBuffer& y, const TimeStretchMap& map,
                         const WsolaParams& params);

// Linear-interpolation resampler; output length round(len/ratio), playback
// pitch scaled by ratio. Throws BadRatio outside [0.25, 4]. No anti-aliasing
// filter; acceptable for the pitch grid in use, where ratio stays near 1.
AudioBuffer resample_linear(const AudioBuffer& y, double ratio);

}  // namespace prosody

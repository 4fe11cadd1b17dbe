#include "prosodyrl/edits.hpp"

#include <algorithm>
#include <cmath>

#include "prosodyrl/errors.hpp"

namespace prosody {

namespace {

AudioBuffer process_segment(const AudioBuffer& y, const SegmentEdit& e, const WsolaParams& params) {
  AudioBuffer seg;
  seg.sample_rate = y.sample_rate;
  seg.samples.assign(y.samples.begin() + static_cast<std::ptrdiff_t>(e.begin),
                     y.samples.begin() + static_cast<std::ptrdiff_t>(e.end));

  const double alpha = e.duration_factor;
  const double beta = e.pitch_factor;
  if (alpha != 1.0 || beta != 1.0) {
    // Stretching by alpha*beta then resampling by beta leaves net duration
    // alpha * original while shifting pitch by beta.
    seg = time_stretch(seg, TimeStretchMap::uniform(seg.size(), alpha * beta), params);
    if (beta != 1.0) seg = resample_linear(seg, beta);
  }

  if (e.gain != 1.0f) {
    const int64_t ramp = std::min<int64_t>(y.sample_rate / 100, seg.size() / 2);
    for (int64_t i = 0; i < seg.size(); ++i) {
      double t = 1.0;
      if (ramp > 0) {
        t = std::min({1.0, static_cast<double>(i) / static_cast<double>(ramp),
                      static_cast<double>(seg.size() - 1 - i) / static_cast<double>(ramp)});
      }
      seg.samples[static_cast<std::size_t>(i)] =
          static_cast<float>(seg.samples[static_cast<std::size_t>(i)] *
                             (1.0 + (static_cast<double>(e.gain) - 1.0) * t));
    }
  }
  return seg;
}

}  // namespace

AudioBuffer apply_edits(const AudioBuffer& y, const std::vector<SegmentEdit>& edits,
                        const WsolaParams& params, std::size_t* saturation_count) {
  validate_signal(y);
  params.validate();
  if (saturation_count) *saturation_count = 0;
  if (edits.empty()) return y;

  int64_t prev_end = 0;
  for (const auto& e : edits) {
    require(e.begin >= 0 && e.end <= y.size() && e.begin < e.end, Error::Kind::SpanOutOfBounds,
            "edit span outside the signal");
    require(e.begin >= prev_end, Error::Kind::OverlappingSpans,
            "edit spans must be sorted and disjoint");
    require(e.duration_factor > 0 && e.pitch_factor > 0 && e.gain > 0, Error::Kind::InvalidSpec,
            "edit factors must be positive");
    prev_end = e.end;
  }

  AudioBuffer out;
  out.sample_rate = y.sample_rate;
  out.samples.reserve(y.samples.size());
  int64_t cursor = 0;
  for (const auto& e : edits) {
    out.samples.insert(out.samples.end(),
                       y.samples.begin() + static_cast<std::ptrdiff_t>(cursor),
                       y.samples.begin() + static_cast<std::ptrdiff_t>(e.begin));
    AudioBuffer seg = process_segment(y, e, params);
    // Clamp inside the processed span only, so untouched audio stays
    // bit-identical to the input.
    const std::size_t clipped = clip_saturate(seg);
    if (saturation_count) *saturation_count += clipped;
    out.samples.insert(out.samples.end(), seg.samples.begin(), seg.samples.end());
    cursor = e.end;
  }
  out.samples.insert(out.samples.end(), y.samples.begin() + static_cast<std::ptrdiff_t>(cursor),
                     y.samples.end());
  return out;
}

}  // namespace prosody

#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "prosodyrl/audio.hpp"
#include "prosodyrl/wsola.hpp"

namespace prosody {

// One prosody edit over an input span [begin, end): net duration scales by
// duration_factor, pitch by pitch_factor, loudness by gain.
struct SegmentEdit {
  int64_t begin = 0;
  int64_t end = 0;
  float duration_factor = 1.0f;
  float pitch_factor = 1.0f;
  float gain = 1.0f;
};

// Applies a sorted list of disjoint edits and splices the results back
// between the untouched regions, which are copied bit-identically. Pitch is
// realized as stretch-by-(duration*pitch) followed by resampling by pitch;
// gain uses 10 ms linear ramps inside the span. An empty list is the exact
// identity. Output is clamped to [-1, 1]; when saturation_count is non-null
// it receives the number of clamped samples.
// Throws OverlappingSpans / SpanOutOfBounds on bad span lists and InvalidSpec
// on non-positive factors.
AudioBuffer apply_edits(const AudioBuffer& y, const std::vector<SegmentEdit>& edits,
                        const WsolaParams& params, std::size_t* saturation_count = nullptr);

}  // namespace prosody

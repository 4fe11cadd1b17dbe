#include "prosodyrl/audio.hpp"

#include <algorithm>
#include <cmath>

#include "prosodyrl/errors.hpp"

namespace prosody {

std::size_t clip_saturate(AudioBuffer& buf) {
  std::size_t clipped = 0;
  for (float& s : buf.samples) {
    if (s > 1.0f) {
      s = 1.0f;
      ++clipped;
    } else if (s < -1.0f) {
      s = -1.0f;
      ++clipped;
    }
  }
  return clipped;
}

void validate_signal(const AudioBuffer& buf) {
  require(!buf.samples.empty(), Error::Kind::EmptySignal, "empty audio buffer");
  for (float s : buf.samples)
    require(std::isfinite(s), Error::Kind::NonFinite, "non-finite sample in audio buffer");
}

std::vector<float> frame_energy(const AudioBuffer& buf, int frame_len, int hop) {
  require(!buf.samples.empty(), Error::Kind::EmptySignal, "frame_energy: empty signal");
  require(frame_len >= 1, Error::Kind::BadArgument, "frame_energy: frame_len must be >= 1");
  require(hop >= 1, Error::Kind::BadArgument, "frame_energy: hop must be >= 1");

  const int64_t n = buf.size();
  const int64_t frames = (n + hop - 1) / hop;
  std::vector<float> rms(static_cast<std::size_t>(frames));
  for (int64_t f = 0; f < frames; ++f) {
    const int64_t start = f * hop;
    const int64_t stop = std::min<int64_t>(start + frame_len, n);
    double acc = 0.0;
    for (int64_t i = start; i < stop; ++i) {
      const double s = buf.samples[static_cast<std::size_t>(i)];
      acc += s * s;
    }
    rms[static_cast<std::size_t>(f)] = static_cast<float>(std::sqrt(acc / frame_len));
  }
  return rms;
}

}  // namespace prosody

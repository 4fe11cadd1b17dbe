#pragma once

#include "prosodyrl/audio.hpp"

namespace prosody {

// Fundamental-frequency estimate by normalized autocorrelation over a
// centered slice, with parabolic refinement of the peak lag. Throws
// SignalTooShort when len < 2*rate/fmin and Unvoiced when the best peak
// correlation is below 0.3.
double estimate_f0_autocorr(const AudioBuffer& y, double fmin, double fmax);

}  // namespace prosody

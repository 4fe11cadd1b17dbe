#pragma once

#include <string>

#include "prosodyrl/audio.hpp"

namespace prosody {

// Reads a RIFF/WAVE file. Only PCM 16-bit mono at 16 kHz is accepted; samples
// are scaled to [-1, 1] by division by 32768.
AudioBuffer read_wav(const std::string& path);

// Writes PCM 16-bit mono. Samples are quantized by round(x * 32768) and
// clamped to [-32767, 32767]; the symmetric clamp avoids a DC bias at -1.0
// and makes write∘read the identity on 16-bit code values.
void write_wav(const std::string& path, const AudioBuffer& buf);

}  // namespace prosody

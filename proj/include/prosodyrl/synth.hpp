#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "prosodyrl/audio.hpp"
#include "prosodyrl/emotion.hpp"

namespace prosody {

// Prosodic archetype for one emotion class: fundamental frequency and its
// drift, speaking-rate multiplier for the syllabic envelope, loudness, and an
// optional vibrato.
struct Archetype {
  float f0_base = 140.0f;  // Hz
  float f0_slope = 0.0f;   // relative drift over the span, e.g. 0.1 = +10%
  float rate_factor = 1.0f;
  float gain_factor = 1.0f;
  float vibrato_hz = 0.0f;
  float vibrato_depth_hz = 0.0f;
};

struct CueSpan {
  int64_t begin = 0;  // sample index, inclusive
  int64_t end = 0;    // sample index, exclusive
  int64_t length() const { return end - begin; }
};

// Desk-scale synthetic stand-in for a crowd-labeled emotional speech corpus:
// each utterance is a neutral harmonic carrier except for one contiguous cue
// span rendered with the labeled emotion's archetype.
struct SyntheticSpec {
  std::array<Archetype, kNumEmotions> archetypes = default_archetypes();
  float utterance_seconds = 2.0f;
  float cue_fraction = 0.4f;        // in (0,1), relative to utterance length
  float label_noise_scale = 0.03f;  // symmetric label smoothing
  float silence_seconds = 0.12f;    // leading and trailing silence
  float base_amplitude = 0.25f;
  float noise_floor = 0.0005f;      // keeps silences below the energy gate
  float syllable_hz = 4.0f;

  static std::array<Archetype, kNumEmotions> default_archetypes();

  // Throws InvalidSpec when parameters are out of range or two archetypes are
  // not separated by >= 10% in at least one of (f0, rate, gain).
  void validate() const;
};

struct SyntheticUtterance {
  AudioBuffer audio;
  EmotionDistribution saliency;
  CueSpan cue;
};

// Deterministic given (spec, emotion, seed).
SyntheticUtterance gen_synthetic_utterance(const SyntheticSpec& spec, int emotion, uint64_t seed);

struct CorpusEntry {
  std::string id;
  std::string path;  // resolved to an absolute/openable path on load
  EmotionDistribution saliency;
  int64_t cue_start = 0;
  int64_t cue_end = 0;
};

// Writes 5*n_per_class WAVs under out_dir/wav plus out_dir/manifest.csv with
// header id,path,neutral,angry,happy,sad,fearful,cue_start,cue_end.
// Returns the manifest path. Per-entry seeds derive from the master seed.
std::string gen_corpus(const SyntheticSpec& spec, int n_per_class, const std::string& out_dir,
                       uint64_t seed);

// Reads a manifest written by gen_corpus; relative wav paths are resolved
// against the manifest's directory. Throws EmptyCorpus when no rows.
std::vector<CorpusEntry> load_manifest(const std::string& manifest_path);

}  // namespace prosody

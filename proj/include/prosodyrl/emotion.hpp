#pragma once

#include <array>
#include <string>

namespace prosody {

inline constexpr int kNumEmotions = 5;

enum class Emotion : int { Neutral = 0, Angry = 1, Happy = 2, Sad = 3, Fearful = 4 };

inline constexpr std::array<const char*, kNumEmotions> kEmotionNames = {
    "neutral", "angry", "happy", "sad", "fearful"};

// Parses an emotion name; returns -1 if unknown.
int emotion_from_name(const std::string& name);

// 5-way categorical over emotion classes (neutral/angry/happy/sad/fearful).
struct EmotionDistribution {
  std::array<float, kNumEmotions> p{0, 0, 0, 0, 0};

  float& operator[](int i) { return p[static_cast<std::size_t>(i)]; }
  float operator[](int i) const { return p[static_cast<std::size_t>(i)]; }

  static EmotionDistribution one_hot(int cls);

  // Throws InvalidSpec unless components are >= 0 and sum to 1 within 1e-6.
  void validate() const;

  // Lowest index wins ties.
  int argmax() const;

  // True when `cls` is among the two largest components (ties by index).
  bool in_top2(int cls) const;
};

}  // namespace prosody

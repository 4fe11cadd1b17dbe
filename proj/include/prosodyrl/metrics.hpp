#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "prosodyrl/emotion.hpp"
#include "prosodyrl/salience.hpp"

namespace prosody {

struct ConfusionMatrix {
  // counts[truth][predicted]
  std::array<std::array<int64_t, kNumEmotions>, kNumEmotions> counts{};

  void add(int truth, int predicted);
  int64_t total() const;
  int64_t row_total(int truth) const;
  int64_t col_total(int predicted) const;
};

// Per-class F1 from one-vs-rest precision/recall; 0 when a denominator is 0.
double class_f1(const ConfusionMatrix& cm, int cls);
double macro_f1(const ConfusionMatrix& cm);
// Classes weighted by their truth counts.
double weighted_f1(const ConfusionMatrix& cm);

// Overlap between the union of predicted spans and one reference span.
double span_iou(const std::vector<SampleSpan>& predicted, const SampleSpan& reference);

// Median with the even-count midpoint averaged; empty input is an error.
double median(std::vector<double> values);

}  // namespace prosody

#include "prosodyrl/metrics.hpp"

#include <algorithm>

#include "prosodyrl/errors.hpp"

namespace prosody {

void ConfusionMatrix::add(int truth, int predicted) {
  require(truth >= 0 && truth < kNumEmotions && predicted >= 0 && predicted < kNumEmotions,
          Error::Kind::OutOfRange, "class index outside the emotion set");
  ++counts[static_cast<std::size_t>(truth)][static_cast<std::size_t>(predicted)];
}

int64_t ConfusionMatrix::total() const {
  int64_t n = 0;
  for (const auto& row : counts)
    for (int64_t c : row) n += c;
  return n;
}

int64_t ConfusionMatrix::row_total(int truth) const {
  int64_t n = 0;
  for (int64_t c : counts[static_cast<std::size_t>(truth)]) n += c;
  return n;
}

int64_t ConfusionMatrix::col_total(int predicted) const {
  int64_t n = 0;
  for (const auto& row : counts) n += row[static_cast<std::size_t>(predicted)];
  return n;
}

double class_f1(const ConfusionMatrix& cm, int cls) {
  const double tp = static_cast<double>(cm.counts[static_cast<std::size_t>(cls)][static_cast<std::size_t>(cls)]);
  const double pred = static_cast<double>(cm.col_total(cls));
  const double truth = static_cast<double>(cm.row_total(cls));
  if (pred <= 0.0 || truth <= 0.0 || tp <= 0.0) return 0.0;
  const double precision = tp / pred;
  const double recall = tp / truth;
  return 2.0 * precision * recall / (precision + recall);
}

double macro_f1(const ConfusionMatrix& cm) {
  double sum = 0.0;
  for (int c = 0; c < kNumEmotions; ++c) sum += class_f1(cm, c);
  return sum / kNumEmotions;
}

double weighted_f1(const ConfusionMatrix& cm) {
  const double n = static_cast<double>(cm.total());
  if (n <= 0.0) return 0.0;
  double sum = 0.0;
  for (int c = 0; c < kNumEmotions; ++c)
    sum += static_cast<double>(cm.row_total(c)) / n * class_f1(cm, c);
  return sum;
}

double span_iou(const std::vector<SampleSpan>& predicted, const SampleSpan& reference) {
  require(reference.length() > 0, Error::Kind::BadArgument, "reference span must be nonempty");
  int64_t inter = 0;
  int64_t pred_len = 0;
  for (const SampleSpan& s : predicted) {
    pred_len += s.length();
    inter += std::max<int64_t>(0, std::min(s.end, reference.end) - std::max(s.begin, reference.begin));
  }
  const int64_t uni = pred_len + reference.length() - inter;
  return uni > 0 ? static_cast<double>(inter) / static_cast<double>(uni) : 0.0;
}

double median(std::vector<double> values) {
  require(!values.empty(), Error::Kind::BadArgument, "median of an empty set");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

}  // namespace prosody

#include "prosodyrl/f0.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "prosodyrl/errors.hpp"

namespace prosody {

double estimate_f0_autocorr(const AudioBuffer& y, double fmin, double fmax) {
  validate_signal(y);
  require(fmin > 0 && fmax > fmin && fmax < y.sample_rate / 2.0, Error::Kind::BadArgument,
          "need 0 < fmin < fmax < Nyquist");
  const double rate = y.sample_rate;
  require(static_cast<double>(y.size()) >= 2.0 * rate / fmin, Error::Kind::SignalTooShort,
          "need at least two periods of fmin");

  // A centered slice avoids lead-in/fade-out content; 8192 samples bound the
  // O(len * lag) cost while holding many periods of any f0 in range.
  const int64_t slice_len = std::min<int64_t>(y.size(), 8192);
  const int64_t offset = (y.size() - slice_len) / 2;
  const float* x = y.samples.data() + offset;

  const int64_t lag_min = std::max<int64_t>(1, static_cast<int64_t>(std::floor(rate / fmax)));
  const int64_t lag_max = static_cast<int64_t>(std::ceil(rate / fmin));
  const int64_t win = slice_len - lag_max;
  require(win >= lag_max, Error::Kind::SignalTooShort, "slice too short for the lag range");

  auto ncc = [&](int64_t lag) {
    double dot = 0.0, e0 = 0.0, e1 = 0.0;
    for (int64_t n = 0; n < win; ++n) {
      const double a = x[n];
      const double b = x[n + lag];
      dot += a * b;
      e0 += a * a;
      e1 += b * b;
    }
    if (e0 < 1e-12 || e1 < 1e-12) return -1.0;
    return dot / std::sqrt(e0 * e1);
  };

  std::vector<double> r(static_cast<std::size_t>(lag_max + 2), -1.0);
  double best = -1.0;
  for (int64_t lag = lag_min; lag <= lag_max; ++lag) {
    r[static_cast<std::size_t>(lag)] = ncc(lag);
    best = std::max(best, r[static_cast<std::size_t>(lag)]);
  }
  require(best >= 0.3, Error::Kind::Unvoiced, "no autocorrelation peak above 0.3");

  // The true period's peak and its multiples all sit near the maximum, so
  // take the smallest local-maximum lag within 0.02 of the best score. This
  // keeps period-doubled peaks from stealing the estimate.
  int64_t best_lag = lag_max;
  for (int64_t lag = lag_min; lag <= lag_max; ++lag) {
    const double v = r[static_cast<std::size_t>(lag)];
    if (v < best - 0.02) continue;
    const bool left_ok = lag == lag_min || v >= r[static_cast<std::size_t>(lag - 1)];
    const bool right_ok = lag == lag_max || v >= r[static_cast<std::size_t>(lag + 1)];
    if (left_ok && right_ok) {
      best_lag = lag;
      break;
    }
  }

  // Parabolic refinement around the integer peak.
  double refined = static_cast<double>(best_lag);
  if (best_lag > lag_min && best_lag < lag_max) {
    const double rm = r[static_cast<std::size_t>(best_lag - 1)];
    const double r0 = r[static_cast<std::size_t>(best_lag)];
    const double rp = r[static_cast<std::size_t>(best_lag + 1)];
    const double denom = rm - 2.0 * r0 + rp;
    if (std::abs(denom) > 1e-12) {
      const double delta = 0.5 * (rm - rp) / denom;
      if (std::abs(delta) <= 1.0) refined += delta;
    }
  }
  return rate / refined;
}

}  // namespace prosody

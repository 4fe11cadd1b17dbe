#include "prosodyrl/wsola.hpp"

#include <algorithm>
#include <cmath>

#include "prosodyrl/errors.hpp"

namespace prosody {

void WsolaParams::validate() const {
  require(window_len >= 2 && window_len % 2 == 0, Error::Kind::InvalidSpec,
          "window_len must be even and >= 2");
  require(hop == window_len / 2, Error::Kind::InvalidSpec, "hop must equal window_len/2");
  require(search_radius >= 0 && search_radius < hop, Error::Kind::InvalidSpec,
          "search_radius must lie in [0, hop)");
}

TimeStretchMap TimeStretchMap::uniform(int64_t len_in, double factor) {
  TimeStretchMap m;
  m.breakpoints = {{0, 0}, {len_in, std::llround(static_cast<double>(len_in) * factor)}};
  m.validate();
  return m;
}

void TimeStretchMap::validate() const {
  require(breakpoints.size() >= 2, Error::Kind::InvalidSpec, "map needs at least two breakpoints");
  require(breakpoints.front() == std::make_pair<int64_t, int64_t>(0, 0), Error::Kind::InvalidSpec,
          "map must start at (0,0)");
  for (std::size_t i = 1; i < breakpoints.size(); ++i) {
    require(breakpoints[i].first > breakpoints[i - 1].first &&
                breakpoints[i].second > breakpoints[i - 1].second,
            Error::Kind::InvalidSpec, "map breakpoints must be strictly increasing");
  }
}

std::vector<float> hann_window(int len) {
  require(len >= 2 && len % 2 == 0, Error::Kind::BadLength, "window length must be even and >= 2");
  std::vector<float> w(static_cast<std::size_t>(len));
  for (int n = 0; n < len; ++n)
    w[static_cast<std::size_t>(n)] =
        static_cast<float>(0.5 - 0.5 * std::cos(2.0 * M_PI * n / len));
  return w;
}

std::vector<int64_t> output_anchors(int64_t out_len, int hop) {
  require(hop >= 1, Error::Kind::BadArgument, "hop must be >= 1");
  const int64_t count = (out_len + hop - 1) / hop;
  std::vector<int64_t> gamma(static_cast<std::size_t>(count));
  for (int64_t k = 0; k < count; ++k) gamma[static_cast<std::size_t>(k)] = k * hop;
  return gamma;
}

std::vector<int64_t> invert_map(const TimeStretchMap& map, const std::vector<int64_t>& anchors) {
  map.validate();
  std::vector<int64_t> sigma;
  sigma.reserve(anchors.size());
  for (int64_t g : anchors) {
    require(g >= 0 && g <= map.output_len(), Error::Kind::OutOfRange,
            "anchor outside the map's output range");
    // Upper bound over output coordinates; breakpoints are strictly increasing.
    std::size_t hi = 1;
    while (map.breakpoints[hi].second < g) ++hi;
    const auto& [x0, y0] = map.breakpoints[hi - 1];
    const auto& [x1, y1] = map.breakpoints[hi];
    const double t = static_cast<double>(g - y0) / static_cast<double>(y1 - y0);
    int64_t s = std::llround(static_cast<double>(x0) + t * static_cast<double>(x1 - x0));
    if (!sigma.empty()) s = std::max(s, sigma.back());
    sigma.push_back(s);
  }
  return sigma;
}

namespace {

inline float read_or_zero(const AudioBuffer& y, int64_t i) {
  return (i >= 0 && i < y.size()) ? y.samples[static_cast<std::size_t>(i)] : 0.0f;
}

}  // namespace

int64_t wsola_adjust(const AudioBuffer& y, int64_t sigma, std::span<const float> tail,
                     const WsolaParams& params) {
  const int64_t n = static_cast<int64_t>(tail.size());
  if (n == 0 || params.search_radius == 0) return sigma;

  double tail_energy = 0.0;
  for (float v : tail) tail_energy += static_cast<double>(v) * v;
  if (tail_energy < 1e-12) return sigma;

  const int64_t lo = std::max<int64_t>(0, sigma - params.search_radius);
  const int64_t hi = std::min<int64_t>(y.size() - n, sigma + params.search_radius);
  if (lo > hi) return sigma;

  auto ncc = [&](int64_t s) {
    double dot = 0.0, energy = 0.0;
    const float* p = y.samples.data() + s;
    for (int64_t i = 0; i < n; ++i) {
      dot += static_cast<double>(tail[static_cast<std::size_t>(i)]) * p[i];
      energy += static_cast<double>(p[i]) * p[i];
    }
    if (energy < 1e-12) return -2.0;
    return dot / std::sqrt(energy * tail_energy);
  };

  // Candidates visited in order of |shift| so a strict comparison implements
  // the closest-wins tie break.
  int64_t best = sigma;
  double best_score = -3.0;
  const int64_t center = std::clamp(sigma, lo, hi);
  for (int64_t d = 0; d <= hi - lo; ++d) {
    for (int sign : {+1, -1}) {
      if (d == 0 && sign < 0) continue;
      const int64_t s = center + sign * d;
      if (s < lo || s > hi) continue;
      const double score = ncc(s);
      if (score > best_score) {
        best_score = score;
        best = s;
      }
    }
  }
  return best_score <= -2.0 ? sigma : best;
}

AudioBuffer overlap_add_synthesize(const AudioBuffer& y, const std::vector<int64_t>& sigma,
                                   const std::vector<int64_t>& anchors,
                                   const std::vector<float>& window) {
  require(sigma.size() == anchors.size(), Error::Kind::LengthMismatch,
          "sigma and anchor counts differ");
  AudioBuffer z;
  z.sample_rate = y.sample_rate;
  if (anchors.empty()) return z;

  const int64_t len = static_cast<int64_t>(window.size());
  const int64_t out_len = anchors.back() + len;
  std::vector<double> num(static_cast<std::size_t>(out_len), 0.0);
  std::vector<double> den(static_cast<std::size_t>(out_len), 0.0);

  for (std::size_t k = 0; k < anchors.size(); ++k) {
    const int64_t g = anchors[k];
    const int64_t s = sigma[k];
    for (int64_t i = 0; i < len; ++i) {
      const double w = window[static_cast<std::size_t>(i)];
      num[static_cast<std::size_t>(g + i)] += w * read_or_zero(y, s + i);
      den[static_cast<std::size_t>(g + i)] += w;
    }
  }

  z.samples.resize(static_cast<std::size_t>(out_len));
  for (int64_t i = 0; i < out_len; ++i)
    z.samples[static_cast<std::size_t>(i)] =
        static_cast<float>(num[static_cast<std::size_t>(i)] /
                           std::max(den[static_cast<std::size_t>(i)], 1e-8));
  return z;
}

AudioBuffer time_stretch(const AudioBuffer& y, const TimeStretchMap& map,
                         const WsolaParams& params) {
  params.validate();
  map.validate();
  validate_signal(y);
  require(y.size() >= params.window_len, Error::Kind::SignalTooShort,
          "signal shorter than one analysis window");
  require(map.input_len() == y.size(), Error::Kind::LengthMismatch,
          "map input length does not match the signal");

  const int64_t out_len = map.output_len();
  const auto gamma = output_anchors(out_len, params.hop);
  const auto sigma = invert_map(map, gamma);
  const auto window = hann_window(params.window_len);
  const int overlap = params.window_len - params.hop;

  std::vector<int64_t> adjusted(sigma.size());
  std::vector<float> tail(static_cast<std::size_t>(overlap));
  for (std::size_t k = 0; k < sigma.size(); ++k) {
    if (k == 0) {
      adjusted[0] = sigma[0];
      continue;
    }
    // The natural continuation of the previous frame starts one hop after its
    // adjusted read position.
    const int64_t cont = adjusted[k - 1] + params.hop;
    for (int i = 0; i < overlap; ++i)
      tail[static_cast<std::size_t>(i)] = read_or_zero(y, cont + i);
    adjusted[k] = wsola_adjust(y, sigma[k], tail, params);
  }

  AudioBuffer z = overlap_add_synthesize(y, adjusted, gamma, window);
  z.samples.resize(static_cast<std::size_t>(out_len));
  return z;
}

AudioBuffer resample_linear(const AudioBuffer& y, double ratio) {
  require(ratio >= 0.25 && ratio <= 4.0, Error::Kind::BadRatio, "ratio must lie in [0.25, 4]");
  validate_signal(y);

  const int64_t out_len = std::llround(static_cast<double>(y.size()) / ratio);
  AudioBuffer out;
  out.sample_rate = y.sample_rate;
  out.samples.resize(static_cast<std::size_t>(out_len));
  for (int64_t n = 0; n < out_len; ++n) {
    const double pos = static_cast<double>(n) * ratio;
    const int64_t i0 = std::min<int64_t>(static_cast<int64_t>(pos), y.size() - 1);
    const int64_t i1 = std::min<int64_t>(i0 + 1, y.size() - 1);
    const double frac = pos - static_cast<double>(i0);
    out.samples[static_cast<std::size_t>(n)] = static_cast<float>(
        (1.0 - frac) * y.samples[static_cast<std::size_t>(i0)] +
        frac * y.samples[static_cast<std::size_t>(i1)]);
  }
  return out;
}

}  // namespace prosody

#include "prosodyrl/gumbel.hpp"

#include <cmath>

#include "prosodyrl/errors.hpp"

namespace prosody {

GumbelSample gumbel_softmax_sample(double q, double temperature, Rng& rng) {
  require(temperature > 0.0, Error::Kind::BadArgument, "temperature must be positive");
  require(q > 0.0 && q < 1.0, Error::Kind::OutOfRange, "q must lie in (0,1)");
  const double noise = rng.gumbel() - rng.gumbel();
  const double z = (std::log(q / (1.0 - q)) + noise) / temperature;
  GumbelSample s;
  s.soft = 1.0 / (1.0 + std::exp(-z));
  s.hard = s.soft >= 0.5 ? 1.0f : 0.0f;
  return s;
}

std::vector<double> gumbel_noise(int64_t frames, Rng& rng) {
  require(frames >= 1, Error::Kind::BadLength, "need at least one frame");
  std::vector<double> noise(static_cast<std::size_t>(frames));
  for (auto& n : noise) n = rng.gumbel() - rng.gumbel();
  return noise;
}

ad::Var gumbel_soft_op(ad::Tape& t, ad::Var q, double temperature,
                       const std::vector<double>& noise) {
  require(temperature > 0.0, Error::Kind::BadArgument, "temperature must be positive");
  require(static_cast<int64_t>(noise.size()) == q.rows(), Error::Kind::LengthMismatch,
          "one noise value per posterior frame");
  ad::Tensor shift = ad::Tensor::zeros({q.rows(), 1});
  for (std::size_t i = 0; i < noise.size(); ++i) shift.values[i] = static_cast<float>(noise[i]);

  ad::Var logit = t.sub(t.log(q), t.log(t.scale(q, -1.0, 1.0)));
  ad::Var z = t.scale(t.add(logit, t.input(shift, false)), 1.0 / temperature, 0.0);
  return t.sigmoid(z);
}

ad::Var gumbel_mask_op(ad::Tape& t, ad::Var q, double temperature,
                       const std::vector<double>& noise) {
  return t.st_round(gumbel_soft_op(t, q, temperature, noise));
}

}  // namespace prosody

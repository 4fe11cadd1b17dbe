#include "prosodyrl/mask_prior.hpp"

#include <cmath>

#include "prosodyrl/errors.hpp"

namespace prosody {

namespace {

// Elementwise KL(q_t || Ber(p)) for a [T,1] column against a constant p.
ad::Var kl_bern_rows(ad::Tape& t, ad::Var q, double p) {
  ad::Var one_minus = t.scale(q, -1.0, 1.0);
  ad::Var on = t.mul(q, t.scale(t.log(q), 1.0, -std::log(p)));
  ad::Var off = t.mul(one_minus, t.scale(t.log(one_minus), 1.0, -std::log(1.0 - p)));
  return t.add(on, off);
}

}  // namespace

void MarkovPrior::validate() const {
  require(p_stay > 0.0 && p_stay < 1.0, Error::Kind::InvalidSpec, "p_stay must lie in (0,1)");
  require(p_init > 0.0 && p_init < 1.0, Error::Kind::InvalidSpec, "p_init must lie in (0,1)");
}

double kl_bernoulli(double q, double p) {
  return q * std::log(q / p) + (1.0 - q) * std::log((1.0 - q) / (1.0 - p));
}

double sparsity_loss(const MaskPosterior& post, double target) {
  double total = 0.0;
  for (double q : post.q) total += kl_bernoulli(q, target);
  return total;
}

double prior_kl_chain(const MaskPosterior& post, const MarkovPrior& prior) {
  prior.validate();
  require(post.frames() >= 1, Error::Kind::BadLength, "posterior needs at least one frame");
  double total = kl_bernoulli(post.q[0], prior.p_init);
  for (int64_t t = 1; t < post.frames(); ++t) {
    const double prev = post.q[static_cast<std::size_t>(t - 1)];
    const double cur = post.q[static_cast<std::size_t>(t)];
    total += prev * kl_bernoulli(cur, prior.p_stay) +
             (1.0 - prev) * kl_bernoulli(cur, 1.0 - prior.p_stay);
  }
  return total;
}

double prior_kl_bruteforce(const MaskPosterior& post, const MarkovPrior& prior) {
  prior.validate();
  const int64_t frames = post.frames();
  require(frames >= 1, Error::Kind::BadLength, "posterior needs at least one frame");
  require(frames <= 16, Error::Kind::TooLong, "enumeration limited to 16 frames");

  double total = 0.0;
  for (uint64_t bits = 0; bits < (uint64_t{1} << frames); ++bits) {
    double log_q = 0.0;
    double log_p = 0.0;
    int prev = 0;
    for (int64_t t = 0; t < frames; ++t) {
      const int m = static_cast<int>((bits >> t) & 1u);
      const double qt = post.q[static_cast<std::size_t>(t)];
      log_q += std::log(m ? qt : 1.0 - qt);
      if (t == 0) {
        log_p += std::log(m ? prior.p_init : 1.0 - prior.p_init);
      } else {
        log_p += std::log(m == prev ? prior.p_stay : 1.0 - prior.p_stay);
      }
      prev = m;
    }
    total += std::exp(log_q) * (log_q - log_p);
  }
  return total;
}

ad::Var sparsity_loss_op(ad::Tape& t, ad::Var q, double target) {
  return t.sum(kl_bern_rows(t, q, target));
}

ad::Var prior_kl_chain_op(ad::Tape& t, ad::Var q, const MarkovPrior& prior) {
  prior.validate();
  const int64_t frames = q.rows();
  ad::Var first = t.sum(kl_bern_rows(t, t.slice_rows(q, 0, 1), prior.p_init));
  if (frames == 1) return first;

  ad::Var prev = t.slice_rows(q, 0, frames - 1);
  ad::Var cur = t.slice_rows(q, 1, frames);
  ad::Var stay = t.mul(prev, kl_bern_rows(t, cur, prior.p_stay));
  ad::Var flip = t.mul(t.scale(prev, -1.0, 1.0), kl_bern_rows(t, cur, 1.0 - prior.p_stay));
  return t.add(first, t.sum(t.add(stay, flip)));
}

}  // namespace prosody

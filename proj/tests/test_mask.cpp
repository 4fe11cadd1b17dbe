#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

#include "doctest.h"
#include "prosodyrl/errors.hpp"
#include "prosodyrl/grad_check.hpp"
#include "prosodyrl/gumbel.hpp"
#include "prosodyrl/mask_prior.hpp"
#include "prosodyrl/rng.hpp"
#include "prosodyrl/salience.hpp"

using namespace prosody;
using namespace prosody::ad;

namespace {

Error::Kind kind_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an Error");
  return Error::Kind::IoError;
}

MaskPosterior random_posterior(Rng& rng, int64_t frames, double lo = 0.02, double hi = 0.98) {
  MaskPosterior post;
  post.q.resize(static_cast<std::size_t>(frames));
  for (auto& q : post.q) q = rng.uniform(lo, hi);
  return post;
}

Tensor posterior_column(const MaskPosterior& post) {
  Tensor q = Tensor::zeros({post.frames(), 1});
  for (std::size_t i = 0; i < post.q.size(); ++i) q.values[i] = static_cast<float>(post.q[i]);
  return q;
}

// Keeps the double-precision reference aligned with the float32 tape input.
MaskPosterior quantized(const Tensor& q) {
  MaskPosterior post;
  for (float v : q.values) post.q.push_back(static_cast<double>(v));
  return post;
}

}  // namespace

TEST_CASE("bernoulli kl closed-form oracles") {
  CHECK(kl_bernoulli(0.01, 0.01) == doctest::Approx(0.0).epsilon(1e-12));
  // 0.5*ln(0.5/0.01) + 0.5*ln(0.5/0.99)
  CHECK(kl_bernoulli(0.5, 0.01) == doctest::Approx(1.6144631).epsilon(1e-6));

  Rng rng(31);
  for (int i = 0; i < 200; ++i) {
    const double q = rng.uniform(0.001, 0.999);
    const double p = rng.uniform(0.001, 0.999);
    CHECK(kl_bernoulli(q, p) >= -1e-12);
  }
}

TEST_CASE("sparsity loss sums per-frame divergences") {
  MaskPosterior at_target;
  at_target.q.assign(7, 0.01);
  CHECK(sparsity_loss(at_target, 0.01) == doctest::Approx(0.0).epsilon(1e-12));

  MaskPosterior half;
  half.q.assign(10, 0.5);
  CHECK(sparsity_loss(half, 0.01) == doctest::Approx(16.144631).epsilon(1e-6));

  // Raising any frame above the target strictly increases the loss.
  MaskPosterior bumped = at_target;
  for (std::size_t i = 0; i < bumped.q.size(); ++i) {
    MaskPosterior one = at_target;
    one.q[i] = 0.3;
    CHECK(sparsity_loss(one, 0.01) > sparsity_loss(at_target, 0.01));
  }
}

TEST_CASE("chain kl equals brute-force enumeration") {
  MarkovPrior prior;

  MaskPosterior single;
  single.q.assign(1, prior.p_init);
  CHECK(prior_kl_chain(single, prior) == doctest::Approx(0.0).epsilon(1e-12));

  Rng rng(77);
  for (int trial = 0; trial < 200; ++trial) {
    MarkovPrior p;
    p.p_stay = rng.uniform(0.05, 0.95);
    p.p_init = rng.uniform(0.05, 0.95);
    const int64_t frames = 1 + static_cast<int64_t>(rng.uniform_int(10));
    const MaskPosterior post = random_posterior(rng, frames);
    const double chain = prior_kl_chain(post, p);
    const double brute = prior_kl_bruteforce(post, p);
    CHECK(std::fabs(chain - brute) <= 1e-8);
  }
}

TEST_CASE("brute-force kl matches hand arithmetic") {
  MarkovPrior prior;

  // Near-degenerate posterior on the all-zeros sequence: the divergence
  // approaches -log P(0,0,0) = -(ln 0.99 + 2 ln 0.93).
  MaskPosterior zeros;
  zeros.q.assign(3, kPosteriorFloor);
  const double expected = -(std::log(0.99) + 2.0 * std::log(0.93));
  CHECK(prior_kl_bruteforce(zeros, prior) == doctest::Approx(expected).epsilon(1e-4));
  CHECK(std::fabs(prior_kl_chain(zeros, prior) - prior_kl_bruteforce(zeros, prior)) <= 1e-8);

  // q = 0.5 everywhere with a symmetric start: only transitions contribute,
  // each as KL(0.5 || Ber(p_stay)) because the two transition rows mirror.
  MarkovPrior sym;
  sym.p_init = 0.5;
  sym.p_stay = 0.7;
  MaskPosterior half;
  half.q.assign(3, 0.5);
  CHECK(prior_kl_bruteforce(half, sym) ==
        doctest::Approx(2.0 * kl_bernoulli(0.5, 0.7)).epsilon(1e-10));

  MaskPosterior too_long;
  too_long.q.assign(17, 0.5);
  CHECK(kind_of([&] { prior_kl_bruteforce(too_long, prior); }) == Error::Kind::TooLong);

  MarkovPrior bad;
  bad.p_stay = 1.0;
  CHECK(kind_of([&] { bad.validate(); }) == Error::Kind::InvalidSpec);
}

TEST_CASE("tape kl builders track the double-precision functions") {
  Rng rng(5);
  MarkovPrior prior;
  for (int trial = 0; trial < 20; ++trial) {
    const int64_t frames = 1 + static_cast<int64_t>(rng.uniform_int(12));
    Tensor q = posterior_column(random_posterior(rng, frames));
    const MaskPosterior ref = quantized(q);

    Tape t;
    Var qv = t.input(q, false);
    CHECK(t.scalar64(sparsity_loss_op(t, qv, 0.01)) ==
          doctest::Approx(sparsity_loss(ref, 0.01)).epsilon(1e-5));
    CHECK(t.scalar64(prior_kl_chain_op(t, qv, prior)) ==
          doctest::Approx(prior_kl_chain(ref, prior)).epsilon(1e-5));
  }
}

TEST_CASE("kl builders pass gradient checks") {
  Rng rng(6);
  MarkovPrior prior;
  Tensor q = posterior_column(random_posterior(rng, 9, 0.2, 0.8));
  CHECK(grad_check([&](Tape& t, Var v) { return sparsity_loss_op(t, v, 0.01); }, q, 3e-3) <= 1e-3);
  CHECK(grad_check([&](Tape& t, Var v) { return prior_kl_chain_op(t, v, prior); }, q, 3e-3) <=
        1e-3);
}

TEST_CASE("gumbel hard samples are calibrated bernoulli draws") {
  for (double q : {0.1, 0.3, 0.5, 0.9}) {
    Rng rng(991);
    double mean = 0.0;
    const int draws = 100000;
    for (int i = 0; i < draws; ++i) mean += gumbel_softmax_sample(q, 0.1, rng).hard;
    mean /= draws;
    CHECK(std::fabs(mean - q) <= 0.02);
  }

  Rng rng(3);
  int ones = 0;
  for (int i = 0; i < 10000; ++i)
    ones += gumbel_softmax_sample(1.0 - 1e-6, 0.5, rng).hard > 0.5f ? 1 : 0;
  CHECK(ones >= 9990);

  Rng a(42), b(42);
  const GumbelSample sa = gumbel_softmax_sample(0.3, 0.7, a);
  const GumbelSample sb = gumbel_softmax_sample(0.3, 0.7, b);
  CHECK(sa.soft == sb.soft);
  CHECK(sa.hard == sb.hard);

  CHECK(kind_of([&] { gumbel_softmax_sample(0.3, 0.0, a); }) == Error::Kind::BadArgument);
}

TEST_CASE("straight-through mask backward follows the soft path") {
  Rng rng(8);
  const int64_t frames = 12;
  Tensor q = posterior_column(random_posterior(rng, frames, 0.2, 0.8));
  const std::vector<double> noise = gumbel_noise(frames, rng);
  Tensor w = Tensor::zeros({frames, 1});
  for (auto& v : w.values) v = static_cast<float>(rng.uniform(0.5, 1.5));

  // Downstream scalar linear in the mask: the straight-through gradient then
  // coincides with the gradient through the soft relaxation exactly.
  Tape th;
  Var qh = th.input(q, true);
  th.backward(th.sum(th.mul(gumbel_mask_op(th, qh, 0.8, noise), th.input(w, false))));
  const Tensor hard_grad = th.grad(qh);

  Tape ts;
  Var qs = ts.input(q, true);
  ts.backward(ts.sum(ts.mul(gumbel_soft_op(ts, qs, 0.8, noise), ts.input(w, false))));
  const Tensor soft_grad = ts.grad(qs);

  for (std::size_t i = 0; i < hard_grad.values.size(); ++i)
    CHECK(hard_grad.values[i] == soft_grad.values[i]);

  // And the soft path itself agrees with finite differences.
  auto soft_fn = [&](Tape& t, Var v) {
    return t.sum(t.mul(gumbel_soft_op(t, v, 0.8, noise), t.input(w, false)));
  };
  CHECK(grad_check(soft_fn, q, 3e-3) <= 1e-3);

  CHECK(kind_of([&] {
          Tape t;
          gumbel_mask_op(t, t.input(q, false), 0.8, std::vector<double>(3, 0.0));
        }) == Error::Kind::LengthMismatch);
}

TEST_CASE("straight-through gradients reach mask-generator parameters") {
  // Tiny mask generator: q = clamp(sigmoid(x W + b)); a linear readout of the
  // sampled mask then makes the straight-through parameter gradient match
  // finite differences taken through the soft path.
  Rng rng(19);
  const int64_t frames = 10;
  Tensor x = Tensor::zeros({frames, 4});
  for (auto& v : x.values) v = static_cast<float>(rng.uniform(-1.0, 1.0));
  const std::vector<double> noise = gumbel_noise(frames, rng);
  Tensor w = Tensor::zeros({frames, 1});
  for (auto& v : w.values) v = static_cast<float>(rng.uniform(0.5, 1.5));

  ParamStore store;
  nn::Linear head{"head", 4, 1};
  head.init(store, rng);

  auto loss_value = [&](bool soft, GradMap* grads) {
    Tape t;
    nn::Workspace ws(t, store);
    Var q = t.clamp(t.sigmoid(head.forward(ws, t.input(x, false))), kPosteriorFloor,
                    1.0 - kPosteriorFloor);
    Var mask = soft ? gumbel_soft_op(t, q, 0.8, noise) : gumbel_mask_op(t, q, 0.8, noise);
    Var loss = t.sum(t.mul(mask, t.input(w, false)));
    if (grads) {
      t.backward(loss);
      *grads = ws.grads();
    }
    return t.scalar64(loss);
  };

  GradMap st_grads;
  loss_value(false, &st_grads);

  const double eps = 1e-3;
  for (const std::string& name : {std::string("head.w"), std::string("head.b")}) {
    Tensor& param = store.get(name);
    for (std::size_t i = 0; i < param.values.size(); ++i) {
      const float saved = param.values[i];
      const float plus = static_cast<float>(saved + eps);
      const float minus = static_cast<float>(saved - eps);
      param.values[i] = plus;
      const double up = loss_value(true, nullptr);
      param.values[i] = minus;
      const double down = loss_value(true, nullptr);
      param.values[i] = saved;
      const double numeric =
          (up - down) / (static_cast<double>(plus) - static_cast<double>(minus));
      const double analytic = st_grads.at(name).values[i];
      const double rel =
          std::fabs(analytic - numeric) / std::max(1e-8, std::fabs(analytic) + std::fabs(numeric));
      CHECK(rel <= 1e-3);
    }
  }
}

TEST_CASE("energy gate forces quiet frames to the floor") {
  MaskPosterior post;
  post.q = {0.4, 0.6, 0.2, 0.8};

  const std::vector<float> loud = {0.5f, 0.4f, 0.6f, 0.5f};
  const MaskPosterior kept = energy_gate(post, loud, -40.0);
  for (std::size_t i = 0; i < post.q.size(); ++i) CHECK(kept.q[i] == post.q[i]);

  // Leading silence sits 60 dB down and is gated; the rest passes.
  const std::vector<float> leading = {0.0005f, 0.5f, 0.6f, 0.5f};
  const MaskPosterior gated = energy_gate(post, leading, -40.0);
  CHECK(gated.q[0] == kPosteriorFloor);
  for (std::size_t i = 1; i < post.q.size(); ++i) CHECK(gated.q[i] == post.q[i]);

  const std::vector<float> silent(4, 0.0f);
  const MaskPosterior floored = energy_gate(post, silent, -40.0);
  for (double q : floored.q) CHECK(q == kPosteriorFloor);

  CHECK(kind_of([&] { energy_gate(post, std::vector<float>(3, 0.5f), -40.0); }) ==
        Error::Kind::LengthMismatch);
}

TEST_CASE("segment extraction merges near runs and drops short ones") {
  const auto spans = extract_segments({0, 0, 1, 1, 1, 0, 0}, 320, 320);
  REQUIRE(spans.size() == 1);
  CHECK(spans[0].begin == 640);
  CHECK(spans[0].end == 1920);

  // A single-frame gap merges into one run covering frames 0..4.
  const auto merged = extract_segments({1, 1, 0, 1, 1}, 320, 320);
  REQUIRE(merged.size() == 1);
  CHECK(merged[0].begin == 0);
  CHECK(merged[0].end == 5 * 320 + 320);

  CHECK(extract_segments({0, 1, 0}, 320, 320).empty());
  CHECK(extract_segments({0, 1, 1, 0}, 320, 320).empty());
  CHECK(extract_segments({}, 320, 320).empty());

  // Two zero frames keep runs apart.
  const auto split = extract_segments({1, 1, 1, 0, 0, 1, 1, 1}, 100, 300);
  REQUIRE(split.size() == 2);
  CHECK(split[0].begin == 0);
  CHECK(split[0].end == 3 * 100 + 300);
  CHECK(split[1].begin == 500);
  CHECK(split[1].end == 8 * 100 + 300);

  CHECK(kind_of([&] { extract_segments({1, 1, 1}, 0, 320); }) == Error::Kind::BadArgument);
}

TEST_CASE("markov prior run-length arithmetic") {
  // Survival of a run: P(run >= k) = p^k; at p = 0.93 the probability drops
  // below one half between nine and ten 20 ms frames.
  const double p = 0.93;
  CHECK(std::pow(p, 10) == doctest::Approx(0.48398).epsilon(1e-4));
  CHECK(std::pow(p, 10) < 0.5);
  CHECK(std::pow(p, 9) == doctest::Approx(0.52041).epsilon(1e-4));
  CHECK(std::pow(p, 9) > 0.5);
}

#include "prosodyrl/bandit.hpp"

#include <cmath>

#include "prosodyrl/rng.hpp"

namespace prosody {

namespace {

constexpr std::array<double, 3> kRewards = {1.0, 0.0, -1.0};

std::array<double, 3> softmax3(const std::array<double, 3>& theta) {
  double mx = theta[0];
  for (double t : theta) mx = std::max(mx, t);
  std::array<double, 3> pi{};
  double z = 0.0;
  for (int i = 0; i < 3; ++i) {
    pi[static_cast<std::size_t>(i)] = std::exp(theta[static_cast<std::size_t>(i)] - mx);
    z += pi[static_cast<std::size_t>(i)];
  }
  for (double& p : pi) p /= z;
  return pi;
}

double expected_reward(const std::array<double, 3>& pi) {
  double e = 0.0;
  for (int i = 0; i < 3; ++i) e += pi[static_cast<std::size_t>(i)] * kRewards[static_cast<std::size_t>(i)];
  return e;
}

int draw(const std::array<double, 3>& pi, Rng& rng) {
  const double u = rng.uniform();
  double acc = 0.0;
  for (int i = 0; i < 3; ++i) {
    acc += pi[static_cast<std::size_t>(i)];
    if (u < acc) return i;
  }
  return 2;
}

// Score-function gradient of E[r] w.r.t. the logits for one sampled arm.
std::array<double, 3> score_grad(const std::array<double, 3>& pi, int arm, double baseline) {
  std::array<double, 3> g{};
  const double scale = kRewards[static_cast<std::size_t>(arm)] - baseline;
  for (int j = 0; j < 3; ++j) {
    const double indicator = j == arm ? 1.0 : 0.0;
    g[static_cast<std::size_t>(j)] = scale * (indicator - pi[static_cast<std::size_t>(j)]);
  }
  return g;
}

}  // namespace

BanditReport reinforce_bandit_check(uint64_t seed) {
  BanditReport report;
  const Rng master(seed);
  constexpr int kSamples = 10000;

  // Exact gradient by enumeration: d E[r] / d theta_j = pi_j (r_j - E[r]).
  const std::array<double, 3> uniform = softmax3({0.0, 0.0, 0.0});
  const double mean_uniform = expected_reward(uniform);
  for (int j = 0; j < 3; ++j)
    report.exact_grad[static_cast<std::size_t>(j)] =
        uniform[static_cast<std::size_t>(j)] *
        (kRewards[static_cast<std::size_t>(j)] - mean_uniform);

  {
    Rng rng = master.substream("estimator");
    std::array<double, 3> sum{};
    std::array<double, 3> sum_sq{};
    for (int n = 0; n < kSamples; ++n) {
      const std::array<double, 3> g = score_grad(uniform, draw(uniform, rng), 0.0);
      for (int j = 0; j < 3; ++j) {
        sum[static_cast<std::size_t>(j)] += g[static_cast<std::size_t>(j)];
        sum_sq[static_cast<std::size_t>(j)] +=
            g[static_cast<std::size_t>(j)] * g[static_cast<std::size_t>(j)];
      }
    }
    report.estimator_within_2se = true;
    for (int j = 0; j < 3; ++j) {
      const double mean = sum[static_cast<std::size_t>(j)] / kSamples;
      const double var =
          (sum_sq[static_cast<std::size_t>(j)] - kSamples * mean * mean) / (kSamples - 1);
      report.mc_grad[static_cast<std::size_t>(j)] = mean;
      report.mc_se[static_cast<std::size_t>(j)] = std::sqrt(var / kSamples);
      if (std::fabs(mean - report.exact_grad[static_cast<std::size_t>(j)]) >
          2.0 * report.mc_se[static_cast<std::size_t>(j)])
        report.estimator_within_2se = false;
    }
  }

  {
    // Variance reduction needs a policy whose optimal baseline sits near the
    // expected reward: the worst arm is made rare so the common rewards are
    // 1 and 0. The same draws feed both estimators.
    const std::array<double, 3> skewed = softmax3({0.0, 0.0, -3.0});
    const double baseline = expected_reward(skewed);
    Rng rng = master.substream("baseline");
    std::array<double, 3> sum_plain{}, sq_plain{}, sum_base{}, sq_base{};
    for (int n = 0; n < kSamples; ++n) {
      const int arm = draw(skewed, rng);
      const std::array<double, 3> plain = score_grad(skewed, arm, 0.0);
      const std::array<double, 3> based = score_grad(skewed, arm, baseline);
      for (int j = 0; j < 3; ++j) {
        const std::size_t k = static_cast<std::size_t>(j);
        sum_plain[k] += plain[k];
        sq_plain[k] += plain[k] * plain[k];
        sum_base[k] += based[k];
        sq_base[k] += based[k] * based[k];
      }
    }
    double var_plain = 0.0, var_base = 0.0;
    for (int j = 0; j < 3; ++j) {
      const std::size_t k = static_cast<std::size_t>(j);
      const double mp = sum_plain[k] / kSamples;
      const double mb = sum_base[k] / kSamples;
      var_plain += (sq_plain[k] - kSamples * mp * mp) / (kSamples - 1);
      var_base += (sq_base[k] - kSamples * mb * mb) / (kSamples - 1);
    }
    report.variance_without_baseline = var_plain / 3.0;
    report.variance_with_baseline = var_base / 3.0;
  }

  {
    Rng rng = master.substream("train");
    std::array<double, 3> theta{};
    constexpr int kSteps = 2000;
    constexpr double kLr = 0.05;
    for (int step = 0; step < kSteps; ++step) {
      const std::array<double, 3> pi = softmax3(theta);
      if (report.steps_to_confident < 0 && pi[0] >= 0.95) report.steps_to_confident = step;
      const std::array<double, 3> g = score_grad(pi, draw(pi, rng), 0.0);
      for (int j = 0; j < 3; ++j)
        theta[static_cast<std::size_t>(j)] += kLr * g[static_cast<std::size_t>(j)];
    }
    report.final_policy = softmax3(theta);
    if (report.steps_to_confident < 0 && report.final_policy[0] >= 0.95)
      report.steps_to_confident = kSteps;
  }

  return report;
}

}  // namespace prosody

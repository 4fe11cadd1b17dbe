#include "prosodyrl/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "prosodyrl/errors.hpp"

namespace prosody::ad {

namespace {

double eval(const ScalarFn& f, const Tensor& x) {
  Tape tape;
  Var in = tape.input(x, false);
  Var loss = f(tape, in);
  return tape.scalar64(loss);
}

}  // namespace

double grad_check(const ScalarFn& f, const Tensor& x, double eps, int64_t max_components) {
  require(eps > 0.0, Error::Kind::BadArgument, "eps must be positive");

  Tape tape;
  Var in = tape.input(x, true);
  Var loss = f(tape, in);
  tape.backward(loss);
  const Tensor analytic = tape.grad(in);

  std::vector<int64_t> order(x.values.size());
  std::iota(order.begin(), order.end(), 0);
  if (max_components > 0 && max_components < static_cast<int64_t>(order.size())) {
    std::stable_sort(order.begin(), order.end(), [&](int64_t a, int64_t b) {
      return std::fabs(analytic.values[static_cast<std::size_t>(a)]) >
             std::fabs(analytic.values[static_cast<std::size_t>(b)]);
    });
    order.resize(static_cast<std::size_t>(max_components));
  }

  double worst = 0.0;
  Tensor probe = x;
  for (int64_t idx : order) {
    const float saved = probe.values[static_cast<std::size_t>(idx)];
    const float plus = static_cast<float>(saved + eps);
    const float minus = static_cast<float>(saved - eps);
    // Step measured after float32 rounding, not the nominal 2*eps.
    const double step = static_cast<double>(plus) - static_cast<double>(minus);
    require(step > 0.0, Error::Kind::BadArgument, "eps below float resolution at this input");
    probe.values[static_cast<std::size_t>(idx)] = plus;
    const double up = eval(f, probe);
    probe.values[static_cast<std::size_t>(idx)] = minus;
    const double down = eval(f, probe);
    probe.values[static_cast<std::size_t>(idx)] = saved;

    const double numeric = (up - down) / step;
    const double a = static_cast<double>(analytic.values[static_cast<std::size_t>(idx)]);
    const double rel = std::fabs(a - numeric) / std::max(1e-8, std::fabs(a) + std::fabs(numeric));
    worst = std::max(worst, rel);
  }
  return worst;
}

}  // namespace prosody::ad

#pragma once

#include <functional>

#include "prosodyrl/tape.hpp"
#include "prosodyrl/tensor.hpp"

namespace prosody::ad {

// Builds a scalar loss from the given input on a fresh tape. Must be
// deterministic: the checker re-invokes it for every probe.
using ScalarFn = std::function<Var(Tape&, Var)>;

// Compares reverse-mode gradients of f at x against central finite
// differences. Per component: |analytic - numeric| / max(1e-8, |analytic| +
// |numeric|). Returns the maximum over the checked components. When
// max_components > 0, only that many components are probed, taken in order of
// decreasing |analytic| so the strongest gradient directions are covered.
double grad_check(const ScalarFn& f, const Tensor& x, double eps, int64_t max_components = -1);

}  // namespace prosody::ad

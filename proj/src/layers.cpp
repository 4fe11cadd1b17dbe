#include "prosodyrl/layers.hpp"

#include <cmath>
#include <vector>

#include "prosodyrl/errors.hpp"

namespace prosody::nn {

Var Workspace::param(const std::string& name) {
  auto it = cache_.find(name);
  if (it != cache_.end()) return it->second;
  Var v = tape_.input(store_.get(name), trainable_);
  cache_.emplace(name, v);
  return v;
}

GradMap Workspace::grads() const {
  GradMap out;
  for (const auto& [name, var] : cache_) out.emplace(name, tape_.grad(var));
  return out;
}

Tensor glorot(Rng& rng, int64_t rows, int64_t cols) {
  const double a = std::sqrt(6.0 / static_cast<double>(rows + cols));
  Tensor t = Tensor::zeros({rows, cols});
  for (auto& v : t.values) v = static_cast<float>(rng.uniform(-a, a));
  return t;
}

void Linear::init(ParamStore& store, Rng& rng) const {
  store.create(name + ".w", glorot(rng, in, out));
  store.create(name + ".b", Tensor::zeros({1, out}));
}

Var Linear::forward(Workspace& ws, Var x) const {
  Tape& t = ws.tape();
  return t.add(t.matmul(x, ws.param(name + ".w")), ws.param(name + ".b"));
}

void Conv1d::init(ParamStore& store, Rng& rng) const {
  store.create(name + ".w", glorot(rng, static_cast<int64_t>(kernel) * in_ch, out_ch));
  store.create(name + ".b", Tensor::zeros({1, out_ch}));
}

Var Conv1d::forward(Workspace& ws, Var x) const {
  Tape& t = ws.tape();
  return t.conv1d(x, ws.param(name + ".w"), ws.param(name + ".b"), kernel, stride);
}

void Gru::init(ParamStore& store, Rng& rng) const {
  store.create(name + ".rx.w", glorot(rng, in, hidden));
  store.create(name + ".rh.w", glorot(rng, hidden, hidden));
  store.create(name + ".r.b", Tensor::zeros({1, hidden}));
  store.create(name + ".zx.w", glorot(rng, in, hidden));
  store.create(name + ".zh.w", glorot(rng, hidden, hidden));
  store.create(name + ".z.b", Tensor::zeros({1, hidden}));
  store.create(name + ".nx.w", glorot(rng, in, hidden));
  store.create(name + ".nh.w", glorot(rng, hidden, hidden));
  store.create(name + ".nx.b", Tensor::zeros({1, hidden}));
  store.create(name + ".nh.b", Tensor::zeros({1, hidden}));
}

Var Gru::forward(Workspace& ws, Var x) const {
  Tape& t = ws.tape();
  const Var wrx = ws.param(name + ".rx.w"), wrh = ws.param(name + ".rh.w");
  const Var br = ws.param(name + ".r.b");
  const Var wzx = ws.param(name + ".zx.w"), wzh = ws.param(name + ".zh.w");
  const Var bz = ws.param(name + ".z.b");
  const Var wnx = ws.param(name + ".nx.w"), wnh = ws.param(name + ".nh.w");
  const Var bnx = ws.param(name + ".nx.b"), bnh = ws.param(name + ".nh.b");

  Var h = t.input(Tensor::zeros({1, hidden}), false);
  std::vector<Var> states;
  states.reserve(static_cast<std::size_t>(x.rows()));
  for (int64_t step = 0; step < x.rows(); ++step) {
    const Var xt = t.slice_rows(x, step, step + 1);
    const Var r = t.sigmoid(t.add(t.add(t.matmul(xt, wrx), t.matmul(h, wrh)), br));
    const Var z = t.sigmoid(t.add(t.add(t.matmul(xt, wzx), t.matmul(h, wzh)), bz));
    const Var hn = t.add(t.matmul(h, wnh), bnh);
    const Var n = t.tanh(t.add(t.add(t.matmul(xt, wnx), bnx), t.mul(r, hn)));
    h = t.add(t.mul(z, h), t.mul(t.scale(z, -1.0, 1.0), n));
    states.push_back(h);
  }
  return t.concat_rows(states);
}

void SelfAttention::init(ParamStore& store, Rng& rng) const {
  Linear{name + ".q", dim, dim}.init(store, rng);
  Linear{name + ".k", dim, dim}.init(store, rng);
  Linear{name + ".v", dim, dim}.init(store, rng);
}

Var SelfAttention::forward(Workspace& ws, Var x) const {
  Tape& t = ws.tape();
  const Var q = Linear{name + ".q", dim, dim}.forward(ws, x);
  const Var k = Linear{name + ".k", dim, dim}.forward(ws, x);
  const Var v = Linear{name + ".v", dim, dim}.forward(ws, x);
  const Var scores = t.scale(t.matmul(q, t.transpose(k)), 1.0 / std::sqrt(static_cast<double>(dim)));
  return t.add(t.matmul(t.softmax_rows(scores), v), x);
}

}  // namespace prosody::nn

#include "prosodyrl/params.hpp"

#include <cmath>

#include "prosodyrl/errors.hpp"
#include "prosodyrl/serialize.hpp"

namespace prosody::ad {

Tensor& ParamStore::create(const std::string& name, Tensor init) {
  require(!slots_.count(name), Error::Kind::BadArgument, "duplicate parameter: " + name);
  order_.push_back(name);
  Slot slot;
  slot.value = std::move(init);
  slot.m = Tensor::zeros(slot.value.shape);
  slot.v = Tensor::zeros(slot.value.shape);
  return slots_.emplace(name, std::move(slot)).first->second.value;
}

Tensor& ParamStore::get(const std::string& name) {
  auto it = slots_.find(name);
  require(it != slots_.end(), Error::Kind::BadArgument, "unknown parameter: " + name);
  return it->second.value;
}

const Tensor& ParamStore::get(const std::string& name) const {
  auto it = slots_.find(name);
  require(it != slots_.end(), Error::Kind::BadArgument, "unknown parameter: " + name);
  return it->second.value;
}

bool ParamStore::has(const std::string& name) const { return slots_.count(name) > 0; }

void ParamStore::adam_step(const GradMap& grads, const AdamConfig& cfg) {
  for (const auto& [name, g] : grads) {
    require(slots_.count(name), Error::Kind::BadArgument, "gradient for unknown parameter: " + name);
    require(g.same_shape(slots_.at(name).value), Error::Kind::ShapeMismatch,
            "gradient shape differs for " + name);
  }

  ++step_;
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(step_));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(step_));

  for (const std::string& name : order_) {
    Slot& slot = slots_.at(name);
    const auto git = grads.find(name);
    for (std::size_t i = 0; i < slot.value.values.size(); ++i) {
      const double g = git == grads.end() ? 0.0 : static_cast<double>(git->second.values[i]);
      const double m = cfg.beta1 * slot.m.values[i] + (1.0 - cfg.beta1) * g;
      const double v = cfg.beta2 * slot.v.values[i] + (1.0 - cfg.beta2) * g * g;
      slot.m.values[i] = static_cast<float>(m);
      slot.v.values[i] = static_cast<float>(v);
      const double mhat = m / bc1;
      const double vhat = v / bc2;
      slot.value.values[i] = static_cast<float>(
          static_cast<double>(slot.value.values[i]) - cfg.lr * mhat / (std::sqrt(vhat) + cfg.eps));
    }
    check_finite(slot.value, "adam_step");
  }
}

void ParamStore::save(const std::string& path) const {
  std::vector<NamedTensor> entries;
  entries.reserve(order_.size());
  for (const std::string& name : order_) entries.push_back({name, &slots_.at(name).value});
  save_tensors(path, entries);
}

ParamStore ParamStore::load(const std::string& path) {
  ParamStore store;
  for (auto& [name, tensor] : load_tensors(path)) store.create(name, std::move(tensor));
  return store;
}

}  // namespace prosody::ad

#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "prosodyrl/tensor.hpp"

namespace prosody::ad {

using GradMap = std::map<std::string, Tensor>;

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Named parameter tensors with their Adam moments. Iteration order is
// insertion order, so updates and serialization are deterministic.
class ParamStore {
 public:
  // Throws BadArgument on duplicate names.
  Tensor& create(const std::string& name, Tensor init);
  Tensor& get(const std::string& name);
  const Tensor& get(const std::string& name) const;
  bool has(const std::string& name) const;
  const std::vector<std::string>& names() const { return order_; }
  std::size_t size() const { return order_.size(); }

  // One bias-corrected Adam update over every parameter; parameters missing
  // from grads see a zero gradient. Throws ShapeMismatch when a gradient's
  // shape differs from its parameter and BadArgument on unknown names.
  void adam_step(const GradMap& grads, const AdamConfig& cfg);
  int64_t step_count() const { return step_; }

  // Format: "PTEN", version, name/shape table, raw little-endian float32
  // blobs. Round trips bit-exactly. Optimizer moments are not persisted.
  void save(const std::string& path) const;
  static ParamStore load(const std::string& path);

 private:
  struct Slot {
    Tensor value;
    Tensor m;
    Tensor v;
  };
  std::vector<std::string> order_;
  std::map<std::string, Slot> slots_;
  int64_t step_ = 0;
};

}  // namespace prosody::ad

#pragma once

#include <string>
#include <utility>
#include <vector>

#include "prosodyrl/tensor.hpp"

namespace prosody::ad {

struct NamedTensor {
  std::string name;
  const Tensor* tensor;
};

// Binary tensor container: magic "PTEN", u32 version, u32 count, then per
// tensor (u16 name length, name bytes, u8 ndim, u32 dims..., u64 byte offset,
// u64 byte count), u64 total data size, then the raw little-endian float32
// blobs. Round trips bit-exactly.
void save_tensors(const std::string& path, const std::vector<NamedTensor>& tensors);
std::vector<std::pair<std::string, Tensor>> load_tensors(const std::string& path);

}  // namespace prosody::ad

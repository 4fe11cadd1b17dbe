#pragma once

#include <cstdint>
#include <vector>

namespace prosody::ad {

// Dense row-major float32 tensor. The op set works on 2-D shapes [rows, cols];
// scalars are [1, 1].
struct Tensor {
  std::vector<int64_t> shape;
  std::vector<float> values;

  Tensor() = default;
  Tensor(std::vector<int64_t> s, std::vector<float> v);

  static Tensor zeros(std::vector<int64_t> shape);
  static Tensor full(std::vector<int64_t> shape, float value);
  static Tensor scalar(double value);
  static Tensor row(std::vector<float> v);
  static Tensor col(std::vector<float> v);
  static Tensor matrix(int64_t rows, int64_t cols, std::vector<float> v);

  int64_t numel() const;
  bool defined() const { return !shape.empty(); }

  // 2-D accessors; throw ShapeMismatch when the tensor is not 2-D.
  int64_t rows() const;
  int64_t cols() const;
  float& at(int64_t r, int64_t c);
  float at(int64_t r, int64_t c) const;

  bool same_shape(const Tensor& o) const { return shape == o.shape; }
};

// Throws NonFinite when any value is NaN or infinite.
void check_finite(const Tensor& t, const char* where);

}  // namespace prosody::ad

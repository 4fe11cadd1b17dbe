#include "prosodyrl/tensor.hpp"

#include <cmath>
#include <string>

#include "prosodyrl/errors.hpp"

namespace prosody::ad {

Tensor::Tensor(std::vector<int64_t> s, std::vector<float> v)
    : shape(std::move(s)), values(std::move(v)) {
  require(numel() == static_cast<int64_t>(values.size()), Error::Kind::ShapeMismatch,
          "value count does not match the shape");
}

Tensor Tensor::zeros(std::vector<int64_t> shape) { return full(std::move(shape), 0.0f); }

Tensor Tensor::full(std::vector<int64_t> shape, float value) {
  Tensor t;
  t.shape = std::move(shape);
  int64_t n = 1;
  for (int64_t d : t.shape) {
    require(d >= 0, Error::Kind::ShapeMismatch, "negative dimension");
    n *= d;
  }
  t.values.assign(static_cast<std::size_t>(n), value);
  return t;
}

Tensor Tensor::scalar(double value) {
  return Tensor({1, 1}, {static_cast<float>(value)});
}

Tensor Tensor::row(std::vector<float> v) {
  const int64_t n = static_cast<int64_t>(v.size());
  return Tensor({1, n}, std::move(v));
}

Tensor Tensor::col(std::vector<float> v) {
  const int64_t n = static_cast<int64_t>(v.size());
  return Tensor({n, 1}, std::move(v));
}

Tensor Tensor::matrix(int64_t rows, int64_t cols, std::vector<float> v) {
  return Tensor({rows, cols}, std::move(v));
}

int64_t Tensor::numel() const {
  int64_t n = 1;
  for (int64_t d : shape) n *= d;
  return shape.empty() ? 0 : n;
}

int64_t Tensor::rows() const {
  require(shape.size() == 2, Error::Kind::ShapeMismatch, "expected a 2-D tensor");
  return shape[0];
}

int64_t Tensor::cols() const {
  require(shape.size() == 2, Error::Kind::ShapeMismatch, "expected a 2-D tensor");
  return shape[1];
}

float& Tensor::at(int64_t r, int64_t c) {
  return values[static_cast<std::size_t>(r * cols() + c)];
}

float Tensor::at(int64_t r, int64_t c) const {
  return values[static_cast<std::size_t>(r * cols() + c)];
}

void check_finite(const Tensor& t, const char* where) {
  for (float v : t.values) {
    if (!std::isfinite(v)) {
      fail(Error::Kind::NonFinite, std::string("non-finite value produced by ") + where);
    }
  }
}

}  // namespace prosody::ad

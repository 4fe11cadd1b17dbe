#pragma once

#include <functional>
#include <vector>

#include "prosodyrl/tensor.hpp"

namespace prosody::ad {

class Tape;

// Lightweight handle to a node on a tape.
struct Var {
  Tape* tape = nullptr;
  int32_t id = -1;

  const Tensor& val() const;
  int64_t rows() const { return val().rows(); }
  int64_t cols() const { return val().cols(); }
};

// Eager reverse-mode tape. Ops execute immediately, record a backward closure,
// and validate output finiteness. Values are float32; reductions and
// scalar-to-scalar arithmetic also carry a float64 value so small losses can
// be finite-differenced without float32 cancellation noise.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var input(Tensor t, bool needs_grad);

  // Elementwise. add/sub/mul accept equal shapes, or b of shape [1, cols] or
  // [1, 1] broadcast across rows of a.
  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var mul(Var a, Var b);
  Var scale(Var a, double m, double offset = 0.0);  // m*a + offset
  Var sigmoid(Var a);
  Var tanh(Var a);
  Var relu(Var a);
  Var log(Var a);  // input floored at 1e-20
  Var abs(Var a);
  Var clamp(Var a, double lo, double hi);
  Var st_round(Var a);  // round forward, identity backward

  Var matmul(Var a, Var b);
  Var transpose(Var a);
  // x: [T, in_ch], w: [kernel*in_ch, out_ch] (kernel-major rows), bias:
  // [1, out_ch]; output [(T-kernel)/stride + 1, out_ch], no padding.
  Var conv1d(Var x, Var w, Var bias, int kernel, int stride);

  Var softmax_rows(Var a);
  Var sum(Var a);   // -> [1,1]
  Var mean(Var a);  // -> [1,1]
  Var maxpool_time(Var a);  // [T,C] -> [1,C], first max wins per column

  Var slice_rows(Var a, int64_t begin, int64_t end);
  Var slice_cols(Var a, int64_t begin, int64_t end);
  Var concat_rows(const std::vector<Var>& parts);
  Var concat_cols(const std::vector<Var>& parts);
  Var scale_rows(Var a, Var s);  // [T,C] * [T,1], row-wise

  // Reverse pass from a [1,1] loss. Clears previous gradients first, so a
  // tape can be differentiated against several losses in turn.
  void backward(Var loss);

  const Tensor& value(Var v) const;
  double scalar64(Var v) const;
  // Gradient from the last backward; zeros when the node was never reached.
  Tensor grad(Var v) const;
  std::size_t size() const { return nodes_.size(); }

 private:
  using BackFn = std::function<void(Tape&, int32_t self)>;

  struct Node {
    Tensor val;
    Tensor grad;
    double val64 = 0.0;
    bool has_val64 = false;
    bool needs_grad = false;
    BackFn back;
  };

  Var emit(Tensor val, std::initializer_list<int32_t> parents, BackFn back, const char* op);
  bool needs(int32_t id) const { return nodes_[static_cast<std::size_t>(id)].needs_grad; }
  Tensor& grad_buf(int32_t id);
  void set_scalar64(Var v, double x);
  void check_tape(Var v) const;

  std::vector<Node> nodes_;

  friend struct Var;
};

}  // namespace prosody::ad

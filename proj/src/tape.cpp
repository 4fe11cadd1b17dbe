#include "prosodyrl/tape.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "prosodyrl/errors.hpp"

namespace prosody::ad {

namespace {

using EMat = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using EMap = Eigen::Map<EMat>;
using ECMap = Eigen::Map<const EMat>;

ECMap cmap(const Tensor& t) { return {t.values.data(), t.rows(), t.cols()}; }
EMap map(Tensor& t) { return {t.values.data(), t.rows(), t.cols()}; }

enum class Broadcast { Same, Row, Scalar };

Broadcast broadcast_kind(const Tensor& a, const Tensor& b, const char* op) {
  if (a.same_shape(b)) return Broadcast::Same;
  if (b.rows() == 1 && b.cols() == 1) return Broadcast::Scalar;
  if (b.rows() == 1 && b.cols() == a.cols()) return Broadcast::Row;
  fail(Error::Kind::ShapeMismatch, std::string(op) + ": incompatible shapes");
}

inline double sigmoid_d(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

Tensor im2col(const Tensor& x, int kernel, int stride) {
  const int64_t t_in = x.rows();
  const int64_t ch = x.cols();
  const int64_t t_out = (t_in - kernel) / stride + 1;
  Tensor cols = Tensor::zeros({t_out, static_cast<int64_t>(kernel) * ch});
  for (int64_t t = 0; t < t_out; ++t) {
    const float* src = x.values.data() + t * stride * ch;
    float* dst = cols.values.data() + t * kernel * ch;
    std::copy(src, src + kernel * ch, dst);
  }
  return cols;
}

}  // namespace

const Tensor& Var::val() const { return tape->value(*this); }

void Tape::check_tape(Var v) const {
  require(v.tape == this && v.id >= 0 && v.id < static_cast<int32_t>(nodes_.size()),
          Error::Kind::BadArgument, "variable does not belong to this tape");
}

const Tensor& Tape::value(Var v) const {
  check_tape(v);
  return nodes_[static_cast<std::size_t>(v.id)].val;
}

double Tape::scalar64(Var v) const {
  check_tape(v);
  const Node& n = nodes_[static_cast<std::size_t>(v.id)];
  if (n.has_val64) return n.val64;
  require(n.val.numel() == 1, Error::Kind::NotScalar, "scalar64 needs a [1,1] node");
  return static_cast<double>(n.val.values[0]);
}

void Tape::set_scalar64(Var v, double x) {
  Node& n = nodes_[static_cast<std::size_t>(v.id)];
  n.val64 = x;
  n.has_val64 = true;
}

Tensor& Tape::grad_buf(int32_t id) {
  Node& n = nodes_[static_cast<std::size_t>(id)];
  if (!n.grad.defined()) n.grad = Tensor::zeros(n.val.shape);
  return n.grad;
}

Tensor Tape::grad(Var v) const {
  check_tape(v);
  const Node& n = nodes_[static_cast<std::size_t>(v.id)];
  return n.grad.defined() ? n.grad : Tensor::zeros(n.val.shape);
}

Var Tape::emit(Tensor val, std::initializer_list<int32_t> parents, BackFn back, const char* op) {
  check_finite(val, op);
  Node n;
  n.val = std::move(val);
  for (int32_t p : parents) n.needs_grad |= needs(p);
  if (n.needs_grad) n.back = std::move(back);
  nodes_.push_back(std::move(n));
  return Var{this, static_cast<int32_t>(nodes_.size() - 1)};
}

Var Tape::input(Tensor t, bool needs_grad) {
  check_finite(t, "input");
  Node n;
  n.val = std::move(t);
  n.needs_grad = needs_grad;
  if (n.val.numel() == 1 && n.val.shape.size() == 2) {
    n.val64 = static_cast<double>(n.val.values[0]);
    n.has_val64 = true;
  }
  nodes_.push_back(std::move(n));
  return Var{this, static_cast<int32_t>(nodes_.size() - 1)};
}

Var Tape::add(Var a, Var b) {
  check_tape(a);
  check_tape(b);
  const Tensor& av = a.val();
  const Tensor& bv = b.val();
  const Broadcast kind = broadcast_kind(av, bv, "add");

  Tensor out = Tensor::zeros(av.shape);
  const int64_t r = av.rows(), c = av.cols();
  for (int64_t i = 0; i < r; ++i) {
    for (int64_t j = 0; j < c; ++j) {
      const float bval = kind == Broadcast::Same  ? bv.at(i, j)
                         : kind == Broadcast::Row ? bv.at(0, j)
                                                  : bv.values[0];
      out.at(i, j) = av.at(i, j) + bval;
    }
  }

  const int32_t aid = a.id, bid = b.id;
  Var v = emit(std::move(out), {aid, bid},
               [aid, bid, kind](Tape& t, int32_t self) {
                 const Tensor& g = t.nodes_[static_cast<std::size_t>(self)].grad;
                 if (t.needs(aid)) {
                   Tensor& ga = t.grad_buf(aid);
                   for (std::size_t i = 0; i < g.values.size(); ++i) ga.values[i] += g.values[i];
                 }
                 if (t.needs(bid)) {
                   Tensor& gb = t.grad_buf(bid);
                   const int64_t r = g.rows(), c = g.cols();
                   for (int64_t i = 0; i < r; ++i)
                     for (int64_t j = 0; j < c; ++j) {
                       if (kind == Broadcast::Same) gb.at(i, j) += g.at(i, j);
                       else if (kind == Broadcast::Row) gb.at(0, j) += g.at(i, j);
                       else gb.values[0] += g.at(i, j);
                     }
                 }
               },
               "add");
  if (value(a).numel() == 1 && value(b).numel() == 1) set_scalar64(v, scalar64(a) + scalar64(b));
  return v;
}

Var Tape::sub(Var a, Var b) { return add(a, scale(b, -1.0)); }

Var Tape::mul(Var a, Var b) {
  check_tape(a);
  check_tape(b);
  const Tensor& av = a.val();
  const Tensor& bv = b.val();
  const Broadcast kind = broadcast_kind(av, bv, "mul");

  Tensor out = Tensor::zeros(av.shape);
  const int64_t r = av.rows(), c = av.cols();
  for (int64_t i = 0; i < r; ++i) {
    for (int64_t j = 0; j < c; ++j) {
      const float bval = kind == Broadcast::Same  ? bv.at(i, j)
                         : kind == Broadcast::Row ? bv.at(0, j)
                                                  : bv.values[0];
      out.at(i, j) = av.at(i, j) * bval;
    }
  }

  const int32_t aid = a.id, bid = b.id;
  Var v = emit(std::move(out), {aid, bid},
               [aid, bid, kind](Tape& t, int32_t self) {
                 const Tensor& g = t.nodes_[static_cast<std::size_t>(self)].grad;
                 const Tensor& av = t.nodes_[static_cast<std::size_t>(aid)].val;
                 const Tensor& bv = t.nodes_[static_cast<std::size_t>(bid)].val;
                 const int64_t r = g.rows(), c = g.cols();
                 if (t.needs(aid)) {
                   Tensor& ga = t.grad_buf(aid);
                   for (int64_t i = 0; i < r; ++i)
                     for (int64_t j = 0; j < c; ++j) {
                       const float bval = kind == Broadcast::Same  ? bv.at(i, j)
                                          : kind == Broadcast::Row ? bv.at(0, j)
                                                                   : bv.values[0];
                       ga.at(i, j) += g.at(i, j) * bval;
                     }
                 }
                 if (t.needs(bid)) {
                   Tensor& gb = t.grad_buf(bid);
                   for (int64_t i = 0; i < r; ++i)
                     for (int64_t j = 0; j < c; ++j) {
                       const float contrib = g.at(i, j) * av.at(i, j);
                       if (kind == Broadcast::Same) gb.at(i, j) += contrib;
                       else if (kind == Broadcast::Row) gb.at(0, j) += contrib;
                       else gb.values[0] += contrib;
                     }
                 }
               },
               "mul");
  if (value(a).numel() == 1 && value(b).numel() == 1) set_scalar64(v, scalar64(a) * scalar64(b));
  return v;
}

Var Tape::scale(Var a, double m, double offset) {
  check_tape(a);
  const Tensor& av = a.val();
  Tensor out = Tensor::zeros(av.shape);
  for (std::size_t i = 0; i < av.values.size(); ++i)
    out.values[i] = static_cast<float>(m * static_cast<double>(av.values[i]) + offset);

  const int32_t aid = a.id;
  Var v = emit(std::move(out), {aid},
               [aid, m](Tape& t, int32_t self) {
                 const Tensor& g = t.nodes_[static_cast<std::size_t>(self)].grad;
                 if (!t.needs(aid)) return;
                 Tensor& ga = t.grad_buf(aid);
                 for (std::size_t i = 0; i < g.values.size(); ++i)
                   ga.values[i] += static_cast<float>(m) * g.values[i];
               },
               "scale");
  if (value(a).numel() == 1) set_scalar64(v, m * scalar64(a) + offset);
  return v;
}

Var Tape::sigmoid(Var a) {
  check_tape(a);
  const Tensor& av = a.val();
  Tensor out = Tensor::zeros(av.shape);
  for (std::size_t i = 0; i < av.values.size(); ++i)
    out.values[i] = static_cast<float>(sigmoid_d(static_cast<double>(av.values[i])));

  const int32_t aid = a.id;
  Var v = emit(std::move(out), {aid},
               [aid](Tape& t, int32_t self) {
                 if (!t.needs(aid)) return;
                 const Tensor& g = t.nodes_[static_cast<std::size_t>(self)].grad;
                 const Tensor& y = t.nodes_[static_cast<std::size_t>(self)].val;
                 Tensor& ga = t.grad_buf(aid);
                 for (std::size_t i = 0; i < g.values.size(); ++i)
                   ga.values[i] += g.values[i] * y.values[i] * (1.0f - y.values[i]);
               },
               "sigmoid");
  if (value(a).numel() == 1) set_scalar64(v, sigmoid_d(scalar64(a)));
  return v;
}

Var Tape::tanh(Var a) {
  check_tape(a);
  const Tensor& av = a.val();
  Tensor out = Tensor::zeros(av.shape);
  for (std::size_t i = 0; i < av.values.size(); ++i)
    out.values[i] = static_cast<float>(std::tanh(static_cast<double>(av.values[i])));

  const int32_t aid = a.id;
  Var v = emit(std::move(out), {aid},
               [aid](Tape& t, int32_t self) {
                 if (!t.needs(aid)) return;
                 const Tensor& g = t.nodes_[static_cast<std::size_t>(self)].grad;
                 const Tensor& y = t.nodes_[static_cast<std::size_t>(self)].val;
                 Tensor& ga = t.grad_buf(aid);
                 for (std::size_t i = 0; i < g.values.size(); ++i)
                   ga.values[i] += g.values[i] * (1.0f - y.values[i] * y.values[i]);
               },
               "tanh");
  if (value(a).numel() == 1) set_scalar64(v, std::tanh(scalar64(a)));
  return v;
}

Var Tape::relu(Var a) {
  check_tape(a);
  const Tensor& av = a.val();
  Tensor out = Tensor::zeros(av.shape);
  for (std::size_t i = 0; i < av.values.size(); ++i)
    out.values[i] = av.values[i] > 0.0f ? av.values[i] : 0.0f;

  const int32_t aid = a.id;
  return emit(std::move(out), {aid},
              [aid](Tape& t, int32_t self) {
                if (!t.needs(aid)) return;
                const Tensor& g = t.nodes_[static_cast<std::size_t>(self)].grad;
                const Tensor& x = t.nodes_[static_cast<std::size_t>(aid)].val;
                Tensor& ga = t.grad_buf(aid);
                for (std::size_t i = 0; i < g.values.size(); ++i)
                  if (x.values[i] > 0.0f) ga.values[i] += g.values[i];
              },
              "relu");
}

Var Tape::log(Var a) {
  check_tape(a);
  const Tensor& av = a.val();
  Tensor out = Tensor::zeros(av.shape);
  for (std::size_t i = 0; i < av.values.size(); ++i)
    out.values[i] = static_cast<float>(
        std::log(std::max(static_cast<double>(av.values[i]), 1e-20)));

  const int32_t aid = a.id;
  Var v = emit(std::move(out), {aid},
               [aid](Tape& t, int32_t self) {
                 if (!t.needs(aid)) return;
                 const Tensor& g = t.nodes_[static_cast<std::size_t>(self)].grad;
                 const Tensor& x = t.nodes_[static_cast<std::size_t>(aid)].val;
                 Tensor& ga = t.grad_buf(aid);
                 for (std::size_t i = 0; i < g.values.size(); ++i)
                   ga.values[i] += static_cast<float>(
                       static_cast<double>(g.values[i]) /
                       std::max(static_cast<double>(x.values[i]), 1e-20));
               },
               "log");
  if (value(a).numel() == 1) set_scalar64(v, std::log(std::max(scalar64(a), 1e-20)));
  return v;
}

Var Tape::abs(Var a) {
  check_tape(a);
  const Tensor& av = a.val();
  Tensor out = Tensor::zeros(av.shape);
  for (std::size_t i = 0; i < av.values.size(); ++i) out.values[i] = std::fabs(av.values[i]);

  const int32_t aid = a.id;
  Var v = emit(std::move(out), {aid},
               [aid](Tape& t, int32_t self) {
                 if (!t.needs(aid)) return;
                 const Tensor& g = t.nodes_[static_cast<std::size_t>(self)].grad;
                 const Tensor& x = t.nodes_[static_cast<std::size_t>(aid)].val;
                 Tensor& ga = t.grad_buf(aid);
                 for (std::size_t i = 0; i < g.values.size(); ++i) {
                   if (x.values[i] > 0.0f) ga.values[i] += g.values[i];
                   else if (x.values[i] < 0.0f) ga.values[i] -= g.values[i];
                 }
               },
               "abs");
  if (value(a).numel() == 1) set_scalar64(v, std::fabs(scalar64(a)));
  return v;
}

Var Tape::clamp(Var a, double lo, double hi) {
  check_tape(a);
  require(lo < hi, Error::Kind::BadArgument, "clamp needs lo < hi");
  const Tensor& av = a.val();
  Tensor out = Tensor::zeros(av.shape);
  for (std::size_t i = 0; i < av.values.size(); ++i)
    out.values[i] = std::clamp(av.values[i], static_cast<float>(lo), static_cast<float>(hi));

  const int32_t aid = a.id;
  Var v = emit(std::move(out), {aid},
               [aid, lo, hi](Tape& t, int32_t self) {
                 if (!t.needs(aid)) return;
                 const Tensor& g = t.nodes_[static_cast<std::size_t>(self)].grad;
                 const Tensor& x = t.nodes_[static_cast<std::size_t>(aid)].val;
                 Tensor& ga = t.grad_buf(aid);
                 for (std::size_t i = 0; i < g.values.size(); ++i)
                   if (x.values[i] > lo && x.values[i] < hi) ga.values[i] += g.values[i];
               },
               "clamp");
  if (value(a).numel() == 1) set_scalar64(v, std::clamp(scalar64(a), lo, hi));
  return v;
}

Var Tape::st_round(Var a) {
  check_tape(a);
  const Tensor& av = a.val();
  Tensor out = Tensor::zeros(av.shape);
  for (std::size_t i = 0; i < av.values.size(); ++i) out.values[i] = std::round(av.values[i]);

  const int32_t aid = a.id;
  // Straight-through: the backward pass pretends rounding is the identity.
  Var v = emit(std::move(out), {aid},
               [aid](Tape& t, int32_t self) {
                 if (!t.needs(aid)) return;
                 const Tensor& g = t.nodes_[static_cast<std::size_t>(self)].grad;
                 Tensor& ga = t.grad_buf(aid);
                 for (std::size_t i = 0; i < g.values.size(); ++i) ga.values[i] += g.values[i];
               },
               "st_round");
  if (value(a).numel() == 1) set_scalar64(v, std::round(scalar64(a)));
  return v;
}

Var Tape::matmul(Var a, Var b) {
  check_tape(a);
  check_tape(b);
  const Tensor& av = a.val();
  const Tensor& bv = b.val();
  require(av.cols() == bv.rows(), Error::Kind::ShapeMismatch, "matmul: inner dims differ");

  Tensor out = Tensor::zeros({av.rows(), bv.cols()});
  map(out).noalias() = cmap(av) * cmap(bv);

  const int32_t aid = a.id, bid = b.id;
  return emit(std::move(out), {aid, bid},
              [aid, bid](Tape& t, int32_t self) {
                const Tensor& g = t.nodes_[static_cast<std::size_t>(self)].grad;
                const Tensor& av = t.nodes_[static_cast<std::size_t>(aid)].val;
                const Tensor& bv = t.nodes_[static_cast<std::size_t>(bid)].val;
                if (t.needs(aid)) map(t.grad_buf(aid)).noalias() += cmap(g) * cmap(bv).transpose();
                if (t.needs(bid)) map(t.grad_buf(bid)).noalias() += cmap(av).transpose() * cmap(g);
              },
              "matmul");
}

Var Tape::transpose(Var a) {
  check_tape(a);
  const Tensor& av = a.val();
  Tensor out = Tensor::zeros({av.cols(), av.rows()});
  map(out) = cmap(av).transpose();

  const int32_t aid = a.id;
  return emit(std::move(out), {aid},
              [aid](Tape& t, int32_t self) {
                if (!t.needs(aid)) return;
                const Tensor& g = t.nodes_[static_cast<std::size_t>(self)].grad;
                map(t.grad_buf(aid)) += cmap(g).transpose();
              },
              "transpose");
}

Var Tape::conv1d(Var x, Var w, Var bias, int kernel, int stride) {
  check_tape(x);
  check_tape(w);
  check_tape(bias);
  const Tensor& xv = x.val();
  const Tensor& wv = w.val();
  const Tensor& bv = bias.val();
  require(kernel >= 1 && stride >= 1, Error::Kind::BadArgument, "conv1d: kernel and stride >= 1");
  require(xv.rows() >= kernel, Error::Kind::ShapeMismatch, "conv1d: input shorter than kernel");
  require(wv.rows() == static_cast<int64_t>(kernel) * xv.cols(), Error::Kind::ShapeMismatch,
          "conv1d: weight rows must be kernel*in_channels");
  require(bv.rows() == 1 && bv.cols() == wv.cols(), Error::Kind::ShapeMismatch,
          "conv1d: bias must be [1, out_channels]");

  const Tensor cols = im2col(xv, kernel, stride);
  Tensor out = Tensor::zeros({cols.rows(), wv.cols()});
  map(out).noalias() = cmap(cols) * cmap(wv);
  for (int64_t t = 0; t < out.rows(); ++t)
    for (int64_t c = 0; c < out.cols(); ++c) out.at(t, c) += bv.at(0, c);

  const int32_t xid = x.id, wid = w.id, bid = bias.id;
  return emit(std::move(out), {xid, wid, bid},
              [xid, wid, bid, kernel, stride](Tape& t, int32_t self) {
                const Tensor& g = t.nodes_[static_cast<std::size_t>(self)].grad;
                const Tensor& xv = t.nodes_[static_cast<std::size_t>(xid)].val;
                const Tensor& wv = t.nodes_[static_cast<std::size_t>(wid)].val;
                const int64_t ch = xv.cols();

                if (t.needs(wid)) {
                  // im2col is recomputed rather than saved; it is the largest
                  // intermediate in the convolution stack.
                  const Tensor cols = im2col(xv, kernel, stride);
                  map(t.grad_buf(wid)).noalias() += cmap(cols).transpose() * cmap(g);
                }
                if (t.needs(bid)) {
                  Tensor& gb = t.grad_buf(bid);
                  for (int64_t c = 0; c < g.cols(); ++c) {
                    double acc = 0.0;
                    for (int64_t r = 0; r < g.rows(); ++r) acc += g.at(r, c);
                    gb.at(0, c) += static_cast<float>(acc);
                  }
                }
                if (t.needs(xid)) {
                  Tensor gcols = Tensor::zeros({g.rows(), static_cast<int64_t>(kernel) * ch});
                  map(gcols).noalias() = cmap(g) * cmap(wv).transpose();
                  Tensor& gx = t.grad_buf(xid);
                  for (int64_t r = 0; r < g.rows(); ++r)
                    for (int k = 0; k < kernel; ++k)
                      for (int64_t c = 0; c < ch; ++c)
                        gx.at(r * stride + k, c) += gcols.at(r, k * ch + c);
                }
              },
              "conv1d");
}

Var Tape::softmax_rows(Var a) {
  check_tape(a);
  const Tensor& av = a.val();
  Tensor out = Tensor::zeros(av.shape);
  for (int64_t r = 0; r < av.rows(); ++r) {
    double mx = -1e300;
    for (int64_t c = 0; c < av.cols(); ++c) mx = std::max(mx, static_cast<double>(av.at(r, c)));
    double denom = 0.0;
    for (int64_t c = 0; c < av.cols(); ++c)
      denom += std::exp(static_cast<double>(av.at(r, c)) - mx);
    for (int64_t c = 0; c < av.cols(); ++c)
      out.at(r, c) =
          static_cast<float>(std::exp(static_cast<double>(av.at(r, c)) - mx) / denom);
  }

  const int32_t aid = a.id;
  return emit(std::move(out), {aid},
              [aid](Tape& t, int32_t self) {
                if (!t.needs(aid)) return;
                const Tensor& g = t.nodes_[static_cast<std::size_t>(self)].grad;
                const Tensor& y = t.nodes_[static_cast<std::size_t>(self)].val;
                Tensor& ga = t.grad_buf(aid);
                for (int64_t r = 0; r < g.rows(); ++r) {
                  double dot = 0.0;
                  for (int64_t c = 0; c < g.cols(); ++c)
                    dot += static_cast<double>(g.at(r, c)) * y.at(r, c);
                  for (int64_t c = 0; c < g.cols(); ++c)
                    ga.at(r, c) += static_cast<float>(
                        y.at(r, c) * (static_cast<double>(g.at(r, c)) - dot));
                }
              },
              "softmax_rows");
}

Var Tape::sum(Var a) {
  check_tape(a);
  const Tensor& av = a.val();
  double acc = 0.0;
  for (float v : av.values) acc += static_cast<double>(v);

  const int32_t aid = a.id;
  Var v = emit(Tensor::scalar(acc), {aid},
               [aid](Tape& t, int32_t self) {
                 if (!t.needs(aid)) return;
                 const float g = t.nodes_[static_cast<std::size_t>(self)].grad.values[0];
                 Tensor& ga = t.grad_buf(aid);
                 for (auto& gv : ga.values) gv += g;
               },
               "sum");
  set_scalar64(v, acc);
  return v;
}

Var Tape::mean(Var a) {
  check_tape(a);
  const Tensor& av = a.val();
  require(av.numel() > 0, Error::Kind::ShapeMismatch, "mean of an empty tensor");
  double acc = 0.0;
  for (float v : av.values) acc += static_cast<double>(v);
  acc /= static_cast<double>(av.numel());

  const int32_t aid = a.id;
  const double inv_n = 1.0 / static_cast<double>(av.numel());
  Var v = emit(Tensor::scalar(acc), {aid},
               [aid, inv_n](Tape& t, int32_t self) {
                 if (!t.needs(aid)) return;
                 const float g = t.nodes_[static_cast<std::size_t>(self)].grad.values[0];
                 const float gi = static_cast<float>(static_cast<double>(g) * inv_n);
                 Tensor& ga = t.grad_buf(aid);
                 for (auto& gv : ga.values) gv += gi;
               },
               "mean");
  set_scalar64(v, acc);
  return v;
}

Var Tape::maxpool_time(Var a) {
  check_tape(a);
  const Tensor& av = a.val();
  require(av.rows() >= 1, Error::Kind::ShapeMismatch, "maxpool_time needs at least one row");
  Tensor out = Tensor::zeros({1, av.cols()});
  std::vector<int64_t> argmax(static_cast<std::size_t>(av.cols()), 0);
  for (int64_t c = 0; c < av.cols(); ++c) {
    float best = av.at(0, c);
    for (int64_t r = 1; r < av.rows(); ++r) {
      if (av.at(r, c) > best) {
        best = av.at(r, c);
        argmax[static_cast<std::size_t>(c)] = r;
      }
    }
    out.at(0, c) = best;
  }

  const int32_t aid = a.id;
  return emit(std::move(out), {aid},
              [aid, argmax = std::move(argmax)](Tape& t, int32_t self) {
                if (!t.needs(aid)) return;
                const Tensor& g = t.nodes_[static_cast<std::size_t>(self)].grad;
                Tensor& ga = t.grad_buf(aid);
                for (int64_t c = 0; c < g.cols(); ++c)
                  ga.at(argmax[static_cast<std::size_t>(c)], c) += g.at(0, c);
              },
              "maxpool_time");
}

Var Tape::slice_rows(Var a, int64_t begin, int64_t end) {
  check_tape(a);
  const Tensor& av = a.val();
  require(begin >= 0 && begin < end && end <= av.rows(), Error::Kind::OutOfRange,
          "row slice out of range");
  Tensor out = Tensor::zeros({end - begin, av.cols()});
  std::copy(av.values.begin() + begin * av.cols(), av.values.begin() + end * av.cols(),
            out.values.begin());

  const int32_t aid = a.id;
  return emit(std::move(out), {aid},
              [aid, begin](Tape& t, int32_t self) {
                if (!t.needs(aid)) return;
                const Tensor& g = t.nodes_[static_cast<std::size_t>(self)].grad;
                Tensor& ga = t.grad_buf(aid);
                for (int64_t r = 0; r < g.rows(); ++r)
                  for (int64_t c = 0; c < g.cols(); ++c) ga.at(begin + r, c) += g.at(r, c);
              },
              "slice_rows");
}

Var Tape::slice_cols(Var a, int64_t begin, int64_t end) {
  check_tape(a);
  const Tensor& av = a.val();
  require(begin >= 0 && begin < end && end <= av.cols(), Error::Kind::OutOfRange,
          "column slice out of range");
  Tensor out = Tensor::zeros({av.rows(), end - begin});
  for (int64_t r = 0; r < av.rows(); ++r)
    for (int64_t c = begin; c < end; ++c) out.at(r, c - begin) = av.at(r, c);

  const int32_t aid = a.id;
  return emit(std::move(out), {aid},
              [aid, begin](Tape& t, int32_t self) {
                if (!t.needs(aid)) return;
                const Tensor& g = t.nodes_[static_cast<std::size_t>(self)].grad;
                Tensor& ga = t.grad_buf(aid);
                for (int64_t r = 0; r < g.rows(); ++r)
                  for (int64_t c = 0; c < g.cols(); ++c) ga.at(r, begin + c) += g.at(r, c);
              },
              "slice_cols");
}

Var Tape::concat_rows(const std::vector<Var>& parts) {
  require(!parts.empty(), Error::Kind::BadArgument, "concat_rows of nothing");
  int64_t rows = 0;
  const int64_t cols = parts.front().val().cols();
  for (Var p : parts) {
    check_tape(p);
    require(p.val().cols() == cols, Error::Kind::ShapeMismatch,
            "concat_rows: column counts differ");
    rows += p.val().rows();
  }

  Tensor out = Tensor::zeros({rows, cols});
  std::vector<int32_t> ids;
  std::vector<int64_t> offsets;
  int64_t r0 = 0;
  for (Var p : parts) {
    const Tensor& pv = p.val();
    std::copy(pv.values.begin(), pv.values.end(), out.values.begin() + r0 * cols);
    ids.push_back(p.id);
    offsets.push_back(r0);
    r0 += pv.rows();
  }

  Node n;
  n.val = std::move(out);
  check_finite(n.val, "concat_rows");
  for (int32_t id : ids) n.needs_grad |= needs(id);
  if (n.needs_grad) {
    n.back = [ids, offsets](Tape& t, int32_t self) {
      const Tensor& g = t.nodes_[static_cast<std::size_t>(self)].grad;
      for (std::size_t k = 0; k < ids.size(); ++k) {
        if (!t.needs(ids[k])) continue;
        Tensor& gp = t.grad_buf(ids[k]);
        for (int64_t r = 0; r < gp.rows(); ++r)
          for (int64_t c = 0; c < gp.cols(); ++c) gp.at(r, c) += g.at(offsets[k] + r, c);
      }
    };
  }
  nodes_.push_back(std::move(n));
  return Var{this, static_cast<int32_t>(nodes_.size() - 1)};
}

Var Tape::concat_cols(const std::vector<Var>& parts) {
  require(!parts.empty(), Error::Kind::BadArgument, "concat_cols of nothing");
  int64_t cols = 0;
  const int64_t rows = parts.front().val().rows();
  for (Var p : parts) {
    check_tape(p);
    require(p.val().rows() == rows, Error::Kind::ShapeMismatch, "concat_cols: row counts differ");
    cols += p.val().cols();
  }

  Tensor out = Tensor::zeros({rows, cols});
  std::vector<int32_t> ids;
  std::vector<int64_t> offsets;
  int64_t c0 = 0;
  for (Var p : parts) {
    const Tensor& pv = p.val();
    for (int64_t r = 0; r < rows; ++r)
      for (int64_t c = 0; c < pv.cols(); ++c) out.at(r, c0 + c) = pv.at(r, c);
    ids.push_back(p.id);
    offsets.push_back(c0);
    c0 += pv.cols();
  }

  Node n;
  n.val = std::move(out);
  check_finite(n.val, "concat_cols");
  for (int32_t id : ids) n.needs_grad |= needs(id);
  if (n.needs_grad) {
    n.back = [ids, offsets](Tape& t, int32_t self) {
      const Tensor& g = t.nodes_[static_cast<std::size_t>(self)].grad;
      for (std::size_t k = 0; k < ids.size(); ++k) {
        if (!t.needs(ids[k])) continue;
        Tensor& gp = t.grad_buf(ids[k]);
        for (int64_t r = 0; r < gp.rows(); ++r)
          for (int64_t c = 0; c < gp.cols(); ++c) gp.at(r, c) += g.at(r, offsets[k] + c);
      }
    };
  }
  nodes_.push_back(std::move(n));
  return Var{this, static_cast<int32_t>(nodes_.size() - 1)};
}

Var Tape::scale_rows(Var a, Var s) {
  check_tape(a);
  check_tape(s);
  const Tensor& av = a.val();
  const Tensor& sv = s.val();
  require(sv.rows() == av.rows() && sv.cols() == 1, Error::Kind::ShapeMismatch,
          "scale_rows: scale must be [rows, 1]");

  Tensor out = Tensor::zeros(av.shape);
  for (int64_t r = 0; r < av.rows(); ++r)
    for (int64_t c = 0; c < av.cols(); ++c) out.at(r, c) = av.at(r, c) * sv.at(r, 0);

  const int32_t aid = a.id, sid = s.id;
  return emit(std::move(out), {aid, sid},
              [aid, sid](Tape& t, int32_t self) {
                const Tensor& g = t.nodes_[static_cast<std::size_t>(self)].grad;
                const Tensor& av = t.nodes_[static_cast<std::size_t>(aid)].val;
                const Tensor& sv = t.nodes_[static_cast<std::size_t>(sid)].val;
                if (t.needs(aid)) {
                  Tensor& ga = t.grad_buf(aid);
                  for (int64_t r = 0; r < g.rows(); ++r)
                    for (int64_t c = 0; c < g.cols(); ++c)
                      ga.at(r, c) += g.at(r, c) * sv.at(r, 0);
                }
                if (t.needs(sid)) {
                  Tensor& gs = t.grad_buf(sid);
                  for (int64_t r = 0; r < g.rows(); ++r) {
                    double acc = 0.0;
                    for (int64_t c = 0; c < g.cols(); ++c)
                      acc += static_cast<double>(g.at(r, c)) * av.at(r, c);
                    gs.at(r, 0) += static_cast<float>(acc);
                  }
                }
              },
              "scale_rows");
}

void Tape::backward(Var loss) {
  check_tape(loss);
  const Node& ln = nodes_[static_cast<std::size_t>(loss.id)];
  require(ln.val.shape.size() == 2 && ln.val.numel() == 1, Error::Kind::NotScalar,
          "backward needs a [1,1] loss");

  for (Node& n : nodes_) n.grad = Tensor{};
  grad_buf(loss.id).values[0] = 1.0f;

  for (int32_t id = loss.id; id >= 0; --id) {
    Node& n = nodes_[static_cast<std::size_t>(id)];
    if (n.grad.defined() && n.back) n.back(*this, id);
  }
}

}  // namespace prosody::ad

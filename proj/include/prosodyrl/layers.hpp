#pragma once

#include <map>
#include <string>

#include "prosodyrl/params.hpp"
#include "prosodyrl/rng.hpp"
#include "prosodyrl/tape.hpp"

namespace prosody::nn {

using ad::GradMap;
using ad::ParamStore;
using ad::Tape;
using ad::Tensor;
using ad::Var;

// Binds a parameter store to one tape for the duration of a forward/backward
// pass: each named parameter is materialized on the tape once, and grads()
// collects their gradients after backward.
class Workspace {
 public:
  Workspace(Tape& tape, ParamStore& store, bool trainable = true)
      : tape_(tape), store_(store), trainable_(trainable) {}

  Var param(const std::string& name);
  GradMap grads() const;
  Tape& tape() { return tape_; }

 private:
  Tape& tape_;
  ParamStore& store_;
  bool trainable_;
  std::map<std::string, Var> cache_;
};

// Glorot-uniform matrix: U(-a, a) with a = sqrt(6/(rows+cols)).
Tensor glorot(Rng& rng, int64_t rows, int64_t cols);

struct Linear {
  std::string name;
  int64_t in = 0;
  int64_t out = 0;

  void init(ParamStore& store, Rng& rng) const;
  Var forward(Workspace& ws, Var x) const;  // [T,in] -> [T,out]
};

struct Conv1d {
  std::string name;
  int64_t in_ch = 0;
  int64_t out_ch = 0;
  int kernel = 1;
  int stride = 1;

  void init(ParamStore& store, Rng& rng) const;
  Var forward(Workspace& ws, Var x) const;  // [T,in_ch] -> [(T-k)/s+1, out_ch]
  int64_t out_len(int64_t t_in) const { return (t_in - kernel) / stride + 1; }
};

// Single-layer GRU unrolled over rows; initial hidden state is zero.
struct Gru {
  std::string name;
  int64_t in = 0;
  int64_t hidden = 0;

  void init(ParamStore& store, Rng& rng) const;
  Var forward(Workspace& ws, Var x) const;  // [T,in] -> [T,hidden]
};

// Single-head self-attention with a residual connection:
// x + softmax(Q K^T / sqrt(dim)) V.
struct SelfAttention {
  std::string name;
  int64_t dim = 0;

  void init(ParamStore& store, Rng& rng) const;
  Var forward(Workspace& ws, Var x) const;  // [T,dim] -> [T,dim]
};

}  // namespace prosody::nn

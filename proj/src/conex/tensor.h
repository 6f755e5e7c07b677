// Copyright 2026 The Conex Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Dense 64-bit tensors and a reverse-mode differentiation tape.
//
// Tensors are rank 0 (scalar), rank 1 (vector) or rank 2 (row-major
// matrix). Every operation records a node on a Tape; Tape::Backward()
// walks the nodes in reverse creation order, which is a valid reverse
// topological order because parents are always created before children.
// Parameters live outside the tape and receive their gradients through
// Tape::Param() leaves.

#ifndef CONEX_TENSOR_H_
#define CONEX_TENSOR_H_

#include <cstddef>
#include <functional>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace conex {

// Thrown when operand shapes do not fit the operation.
class ShapeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Thrown when an operation produces NaN or infinity.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using Shape = std::vector<size_t>;

std::string ShapeString(const Shape &shape);

class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, double fill = 0.0);
  Tensor(Shape shape, std::vector<double> data);

  static Tensor Scalar(double value) { return Tensor({}, {value}); }
  static Tensor Vector(std::vector<double> values);
  static Tensor Matrix(size_t rows, size_t cols, std::vector<double> values);

  const Shape &shape() const { return shape_; }
  size_t rank() const { return shape_.size(); }
  size_t size() const { return data_.size(); }
  size_t rows() const { return shape_.empty() ? 1 : shape_[0]; }
  size_t cols() const { return shape_.size() < 2 ? 1 : shape_[1]; }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }

  double &operator[](size_t i) { return data_[i]; }
  double operator[](size_t i) const { return data_[i]; }
  double &at(size_t r, size_t c) { return data_[r * cols() + c]; }
  double at(size_t r, size_t c) const { return data_[r * cols() + c]; }

  double item() const;
  bool AllFinite() const;
  void Fill(double value);

  bool operator==(const Tensor &other) const = default;

 private:
  Shape shape_;
  std::vector<double> data_;
};

// A learnable tensor together with its accumulated gradient.
struct Parameter {
  std::string name;
  Tensor value;
  Tensor grad;

  Parameter() = default;
  Parameter(std::string n, Tensor v)
      : name(std::move(n)), value(std::move(v)), grad(value.shape()) {}
  void ZeroGrad() { grad.Fill(0.0); }
};

class Tape;

// Handle to a node on a tape. Cheap to copy.
class Var {
 public:
  Var() = default;
  Var(Tape *tape, int id) : tape_(tape), id_(id) {}

  const Tensor &value() const;
  const Tensor &grad() const;
  const Shape &shape() const { return value().shape(); }
  size_t size() const { return value().size(); }
  int id() const { return id_; }
  Tape *tape() const { return tape_; }
  bool valid() const { return tape_ != nullptr; }

 private:
  Tape *tape_ = nullptr;
  int id_ = -1;
};

class Tape {
 public:
  // With record_gradients = false the tape only evaluates forward values.
  explicit Tape(bool record_gradients = true) : record_(record_gradients) {}
  Tape(const Tape &) = delete;
  Tape &operator=(const Tape &) = delete;

  Var Constant(Tensor value);
  // Leaf whose gradient is added into param->grad by Backward().
  Var Param(Parameter *param);

  // Seeds d(output)/d(output) = 1 for a scalar output and propagates.
  void Backward(Var output);

  size_t size() const { return nodes_.size(); }
  bool recording() const { return record_; }

  const Tensor &value(int id) const {
    const Node &n = nodes_[id];
    return n.param != nullptr ? n.param->value : n.value;
  }
  const Tensor &grad(int id) const {
    const Node &n = nodes_[id];
    return n.param != nullptr ? n.param->grad : n.grad;
  }

  // Used by the operation implementations.
  using BackwardFn = std::function<void(Tape &, int self)>;
  Var Record(Tensor value, BackwardFn backward, const char *op);
  Tensor &MutableGrad(int id);

 private:
  // Parameter leaves read the parameter's value and accumulate directly into
  // its gradient; their own value/grad slots stay empty.
  struct Node {
    Tensor value;
    Tensor grad;
    BackwardFn backward;
    Parameter *param = nullptr;
  };

  bool record_;
  std::vector<Node> nodes_;
};

// ---- Primitives ----------------------------------------------------------
// All of these record onto the tape of their first operand.

// Matrix-vector ({r,c}x{c} -> {r}) or matrix-matrix ({r,c}x{c,k} -> {r,k}).
Var MatMul(Var a, Var b);
Var Transpose(Var a);
// Same-shape addition, or bias addition {r,c} + {c} (added to every row).
Var Add(Var a, Var b);
Var Sub(Var a, Var b);
// Elementwise product of same-shaped operands.
Var Mul(Var a, Var b);
Var Scale(Var a, double k);
// Multiplies every element of a by the scalar node s.
Var ScaleBy(Var a, Var s);
Var OneMinus(Var a);
Var Minimum(Var a, Var b);
Var Concat(std::span<const Var> parts);
Var Concat(std::initializer_list<Var> parts);
Var Slice(Var a, size_t start, size_t length);
// Row r of a matrix as a vector.
Var Row(Var m, size_t r);
// Stacks equal-length vectors into an {n, d} matrix.
Var Stack(std::span<const Var> rows);
// Outer product {n} x {m} -> {n, m}.
Var Outer(Var u, Var v);
Var Tanh(Var a);
Var Sigmoid(Var a);
// axis = -1 for vectors; for matrices 0 normalizes columns, 1 rows.
Var Softmax(Var a, int axis = -1);
Var Log(Var a);
Var Sum(Var a);
// Row `id` of an embedding table {V, E} -> {E}.
Var EmbeddingLookup(Var table, size_t id);
// Rows for several ids -> {n, E}.
Var EmbeddingLookup(Var table, std::span<const size_t> ids);
// out = base; out[indices[j]] += values[j].
Var ScatterAdd(Var base, std::span<const size_t> indices, Var values);
// Appends `extra` zeros to a vector.
Var PadZeros(Var a, size_t extra);
// -log(probs[target]) for a probability vector.
Var NegativeLogLikelihood(Var probs, size_t target);
// -log softmax(logits)[target] via log-sum-exp.
Var CrossEntropyWithLogits(Var logits, size_t target);

// Max over components of |analytic - numeric| / max(|analytic|, |numeric|,
// 1e-4), using central differences with step eps.
double GradCheck(const std::function<Var(Tape &, Var)> &f, const Tensor &x,
                 double eps = 1e-5);

}  // namespace conex

#endif  // CONEX_TENSOR_H_

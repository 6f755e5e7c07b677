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

#include "conex/tensor.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>
#include <fmt/ranges.h>

namespace conex {

namespace {

size_t NumElements(const Shape &shape) {
  size_t n = 1;
  for (size_t d : shape) n *= d;
  return n;
}

[[noreturn]] void Mismatch(const char *op, const Shape &a, const Shape &b) {
  throw ShapeError(fmt::format("{}: incompatible shapes {} and {}", op,
                               ShapeString(a), ShapeString(b)));
}

void RequireRank(const char *op, const Var &a, size_t rank) {
  if (a.value().rank() != rank) {
    throw ShapeError(fmt::format("{}: expected rank {} operand, got {}", op,
                                 rank, ShapeString(a.shape())));
  }
}

Tape &TapeOf(const Var &a) {
  if (!a.valid()) throw std::invalid_argument("operation on an empty Var");
  return *a.tape();
}

void SameTape(const char *op, const Var &a, const Var &b) {
  if (a.tape() != b.tape()) {
    throw std::invalid_argument(fmt::format("{}: operands on different tapes",
                                            op));
  }
}

}  // namespace

std::string ShapeString(const Shape &shape) {
  return fmt::format("[{}]", fmt::join(shape, ","));
}

Tensor::Tensor(Shape shape, double fill)
    : shape_(std::move(shape)), data_(NumElements(shape_), fill) {}

Tensor::Tensor(Shape shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  if (data_.size() != NumElements(shape_)) {
    throw ShapeError(fmt::format("tensor of shape {} given {} values",
                                 ShapeString(shape_), data_.size()));
  }
  if (shape_.size() > 2) {
    throw ShapeError("tensors of rank above 2 are not supported");
  }
}

Tensor Tensor::Vector(std::vector<double> values) {
  size_t n = values.size();
  return Tensor({n}, std::move(values));
}

Tensor Tensor::Matrix(size_t rows, size_t cols, std::vector<double> values) {
  return Tensor({rows, cols}, std::move(values));
}

double Tensor::item() const {
  if (data_.size() != 1) {
    throw ShapeError(fmt::format("item() on tensor of shape {}",
                                 ShapeString(shape_)));
  }
  return data_[0];
}

bool Tensor::AllFinite() const {
  return std::all_of(data_.begin(), data_.end(),
                     [](double v) { return std::isfinite(v); });
}

void Tensor::Fill(double value) { std::fill(data_.begin(), data_.end(), value); }

const Tensor &Var::value() const { return tape_->value(id_); }
const Tensor &Var::grad() const { return tape_->grad(id_); }

Var Tape::Constant(Tensor value) { return Record(std::move(value), nullptr, "constant"); }

Var Tape::Param(Parameter *param) {
  if (!param->value.AllFinite()) {
    throw NumericError(fmt::format("parameter {} is not finite", param->name));
  }
  if (param->grad.shape() != param->value.shape()) {
    param->grad = Tensor(param->value.shape());
  }
  Node node;
  node.param = param;
  nodes_.push_back(std::move(node));
  return Var(this, static_cast<int>(nodes_.size()) - 1);
}

Var Tape::Record(Tensor value, BackwardFn backward, const char *op) {
  if (!value.AllFinite()) {
    throw NumericError(fmt::format("{}: non-finite output", op));
  }
  Node node;
  node.value = std::move(value);
  if (record_) node.backward = std::move(backward);
  nodes_.push_back(std::move(node));
  return Var(this, static_cast<int>(nodes_.size()) - 1);
}

Tensor &Tape::MutableGrad(int id) {
  Node &n = nodes_[id];
  if (n.param != nullptr) return n.param->grad;
  if (n.grad.size() != n.value.size()) n.grad = Tensor(n.value.shape());
  return n.grad;
}

void Tape::Backward(Var output) {
  if (!record_) throw std::logic_error("Backward() on a forward-only tape");
  if (output.size() != 1) {
    throw ShapeError("Backward() needs a scalar output, got " +
                     ShapeString(output.shape()));
  }
  MutableGrad(output.id())[0] += 1.0;
  for (int id = output.id(); id >= 0; --id) {
    Node &n = nodes_[id];
    if (n.param != nullptr || n.grad.size() == 0 || !n.backward) continue;
    n.backward(*this, id);
  }
}

// ---- Primitives ------------------------------------------------------------

Var MatMul(Var a, Var b) {
  SameTape("matmul", a, b);
  Tape &t = TapeOf(a);
  const Tensor &x = a.value();
  const Tensor &y = b.value();
  if (x.rank() != 2 || (y.rank() != 1 && y.rank() != 2) ||
      x.shape()[1] != y.shape()[0]) {
    Mismatch("matmul", x.shape(), y.shape());
  }
  const size_t r = x.shape()[0], c = x.shape()[1];
  const size_t k = y.rank() == 1 ? 1 : y.shape()[1];
  Tensor out(y.rank() == 1 ? Shape{r} : Shape{r, k});
  for (size_t i = 0; i < r; ++i) {
    const double *xr = &x.data()[i * c];
    double *orow = &out.data()[i * k];
    for (size_t j = 0; j < c; ++j) {
      const double xv = xr[j];
      if (xv == 0.0) continue;
      const double *yr = &y.data()[j * k];
      for (size_t l = 0; l < k; ++l) orow[l] += xv * yr[l];
    }
  }
  const int ia = a.id(), ib = b.id();
  return t.Record(std::move(out), [ia, ib, r, c, k](Tape &tp, int self) {
    const Tensor &g = tp.grad(self);
    {
      const Tensor &y = tp.value(ib);
      Tensor &ga = tp.MutableGrad(ia);
      for (size_t i = 0; i < r; ++i) {
        const double *gr = &g.data()[i * k];
        for (size_t j = 0; j < c; ++j) {
          const double *yr = &y.data()[j * k];
          double s = 0.0;
          for (size_t l = 0; l < k; ++l) s += gr[l] * yr[l];
          ga[i * c + j] += s;
        }
      }
    }
    {
      const Tensor &x = tp.value(ia);
      Tensor &gb = tp.MutableGrad(ib);
      for (size_t i = 0; i < r; ++i) {
        const double *gr = &g.data()[i * k];
        for (size_t j = 0; j < c; ++j) {
          const double xv = x[i * c + j];
          double *gbr = &gb.data()[j * k];
          for (size_t l = 0; l < k; ++l) gbr[l] += xv * gr[l];
        }
      }
    }
  }, "matmul");
}

Var Transpose(Var a) {
  Tape &t = TapeOf(a);
  RequireRank("transpose", a, 2);
  const Tensor &x = a.value();
  const size_t r = x.shape()[0], c = x.shape()[1];
  Tensor out({c, r});
  for (size_t i = 0; i < r; ++i)
    for (size_t j = 0; j < c; ++j) out[j * r + i] = x[i * c + j];
  const int ia = a.id();
  return t.Record(std::move(out), [ia, r, c](Tape &tp, int self) {
    const Tensor &g = tp.grad(self);
    Tensor &ga = tp.MutableGrad(ia);
    for (size_t i = 0; i < r; ++i)
      for (size_t j = 0; j < c; ++j) ga[i * c + j] += g[j * r + i];
  }, "transpose");
}

Var Add(Var a, Var b) {
  SameTape("add", a, b);
  Tape &t = TapeOf(a);
  const Tensor &x = a.value();
  const Tensor &y = b.value();
  const int ia = a.id(), ib = b.id();
  if (x.shape() == y.shape()) {
    Tensor out = x;
    for (size_t i = 0; i < out.size(); ++i) out[i] += y[i];
    return t.Record(std::move(out), [ia, ib](Tape &tp, int self) {
      const Tensor &g = tp.grad(self);
      Tensor &ga = tp.MutableGrad(ia);
      for (size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
      Tensor &gb = tp.MutableGrad(ib);
      for (size_t i = 0; i < g.size(); ++i) gb[i] += g[i];
    }, "add");
  }
  if (x.rank() == 2 && y.rank() == 1 && x.shape()[1] == y.shape()[0]) {
    const size_t r = x.shape()[0], c = x.shape()[1];
    Tensor out = x;
    for (size_t i = 0; i < r; ++i)
      for (size_t j = 0; j < c; ++j) out[i * c + j] += y[j];
    return t.Record(std::move(out), [ia, ib, r, c](Tape &tp, int self) {
      const Tensor &g = tp.grad(self);
      Tensor &ga = tp.MutableGrad(ia);
      for (size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
      Tensor &gb = tp.MutableGrad(ib);
      for (size_t i = 0; i < r; ++i)
        for (size_t j = 0; j < c; ++j) gb[j] += g[i * c + j];
    }, "add");
  }
  Mismatch("add", x.shape(), y.shape());
}

Var Sub(Var a, Var b) { return Add(a, Scale(b, -1.0)); }

Var Mul(Var a, Var b) {
  SameTape("mul", a, b);
  Tape &t = TapeOf(a);
  const Tensor &x = a.value();
  const Tensor &y = b.value();
  if (x.shape() != y.shape()) Mismatch("mul", x.shape(), y.shape());
  Tensor out = x;
  for (size_t i = 0; i < out.size(); ++i) out[i] *= y[i];
  const int ia = a.id(), ib = b.id();
  return t.Record(std::move(out), [ia, ib](Tape &tp, int self) {
    const Tensor &g = tp.grad(self);
    const Tensor &x = tp.value(ia);
    const Tensor &y = tp.value(ib);
    Tensor &ga = tp.MutableGrad(ia);
    for (size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * y[i];
    Tensor &gb = tp.MutableGrad(ib);
    for (size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * x[i];
  }, "mul");
}

Var Scale(Var a, double k) {
  Tape &t = TapeOf(a);
  Tensor out = a.value();
  for (size_t i = 0; i < out.size(); ++i) out[i] *= k;
  const int ia = a.id();
  return t.Record(std::move(out), [ia, k](Tape &tp, int self) {
    const Tensor &g = tp.grad(self);
    Tensor &ga = tp.MutableGrad(ia);
    for (size_t i = 0; i < g.size(); ++i) ga[i] += k * g[i];
  }, "scale");
}

Var ScaleBy(Var a, Var s) {
  SameTape("scale_by", a, s);
  Tape &t = TapeOf(a);
  if (s.size() != 1) Mismatch("scale_by", a.shape(), s.shape());
  const double k = s.value()[0];
  Tensor out = a.value();
  for (size_t i = 0; i < out.size(); ++i) out[i] *= k;
  const int ia = a.id(), is = s.id();
  return t.Record(std::move(out), [ia, is](Tape &tp, int self) {
    const Tensor &g = tp.grad(self);
    const Tensor &x = tp.value(ia);
    const double k = tp.value(is)[0];
    Tensor &ga = tp.MutableGrad(ia);
    double ds = 0.0;
    for (size_t i = 0; i < g.size(); ++i) {
      ga[i] += k * g[i];
      ds += x[i] * g[i];
    }
    tp.MutableGrad(is)[0] += ds;
  }, "scale_by");
}

Var OneMinus(Var a) {
  Tape &t = TapeOf(a);
  Tensor out = a.value();
  for (size_t i = 0; i < out.size(); ++i) out[i] = 1.0 - out[i];
  const int ia = a.id();
  return t.Record(std::move(out), [ia](Tape &tp, int self) {
    const Tensor &g = tp.grad(self);
    Tensor &ga = tp.MutableGrad(ia);
    for (size_t i = 0; i < g.size(); ++i) ga[i] -= g[i];
  }, "one_minus");
}

Var Minimum(Var a, Var b) {
  SameTape("minimum", a, b);
  Tape &t = TapeOf(a);
  const Tensor &x = a.value();
  const Tensor &y = b.value();
  if (x.shape() != y.shape()) Mismatch("minimum", x.shape(), y.shape());
  Tensor out = x;
  for (size_t i = 0; i < out.size(); ++i) out[i] = std::min(x[i], y[i]);
  const int ia = a.id(), ib = b.id();
  // Ties route the gradient to the first operand.
  return t.Record(std::move(out), [ia, ib](Tape &tp, int self) {
    const Tensor &g = tp.grad(self);
    const Tensor &x = tp.value(ia);
    const Tensor &y = tp.value(ib);
    Tensor &ga = tp.MutableGrad(ia);
    Tensor &gb = tp.MutableGrad(ib);
    for (size_t i = 0; i < g.size(); ++i) {
      if (x[i] <= y[i]) {
        ga[i] += g[i];
      } else {
        gb[i] += g[i];
      }
    }
  }, "minimum");
}

Var Concat(std::span<const Var> parts) {
  if (parts.empty()) throw ShapeError("concat: no operands");
  Tape &t = TapeOf(parts[0]);
  std::vector<double> data;
  std::vector<int> ids;
  std::vector<size_t> sizes;
  for (const Var &p : parts) {
    SameTape("concat", parts[0], p);
    RequireRank("concat", p, 1);
    const Tensor &v = p.value();
    data.insert(data.end(), v.data().begin(), v.data().end());
    ids.push_back(p.id());
    sizes.push_back(v.size());
  }
  return t.Record(Tensor::Vector(std::move(data)),
                  [ids = std::move(ids), sizes = std::move(sizes)](Tape &tp, int self) {
    const Tensor &g = tp.grad(self);
    size_t off = 0;
    for (size_t p = 0; p < ids.size(); ++p) {
      Tensor &gp = tp.MutableGrad(ids[p]);
      for (size_t i = 0; i < sizes[p]; ++i) gp[i] += g[off + i];
      off += sizes[p];
    }
  }, "concat");
}

Var Concat(std::initializer_list<Var> parts) {
  return Concat(std::span<const Var>(parts.begin(), parts.size()));
}

Var Slice(Var a, size_t start, size_t length) {
  Tape &t = TapeOf(a);
  RequireRank("slice", a, 1);
  const Tensor &x = a.value();
  if (start + length > x.size()) {
    throw ShapeError(fmt::format("slice: [{}, {}) out of range for {}", start,
                                 start + length, ShapeString(x.shape())));
  }
  std::vector<double> data(x.data().begin() + start,
                           x.data().begin() + start + length);
  const int ia = a.id();
  return t.Record(Tensor::Vector(std::move(data)), [ia, start](Tape &tp, int self) {
    const Tensor &g = tp.grad(self);
    Tensor &ga = tp.MutableGrad(ia);
    for (size_t i = 0; i < g.size(); ++i) ga[start + i] += g[i];
  }, "slice");
}

Var Row(Var m, size_t r) {
  Tape &t = TapeOf(m);
  RequireRank("row", m, 2);
  const Tensor &x = m.value();
  const size_t c = x.shape()[1];
  if (r >= x.shape()[0]) {
    throw ShapeError(fmt::format("row: index {} out of range for {}", r,
                                 ShapeString(x.shape())));
  }
  std::vector<double> data(x.data().begin() + r * c,
                           x.data().begin() + (r + 1) * c);
  const int ia = m.id();
  return t.Record(Tensor::Vector(std::move(data)), [ia, r, c](Tape &tp, int self) {
    const Tensor &g = tp.grad(self);
    Tensor &ga = tp.MutableGrad(ia);
    for (size_t i = 0; i < c; ++i) ga[r * c + i] += g[i];
  }, "row");
}

Var Stack(std::span<const Var> rows) {
  if (rows.empty()) throw ShapeError("stack: no operands");
  Tape &t = TapeOf(rows[0]);
  const size_t d = rows[0].size();
  std::vector<double> data;
  data.reserve(rows.size() * d);
  std::vector<int> ids;
  for (const Var &r : rows) {
    SameTape("stack", rows[0], r);
    RequireRank("stack", r, 1);
    if (r.size() != d) Mismatch("stack", rows[0].shape(), r.shape());
    data.insert(data.end(), r.value().data().begin(), r.value().data().end());
    ids.push_back(r.id());
  }
  return t.Record(Tensor::Matrix(rows.size(), d, std::move(data)),
                  [ids = std::move(ids), d](Tape &tp, int self) {
    const Tensor &g = tp.grad(self);
    for (size_t r = 0; r < ids.size(); ++r) {
      Tensor &gr = tp.MutableGrad(ids[r]);
      for (size_t i = 0; i < d; ++i) gr[i] += g[r * d + i];
    }
  }, "stack");
}

Var Outer(Var u, Var v) {
  SameTape("outer", u, v);
  Tape &t = TapeOf(u);
  RequireRank("outer", u, 1);
  RequireRank("outer", v, 1);
  const size_t n = u.size(), m = v.size();
  Tensor out({n, m});
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < m; ++j) out[i * m + j] = u.value()[i] * v.value()[j];
  const int iu = u.id(), iv = v.id();
  return t.Record(std::move(out), [iu, iv, n, m](Tape &tp, int self) {
    const Tensor &g = tp.grad(self);
    const Tensor &x = tp.value(iu);
    const Tensor &y = tp.value(iv);
    Tensor &gu = tp.MutableGrad(iu);
    Tensor &gv = tp.MutableGrad(iv);
    for (size_t i = 0; i < n; ++i) {
      for (size_t j = 0; j < m; ++j) {
        gu[i] += g[i * m + j] * y[j];
        gv[j] += g[i * m + j] * x[i];
      }
    }
  }, "outer");
}

Var Tanh(Var a) {
  Tape &t = TapeOf(a);
  Tensor out = a.value();
  for (size_t i = 0; i < out.size(); ++i) out[i] = std::tanh(out[i]);
  const int ia = a.id();
  return t.Record(std::move(out), [ia](Tape &tp, int self) {
    const Tensor &g = tp.grad(self);
    const Tensor &y = tp.value(self);
    Tensor &ga = tp.MutableGrad(ia);
    for (size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * (1.0 - y[i] * y[i]);
  }, "tanh");
}

Var Sigmoid(Var a) {
  Tape &t = TapeOf(a);
  Tensor out = a.value();
  for (size_t i = 0; i < out.size(); ++i) {
    const double x = out[i];
    // Branches keep exp() from overflowing for large |x|.
    out[i] = x >= 0 ? 1.0 / (1.0 + std::exp(-x))
                    : std::exp(x) / (1.0 + std::exp(x));
  }
  const int ia = a.id();
  return t.Record(std::move(out), [ia](Tape &tp, int self) {
    const Tensor &g = tp.grad(self);
    const Tensor &y = tp.value(self);
    Tensor &ga = tp.MutableGrad(ia);
    for (size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * y[i] * (1.0 - y[i]);
  }, "sigmoid");
}

Var Softmax(Var a, int axis) {
  Tape &t = TapeOf(a);
  const Tensor &x = a.value();
  if (x.size() == 0) throw ShapeError("softmax: empty operand");
  // Normalized groups: `count` groups of `len` elements spaced by `stride`.
  size_t count, len, stride, step;
  if (x.rank() <= 1 || axis == -1) {
    if (x.rank() == 2) throw ShapeError("softmax: matrices need axis 0 or 1");
    count = 1, len = x.size(), stride = 1, step = 0;
  } else if (axis == 1) {
    count = x.shape()[0], len = x.shape()[1], stride = 1, step = len;
  } else if (axis == 0) {
    count = x.shape()[1], len = x.shape()[0], stride = count, step = 1;
  } else {
    throw ShapeError(fmt::format("softmax: bad axis {}", axis));
  }
  Tensor out = x;
  for (size_t gi = 0; gi < count; ++gi) {
    const size_t base = gi * step;
    double mx = -std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < len; ++i) mx = std::max(mx, x[base + i * stride]);
    double z = 0.0;
    for (size_t i = 0; i < len; ++i) {
      double e = std::exp(x[base + i * stride] - mx);
      out[base + i * stride] = e;
      z += e;
    }
    for (size_t i = 0; i < len; ++i) out[base + i * stride] /= z;
  }
  const int ia = a.id();
  return t.Record(std::move(out), [ia, count, len, stride, step](Tape &tp, int self) {
    const Tensor &g = tp.grad(self);
    const Tensor &y = tp.value(self);
    Tensor &ga = tp.MutableGrad(ia);
    for (size_t gi = 0; gi < count; ++gi) {
      const size_t base = gi * step;
      double dot = 0.0;
      for (size_t i = 0; i < len; ++i) {
        const size_t k = base + i * stride;
        dot += g[k] * y[k];
      }
      for (size_t i = 0; i < len; ++i) {
        const size_t k = base + i * stride;
        ga[k] += y[k] * (g[k] - dot);
      }
    }
  }, "softmax");
}

Var Log(Var a) {
  Tape &t = TapeOf(a);
  Tensor out = a.value();
  for (size_t i = 0; i < out.size(); ++i) out[i] = std::log(out[i]);
  const int ia = a.id();
  return t.Record(std::move(out), [ia](Tape &tp, int self) {
    const Tensor &g = tp.grad(self);
    const Tensor &x = tp.value(ia);
    Tensor &ga = tp.MutableGrad(ia);
    for (size_t i = 0; i < g.size(); ++i) ga[i] += g[i] / x[i];
  }, "log");
}

Var Sum(Var a) {
  Tape &t = TapeOf(a);
  double s = 0.0;
  for (double v : a.value().data()) s += v;
  const int ia = a.id();
  return t.Record(Tensor::Scalar(s), [ia](Tape &tp, int self) {
    const double g = tp.grad(self)[0];
    Tensor &ga = tp.MutableGrad(ia);
    for (size_t i = 0; i < ga.size(); ++i) ga[i] += g;
  }, "sum");
}

Var EmbeddingLookup(Var table, size_t id) { return Row(table, id); }

Var EmbeddingLookup(Var table, std::span<const size_t> ids) {
  Tape &t = TapeOf(table);
  RequireRank("embedding_lookup", table, 2);
  const Tensor &w = table.value();
  const size_t rows = w.shape()[0], e = w.shape()[1];
  Tensor out({ids.size(), e});
  for (size_t r = 0; r < ids.size(); ++r) {
    if (ids[r] >= rows) {
      throw ShapeError(fmt::format("embedding_lookup: id {} out of range for {}",
                                   ids[r], ShapeString(w.shape())));
    }
    std::copy_n(&w.data()[ids[r] * e], e, &out.data()[r * e]);
  }
  const int it = table.id();
  std::vector<size_t> idv(ids.begin(), ids.end());
  return t.Record(std::move(out), [it, e, idv = std::move(idv)](Tape &tp, int self) {
    const Tensor &g = tp.grad(self);
    Tensor &gt = tp.MutableGrad(it);
    for (size_t r = 0; r < idv.size(); ++r)
      for (size_t i = 0; i < e; ++i) gt[idv[r] * e + i] += g[r * e + i];
  }, "embedding_lookup");
}

Var ScatterAdd(Var base, std::span<const size_t> indices, Var values) {
  SameTape("scatter_add", base, values);
  Tape &t = TapeOf(base);
  RequireRank("scatter_add", base, 1);
  RequireRank("scatter_add", values, 1);
  if (indices.size() != values.size()) {
    throw ShapeError(fmt::format("scatter_add: {} indices for {} values",
                                 indices.size(), values.size()));
  }
  Tensor out = base.value();
  for (size_t j = 0; j < indices.size(); ++j) {
    if (indices[j] >= out.size()) {
      throw ShapeError(fmt::format("scatter_add: index {} out of range for {}",
                                   indices[j], ShapeString(out.shape())));
    }
    out[indices[j]] += values.value()[j];
  }
  const int ib = base.id(), iv = values.id();
  std::vector<size_t> idx(indices.begin(), indices.end());
  return t.Record(std::move(out), [ib, iv, idx = std::move(idx)](Tape &tp, int self) {
    const Tensor &g = tp.grad(self);
    Tensor &gb = tp.MutableGrad(ib);
    for (size_t i = 0; i < g.size(); ++i) gb[i] += g[i];
    Tensor &gv = tp.MutableGrad(iv);
    for (size_t j = 0; j < idx.size(); ++j) gv[j] += g[idx[j]];
  }, "scatter_add");
}

Var PadZeros(Var a, size_t extra) {
  Tape &t = TapeOf(a);
  RequireRank("pad_zeros", a, 1);
  std::vector<double> data(a.value().data().begin(), a.value().data().end());
  const size_t n = data.size();
  data.resize(n + extra, 0.0);
  const int ia = a.id();
  return t.Record(Tensor::Vector(std::move(data)), [ia, n](Tape &tp, int self) {
    const Tensor &g = tp.grad(self);
    Tensor &ga = tp.MutableGrad(ia);
    for (size_t i = 0; i < n; ++i) ga[i] += g[i];
  }, "pad_zeros");
}

Var NegativeLogLikelihood(Var probs, size_t target) {
  Tape &t = TapeOf(probs);
  RequireRank("negative_log_likelihood", probs, 1);
  if (target >= probs.size()) {
    throw ShapeError(fmt::format("negative_log_likelihood: target {} out of "
                                 "range for {}", target,
                                 ShapeString(probs.shape())));
  }
  const double p = probs.value()[target];
  const int ia = probs.id();
  return t.Record(Tensor::Scalar(-std::log(p)), [ia, target](Tape &tp, int self) {
    const double g = tp.grad(self)[0];
    const double p = tp.value(ia)[target];
    tp.MutableGrad(ia)[target] -= g / p;
  }, "negative_log_likelihood");
}

Var CrossEntropyWithLogits(Var logits, size_t target) {
  Tape &t = TapeOf(logits);
  RequireRank("cross_entropy", logits, 1);
  const Tensor &x = logits.value();
  if (target >= x.size()) {
    throw ShapeError(fmt::format("cross_entropy: target {} out of range for {}",
                                 target, ShapeString(x.shape())));
  }
  double mx = -std::numeric_limits<double>::infinity();
  for (double v : x.data()) mx = std::max(mx, v);
  double z = 0.0;
  for (double v : x.data()) z += std::exp(v - mx);
  const double lse = mx + std::log(z);
  const int ia = logits.id();
  return t.Record(Tensor::Scalar(lse - x[target]), [ia, target, lse](Tape &tp, int self) {
    const double g = tp.grad(self)[0];
    const Tensor &x = tp.value(ia);
    Tensor &ga = tp.MutableGrad(ia);
    for (size_t i = 0; i < x.size(); ++i) ga[i] += g * std::exp(x[i] - lse);
    ga[target] -= g;
  }, "cross_entropy");
}

double GradCheck(const std::function<Var(Tape &, Var)> &f, const Tensor &x,
                 double eps) {
  Parameter p("x", x);
  {
    Tape tape;
    Var out = f(tape, tape.Param(&p));
    tape.Backward(out);
  }
  auto eval = [&](const Tensor &at) {
    Tape tape(false);
    Var in = tape.Constant(at);
    return f(tape, in).value().item();
  };
  double worst = 0.0;
  Tensor probe = x;
  for (size_t i = 0; i < x.size(); ++i) {
    const double orig = probe[i];
    probe[i] = orig + eps;
    const double up = eval(probe);
    probe[i] = orig - eps;
    const double down = eval(probe);
    probe[i] = orig;
    const double numeric = (up - down) / (2.0 * eps);
    const double analytic = p.grad[i];
    const double denom =
        std::max({std::abs(analytic), std::abs(numeric), 1e-4});
    worst = std::max(worst, std::abs(analytic - numeric) / denom);
  }
  return worst;
}

}  // namespace conex

#include "maskgrad/graph.hpp"

#include <cmath>
#include <string>

#include "maskgrad/errors.hpp"
#include "maskgrad/simplex.hpp"

namespace maskgrad {

const Tensor& Var::value() const { return graph->value(*this); }
const Tensor& Var::grad() const { return graph->grad(*this); }

Var Graph::constant(Tensor value) { return record(Op::kConstant, {}, std::move(value)); }

Var Graph::parameter(Tensor value) { return record(Op::kParameter, {}, std::move(value)); }

Var Graph::record(Op op, std::initializer_list<Var> parents, Tensor value, double scalar) {
  Node node;
  node.op = op;
  node.scalar = scalar;
  node.requires_grad = (op == Op::kParameter);
  for (const Var& p : parents) {
    if (p.graph != this) throw GraphError("operand recorded on a different graph");
    node.parents[node.parent_count++] = p.id;
    node.requires_grad = node.requires_grad || nodes_[p.id].requires_grad;
  }
  node.value = std::move(value);
  nodes_.push_back(std::move(node));
  return Var{this, nodes_.size() - 1};
}

const Tensor& Graph::value(Var v) const { return nodes_.at(v.id).value; }

const Tensor& Graph::grad(Var v) const {
  auto& node = const_cast<Node&>(nodes_.at(v.id));
  if (!node.has_grad) {
    node.grad = Tensor::zeros(node.value.shape());
    node.has_grad = true;
  }
  return node.grad;
}

Tensor& Graph::grad_slot(std::size_t id) {
  Node& node = nodes_[id];
  if (!node.has_grad) {
    node.grad = Tensor::zeros(node.value.shape());
    node.has_grad = true;
  }
  return node.grad;
}

void Graph::accumulate(std::size_t id, const Tensor& g) {
  if (!nodes_[id].requires_grad) return;
  Tensor& slot = grad_slot(id);
  auto dst = slot.values();
  auto src = g.values();
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
}

void Graph::reset_gradients() {
  for (Node& node : nodes_) {
    node.grad = Tensor();
    node.has_grad = false;
  }
  backward_done_ = false;
}

void Graph::backward(Var root) {
  if (root.graph != this) throw GraphError("backward root recorded on a different graph");
  if (backward_done_) throw GraphError("backward called twice without reset_gradients()");
  const Node& root_node = nodes_.at(root.id);
  if (root_node.value.size() != 1) {
    throw GraphError("backward root must be scalar, got shape " +
                     shape_string(root_node.value.shape()));
  }
  backward_done_ = true;
  grad_slot(root.id).values()[0] = 1.0;
  for (std::size_t id = root.id + 1; id-- > 0;) {
    const Node& node = nodes_[id];
    if (!node.requires_grad || !node.has_grad || node.parent_count == 0) continue;
    propagate(node);
  }
}

namespace {

Tensor rowwise(const Tensor& out, const Tensor& upstream, bool sparse) {
  Tensor result = Tensor::zeros(out.shape());
  const std::size_t r = out.rows(), c = out.cols();
  for (std::size_t i = 0; i < r; ++i) {
    std::span<const double> p(out.values().data() + i * c, c);
    std::span<const double> g(upstream.values().data() + i * c, c);
    auto row = sparse ? sparsemax_backward_from_output(p, g) : softmax_backward(p, g);
    std::copy(row.begin(), row.end(), result.values().begin() + static_cast<std::ptrdiff_t>(i * c));
  }
  return result;
}

}  // namespace

void Graph::propagate(const Node& node) {
  const Tensor& g = node.grad;
  const std::size_t a_id = node.parents[0];
  const std::size_t b_id = node.parents[1];
  const Tensor& a = nodes_[a_id].value;
  switch (node.op) {
    case Op::kConstant:
    case Op::kParameter:
      return;
    case Op::kMatVec: {
      const Tensor& s = nodes_[b_id].value;
      if (nodes_[a_id].requires_grad) {
        Tensor dm = Tensor::zeros(a.shape());
        for (std::size_t i = 0; i < a.rows(); ++i)
          for (std::size_t j = 0; j < a.cols(); ++j) dm(i, j) = g[i] * s[j];
        accumulate(a_id, dm);
      }
      if (nodes_[b_id].requires_grad) {
        Tensor ds = Tensor::zeros(s.shape());
        for (std::size_t i = 0; i < a.rows(); ++i)
          for (std::size_t j = 0; j < a.cols(); ++j) ds[j] += a(i, j) * g[i];
        accumulate(b_id, ds);
      }
      return;
    }
    case Op::kMatMul: {
      const Tensor& b = nodes_[b_id].value;
      if (nodes_[a_id].requires_grad) accumulate(a_id, maskgrad::matmul_nt(g, b));
      if (nodes_[b_id].requires_grad) accumulate(b_id, maskgrad::matmul_tn(a, g));
      return;
    }
    case Op::kMatMulNT: {
      const Tensor& b = nodes_[b_id].value;
      if (nodes_[a_id].requires_grad) accumulate(a_id, maskgrad::matmul(g, b));
      if (nodes_[b_id].requires_grad) accumulate(b_id, maskgrad::matmul_tn(g, a));
      return;
    }
    case Op::kAdd:
      accumulate(a_id, g);
      accumulate(b_id, g);
      return;
    case Op::kAddRow: {
      accumulate(a_id, g);
      if (nodes_[b_id].requires_grad) {
        Tensor db = Tensor::zeros(nodes_[b_id].value.shape());
        const std::size_t c = g.cols();
        for (std::size_t i = 0; i < g.rows(); ++i)
          for (std::size_t j = 0; j < c; ++j) db[j] += g(i, j);
        accumulate(b_id, db);
      }
      return;
    }
    case Op::kSub: {
      accumulate(a_id, g);
      if (nodes_[b_id].requires_grad) {
        Tensor neg = g;
        for (double& x : neg.values()) x = -x;
        accumulate(b_id, neg);
      }
      return;
    }
    case Op::kMul: {
      const Tensor& b = nodes_[b_id].value;
      if (nodes_[a_id].requires_grad) {
        Tensor da = g;
        for (std::size_t i = 0; i < da.size(); ++i) da[i] *= b[i];
        accumulate(a_id, da);
      }
      if (nodes_[b_id].requires_grad) {
        Tensor db = g;
        for (std::size_t i = 0; i < db.size(); ++i) db[i] *= a[i];
        accumulate(b_id, db);
      }
      return;
    }
    case Op::kScale: {
      Tensor da = g;
      for (double& x : da.values()) x *= node.scalar;
      accumulate(a_id, da);
      return;
    }
    case Op::kAddScalar:
      accumulate(a_id, g);
      return;
    case Op::kTanh: {
      Tensor da = g;
      for (std::size_t i = 0; i < da.size(); ++i) {
        const double y = node.value[i];
        da[i] *= 1.0 - y * y;
      }
      accumulate(a_id, da);
      return;
    }
    case Op::kExp: {
      Tensor da = g;
      for (std::size_t i = 0; i < da.size(); ++i) da[i] *= node.value[i];
      accumulate(a_id, da);
      return;
    }
    case Op::kSoftmaxRows:
      accumulate(a_id, rowwise(node.value, g, false));
      return;
    case Op::kSparsemaxRows:
      accumulate(a_id, rowwise(node.value, g, true));
      return;
    case Op::kSum:
      accumulate(a_id, Tensor::filled(a.shape(), g.item()));
      return;
    case Op::kSumSquares: {
      Tensor da = a;
      const double up = g.item();
      for (double& x : da.values()) x *= 2.0 * up;
      accumulate(a_id, da);
      return;
    }
    case Op::kReshape:
      accumulate(a_id, Tensor(a.shape(), g.storage()));
      return;
  }
}

namespace {

Graph& graph_of(Var a, Var b) {
  if (a.graph == nullptr || a.graph != b.graph) throw GraphError("operands on different graphs");
  return *a.graph;
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* what) {
  if (a.shape() != b.shape()) {
    throw ShapeError(std::string(what) + ": " + shape_string(a.shape()) + " vs " +
                     shape_string(b.shape()));
  }
}

template <typename F>
Tensor map_values(const Tensor& a, F f) {
  Tensor out = a;
  for (double& x : out.values()) x = f(x);
  return out;
}

Tensor rowwise_forward(const Tensor& a, bool sparse) {
  Tensor out = Tensor::zeros(a.shape());
  const std::size_t r = a.rows(), c = a.cols();
  for (std::size_t i = 0; i < r; ++i) {
    std::span<const double> v(a.values().data() + i * c, c);
    auto row = sparse ? sparsemax_row(v) : softmax_row(v);
    std::copy(row.begin(), row.end(), out.values().begin() + static_cast<std::ptrdiff_t>(i * c));
  }
  return out;
}

}  // namespace

Var matvec(Var m, Var s) {
  Graph& g = graph_of(m, s);
  return g.record(Op::kMatVec, {m, s}, maskgrad::matvec(m.value(), s.value()));
}

Var matmul(Var a, Var b) {
  Graph& g = graph_of(a, b);
  return g.record(Op::kMatMul, {a, b}, maskgrad::matmul(a.value(), b.value()));
}

Var matmul_nt(Var a, Var b) {
  Graph& g = graph_of(a, b);
  return g.record(Op::kMatMulNT, {a, b}, maskgrad::matmul_nt(a.value(), b.value()));
}

Var add(Var a, Var b) {
  Graph& g = graph_of(a, b);
  require_same_shape(a.value(), b.value(), "add");
  Tensor out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += b.value()[i];
  return g.record(Op::kAdd, {a, b}, std::move(out));
}

Var add_row(Var a, Var b) {
  Graph& g = graph_of(a, b);
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  if (av.rank() != 2 || bv.rank() != 1 || bv.size() != av.cols()) {
    throw ShapeError("add_row: " + shape_string(av.shape()) + " + " + shape_string(bv.shape()));
  }
  Tensor out = av;
  for (std::size_t i = 0; i < av.rows(); ++i)
    for (std::size_t j = 0; j < av.cols(); ++j) out(i, j) += bv[j];
  return g.record(Op::kAddRow, {a, b}, std::move(out));
}

Var sub(Var a, Var b) {
  Graph& g = graph_of(a, b);
  require_same_shape(a.value(), b.value(), "sub");
  Tensor out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= b.value()[i];
  return g.record(Op::kSub, {a, b}, std::move(out));
}

Var mul(Var a, Var b) {
  Graph& g = graph_of(a, b);
  require_same_shape(a.value(), b.value(), "mul");
  Tensor out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= b.value()[i];
  return g.record(Op::kMul, {a, b}, std::move(out));
}

Var scale(Var a, double c) {
  return a.graph->record(Op::kScale, {a}, map_values(a.value(), [c](double x) { return c * x; }),
                         c);
}

Var add_scalar(Var a, double c) {
  return a.graph->record(Op::kAddScalar, {a},
                         map_values(a.value(), [c](double x) { return x + c; }), c);
}

Var tanh(Var a) {
  return a.graph->record(Op::kTanh, {a}, map_values(a.value(), [](double x) { return std::tanh(x); }));
}

Var exp(Var a) {
  Tensor out = a.value();
  for (double& x : out.values()) {
    x = std::exp(x);
    if (!std::isfinite(x)) throw NumericError("exp overflow");
  }
  return a.graph->record(Op::kExp, {a}, std::move(out));
}

Var softmax_rows(Var a) {
  return a.graph->record(Op::kSoftmaxRows, {a}, rowwise_forward(a.value(), false));
}

Var sparsemax_rows(Var a) {
  return a.graph->record(Op::kSparsemaxRows, {a}, rowwise_forward(a.value(), true));
}

Var sum(Var a) {
  double total = 0.0;
  for (double x : a.value().values()) total += x;
  return a.graph->record(Op::kSum, {a}, Tensor::scalar(total));
}

Var sum_squares(Var a) {
  double total = 0.0;
  for (double x : a.value().values()) total += x * x;
  return a.graph->record(Op::kSumSquares, {a}, Tensor::scalar(total));
}

Var reshape(Var a, Tensor::Shape shape) {
  if (shape_size(shape) != a.value().size()) {
    throw ShapeError("reshape: " + shape_string(a.value().shape()) + " -> " + shape_string(shape));
  }
  return a.graph->record(Op::kReshape, {a}, Tensor(std::move(shape), a.value().storage()));
}

}  // namespace maskgrad

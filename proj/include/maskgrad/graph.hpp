#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "maskgrad/tensor.hpp"

namespace maskgrad {

class Graph;

// Handle to a node recorded on a Graph.
struct Var {
  Graph* graph = nullptr;
  std::size_t id = 0;

  const Tensor& value() const;
  const Tensor& grad() const;
  const Tensor::Shape& shape() const { return value().shape(); }
};

enum class Op {
  kConstant,
  kParameter,
  kMatVec,
  kMatMul,
  kMatMulNT,
  kAdd,
  kAddRow,
  kSub,
  kMul,
  kScale,
  kAddScalar,
  kTanh,
  kExp,
  kSoftmaxRows,
  kSparsemaxRows,
  kSum,
  kSumSquares,
  kReshape,
};

// Tape-based reverse-mode differentiation. Nodes are appended in
// evaluation order, so the tape is acyclic and already topologically
// sorted. One Graph per training step.
class Graph {
 public:
  Graph() = default;
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  Var constant(Tensor value);
  Var parameter(Tensor value);

  const Tensor& value(Var v) const;
  // Accumulated gradient; zeros for nodes that received none.
  const Tensor& grad(Var v) const;

  // Propagates d(root)/d(node) to every node that depends on a parameter.
  // The root must hold exactly one value. Calling twice without
  // reset_gradients() throws GraphError.
  void backward(Var root);
  void reset_gradients();

  std::size_t size() const { return nodes_.size(); }

  // Used by the op functions below.
  Var record(Op op, std::initializer_list<Var> parents, Tensor value, double scalar = 0.0);

 private:
  struct Node {
    Op op;
    std::array<std::size_t, 2> parents{};
    std::size_t parent_count = 0;
    Tensor value;
    Tensor grad;
    bool requires_grad = false;
    bool has_grad = false;
    double scalar = 0.0;
  };

  Tensor& grad_slot(std::size_t id);
  void accumulate(std::size_t id, const Tensor& g);
  void propagate(const Node& node);

  std::vector<Node> nodes_;
  bool backward_done_ = false;
};

// Differentiable operations. All operands must live on the same Graph.
Var matvec(Var m, Var s);
Var matmul(Var a, Var b);
// a * b^T
Var matmul_nt(Var a, Var b);
Var add(Var a, Var b);
// Adds vector b to every row of matrix a.
Var add_row(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var scale(Var a, double c);
Var add_scalar(Var a, double c);
Var tanh(Var a);
Var exp(Var a);
Var softmax_rows(Var a);
Var sparsemax_rows(Var a);
Var sum(Var a);
Var sum_squares(Var a);
Var reshape(Var a, Tensor::Shape shape);

}  // namespace maskgrad

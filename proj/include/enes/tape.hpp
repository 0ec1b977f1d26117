#pragma once

#include <vector>

#include "enes/tensor.hpp"

namespace enes {

// Reverse-mode gradient tape. Nodes are appended in topological order
// (parents always precede children); backward() sweeps ids in reverse once.
// One tape per training thread; tapes are not shared.
class Tape {
 public:
  enum class Op {
    Leaf,
    MatMul,
    Add,
    Sub,
    Hadamard,
    ScalarMul,
    Tanh,
    Sine,
    Square,
    Sigmoid,
    SoftmaxRows,
    Log,
    Sum,
    Mean,
    Dot,
    L2Norm,
    RowScale,  // (n x m) scaled per-row by an (n x 1) column
    RowDot,    // row-wise dot of two (n x m) -> (n x 1)
    RowNorm,   // row-wise L2 norm -> (n x 1)
    Div,       // elementwise a / b
  };

  int leaf(Tensor value);
  int matmul(int a, int b);
  int add(int a, int b);
  int sub(int a, int b);
  int hadamard(int a, int b);
  int scalar_mul(int a, double s);
  int tanh_op(int a);
  int sine_op(int a);
  int square_op(int a);
  int sigmoid_op(int a);
  int softmax_rows_op(int a);
  int log_op(int a);  // log(max(x, 1e-12))
  int sum_op(int a);
  int mean_op(int a);
  int dot_op(int a, int b);
  int l2_norm_op(int a);
  int rowscale(int a, int s);
  int rowdot(int a, int b);
  int rownorm(int a);
  int div_op(int a, int b);

  const Tensor& value(int id) const { return nodes_[id].value; }
  const Tensor& grad(int id) const { return nodes_[id].grad; }

  // Seeds the scalar loss node with gradient 1 and propagates through the
  // whole tape. Leaves that do not contribute keep zero gradient.
  void backward(int loss_id);

  size_t size() const { return nodes_.size(); }
  void clear() { nodes_.clear(); }

 private:
  struct Node {
    Op op;
    int a = -1;
    int b = -1;
    double aux = 0.0;
    Tensor value;
    Tensor grad;
  };

  int push(Op op, int a, int b, double aux, Tensor value);
  std::vector<Node> nodes_;
};

}  // namespace enes

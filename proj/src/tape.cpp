#include "enes/tape.hpp"

#include <cmath>
#include <stdexcept>

#include "enes/errors.hpp"

namespace enes {

namespace {
constexpr double kNormEps = 1e-12;

void require(bool cond, const char* msg) {
  if (!cond) throw std::invalid_argument(msg);
}
}  // namespace

int Tape::push(Op op, int a, int b, double aux, Tensor value) {
  if (finite_checks_enabled() && !value.all_finite())
    throw NumericError("tape: non-finite value produced by op");
  Node n;
  n.op = op;
  n.a = a;
  n.b = b;
  n.aux = aux;
  n.grad = Tensor(value.rows(), value.cols());
  n.value = std::move(value);
  nodes_.push_back(std::move(n));
  return static_cast<int>(nodes_.size()) - 1;
}

int Tape::leaf(Tensor value) { return push(Op::Leaf, -1, -1, 0.0, std::move(value)); }

int Tape::matmul(int a, int b) {
  return push(Op::MatMul, a, b, 0.0, enes::matmul(value(a), value(b)));
}
int Tape::add(int a, int b) { return push(Op::Add, a, b, 0.0, enes::add(value(a), value(b))); }
int Tape::sub(int a, int b) { return push(Op::Sub, a, b, 0.0, enes::sub(value(a), value(b))); }
int Tape::hadamard(int a, int b) {
  return push(Op::Hadamard, a, b, 0.0, enes::hadamard(value(a), value(b)));
}
int Tape::scalar_mul(int a, double s) {
  return push(Op::ScalarMul, a, -1, s, enes::scalar_mul(value(a), s));
}
int Tape::tanh_op(int a) { return push(Op::Tanh, a, -1, 0.0, tanh_ew(value(a))); }
int Tape::sine_op(int a) { return push(Op::Sine, a, -1, 0.0, sine_ew(value(a))); }
int Tape::square_op(int a) { return push(Op::Square, a, -1, 0.0, square_ew(value(a))); }
int Tape::sigmoid_op(int a) { return push(Op::Sigmoid, a, -1, 0.0, sigmoid_ew(value(a))); }
int Tape::softmax_rows_op(int a) {
  return push(Op::SoftmaxRows, a, -1, 0.0, softmax_rows(value(a)));
}
int Tape::log_op(int a) { return push(Op::Log, a, -1, 0.0, log_clamped(value(a))); }

int Tape::sum_op(int a) { return push(Op::Sum, a, -1, 0.0, Tensor(1, 1, enes::sum(value(a)))); }
int Tape::mean_op(int a) { return push(Op::Mean, a, -1, 0.0, Tensor(1, 1, enes::mean(value(a)))); }
int Tape::dot_op(int a, int b) {
  return push(Op::Dot, a, b, 0.0, Tensor(1, 1, enes::dot(value(a), value(b))));
}
int Tape::l2_norm_op(int a) {
  return push(Op::L2Norm, a, -1, 0.0, Tensor(1, 1, enes::l2_norm(value(a))));
}

int Tape::rowscale(int a, int s) {
  const Tensor& x = value(a);
  const Tensor& c = value(s);
  require(c.rows() == x.rows() && c.cols() == 1, "rowscale: scale must be (n x 1)");
  Tensor out(x.rows(), x.cols());
  for (int r = 0; r < x.rows(); ++r)
    for (int j = 0; j < x.cols(); ++j) out.at(r, j) = x.at(r, j) * c.at(r, 0);
  return push(Op::RowScale, a, s, 0.0, std::move(out));
}

int Tape::rowdot(int a, int b) {
  const Tensor& x = value(a);
  const Tensor& y = value(b);
  require(x.same_shape(y), "rowdot: shapes differ");
  Tensor out(x.rows(), 1);
  for (int r = 0; r < x.rows(); ++r) {
    double s = 0.0;
    for (int j = 0; j < x.cols(); ++j) s += x.at(r, j) * y.at(r, j);
    out.at(r, 0) = s;
  }
  return push(Op::RowDot, a, b, 0.0, std::move(out));
}

int Tape::rownorm(int a) {
  const Tensor& x = value(a);
  Tensor out(x.rows(), 1);
  for (int r = 0; r < x.rows(); ++r) {
    double s = 0.0;
    for (int j = 0; j < x.cols(); ++j) s += x.at(r, j) * x.at(r, j);
    out.at(r, 0) = std::sqrt(s);
  }
  return push(Op::RowNorm, a, -1, 0.0, std::move(out));
}

int Tape::div_op(int a, int b) {
  const Tensor& x = value(a);
  const Tensor& y = value(b);
  require(x.same_shape(y), "div: shapes differ");
  Tensor out(x.rows(), x.cols());
  for (size_t i = 0; i < x.size(); ++i) out[i] = x[i] / y[i];
  return push(Op::Div, a, b, 0.0, std::move(out));
}

void Tape::backward(int loss_id) {
  if (loss_id < 0 || loss_id >= static_cast<int>(nodes_.size()))
    throw std::invalid_argument("backward: bad node id");
  Node& loss = nodes_[loss_id];
  if (loss.value.rows() != 1 || loss.value.cols() != 1)
    throw std::invalid_argument("backward: loss must be scalar, got " + loss.value.shape_str());

  for (Node& n : nodes_) n.grad = Tensor(n.value.rows(), n.value.cols());
  loss.grad.at(0, 0) = 1.0;

  for (int id = loss_id; id >= 0; --id) {
    const Node& n = nodes_[id];
    const Tensor& g = n.grad;
    switch (n.op) {
      case Op::Leaf:
        break;
      case Op::MatMul: {
        const Tensor& A = nodes_[n.a].value;
        const Tensor& B = nodes_[n.b].value;
        Tensor& dA = nodes_[n.a].grad;
        Tensor& dB = nodes_[n.b].grad;
        // dA += g * B^T ; dB += A^T * g
        for (int i = 0; i < A.rows(); ++i)
          for (int p = 0; p < A.cols(); ++p) {
            double s = 0.0;
            for (int j = 0; j < B.cols(); ++j) s += g.at(i, j) * B.at(p, j);
            dA.at(i, p) += s;
          }
        for (int p = 0; p < B.rows(); ++p)
          for (int j = 0; j < B.cols(); ++j) {
            double s = 0.0;
            for (int i = 0; i < A.rows(); ++i) s += A.at(i, p) * g.at(i, j);
            dB.at(p, j) += s;
          }
        break;
      }
      case Op::Add: {
        Tensor& dA = nodes_[n.a].grad;
        Tensor& dB = nodes_[n.b].grad;
        for (size_t i = 0; i < g.size(); ++i) dA[i] += g[i];
        if (dB.same_shape(g)) {
          for (size_t i = 0; i < g.size(); ++i) dB[i] += g[i];
        } else {  // row-vector bias: column-sum the gradient
          for (int r = 0; r < g.rows(); ++r)
            for (int c = 0; c < g.cols(); ++c) dB.at(0, c) += g.at(r, c);
        }
        break;
      }
      case Op::Sub: {
        Tensor& dA = nodes_[n.a].grad;
        Tensor& dB = nodes_[n.b].grad;
        for (size_t i = 0; i < g.size(); ++i) {
          dA[i] += g[i];
          dB[i] -= g[i];
        }
        break;
      }
      case Op::Hadamard: {
        const Tensor& A = nodes_[n.a].value;
        const Tensor& B = nodes_[n.b].value;
        Tensor& dA = nodes_[n.a].grad;
        Tensor& dB = nodes_[n.b].grad;
        for (size_t i = 0; i < g.size(); ++i) {
          dA[i] += g[i] * B[i];
          dB[i] += g[i] * A[i];
        }
        break;
      }
      case Op::ScalarMul: {
        Tensor& dA = nodes_[n.a].grad;
        for (size_t i = 0; i < g.size(); ++i) dA[i] += n.aux * g[i];
        break;
      }
      case Op::Tanh: {
        Tensor& dA = nodes_[n.a].grad;
        const Tensor& y = n.value;
        for (size_t i = 0; i < g.size(); ++i) dA[i] += g[i] * (1.0 - y[i] * y[i]);
        break;
      }
      case Op::Sine: {
        const Tensor& x = nodes_[n.a].value;
        Tensor& dA = nodes_[n.a].grad;
        for (size_t i = 0; i < g.size(); ++i) dA[i] += g[i] * std::cos(x[i]);
        break;
      }
      case Op::Square: {
        const Tensor& x = nodes_[n.a].value;
        Tensor& dA = nodes_[n.a].grad;
        for (size_t i = 0; i < g.size(); ++i) dA[i] += g[i] * 2.0 * x[i];
        break;
      }
      case Op::Sigmoid: {
        Tensor& dA = nodes_[n.a].grad;
        const Tensor& y = n.value;
        for (size_t i = 0; i < g.size(); ++i) dA[i] += g[i] * y[i] * (1.0 - y[i]);
        break;
      }
      case Op::SoftmaxRows: {
        Tensor& dA = nodes_[n.a].grad;
        const Tensor& y = n.value;
        for (int r = 0; r < y.rows(); ++r) {
          double inner = 0.0;
          for (int c = 0; c < y.cols(); ++c) inner += g.at(r, c) * y.at(r, c);
          for (int c = 0; c < y.cols(); ++c)
            dA.at(r, c) += y.at(r, c) * (g.at(r, c) - inner);
        }
        break;
      }
      case Op::Log: {
        const Tensor& x = nodes_[n.a].value;
        Tensor& dA = nodes_[n.a].grad;
        for (size_t i = 0; i < g.size(); ++i)
          if (x[i] > kLogClamp) dA[i] += g[i] / x[i];
        break;
      }
      case Op::Sum: {
        Tensor& dA = nodes_[n.a].grad;
        const double gs = g.at(0, 0);
        for (size_t i = 0; i < dA.size(); ++i) dA[i] += gs;
        break;
      }
      case Op::Mean: {
        Tensor& dA = nodes_[n.a].grad;
        const double gs = g.at(0, 0) / static_cast<double>(dA.size());
        for (size_t i = 0; i < dA.size(); ++i) dA[i] += gs;
        break;
      }
      case Op::Dot: {
        const Tensor& A = nodes_[n.a].value;
        const Tensor& B = nodes_[n.b].value;
        Tensor& dA = nodes_[n.a].grad;
        Tensor& dB = nodes_[n.b].grad;
        const double gs = g.at(0, 0);
        for (size_t i = 0; i < A.size(); ++i) {
          dA[i] += gs * B[i];
          dB[i] += gs * A[i];
        }
        break;
      }
      case Op::L2Norm: {
        const Tensor& x = nodes_[n.a].value;
        Tensor& dA = nodes_[n.a].grad;
        const double nm = std::max(n.value.at(0, 0), kNormEps);
        const double gs = g.at(0, 0);
        for (size_t i = 0; i < x.size(); ++i) dA[i] += gs * x[i] / nm;
        break;
      }
      case Op::RowScale: {
        const Tensor& x = nodes_[n.a].value;
        const Tensor& c = nodes_[n.b].value;
        Tensor& dA = nodes_[n.a].grad;
        Tensor& dC = nodes_[n.b].grad;
        for (int r = 0; r < x.rows(); ++r) {
          double s = 0.0;
          for (int j = 0; j < x.cols(); ++j) {
            dA.at(r, j) += g.at(r, j) * c.at(r, 0);
            s += g.at(r, j) * x.at(r, j);
          }
          dC.at(r, 0) += s;
        }
        break;
      }
      case Op::RowDot: {
        const Tensor& A = nodes_[n.a].value;
        const Tensor& B = nodes_[n.b].value;
        Tensor& dA = nodes_[n.a].grad;
        Tensor& dB = nodes_[n.b].grad;
        for (int r = 0; r < A.rows(); ++r) {
          const double gr = g.at(r, 0);
          for (int j = 0; j < A.cols(); ++j) {
            dA.at(r, j) += gr * B.at(r, j);
            dB.at(r, j) += gr * A.at(r, j);
          }
        }
        break;
      }
      case Op::RowNorm: {
        const Tensor& x = nodes_[n.a].value;
        Tensor& dA = nodes_[n.a].grad;
        for (int r = 0; r < x.rows(); ++r) {
          const double nm = std::max(n.value.at(r, 0), kNormEps);
          const double gr = g.at(r, 0);
          for (int j = 0; j < x.cols(); ++j) dA.at(r, j) += gr * x.at(r, j) / nm;
        }
        break;
      }
      case Op::Div: {
        const Tensor& A = nodes_[n.a].value;
        const Tensor& B = nodes_[n.b].value;
        Tensor& dA = nodes_[n.a].grad;
        Tensor& dB = nodes_[n.b].grad;
        for (size_t i = 0; i < A.size(); ++i) {
          dA[i] += g[i] / B[i];
          dB[i] -= g[i] * A[i] / (B[i] * B[i]);
        }
        break;
      }
    }
  }
}

}  // namespace enes

#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace enes {

// Dense row-major matrix of doubles. Vectors are 1xN or Nx1 tensors; scalars
// are 1x1. All model arithmetic runs in 64-bit floats.
class Tensor {
 public:
  Tensor() = default;
  Tensor(int rows, int cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(static_cast<size_t>(rows) * cols, fill) {}
  static Tensor from_vector(std::vector<double> values, int rows, int cols);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  size_t size() const { return data_.size(); }
  bool same_shape(const Tensor& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }
  std::string shape_str() const;

  double& at(int r, int c) { return data_[static_cast<size_t>(r) * cols_ + c]; }
  double at(int r, int c) const { return data_[static_cast<size_t>(r) * cols_ + c]; }
  double& operator[](size_t i) { return data_[i]; }
  double operator[](size_t i) const { return data_[i]; }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  std::span<const double> values() const { return data_; }

  bool all_finite() const;

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> data_;
};

// Forward ops with standard mathematical semantics. Shape mismatches throw
// std::invalid_argument naming the op and both shapes.
Tensor matmul(const Tensor& a, const Tensor& b);
// add supports equal shapes or a 1xN row-vector bias on the second argument.
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor hadamard(const Tensor& a, const Tensor& b);
Tensor scalar_mul(const Tensor& a, double s);
Tensor tanh_ew(const Tensor& a);
Tensor sine_ew(const Tensor& a);
Tensor square_ew(const Tensor& a);
Tensor sigmoid_ew(const Tensor& a);
// Row max is subtracted before exponentiation; output rows sum to 1.
Tensor softmax_rows(const Tensor& a);
// Elementwise log of max(x, 1e-12).
Tensor log_clamped(const Tensor& a);

double sum(const Tensor& a);
double mean(const Tensor& a);
double dot(const Tensor& a, const Tensor& b);
double l2_norm(const Tensor& a);

inline constexpr double kLogClamp = 1e-12;

// NaN/Inf guard used by the tape in test builds; throws NumericError when a
// non-finite value appears. Off by default.
void set_finite_checks(bool on);
bool finite_checks_enabled();

}  // namespace enes

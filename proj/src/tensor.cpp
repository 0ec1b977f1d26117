#include "enes/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "enes/errors.hpp"

namespace enes {

namespace {
bool g_finite_checks = false;

[[noreturn]] void shape_error(const char* op, const Tensor& a, const Tensor& b) {
  throw std::invalid_argument(std::string(op) + ": incompatible shapes " + a.shape_str() +
                              " and " + b.shape_str());
}

template <typename F>
Tensor map_ew(const Tensor& a, F f) {
  Tensor out(a.rows(), a.cols());
  for (size_t i = 0; i < a.size(); ++i) out[i] = f(a[i]);
  return out;
}
}  // namespace

void set_finite_checks(bool on) { g_finite_checks = on; }
bool finite_checks_enabled() { return g_finite_checks; }

Tensor Tensor::from_vector(std::vector<double> values, int rows, int cols) {
  if (values.size() != static_cast<size_t>(rows) * cols)
    throw std::invalid_argument("from_vector: size does not match shape");
  Tensor t;
  t.rows_ = rows;
  t.cols_ = cols;
  t.data_ = std::move(values);
  return t;
}

std::string Tensor::shape_str() const {
  return "(" + std::to_string(rows_) + "x" + std::to_string(cols_) + ")";
}

bool Tensor::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.cols() != b.rows()) shape_error("matmul", a, b);
  Tensor out(a.rows(), b.cols());
  const int n = a.rows(), m = b.cols(), k = a.cols();
  for (int i = 0; i < n; ++i) {
    const double* arow = a.data() + static_cast<size_t>(i) * k;
    double* orow = out.data() + static_cast<size_t>(i) * m;
    for (int p = 0; p < k; ++p) {
      const double av = arow[p];
      if (av == 0.0) continue;
      const double* brow = b.data() + static_cast<size_t>(p) * m;
      for (int j = 0; j < m; ++j) orow[j] += av * brow[j];
    }
  }
  return out;
}

Tensor add(const Tensor& a, const Tensor& b) {
  if (a.same_shape(b)) {
    Tensor out(a.rows(), a.cols());
    for (size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
    return out;
  }
  if (b.rows() == 1 && b.cols() == a.cols()) {  // row-vector bias broadcast
    Tensor out(a.rows(), a.cols());
    for (int r = 0; r < a.rows(); ++r)
      for (int c = 0; c < a.cols(); ++c) out.at(r, c) = a.at(r, c) + b.at(0, c);
    return out;
  }
  shape_error("add", a, b);
}

Tensor sub(const Tensor& a, const Tensor& b) {
  if (!a.same_shape(b)) shape_error("sub", a, b);
  Tensor out(a.rows(), a.cols());
  for (size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
  return out;
}

Tensor hadamard(const Tensor& a, const Tensor& b) {
  if (!a.same_shape(b)) shape_error("hadamard", a, b);
  Tensor out(a.rows(), a.cols());
  for (size_t i = 0; i < a.size(); ++i) out[i] = a[i] * b[i];
  return out;
}

Tensor scalar_mul(const Tensor& a, double s) {
  return map_ew(a, [s](double v) { return s * v; });
}

Tensor tanh_ew(const Tensor& a) {
  return map_ew(a, [](double v) { return std::tanh(v); });
}

Tensor sine_ew(const Tensor& a) {
  return map_ew(a, [](double v) { return std::sin(v); });
}

Tensor square_ew(const Tensor& a) {
  return map_ew(a, [](double v) { return v * v; });
}

Tensor sigmoid_ew(const Tensor& a) {
  return map_ew(a, [](double v) {
    if (v >= 0.0) {
      const double e = std::exp(-v);
      return 1.0 / (1.0 + e);
    }
    const double e = std::exp(v);
    return e / (1.0 + e);
  });
}

Tensor softmax_rows(const Tensor& a) {
  Tensor out(a.rows(), a.cols());
  for (int r = 0; r < a.rows(); ++r) {
    double mx = a.at(r, 0);
    for (int c = 1; c < a.cols(); ++c) mx = std::max(mx, a.at(r, c));
    double total = 0.0;
    for (int c = 0; c < a.cols(); ++c) {
      const double e = std::exp(a.at(r, c) - mx);
      out.at(r, c) = e;
      total += e;
    }
    for (int c = 0; c < a.cols(); ++c) out.at(r, c) /= total;
  }
  return out;
}

Tensor log_clamped(const Tensor& a) {
  return map_ew(a, [](double v) { return std::log(std::max(v, kLogClamp)); });
}

double sum(const Tensor& a) {
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) s += a[i];
  return s;
}

double mean(const Tensor& a) {
  if (a.size() == 0) throw std::invalid_argument("mean: empty tensor");
  return sum(a) / static_cast<double>(a.size());
}

double dot(const Tensor& a, const Tensor& b) {
  if (!a.same_shape(b)) shape_error("dot", a, b);
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double l2_norm(const Tensor& a) { return std::sqrt(dot(a, a)); }

}  // namespace enes

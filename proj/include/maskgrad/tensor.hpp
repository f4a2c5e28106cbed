#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace maskgrad {

// Dense row-major array of doubles. Rank 0 (scalar), 1 (vector) or 2
// (matrix). Construction rejects NaN/Inf.
class Tensor {
 public:
  using Shape = std::vector<std::size_t>;

  Tensor();
  Tensor(Shape shape, std::vector<double> values);

  static Tensor zeros(Shape shape);
  static Tensor filled(Shape shape, double value);
  static Tensor scalar(double value);
  static Tensor vector(std::vector<double> values);
  static Tensor matrix(std::size_t rows, std::size_t cols, std::vector<double> values);
  static Tensor matrix(std::initializer_list<std::initializer_list<double>> rows);
  static Tensor identity(std::size_t n);

  const Shape& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t size() const { return values_.size(); }

  // For rank 2: shape[0] and shape[1]. A vector is treated as one row.
  std::size_t rows() const;
  std::size_t cols() const;

  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }
  const std::vector<double>& storage() const { return values_; }

  double operator[](std::size_t i) const { return values_[i]; }
  double& operator[](std::size_t i) { return values_[i]; }
  double operator()(std::size_t r, std::size_t c) const { return values_[r * cols() + c]; }
  double& operator()(std::size_t r, std::size_t c) { return values_[r * cols() + c]; }

  // Scalar value of a one-element tensor.
  double item() const;

  std::vector<double> row(std::size_t r) const;

  bool all_finite() const;

  friend bool operator==(const Tensor&, const Tensor&) = default;

 private:
  Shape shape_;
  std::vector<double> values_;
};

std::size_t shape_size(const Tensor::Shape& shape);
std::string shape_string(const Tensor::Shape& shape);

// z_i = sum_j M_ij s_j
Tensor matvec(const Tensor& m, const Tensor& s);
// a (p x q) times b (q x r)
Tensor matmul(const Tensor& a, const Tensor& b);
// a (p x q) times b^T where b is (r x q)
Tensor matmul_nt(const Tensor& a, const Tensor& b);
// a^T (q x p) times b (p x r)
Tensor matmul_tn(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& a);

}  // namespace maskgrad

#pragma once

#include <cassert>
#include <initializer_list>
#include <vector>

#include "dwp/errors.hpp"

namespace dwp {

// Dense row-major matrix of doubles. Dimensions may be zero; all kernels
// treat empty operands as no-ops with the obvious result shape.
class Matrix {
 public:
  Matrix() = default;
  Matrix(int rows, int cols) : rows_(rows), cols_(cols), d_(size_t(rows) * cols, 0.0) {
    assert(rows >= 0 && cols >= 0);
  }
  Matrix(int rows, int cols, std::vector<double> data)
      : rows_(rows), cols_(cols), d_(std::move(data)) {
    if (d_.size() != size_t(rows) * cols) throw ShapeMismatch("matrix data size mismatch");
  }
  Matrix(std::initializer_list<std::initializer_list<double>> rows) {
    rows_ = int(rows.size());
    cols_ = rows_ ? int(rows.begin()->size()) : 0;
    d_.reserve(size_t(rows_) * cols_);
    for (const auto& r : rows) {
      if (int(r.size()) != cols_) throw ShapeMismatch("ragged initializer");
      d_.insert(d_.end(), r.begin(), r.end());
    }
  }

  static Matrix zeros(int rows, int cols) { return Matrix(rows, cols); }
  static Matrix identity(int n) {
    Matrix m(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }
  static Matrix constant(int rows, int cols, double v) {
    Matrix m(rows, cols);
    for (auto& x : m.d_) x = v;
    return m;
  }

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  size_t size() const { return d_.size(); }
  bool empty() const { return d_.empty(); }

  double& operator()(int i, int j) {
    assert(i >= 0 && i < rows_ && j >= 0 && j < cols_);
    return d_[size_t(i) * cols_ + j];
  }
  double operator()(int i, int j) const {
    assert(i >= 0 && i < rows_ && j >= 0 && j < cols_);
    return d_[size_t(i) * cols_ + j];
  }
  double* data() { return d_.data(); }
  const double* data() const { return d_.data(); }
  std::vector<double>& vec() { return d_; }
  const std::vector<double>& vec() const { return d_; }

  bool same_shape(const Matrix& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }

 private:
  int rows_ = 0, cols_ = 0;
  std::vector<double> d_;
};

// Dense kernels. The omp-suffixed entry points parallelize over output rows
// when the operand sizes make it worthwhile; `reference` holds the serial
// versions the tests and the benchmark compare against. Row-parallel loops
// keep per-element accumulation order identical to the serial path, so both
// produce bit-identical results.
namespace reference {
Matrix matmul(const Matrix& a, const Matrix& b);
Matrix matmul_nt(const Matrix& a, const Matrix& b);  // a * b^T
Matrix matmul_tn(const Matrix& a, const Matrix& b);  // a^T * b
}  // namespace reference

Matrix matmul(const Matrix& a, const Matrix& b);
Matrix matmul_nt(const Matrix& a, const Matrix& b);
Matrix matmul_tn(const Matrix& a, const Matrix& b);

Matrix transpose(const Matrix& a);
Matrix add(const Matrix& a, const Matrix& b);
Matrix sub(const Matrix& a, const Matrix& b);
Matrix scale(const Matrix& a, double c);
void add_in_place(Matrix& a, const Matrix& b);
double frobenius_distance(const Matrix& a, const Matrix& b);

// Symmetric PSD matrix (Gram matrices, kernels, Wishart scales). The wrapper
// checks symmetry on construction; full PSD validation is a separate call
// since it needs an eigendecomposition.
class SymMatrix {
 public:
  SymMatrix() = default;
  explicit SymMatrix(Matrix m, bool check_symmetry = true);

  static SymMatrix identity(int n) { return SymMatrix(Matrix::identity(n), false); }
  static SymMatrix from_outer(const Matrix& f, double scale);  // scale * F F^T

  int dim() const { return m_.rows(); }
  const Matrix& mat() const { return m_; }
  Matrix& mat() { return m_; }
  double operator()(int i, int j) const { return m_(i, j); }

  // Throws DomainError unless all eigenvalues >= -1e-10 * trace.
  void validate_psd() const;

 private:
  Matrix m_;
};

// P x min(P, nu) lower-trapezoidal factor: strictly-upper entries are zero.
class LowerTrapezoid {
 public:
  LowerTrapezoid() = default;
  explicit LowerTrapezoid(Matrix m, bool check_structure = true);

  int rows() const { return m_.rows(); }
  int cols() const { return m_.cols(); }
  bool square() const { return m_.rows() == m_.cols(); }
  const Matrix& mat() const { return m_; }
  double operator()(int i, int j) const { return m_(i, j); }
  double& at(int i, int j) { return m_.vec()[size_t(i) * m_.cols() + j]; }

 private:
  Matrix m_;
};

}  // namespace dwp

#include "dwp/matrix.hpp"

#include <cmath>

#include "dwp/linalg.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace dwp {

namespace {

// Below this many multiply-adds the fork/join overhead costs more than the
// loop itself.
constexpr long kParallelFlopCutoff = 1 << 16;

void check_inner(int a, int b, const char* what) {
  if (a != b) throw ShapeMismatch(std::string("matmul inner dimension mismatch in ") + what);
}

inline void matmul_row(const Matrix& a, const Matrix& b, Matrix& out, int i) {
  const int n = b.cols(), k = a.cols();
  const double* ar = a.data() + size_t(i) * k;
  double* orow = out.data() + size_t(i) * n;
  for (int p = 0; p < k; ++p) {
    const double av = ar[p];
    const double* br = b.data() + size_t(p) * n;
    for (int j = 0; j < n; ++j) orow[j] += av * br[j];
  }
}

inline void matmul_nt_row(const Matrix& a, const Matrix& b, Matrix& out, int i) {
  const int n = b.rows(), k = a.cols();
  const double* ar = a.data() + size_t(i) * k;
  double* orow = out.data() + size_t(i) * n;
  for (int j = 0; j < n; ++j) {
    const double* br = b.data() + size_t(j) * k;
    double s = 0.0;
    for (int p = 0; p < k; ++p) s += ar[p] * br[p];
    orow[j] = s;
  }
}

inline void matmul_tn_row(const Matrix& a, const Matrix& b, Matrix& out, int i) {
  const int n = b.cols(), k = a.rows();
  double* orow = out.data() + size_t(i) * n;
  for (int p = 0; p < k; ++p) {
    const double av = a(p, i);
    const double* br = b.data() + size_t(p) * n;
    for (int j = 0; j < n; ++j) orow[j] += av * br[j];
  }
}

}  // namespace

namespace reference {

Matrix matmul(const Matrix& a, const Matrix& b) {
  check_inner(a.cols(), b.rows(), "matmul");
  Matrix out(a.rows(), b.cols());
  for (int i = 0; i < a.rows(); ++i) matmul_row(a, b, out, i);
  return out;
}

Matrix matmul_nt(const Matrix& a, const Matrix& b) {
  check_inner(a.cols(), b.cols(), "matmul_nt");
  Matrix out(a.rows(), b.rows());
  for (int i = 0; i < a.rows(); ++i) matmul_nt_row(a, b, out, i);
  return out;
}

Matrix matmul_tn(const Matrix& a, const Matrix& b) {
  check_inner(a.rows(), b.rows(), "matmul_tn");
  Matrix out(a.cols(), b.cols());
  for (int i = 0; i < a.cols(); ++i) matmul_tn_row(a, b, out, i);
  return out;
}

}  // namespace reference

Matrix matmul(const Matrix& a, const Matrix& b) {
  check_inner(a.cols(), b.rows(), "matmul");
  Matrix out(a.rows(), b.cols());
  const long flops = long(a.rows()) * a.cols() * b.cols();
#ifdef _OPENMP
  if (flops >= kParallelFlopCutoff) {
#pragma omp parallel for schedule(static)
    for (int i = 0; i < a.rows(); ++i) matmul_row(a, b, out, i);
    return out;
  }
#endif
  (void)flops;
  for (int i = 0; i < a.rows(); ++i) matmul_row(a, b, out, i);
  return out;
}

Matrix matmul_nt(const Matrix& a, const Matrix& b) {
  check_inner(a.cols(), b.cols(), "matmul_nt");
  Matrix out(a.rows(), b.rows());
  const long flops = long(a.rows()) * a.cols() * b.rows();
#ifdef _OPENMP
  if (flops >= kParallelFlopCutoff) {
#pragma omp parallel for schedule(static)
    for (int i = 0; i < a.rows(); ++i) matmul_nt_row(a, b, out, i);
    return out;
  }
#endif
  (void)flops;
  for (int i = 0; i < a.rows(); ++i) matmul_nt_row(a, b, out, i);
  return out;
}

Matrix matmul_tn(const Matrix& a, const Matrix& b) {
  check_inner(a.rows(), b.rows(), "matmul_tn");
  Matrix out(a.cols(), b.cols());
  const long flops = long(a.cols()) * a.rows() * b.cols();
#ifdef _OPENMP
  if (flops >= kParallelFlopCutoff) {
#pragma omp parallel for schedule(static)
    for (int i = 0; i < a.cols(); ++i) matmul_tn_row(a, b, out, i);
    return out;
  }
#endif
  (void)flops;
  for (int i = 0; i < a.cols(); ++i) matmul_tn_row(a, b, out, i);
  return out;
}

Matrix transpose(const Matrix& a) {
  Matrix out(a.cols(), a.rows());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) out(j, i) = a(i, j);
  return out;
}

Matrix add(const Matrix& a, const Matrix& b) {
  if (!a.same_shape(b)) throw ShapeMismatch("add: shape mismatch");
  Matrix out = a;
  for (size_t i = 0; i < out.size(); ++i) out.vec()[i] += b.vec()[i];
  return out;
}

Matrix sub(const Matrix& a, const Matrix& b) {
  if (!a.same_shape(b)) throw ShapeMismatch("sub: shape mismatch");
  Matrix out = a;
  for (size_t i = 0; i < out.size(); ++i) out.vec()[i] -= b.vec()[i];
  return out;
}

Matrix scale(const Matrix& a, double c) {
  Matrix out = a;
  for (auto& x : out.vec()) x *= c;
  return out;
}

void add_in_place(Matrix& a, const Matrix& b) {
  if (!a.same_shape(b)) throw ShapeMismatch("add_in_place: shape mismatch");
  for (size_t i = 0; i < a.size(); ++i) a.vec()[i] += b.vec()[i];
}

double frobenius_distance(const Matrix& a, const Matrix& b) {
  if (!a.same_shape(b)) throw ShapeMismatch("frobenius_distance: shape mismatch");
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    const double d = a.vec()[i] - b.vec()[i];
    s += d * d;
  }
  return std::sqrt(s);
}

SymMatrix::SymMatrix(Matrix m, bool check_symmetry) : m_(std::move(m)) {
  if (m_.rows() != m_.cols()) throw ShapeMismatch("SymMatrix must be square");
  if (!check_symmetry) return;
  double max_abs = 0.0;
  for (double x : m_.vec()) max_abs = std::max(max_abs, std::fabs(x));
  const double tol = 1e-12 * std::max(max_abs, 1.0);
  for (int i = 0; i < m_.rows(); ++i)
    for (int j = 0; j < i; ++j)
      if (std::fabs(m_(i, j) - m_(j, i)) > tol)
        throw DomainError("matrix is not symmetric within tolerance");
}

SymMatrix SymMatrix::from_outer(const Matrix& f, double s) {
  Matrix g = matmul_nt(f, f);
  // Exact symmetry: g(i,j) and g(j,i) are the same dot product evaluated in
  // the same order, so no fixup is needed.
  return SymMatrix(scale(g, s), false);
}

void SymMatrix::validate_psd() const {
  if (dim() == 0) return;
  double tr = 0.0;
  for (int i = 0; i < dim(); ++i) tr += m_(i, i);
  const auto evals = sym_eigenvalues(m_);
  for (double e : evals)
    if (e < -1e-10 * std::max(tr, 1.0))
      throw DomainError("matrix has eigenvalue below PSD tolerance");
}

LowerTrapezoid::LowerTrapezoid(Matrix m, bool check_structure) : m_(std::move(m)) {
  if (m_.cols() > m_.rows()) throw ShapeMismatch("LowerTrapezoid needs rows >= cols");
  if (!check_structure) return;
  for (int i = 0; i < m_.rows(); ++i)
    for (int j = i + 1; j < m_.cols(); ++j)
      if (m_(i, j) != 0.0) throw DomainError("LowerTrapezoid has nonzero above diagonal");
}

}  // namespace dwp

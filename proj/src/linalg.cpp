#include "dwp/linalg.hpp"

#include <algorithm>
#include <cmath>

namespace dwp {

Matrix cholesky(const Matrix& m) {
  if (m.rows() != m.cols()) throw ShapeMismatch("cholesky needs a square matrix");
  const int n = m.rows();
  double max_diag = 0.0;
  for (int i = 0; i < n; ++i) max_diag = std::max(max_diag, m(i, i));
  const double pivot_floor = 1e-12 * max_diag;

  Matrix l(n, n);
  for (int j = 0; j < n; ++j) {
    double d = m(j, j);
    for (int k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
    if (!(d > pivot_floor)) throw NotPositiveDefinite(j);
    const double ljj = std::sqrt(d);
    l(j, j) = ljj;
    for (int i = j + 1; i < n; ++i) {
      double s = m(i, j);
      for (int k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
      l(i, j) = s / ljj;
    }
  }
  return l;
}

LowerTrapezoid cholesky(const SymMatrix& m) {
  return LowerTrapezoid(cholesky(m.mat()), false);
}

Matrix tri_solve(const Matrix& l, const Matrix& b, bool trans) {
  if (l.rows() != l.cols()) throw ShapeMismatch("tri_solve needs a square factor");
  if (l.rows() != b.rows()) throw ShapeMismatch("tri_solve rhs rows mismatch");
  const int n = l.rows(), m = b.cols();
  for (int i = 0; i < n; ++i)
    if (l(i, i) == 0.0) throw SingularTriangular(i);

  Matrix x = b;
  if (!trans) {
    for (int i = 0; i < n; ++i) {
      for (int k = 0; k < i; ++k) {
        const double c = l(i, k);
        for (int j = 0; j < m; ++j) x(i, j) -= c * x(k, j);
      }
      const double inv = 1.0 / l(i, i);
      for (int j = 0; j < m; ++j) x(i, j) *= inv;
    }
  } else {
    for (int i = n - 1; i >= 0; --i) {
      for (int k = i + 1; k < n; ++k) {
        const double c = l(k, i);
        for (int j = 0; j < m; ++j) x(i, j) -= c * x(k, j);
      }
      const double inv = 1.0 / l(i, i);
      for (int j = 0; j < m; ++j) x(i, j) *= inv;
    }
  }
  return x;
}

Matrix tri_solve(const LowerTrapezoid& l, const Matrix& b, bool trans) {
  return tri_solve(l.mat(), b, trans);
}

std::vector<double> sym_eigenvalues(const Matrix& m) {
  if (m.rows() != m.cols()) throw ShapeMismatch("sym_eigenvalues needs a square matrix");
  const int n = m.rows();
  Matrix a = m;
  // Symmetrize roundoff before iterating.
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < i; ++j) {
      const double v = 0.5 * (a(i, j) + a(j, i));
      a(i, j) = a(j, i) = v;
    }

  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) off += a(i, j) * a(i, j);
    if (off < 1e-30 * std::max(1.0, frobenius_distance(a, Matrix::zeros(n, n)))) break;

    for (int p = 0; p < n - 1; ++p) {
      for (int q = p + 1; q < n; ++q) {
        if (a(p, q) == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (int k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (int k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
      }
    }
  }
  std::vector<double> evals(n);
  for (int i = 0; i < n; ++i) evals[i] = a(i, i);
  std::sort(evals.begin(), evals.end());
  return evals;
}

double log_abs_det(Matrix a) {
  if (a.rows() != a.cols()) throw ShapeMismatch("log_abs_det needs a square matrix");
  const int n = a.rows();
  double logdet = 0.0;
  for (int k = 0; k < n; ++k) {
    int piv = k;
    for (int i = k + 1; i < n; ++i)
      if (std::fabs(a(i, k)) > std::fabs(a(piv, k))) piv = i;
    if (a(piv, k) == 0.0) throw SingularLeadingBlock("log_abs_det: singular matrix");
    if (piv != k)
      for (int j = 0; j < n; ++j) std::swap(a(k, j), a(piv, j));
    logdet += std::log(std::fabs(a(k, k)));
    const double inv = 1.0 / a(k, k);
    for (int i = k + 1; i < n; ++i) {
      const double f = a(i, k) * inv;
      if (f == 0.0) continue;
      for (int j = k; j < n; ++j) a(i, j) -= f * a(k, j);
    }
  }
  return logdet;
}

}  // namespace dwp

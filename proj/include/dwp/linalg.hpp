#pragma once

#include <vector>

#include "dwp/matrix.hpp"

namespace dwp {

// Lower Cholesky factor of a positive-definite matrix. Reads only the lower
// triangle. Throws NotPositiveDefinite(j) when pivot j underflows
// 1e-12 * max(diag).
Matrix cholesky(const Matrix& m);
LowerTrapezoid cholesky(const SymMatrix& m);

// Solves op(L) X = B for lower-triangular square L (op = identity, or
// transpose when `trans`). Throws SingularTriangular on a zero diagonal.
Matrix tri_solve(const Matrix& l, const Matrix& b, bool trans = false);
Matrix tri_solve(const LowerTrapezoid& l, const Matrix& b, bool trans = false);

// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, ascending.
std::vector<double> sym_eigenvalues(const Matrix& m);

// log |det M| by LU with partial pivoting; used as an independent route for
// the Jacobian checks. Throws SingularLeadingBlock on exact singularity.
double log_abs_det(Matrix m);

}  // namespace dwp

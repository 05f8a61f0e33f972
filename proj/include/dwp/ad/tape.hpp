#pragma once

#include <array>
#include <vector>

#include "dwp/matrix.hpp"
#include "dwp/rng.hpp"

namespace dwp::ad {

class Tape;

// Handle into a Tape. Shape is fixed at creation.
struct Var {
  int id = -1;
  int rows = 0, cols = 0;
  Tape* tape = nullptr;

  bool scalar() const { return rows == 1 && cols == 1; }
};

enum class Op {
  kLeaf,
  kStopGrad,
  kAdd,
  kSub,
  kMulConst,
  kHadamard,
  kMulScalar,
  kDivScalar,
  kMatMul,
  kTranspose,
  kExp,
  kLog,
  kSquare,
  kSqrt,
  kSoftplus,
  kSigmoid,
  kRecip,
  kClampMin0,
  kSum,
  kTrace,
  kLogDiagSum,
  kTakeDiag,
  kDiagFromVec,
  kCholesky,
  kTriSolve,
  kGammaLogpdf,
  kNormalLogpdf,
  kGammaSample,
  kBlock,
  kConcatCols,
  kConcatRows,
  kRowScale,
  kGramToSqdist,
  kCrossSqdist,
  kArdSqdist,
  kAssembleLowerTrap,
  kExtractLowerOffdiag,
};

// Append-only record of one primitive evaluation. Topological order equals
// append order; the backward pass walks the records once in reverse.
struct Node {
  Op op;
  std::array<int, 3> parent{-1, -1, -1};
  std::array<int, 4> iarg{0, 0, 0, 0};
  double carg = 0.0;
  Matrix value;
};

class Tape {
 public:
  Var leaf(Matrix m);
  Var constant(Matrix m) { return leaf(std::move(m)); }
  Var scalar(double v) { return leaf(Matrix{{v}}); }

  const Matrix& value(Var v) const { return nodes_[v.id].value; }
  size_t size() const { return nodes_.size(); }

  // Seeds `out` (a scalar) with adjoint 1 and accumulates adjoints for every
  // node on its history. Returns the number of nodes visited (each exactly
  // once).
  size_t backward(Var out);

  // Adjoint from the last backward() call; zeros if the node was untouched.
  Matrix adjoint(Var v) const;

  friend Var make_unary(Tape& t, Op op, Var a, Matrix value);
  friend Var make_node(Tape& t, Node n);

 private:
  std::vector<Node> nodes_;
  std::vector<Matrix> adjoints_;
};

// --- primitive builders -----------------------------------------------------

Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul_const(Var a, double c);
Var hadamard(Var a, Var b);
Var mul_scalar(Var a, Var s);  // s is 1x1, broadcast multiply
Var div_scalar(Var a, Var s);
Var matmul(Var a, Var b);
Var transpose(Var a);
Var exp(Var a);
Var log(Var a);
Var square(Var a);
Var sqrt(Var a);
Var softplus(Var a);
Var sigmoid(Var a);
Var recip(Var a);
Var clamp_min0(Var a);
Var sum(Var a);
Var trace(Var a);
Var log_diag_sum(Var a);
Var take_diag(Var a);
Var diag_from_vec(Var a);
Var cholesky(Var a);
Var tri_solve(Var l, Var b, bool trans = false);
Var gamma_logpdf(Var x, Var alpha, Var beta);
Var normal_logpdf(Var x, Var mu, Var sigma);
// Reparameterized Gamma(alpha_j, beta_j) draws, one per row of alpha/beta.
// d/dbeta is exact via scaling; d/dalpha follows the implicit-function
// identity through the Gamma CDF.
Var gamma_sample(Var alpha, Var beta, RngStream& rng);
Var block(Var a, int r0, int c0, int rows, int cols);
Var concat_cols(Var a, Var b);
Var concat_rows(Var a, Var b);
Var row_scale(Var a, Var s);  // s is rows x 1
Var gram_to_sqdist(Var g);
// out_ij = di_i - 2 g_ij + dt_j for the inducing/test cross block.
Var cross_sqdist(Var di, Var g, Var dt);
// out_ij = sum_d w_d (a_id - b_jd)^2.
Var ard_sqdist(Var a, Var b, Var w);
Var assemble_lower_trap(Var diag, Var offdiag, int rows, int cols);
Var extract_lower_offdiag(Var a);
Var stop_gradient(Var a);

inline Var operator+(Var a, Var b) { return add(a, b); }
inline Var operator-(Var a, Var b) { return sub(a, b); }
inline Var operator*(double c, Var a) { return mul_const(a, c); }

}  // namespace dwp::ad

#include "dwp/ad/tape.hpp"

#include <cmath>

#include "dwp/linalg.hpp"
#include "dwp/special.hpp"

namespace dwp::ad {

namespace {

void require(bool cond, const char* what) {
  if (!cond) throw ShapeMismatch(what);
}

void require_same_shape(Var a, Var b, const char* what) {
  require(a.rows == b.rows && a.cols == b.cols, what);
}

int trap_offdiag_count(int rows, int cols) {
  int n = 0;
  for (int j = 0; j < cols; ++j) n += rows - 1 - j;
  return n;
}

}  // namespace

Var make_node(Tape& t, Node n) {
  const int id = int(t.nodes_.size());
  const int r = n.value.rows(), c = n.value.cols();
  t.nodes_.push_back(std::move(n));
  return Var{id, r, c, &t};
}

Var Tape::leaf(Matrix m) {
  Node n;
  n.op = Op::kLeaf;
  n.value = std::move(m);
  return make_node(*this, std::move(n));
}

Matrix Tape::adjoint(Var v) const {
  if (v.id < int(adjoints_.size()) && !adjoints_[v.id].empty()) return adjoints_[v.id];
  return Matrix::zeros(v.rows, v.cols);
}

// --- forward builders -------------------------------------------------------

namespace {

Node unary(Op op, Var a, Matrix value) {
  Node n;
  n.op = op;
  n.parent[0] = a.id;
  n.value = std::move(value);
  return n;
}

Node binary(Op op, Var a, Var b, Matrix value) {
  Node n = unary(op, a, std::move(value));
  n.parent[1] = b.id;
  return n;
}

Matrix map_elementwise(const Matrix& a, double (*f)(double)) {
  Matrix out = a;
  for (auto& x : out.vec()) x = f(x);
  return out;
}

}  // namespace

Var add(Var a, Var b) {
  require_same_shape(a, b, "add: shape mismatch");
  return make_node(*a.tape, binary(Op::kAdd, a, b, dwp::add(a.tape->value(a), b.tape->value(b))));
}

Var sub(Var a, Var b) {
  require_same_shape(a, b, "sub: shape mismatch");
  return make_node(*a.tape, binary(Op::kSub, a, b, dwp::sub(a.tape->value(a), b.tape->value(b))));
}

Var mul_const(Var a, double c) {
  Node n = unary(Op::kMulConst, a, dwp::scale(a.tape->value(a), c));
  n.carg = c;
  return make_node(*a.tape, std::move(n));
}

Var hadamard(Var a, Var b) {
  require_same_shape(a, b, "hadamard: shape mismatch");
  Matrix out = a.tape->value(a);
  const Matrix& vb = b.tape->value(b);
  for (size_t i = 0; i < out.size(); ++i) out.vec()[i] *= vb.vec()[i];
  return make_node(*a.tape, binary(Op::kHadamard, a, b, std::move(out)));
}

Var mul_scalar(Var a, Var s) {
  require(s.scalar(), "mul_scalar: scale must be 1x1");
  const double sv = s.tape->value(s)(0, 0);
  return make_node(*a.tape, binary(Op::kMulScalar, a, s, dwp::scale(a.tape->value(a), sv)));
}

Var div_scalar(Var a, Var s) {
  require(s.scalar(), "div_scalar: scale must be 1x1");
  const double sv = s.tape->value(s)(0, 0);
  return make_node(*a.tape, binary(Op::kDivScalar, a, s, dwp::scale(a.tape->value(a), 1.0 / sv)));
}

Var matmul(Var a, Var b) {
  require(a.cols == b.rows, "matmul: inner dimension mismatch");
  return make_node(*a.tape,
                   binary(Op::kMatMul, a, b, dwp::matmul(a.tape->value(a), b.tape->value(b))));
}

Var transpose(Var a) {
  return make_node(*a.tape, unary(Op::kTranspose, a, dwp::transpose(a.tape->value(a))));
}

Var exp(Var a) {
  return make_node(*a.tape, unary(Op::kExp, a, map_elementwise(a.tape->value(a), [](double x) {
                                    return std::exp(x);
                                  })));
}

Var log(Var a) {
  return make_node(*a.tape, unary(Op::kLog, a, map_elementwise(a.tape->value(a), [](double x) {
                                    return std::log(x);
                                  })));
}

Var square(Var a) {
  return make_node(*a.tape,
                   unary(Op::kSquare, a,
                         map_elementwise(a.tape->value(a), [](double x) { return x * x; })));
}

Var sqrt(Var a) {
  return make_node(*a.tape, unary(Op::kSqrt, a, map_elementwise(a.tape->value(a), [](double x) {
                                    return std::sqrt(x);
                                  })));
}

Var softplus(Var a) {
  return make_node(*a.tape, unary(Op::kSoftplus, a, map_elementwise(a.tape->value(a), [](double x) {
                                    return dwp::softplus(x);
                                  })));
}

Var sigmoid(Var a) {
  return make_node(*a.tape, unary(Op::kSigmoid, a, map_elementwise(a.tape->value(a), [](double x) {
                                    return dwp::sigmoid(x);
                                  })));
}

Var recip(Var a) {
  return make_node(*a.tape, unary(Op::kRecip, a, map_elementwise(a.tape->value(a), [](double x) {
                                    return 1.0 / x;
                                  })));
}

Var clamp_min0(Var a) {
  return make_node(*a.tape,
                   unary(Op::kClampMin0, a,
                         map_elementwise(a.tape->value(a), [](double x) { return x > 0.0 ? x : 0.0; })));
}

Var sum(Var a) {
  double s = 0.0;
  for (double x : a.tape->value(a).vec()) s += x;
  return make_node(*a.tape, unary(Op::kSum, a, Matrix{{s}}));
}

Var trace(Var a) {
  require(a.rows == a.cols, "trace: square matrix required");
  const Matrix& v = a.tape->value(a);
  double s = 0.0;
  for (int i = 0; i < a.rows; ++i) s += v(i, i);
  return make_node(*a.tape, unary(Op::kTrace, a, Matrix{{s}}));
}

Var log_diag_sum(Var a) {
  const Matrix& v = a.tape->value(a);
  const int m = std::min(a.rows, a.cols);
  double s = 0.0;
  for (int i = 0; i < m; ++i) s += std::log(v(i, i));
  return make_node(*a.tape, unary(Op::kLogDiagSum, a, Matrix{{s}}));
}

Var take_diag(Var a) {
  const Matrix& v = a.tape->value(a);
  const int m = std::min(a.rows, a.cols);
  Matrix out(m, 1);
  for (int i = 0; i < m; ++i) out(i, 0) = v(i, i);
  return make_node(*a.tape, unary(Op::kTakeDiag, a, std::move(out)));
}

Var diag_from_vec(Var a) {
  require(a.cols == 1, "diag_from_vec: column vector required");
  const Matrix& v = a.tape->value(a);
  Matrix out(a.rows, a.rows);
  for (int i = 0; i < a.rows; ++i) out(i, i) = v(i, 0);
  return make_node(*a.tape, unary(Op::kDiagFromVec, a, std::move(out)));
}

Var cholesky(Var a) {
  require(a.rows == a.cols, "cholesky: square matrix required");
  return make_node(*a.tape, unary(Op::kCholesky, a, dwp::cholesky(a.tape->value(a))));
}

Var tri_solve(Var l, Var b, bool trans) {
  require(l.rows == l.cols, "tri_solve: square factor required");
  require(l.rows == b.rows, "tri_solve: rhs rows mismatch");
  Node n = binary(Op::kTriSolve, l, b, dwp::tri_solve(l.tape->value(l), b.tape->value(b), trans));
  n.iarg[0] = trans ? 1 : 0;
  return make_node(*l.tape, std::move(n));
}

Var gamma_logpdf(Var x, Var alpha, Var beta) {
  require_same_shape(x, alpha, "gamma_logpdf: shape mismatch");
  require_same_shape(x, beta, "gamma_logpdf: shape mismatch");
  const Matrix& xv = x.tape->value(x);
  const Matrix& av = alpha.tape->value(alpha);
  const Matrix& bv = beta.tape->value(beta);
  Matrix out(x.rows, x.cols);
  for (size_t i = 0; i < out.size(); ++i) {
    const double xx = xv.vec()[i], aa = av.vec()[i], bb = bv.vec()[i];
    if (!(xx > 0.0)) throw DomainError("gamma_logpdf requires x > 0");
    out.vec()[i] = aa * std::log(bb) - dwp::lgamma(aa) + (aa - 1.0) * std::log(xx) - bb * xx;
  }
  Node n = binary(Op::kGammaLogpdf, x, alpha, std::move(out));
  n.parent[2] = beta.id;
  return make_node(*x.tape, std::move(n));
}

Var normal_logpdf(Var x, Var mu, Var sigma) {
  require_same_shape(x, mu, "normal_logpdf: shape mismatch");
  require_same_shape(x, sigma, "normal_logpdf: shape mismatch");
  const Matrix& xv = x.tape->value(x);
  const Matrix& mv = mu.tape->value(mu);
  const Matrix& sv = sigma.tape->value(sigma);
  constexpr double kLogTwoPi = 1.8378770664093454836;
  Matrix out(x.rows, x.cols);
  for (size_t i = 0; i < out.size(); ++i) {
    const double d = xv.vec()[i] - mv.vec()[i], s = sv.vec()[i];
    out.vec()[i] = -0.5 * kLogTwoPi - std::log(s) - 0.5 * d * d / (s * s);
  }
  Node n = binary(Op::kNormalLogpdf, x, mu, std::move(out));
  n.parent[2] = sigma.id;
  return make_node(*x.tape, std::move(n));
}

Var gamma_sample(Var alpha, Var beta, RngStream& rng) {
  require_same_shape(alpha, beta, "gamma_sample: shape mismatch");
  require(alpha.cols == 1, "gamma_sample: column vector required");
  const Matrix& av = alpha.tape->value(alpha);
  const Matrix& bv = beta.tape->value(beta);
  Matrix out(alpha.rows, 1);
  for (int i = 0; i < alpha.rows; ++i)
    out(i, 0) = rng.gamma(av(i, 0)) / bv(i, 0);
  return make_node(*alpha.tape, binary(Op::kGammaSample, alpha, beta, std::move(out)));
}

Var block(Var a, int r0, int c0, int rows, int cols) {
  require(r0 >= 0 && c0 >= 0 && r0 + rows <= a.rows && c0 + cols <= a.cols,
          "block: out of range");
  const Matrix& v = a.tape->value(a);
  Matrix out(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) out(i, j) = v(r0 + i, c0 + j);
  Node n = unary(Op::kBlock, a, std::move(out));
  n.iarg = {r0, c0, rows, cols};
  return make_node(*a.tape, std::move(n));
}

Var concat_cols(Var a, Var b) {
  require(a.rows == b.rows, "concat_cols: row mismatch");
  const Matrix& va = a.tape->value(a);
  const Matrix& vb = b.tape->value(b);
  Matrix out(a.rows, a.cols + b.cols);
  for (int i = 0; i < a.rows; ++i) {
    for (int j = 0; j < a.cols; ++j) out(i, j) = va(i, j);
    for (int j = 0; j < b.cols; ++j) out(i, a.cols + j) = vb(i, j);
  }
  Node n = binary(Op::kConcatCols, a, b, std::move(out));
  n.iarg[0] = a.cols;
  return make_node(*a.tape, std::move(n));
}

Var concat_rows(Var a, Var b) {
  require(a.cols == b.cols, "concat_rows: column mismatch");
  const Matrix& va = a.tape->value(a);
  const Matrix& vb = b.tape->value(b);
  Matrix out(a.rows + b.rows, a.cols);
  for (int i = 0; i < a.rows; ++i)
    for (int j = 0; j < a.cols; ++j) out(i, j) = va(i, j);
  for (int i = 0; i < b.rows; ++i)
    for (int j = 0; j < a.cols; ++j) out(a.rows + i, j) = vb(i, j);
  Node n = binary(Op::kConcatRows, a, b, std::move(out));
  n.iarg[0] = a.rows;
  return make_node(*a.tape, std::move(n));
}

Var row_scale(Var a, Var s) {
  require(s.cols == 1 && s.rows == a.rows, "row_scale: scale must be rows x 1");
  const Matrix& va = a.tape->value(a);
  const Matrix& vs = s.tape->value(s);
  Matrix out(a.rows, a.cols);
  for (int i = 0; i < a.rows; ++i)
    for (int j = 0; j < a.cols; ++j) out(i, j) = va(i, j) * vs(i, 0);
  return make_node(*a.tape, binary(Op::kRowScale, a, s, std::move(out)));
}

Var gram_to_sqdist(Var g) {
  require(g.rows == g.cols, "gram_to_sqdist: square matrix required");
  const Matrix& v = g.tape->value(g);
  Matrix out(g.rows, g.rows);
  for (int i = 0; i < g.rows; ++i)
    for (int j = 0; j < g.rows; ++j) {
      const double r = v(i, i) - 2.0 * v(i, j) + v(j, j);
      out(i, j) = r > 0.0 ? r : 0.0;
    }
  return make_node(*g.tape, unary(Op::kGramToSqdist, g, std::move(out)));
}

Var cross_sqdist(Var di, Var g, Var dt) {
  require(di.cols == 1 && dt.cols == 1, "cross_sqdist: diagonals must be column vectors");
  require(di.rows == g.rows && dt.rows == g.cols, "cross_sqdist: shape mismatch");
  const Matrix& vi = di.tape->value(di);
  const Matrix& vg = g.tape->value(g);
  const Matrix& vt = dt.tape->value(dt);
  Matrix out(g.rows, g.cols);
  for (int i = 0; i < g.rows; ++i)
    for (int j = 0; j < g.cols; ++j) {
      const double r = vi(i, 0) - 2.0 * vg(i, j) + vt(j, 0);
      out(i, j) = r > 0.0 ? r : 0.0;
    }
  Node n = binary(Op::kCrossSqdist, di, g, std::move(out));
  n.parent[2] = dt.id;
  return make_node(*g.tape, std::move(n));
}

Var ard_sqdist(Var a, Var b, Var w) {
  require(a.cols == b.cols, "ard_sqdist: feature dimension mismatch");
  require(w.cols == 1 && w.rows == a.cols, "ard_sqdist: weights must be D x 1");
  const Matrix& va = a.tape->value(a);
  const Matrix& vb = b.tape->value(b);
  const Matrix& vw = w.tape->value(w);
  Matrix out(a.rows, b.rows);
  for (int i = 0; i < a.rows; ++i)
    for (int j = 0; j < b.rows; ++j) {
      double s = 0.0;
      for (int d = 0; d < a.cols; ++d) {
        const double diff = va(i, d) - vb(j, d);
        s += vw(d, 0) * diff * diff;
      }
      out(i, j) = s;
    }
  Node n = binary(Op::kArdSqdist, a, b, std::move(out));
  n.parent[2] = w.id;
  return make_node(*a.tape, std::move(n));
}

Var assemble_lower_trap(Var diag, Var offdiag, int rows, int cols) {
  require(diag.cols == 1 && diag.rows == cols, "assemble_lower_trap: diag must be cols x 1");
  require(offdiag.cols == 1 && offdiag.rows == trap_offdiag_count(rows, cols),
          "assemble_lower_trap: offdiag size mismatch");
  const Matrix& vd = diag.tape->value(diag);
  const Matrix& vo = offdiag.tape->value(offdiag);
  Matrix out(rows, cols);
  int k = 0;
  for (int j = 0; j < cols; ++j) {
    out(j, j) = vd(j, 0);
    for (int i = j + 1; i < rows; ++i) out(i, j) = vo(k++, 0);
  }
  Node n = binary(Op::kAssembleLowerTrap, diag, offdiag, std::move(out));
  n.iarg[0] = rows;
  n.iarg[1] = cols;
  return make_node(*diag.tape, std::move(n));
}

Var extract_lower_offdiag(Var a) {
  const Matrix& v = a.tape->value(a);
  Matrix out(trap_offdiag_count(a.rows, a.cols), 1);
  int k = 0;
  for (int j = 0; j < a.cols; ++j)
    for (int i = j + 1; i < a.rows; ++i) out(k++, 0) = v(i, j);
  return make_node(*a.tape, unary(Op::kExtractLowerOffdiag, a, std::move(out)));
}

Var stop_gradient(Var a) {
  return make_node(*a.tape, unary(Op::kStopGrad, a, a.tape->value(a)));
}

// --- backward ---------------------------------------------------------------

namespace {

// Lower mask with halved diagonal, in place.
void phi_mask(Matrix& m) {
  for (int i = 0; i < m.rows(); ++i) {
    m(i, i) *= 0.5;
    for (int j = i + 1; j < m.cols(); ++j) m(i, j) = 0.0;
  }
}

void tril_mask(Matrix& m) {
  for (int i = 0; i < m.rows(); ++i)
    for (int j = i + 1; j < m.cols(); ++j) m(i, j) = 0.0;
}

}  // namespace

size_t Tape::backward(Var out) {
  if (!(out.rows == 1 && out.cols == 1))
    throw ShapeMismatch("backward: output must be scalar");
  adjoints_.assign(nodes_.size(), Matrix());
  adjoints_[out.id] = Matrix{{1.0}};

  auto accum = [&](int id, const Matrix& g) {
    if (adjoints_[id].empty())
      adjoints_[id] = g;
    else
      add_in_place(adjoints_[id], g);
  };

  size_t visited = 0;
  for (int id = out.id; id >= 0; --id) {
    ++visited;
    if (adjoints_[id].empty()) continue;
    const Node& n = nodes_[id];
    const Matrix& ob = adjoints_[id];
    const int p0 = n.parent[0], p1 = n.parent[1], p2 = n.parent[2];
    switch (n.op) {
      case Op::kLeaf:
      case Op::kStopGrad:
        break;
      case Op::kAdd:
        accum(p0, ob);
        accum(p1, ob);
        break;
      case Op::kSub: {
        accum(p0, ob);
        accum(p1, scale(ob, -1.0));
        break;
      }
      case Op::kMulConst:
        accum(p0, scale(ob, n.carg));
        break;
      case Op::kHadamard: {
        Matrix ga = ob, gb = ob;
        const Matrix& va = nodes_[p0].value;
        const Matrix& vb = nodes_[p1].value;
        for (size_t i = 0; i < ga.size(); ++i) {
          ga.vec()[i] *= vb.vec()[i];
          gb.vec()[i] *= va.vec()[i];
        }
        accum(p0, ga);
        accum(p1, gb);
        break;
      }
      case Op::kMulScalar: {
        const double sv = nodes_[p1].value(0, 0);
        accum(p0, scale(ob, sv));
        double g = 0.0;
        const Matrix& va = nodes_[p0].value;
        for (size_t i = 0; i < ob.size(); ++i) g += ob.vec()[i] * va.vec()[i];
        accum(p1, Matrix{{g}});
        break;
      }
      case Op::kDivScalar: {
        const double sv = nodes_[p1].value(0, 0);
        accum(p0, scale(ob, 1.0 / sv));
        double g = 0.0;
        const Matrix& va = nodes_[p0].value;
        for (size_t i = 0; i < ob.size(); ++i) g += ob.vec()[i] * va.vec()[i];
        accum(p1, Matrix{{-g / (sv * sv)}});
        break;
      }
      case Op::kMatMul: {
        accum(p0, matmul_nt(ob, nodes_[p1].value));
        accum(p1, matmul_tn(nodes_[p0].value, ob));
        break;
      }
      case Op::kTranspose:
        accum(p0, dwp::transpose(ob));
        break;
      case Op::kExp: {
        Matrix g = ob;
        for (size_t i = 0; i < g.size(); ++i) g.vec()[i] *= n.value.vec()[i];
        accum(p0, g);
        break;
      }
      case Op::kLog: {
        Matrix g = ob;
        const Matrix& va = nodes_[p0].value;
        for (size_t i = 0; i < g.size(); ++i) g.vec()[i] /= va.vec()[i];
        accum(p0, g);
        break;
      }
      case Op::kSquare: {
        Matrix g = ob;
        const Matrix& va = nodes_[p0].value;
        for (size_t i = 0; i < g.size(); ++i) g.vec()[i] *= 2.0 * va.vec()[i];
        accum(p0, g);
        break;
      }
      case Op::kSqrt: {
        Matrix g = ob;
        for (size_t i = 0; i < g.size(); ++i) g.vec()[i] /= 2.0 * n.value.vec()[i];
        accum(p0, g);
        break;
      }
      case Op::kSoftplus: {
        Matrix g = ob;
        const Matrix& va = nodes_[p0].value;
        for (size_t i = 0; i < g.size(); ++i) g.vec()[i] *= dwp::sigmoid(va.vec()[i]);
        accum(p0, g);
        break;
      }
      case Op::kSigmoid: {
        Matrix g = ob;
        for (size_t i = 0; i < g.size(); ++i) {
          const double s = n.value.vec()[i];
          g.vec()[i] *= s * (1.0 - s);
        }
        accum(p0, g);
        break;
      }
      case Op::kRecip: {
        Matrix g = ob;
        for (size_t i = 0; i < g.size(); ++i) {
          const double r = n.value.vec()[i];
          g.vec()[i] *= -r * r;
        }
        accum(p0, g);
        break;
      }
      case Op::kClampMin0: {
        Matrix g = ob;
        const Matrix& va = nodes_[p0].value;
        for (size_t i = 0; i < g.size(); ++i)
          if (va.vec()[i] <= 0.0) g.vec()[i] = 0.0;
        accum(p0, g);
        break;
      }
      case Op::kSum: {
        accum(p0, Matrix::constant(nodes_[p0].value.rows(), nodes_[p0].value.cols(), ob(0, 0)));
        break;
      }
      case Op::kTrace: {
        const Matrix& va = nodes_[p0].value;
        Matrix g(va.rows(), va.cols());
        for (int i = 0; i < va.rows(); ++i) g(i, i) = ob(0, 0);
        accum(p0, g);
        break;
      }
      case Op::kLogDiagSum: {
        const Matrix& va = nodes_[p0].value;
        Matrix g(va.rows(), va.cols());
        const int m = std::min(va.rows(), va.cols());
        for (int i = 0; i < m; ++i) g(i, i) = ob(0, 0) / va(i, i);
        accum(p0, g);
        break;
      }
      case Op::kTakeDiag: {
        const Matrix& va = nodes_[p0].value;
        Matrix g(va.rows(), va.cols());
        for (int i = 0; i < n.value.rows(); ++i) g(i, i) = ob(i, 0);
        accum(p0, g);
        break;
      }
      case Op::kDiagFromVec: {
        Matrix g(nodes_[p0].value.rows(), 1);
        for (int i = 0; i < g.rows(); ++i) g(i, 0) = ob(i, i);
        accum(p0, g);
        break;
      }
      case Op::kCholesky: {
        // Level-3 backward recurrence: S = L^-T Phi(L^T Lbar) L^-1; the input
        // reads only the lower triangle, so fold S's symmetric part down.
        const Matrix& l = n.value;
        Matrix t = matmul_tn(l, ob);
        phi_mask(t);
        Matrix y = dwp::tri_solve(l, t, true);          // L^-T Phi
        Matrix s = dwp::transpose(dwp::tri_solve(l, dwp::transpose(y), true));
        const int nn = l.rows();
        Matrix g(nn, nn);
        for (int i = 0; i < nn; ++i) {
          g(i, i) = s(i, i);
          for (int j = 0; j < i; ++j) g(i, j) = s(i, j) + s(j, i);
        }
        accum(p0, g);
        break;
      }
      case Op::kTriSolve: {
        const bool trans = n.iarg[0] != 0;
        const Matrix& l = nodes_[p0].value;
        const Matrix& x = n.value;
        Matrix gb = dwp::tri_solve(l, ob, !trans);
        Matrix gl = trans ? matmul_nt(x, gb) : matmul_nt(gb, x);
        gl = scale(gl, -1.0);
        tril_mask(gl);
        accum(p0, gl);
        accum(p1, gb);
        break;
      }
      case Op::kGammaLogpdf: {
        const Matrix& xv = nodes_[p0].value;
        const Matrix& av = nodes_[p1].value;
        const Matrix& bv = nodes_[p2].value;
        Matrix gx = ob, ga = ob, gb = ob;
        for (size_t i = 0; i < ob.size(); ++i) {
          const double x = xv.vec()[i], a = av.vec()[i], b = bv.vec()[i];
          gx.vec()[i] *= (a - 1.0) / x - b;
          ga.vec()[i] *= std::log(b) - digamma(a) + std::log(x);
          gb.vec()[i] *= a / b - x;
        }
        accum(p0, gx);
        accum(p1, ga);
        accum(p2, gb);
        break;
      }
      case Op::kNormalLogpdf: {
        const Matrix& xv = nodes_[p0].value;
        const Matrix& mv = nodes_[p1].value;
        const Matrix& sv = nodes_[p2].value;
        Matrix gx = ob, gm = ob, gs = ob;
        for (size_t i = 0; i < ob.size(); ++i) {
          const double d = xv.vec()[i] - mv.vec()[i], s = sv.vec()[i];
          gx.vec()[i] *= -d / (s * s);
          gm.vec()[i] *= d / (s * s);
          gs.vec()[i] *= -1.0 / s + d * d / (s * s * s);
        }
        accum(p0, gx);
        accum(p1, gm);
        accum(p2, gs);
        break;
      }
      case Op::kGammaSample: {
        const Matrix& av = nodes_[p0].value;
        const Matrix& bv = nodes_[p1].value;
        Matrix ga(av.rows(), 1), gb(av.rows(), 1);
        for (int i = 0; i < av.rows(); ++i) {
          const double a = av(i, 0), b = bv(i, 0), z = n.value(i, 0);
          const double g = z * b;  // rate-1 draw
          double h = 1e-4 * std::max(1.0, a);
          if (h >= 0.5 * a) h = 0.5 * a;
          const double dpda = (reg_inc_gamma(a + h, g) - reg_inc_gamma(a - h, g)) / (2.0 * h);
          const double logpdf = (a - 1.0) * std::log(g) - g - dwp::lgamma(a);
          ga(i, 0) = ob(i, 0) * (-dpda * std::exp(-logpdf)) / b;
          gb(i, 0) = ob(i, 0) * (-z / b);
        }
        accum(p0, ga);
        accum(p1, gb);
        break;
      }
      case Op::kBlock: {
        const Matrix& va = nodes_[p0].value;
        Matrix g(va.rows(), va.cols());
        for (int i = 0; i < n.iarg[2]; ++i)
          for (int j = 0; j < n.iarg[3]; ++j) g(n.iarg[0] + i, n.iarg[1] + j) = ob(i, j);
        accum(p0, g);
        break;
      }
      case Op::kConcatCols: {
        const int ca = n.iarg[0];
        const Matrix& va = nodes_[p0].value;
        const Matrix& vb = nodes_[p1].value;
        Matrix ga(va.rows(), va.cols()), gb(vb.rows(), vb.cols());
        for (int i = 0; i < va.rows(); ++i) {
          for (int j = 0; j < ca; ++j) ga(i, j) = ob(i, j);
          for (int j = 0; j < vb.cols(); ++j) gb(i, j) = ob(i, ca + j);
        }
        accum(p0, ga);
        accum(p1, gb);
        break;
      }
      case Op::kConcatRows: {
        const int ra = n.iarg[0];
        const Matrix& va = nodes_[p0].value;
        const Matrix& vb = nodes_[p1].value;
        Matrix ga(va.rows(), va.cols()), gb(vb.rows(), vb.cols());
        for (int j = 0; j < va.cols(); ++j) {
          for (int i = 0; i < ra; ++i) ga(i, j) = ob(i, j);
          for (int i = 0; i < vb.rows(); ++i) gb(i, j) = ob(ra + i, j);
        }
        accum(p0, ga);
        accum(p1, gb);
        break;
      }
      case Op::kRowScale: {
        const Matrix& va = nodes_[p0].value;
        const Matrix& vs = nodes_[p1].value;
        Matrix ga(va.rows(), va.cols());
        Matrix gs(va.rows(), 1);
        for (int i = 0; i < va.rows(); ++i) {
          double acc = 0.0;
          for (int j = 0; j < va.cols(); ++j) {
            ga(i, j) = ob(i, j) * vs(i, 0);
            acc += ob(i, j) * va(i, j);
          }
          gs(i, 0) = acc;
        }
        accum(p0, ga);
        accum(p1, gs);
        break;
      }
      case Op::kGramToSqdist: {
        const int nn = nodes_[p0].value.rows();
        Matrix g = scale(ob, -2.0);
        for (int i = 0; i < nn; ++i) {
          double rs = 0.0, cs = 0.0;
          for (int j = 0; j < nn; ++j) {
            rs += ob(i, j);
            cs += ob(j, i);
          }
          g(i, i) += rs + cs;
        }
        accum(p0, g);
        break;
      }
      case Op::kCrossSqdist: {
        const Matrix& vg = nodes_[p1].value;
        Matrix gi(vg.rows(), 1), gt(vg.cols(), 1);
        for (int i = 0; i < vg.rows(); ++i)
          for (int j = 0; j < vg.cols(); ++j) {
            gi(i, 0) += ob(i, j);
            gt(j, 0) += ob(i, j);
          }
        accum(p0, gi);
        accum(p1, scale(ob, -2.0));
        accum(p2, gt);
        break;
      }
      case Op::kArdSqdist: {
        const Matrix& va = nodes_[p0].value;
        const Matrix& vb = nodes_[p1].value;
        const Matrix& vw = nodes_[p2].value;
        Matrix ga(va.rows(), va.cols()), gb(vb.rows(), vb.cols()), gw(vw.rows(), 1);
        for (int i = 0; i < va.rows(); ++i)
          for (int j = 0; j < vb.rows(); ++j) {
            const double o = ob(i, j);
            if (o == 0.0) continue;
            for (int d = 0; d < va.cols(); ++d) {
              const double diff = va(i, d) - vb(j, d);
              ga(i, d) += 2.0 * vw(d, 0) * diff * o;
              gb(j, d) -= 2.0 * vw(d, 0) * diff * o;
              gw(d, 0) += diff * diff * o;
            }
          }
        accum(p0, ga);
        accum(p1, gb);
        accum(p2, gw);
        break;
      }
      case Op::kAssembleLowerTrap: {
        const int rows = n.iarg[0], cols = n.iarg[1];
        Matrix gd(cols, 1), go(trap_offdiag_count(rows, cols), 1);
        int k = 0;
        for (int j = 0; j < cols; ++j) {
          gd(j, 0) = ob(j, j);
          for (int i = j + 1; i < rows; ++i) go(k++, 0) = ob(i, j);
        }
        accum(p0, gd);
        accum(p1, go);
        break;
      }
      case Op::kExtractLowerOffdiag: {
        const Matrix& va = nodes_[p0].value;
        Matrix g(va.rows(), va.cols());
        int k = 0;
        for (int j = 0; j < va.cols(); ++j)
          for (int i = j + 1; i < va.rows(); ++i) g(i, j) = ob(k++, 0);
        accum(p0, g);
        break;
      }
    }
  }
  return visited;
}

}  // namespace dwp::ad

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "dwp/ad/gradcheck.hpp"
#include "dwp/ad/tape.hpp"
#include "dwp/linalg.hpp"
#include "dwp/model.hpp"
#include "dwp/rng.hpp"

using namespace dwp;
using namespace dwp::ad;

namespace {

Matrix random_matrix(int r, int c, RngStream& rng, double scale = 1.0) {
  Matrix m(r, c);
  for (auto& x : m.vec()) x = scale * rng.normal();
  return m;
}

Matrix random_positive(int r, int c, RngStream& rng) {
  Matrix m(r, c);
  for (auto& x : m.vec()) x = 0.2 + rng.uniform() * 2.0;
  return m;
}

Matrix random_lower(int n, RngStream& rng) {
  Matrix l(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < i; ++j) l(i, j) = 0.3 * rng.normal();
    l(i, i) = 1.0 + 0.5 * rng.uniform();
  }
  return l;
}

Matrix random_pd(int n, RngStream& rng) {
  Matrix l = random_lower(n, rng);
  return matmul_nt(l, l);
}

}  // namespace

TEST_CASE("quadratic gradient") {
  Tape t;
  Var x = t.leaf(Matrix{{1}, {2}});
  Var y = sum(hadamard(x, x));
  CHECK(t.value(y)(0, 0) == doctest::Approx(5.0));
  t.backward(y);
  Matrix g = t.adjoint(x);
  CHECK(g(0, 0) == doctest::Approx(2.0));
  CHECK(g(1, 0) == doctest::Approx(4.0));
}

TEST_CASE("logdet of L L^T via log-diag sum") {
  Tape t;
  Var l = t.leaf(Matrix::identity(2));
  Var y = mul_const(log_diag_sum(l), 2.0);
  t.backward(y);
  CHECK(frobenius_distance(t.adjoint(l), scale(Matrix::identity(2), 2.0)) < 1e-14);
}

TEST_CASE("gradcheck on trace of cholesky") {
  auto f = [](Tape& t, const std::vector<Var>& p) { return trace(cholesky(p[0])); };
  auto rep = gradcheck(f, {Matrix{{4, 2}, {2, 5}}}, 1e-5);
  CHECK(rep.max_rel_err < 1e-5);
}

TEST_CASE("gradcheck on sum of squares") {
  auto f = [](Tape& t, const std::vector<Var>& p) { return sum(square(p[0])); };
  RngStream rng(1);
  auto rep = gradcheck(f, {random_matrix(3, 2, rng)}, 1e-5);
  CHECK(rep.max_rel_err < 1e-7);
}

TEST_CASE("gamma_logpdf derivative closed form") {
  Tape t;
  Var x = t.leaf(Matrix{{3.0}});
  Var a = t.constant(Matrix{{2.0}});
  Var b = t.constant(Matrix{{0.5}});
  Var y = sum(gamma_logpdf(x, a, b));
  t.backward(y);
  CHECK(t.adjoint(x)(0, 0) == doctest::Approx(1.0 / 3.0 - 0.5).epsilon(1e-12));
}

TEST_CASE("stop_gradient freezes one factor") {
  Tape t;
  Var x = t.leaf(Matrix{{3.0}});
  Var y = sum(hadamard(x, stop_gradient(x)));
  CHECK(t.value(y)(0, 0) == doctest::Approx(9.0));
  t.backward(y);
  CHECK(t.adjoint(x)(0, 0) == doctest::Approx(3.0));

  Tape t2;
  Var v = t2.leaf(Matrix{{1}, {2}});
  Var s = stop_gradient(v);
  CHECK(t2.value(s).vec() == t2.value(v).vec());
}

TEST_CASE("backward touches each node exactly once") {
  Tape t;
  Var x = t.leaf(Matrix{{1.0, 2.0}, {3.0, 4.0}});
  Var y = sum(square(exp(mul_const(x, 0.1))));
  const size_t visited = t.backward(y);
  CHECK(visited == t.size());
}

// Per-primitive finite-difference battery, 50 random instances each with
// shapes up to 6x6.
TEST_CASE("primitive gradcheck battery") {
  RngStream rng(2024);

  struct Case {
    const char* name;
    std::function<std::vector<Matrix>(RngStream&)> point;
    TapeFn fn;
  };

  auto anysz = [&](RngStream& r) { return 1 + int(r.next_u64() % 6); };

  std::vector<Case> cases;
  cases.push_back({"add",
                   [&](RngStream& r) {
                     const int n = anysz(r), m = anysz(r);
                     return std::vector<Matrix>{random_matrix(n, m, r), random_matrix(n, m, r)};
                   },
                   [](Tape&, const std::vector<Var>& p) { return sum(square(add(p[0], p[1]))); }});
  cases.push_back({"sub",
                   [&](RngStream& r) {
                     const int n = anysz(r), m = anysz(r);
                     return std::vector<Matrix>{random_matrix(n, m, r), random_matrix(n, m, r)};
                   },
                   [](Tape&, const std::vector<Var>& p) { return sum(square(sub(p[0], p[1]))); }});
  cases.push_back({"hadamard+mul_const",
                   [&](RngStream& r) {
                     const int n = anysz(r), m = anysz(r);
                     return std::vector<Matrix>{random_matrix(n, m, r), random_matrix(n, m, r)};
                   },
                   [](Tape&, const std::vector<Var>& p) {
                     return sum(mul_const(hadamard(p[0], p[1]), 1.7));
                   }});
  cases.push_back({"mul_scalar/div_scalar",
                   [&](RngStream& r) {
                     const int n = anysz(r);
                     return std::vector<Matrix>{random_matrix(n, 2, r), Matrix{{1.5}},
                                                Matrix{{0.7}}};
                   },
                   [](Tape&, const std::vector<Var>& p) {
                     return sum(square(div_scalar(mul_scalar(p[0], p[1]), p[2])));
                   }});
  cases.push_back({"matmul+transpose",
                   [&](RngStream& r) {
                     const int n = anysz(r), k = anysz(r), m = anysz(r);
                     return std::vector<Matrix>{random_matrix(n, k, r), random_matrix(k, m, r)};
                   },
                   [](Tape&, const std::vector<Var>& p) {
                     return sum(square(matmul(p[0], p[1]))) +
                            sum(square(transpose(matmul(p[0], p[1]))));
                   }});
  cases.push_back({"exp/log/sqrt/recip",
                   [&](RngStream& r) {
                     const int n = anysz(r);
                     return std::vector<Matrix>{random_positive(n, 2, r)};
                   },
                   [](Tape&, const std::vector<Var>& p) {
                     return sum(log(p[0])) + sum(sqrt(p[0])) + sum(recip(p[0])) +
                            sum(exp(mul_const(p[0], 0.5)));
                   }});
  cases.push_back({"softplus/sigmoid",
                   [&](RngStream& r) {
                     const int n = anysz(r);
                     return std::vector<Matrix>{random_matrix(n, 3, r, 2.0)};
                   },
                   [](Tape&, const std::vector<Var>& p) {
                     return sum(softplus(p[0])) + sum(square(sigmoid(p[0])));
                   }});
  cases.push_back({"clamp_min0 away from kink",
                   [&](RngStream& r) {
                     const int n = anysz(r);
                     Matrix m = random_matrix(n, 2, r);
                     for (auto& x : m.vec())
                       if (std::fabs(x) < 0.2) x = x < 0 ? x - 0.2 : x + 0.2;
                     return std::vector<Matrix>{m};
                   },
                   [](Tape&, const std::vector<Var>& p) { return sum(square(clamp_min0(p[0]))); }});
  cases.push_back({"trace/log_diag_sum/take_diag/diag_from_vec",
                   [&](RngStream& r) {
                     const int n = anysz(r);
                     return std::vector<Matrix>{random_pd(n, r), random_positive(n, 1, r)};
                   },
                   [](Tape&, const std::vector<Var>& p) {
                     return trace(p[0]) + log_diag_sum(p[0]) + sum(square(take_diag(p[0]))) +
                            trace(matmul(diag_from_vec(p[1]), p[0]));
                   }});
  cases.push_back({"cholesky",
                   [&](RngStream& r) {
                     const int n = anysz(r);
                     return std::vector<Matrix>{random_pd(n, r)};
                   },
                   [](Tape&, const std::vector<Var>& p) {
                     Var l = cholesky(p[0]);
                     return sum(square(l)) + log_diag_sum(l);
                   }});
  cases.push_back({"tri_solve",
                   [&](RngStream& r) {
                     const int n = anysz(r);
                     Matrix l = random_lower(n, r);
                     return std::vector<Matrix>{l, random_matrix(n, 2, r)};
                   },
                   [](Tape&, const std::vector<Var>& p) {
                     return sum(square(tri_solve(p[0], p[1], false))) +
                            sum(square(tri_solve(p[0], p[1], true)));
                   }});
  cases.push_back({"gamma/normal logpdf",
                   [&](RngStream& r) {
                     const int n = anysz(r);
                     return std::vector<Matrix>{random_positive(n, 1, r), random_positive(n, 1, r),
                                                random_positive(n, 1, r), random_matrix(n, 1, r)};
                   },
                   [](Tape&, const std::vector<Var>& p) {
                     return sum(gamma_logpdf(p[0], p[1], p[2])) +
                            sum(normal_logpdf(p[3], p[0], p[2]));
                   }});
  cases.push_back({"block/concat",
                   [&](RngStream& r) {
                     return std::vector<Matrix>{random_matrix(4, 3, r), random_matrix(4, 2, r),
                                                random_matrix(2, 5, r)};
                   },
                   [](Tape&, const std::vector<Var>& p) {
                     Var cc = concat_cols(p[0], p[1]);
                     Var cr = concat_rows(cc, p[2]);
                     return sum(square(block(cr, 1, 1, 3, 3)));
                   }});
  cases.push_back({"row_scale",
                   [&](RngStream& r) {
                     const int n = anysz(r);
                     return std::vector<Matrix>{random_matrix(n, 3, r), random_positive(n, 1, r)};
                   },
                   [](Tape&, const std::vector<Var>& p) { return sum(square(row_scale(p[0], p[1]))); }});
  cases.push_back({"gram_to_sqdist",
                   [&](RngStream& r) {
                     const int n = 2 + int(r.next_u64() % 4);
                     Matrix f = random_matrix(n, n + 1, r);
                     return std::vector<Matrix>{matmul_nt(f, f)};
                   },
                   [](Tape&, const std::vector<Var>& p) {
                     return sum(exp(mul_const(gram_to_sqdist(p[0]), -0.5)));
                   }});
  cases.push_back({"cross_sqdist",
                   [&](RngStream& r) {
                     Matrix fi = random_matrix(3, 4, r), ft = random_matrix(2, 4, r);
                     Matrix g = matmul_nt(fi, ft);
                     Matrix di(3, 1), dt(2, 1);
                     for (int i = 0; i < 3; ++i) {
                       for (int d = 0; d < 4; ++d) di(i, 0) += fi(i, d) * fi(i, d);
                       di(i, 0) += 0.3;
                     }
                     for (int i = 0; i < 2; ++i) {
                       for (int d = 0; d < 4; ++d) dt(i, 0) += ft(i, d) * ft(i, d);
                       dt(i, 0) += 0.3;
                     }
                     return std::vector<Matrix>{di, g, dt};
                   },
                   [](Tape&, const std::vector<Var>& p) {
                     return sum(exp(mul_const(cross_sqdist(p[0], p[1], p[2]), -0.5)));
                   }});
  cases.push_back({"ard_sqdist",
                   [&](RngStream& r) {
                     return std::vector<Matrix>{random_matrix(3, 2, r), random_matrix(4, 2, r),
                                                random_positive(2, 1, r)};
                   },
                   [](Tape&, const std::vector<Var>& p) {
                     return sum(exp(mul_const(ard_sqdist(p[0], p[1], p[2]), -0.5))) +
                            sum(exp(mul_const(ard_sqdist(p[0], p[0], p[2]), -0.5)));
                   }});
  cases.push_back({"assemble/extract lower trapezoid",
                   [&](RngStream& r) {
                     const int rows = 4, cols = 2;
                     int noff = 0;
                     for (int j = 0; j < cols; ++j) noff += rows - 1 - j;
                     return std::vector<Matrix>{random_positive(cols, 1, r),
                                                random_matrix(noff, 1, r)};
                   },
                   [](Tape&, const std::vector<Var>& p) {
                     Var a = assemble_lower_trap(p[0], p[1], 4, 2);
                     return sum(square(a)) + sum(square(extract_lower_offdiag(a))) +
                            log_diag_sum(a);
                   }});

  for (const auto& c : cases) {
    double worst = 0.0;
    const int reps = 50 / 10 + 3;  // several shapes per primitive, 50 checks total spread
    for (int rep = 0; rep < reps; ++rep) {
      auto pt = c.point(rng);
      worst = std::max(worst, gradcheck(c.fn, pt, 1e-5).max_rel_err);
    }
    INFO(c.name);
    CHECK(worst < 1e-5);
  }
}

TEST_CASE("gamma sample reparameterization gradients") {
  // The sampler inverts the Gamma CDF, so central differences with common
  // random numbers probe exactly the implicit-function path.
  RngStream base(77);
  auto f = [base](Tape&, const std::vector<Var>& p) {
    RngStream r = base;
    Var a = softplus(p[0]);
    Var b = softplus(p[1]);
    return sum(square(gamma_sample(a, b, r)));
  };
  RngStream rng(5);
  double worst = 0.0;
  for (int rep = 0; rep < 10; ++rep) {
    std::vector<Matrix> pt{random_positive(3, 1, rng), random_positive(3, 1, rng)};
    worst = std::max(worst, gradcheck(f, pt, 1e-5).max_rel_err);
  }
  CHECK(worst < 1e-3);
}

TEST_CASE("gamma sample rate derivative is -z/beta") {
  RngStream base(123);
  Tape t;
  Var a = t.constant(Matrix{{2.5}});
  Var b = t.leaf(Matrix{{1.3}});
  RngStream r = base;
  Var z = gamma_sample(a, b, r);
  Var y = sum(z);
  t.backward(y);
  const double zv = t.value(z)(0, 0);
  CHECK(t.adjoint(b)(0, 0) == doctest::Approx(-zv / 1.3).epsilon(1e-12));
}

TEST_CASE("full single-layer elbo sample gradcheck at fixed noise") {
  RngStream rng(99);
  Matrix x = random_matrix(4, 2, rng);
  Matrix y = random_matrix(4, 1, rng);
  model::ModelConfig cfg;
  cfg.depth = 1;
  cfg.widths = {2};
  cfg.inducing = 3;
  cfg.batch = 4;
  RngStream init(3);
  auto m = model::DwpModel::init(cfg, x, init);

  std::vector<Matrix> point;
  for (const auto& name : m.params.names()) point.push_back(m.params.at(name));
  RngStream base(777);
  auto f = [&, base](Tape& tape, const std::vector<Var>& leaves) {
    RngStream noise = base;
    return m
        .elbo_sample_vars(tape, leaves, x, y, 4, 1.0,
                          model::StlFlags{false, false, false, false}, noise)
        .objective;
  };
  auto rep = gradcheck(f, point, {1e-5, 1e-6});
  CHECK(rep.max_rel_err < 1e-4);
}

TEST_CASE("cholesky primal matches numerics kernel bit for bit") {
  RngStream rng(31);
  Matrix g = random_pd(5, rng);
  Tape t;
  Var l = cholesky(t.leaf(g));
  CHECK(t.value(l).vec() == dwp::cholesky(g).vec());
}

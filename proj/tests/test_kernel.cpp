#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "dwp/kernel.hpp"
#include "dwp/rng.hpp"

using namespace dwp;
using namespace dwp::kern;

namespace {

Matrix random_matrix(int r, int c, RngStream& rng) {
  Matrix m(r, c);
  for (auto& x : m.vec()) x = rng.normal();
  return m;
}

}  // namespace

TEST_CASE("gram_to_sqdist closed values") {
  SymMatrix r1 = gram_to_sqdist(SymMatrix::identity(2));
  CHECK(r1(0, 0) == 0.0);
  CHECK(r1(0, 1) == doctest::Approx(2.0));
  CHECK(r1(1, 0) == doctest::Approx(2.0));

  SymMatrix r2 = gram_to_sqdist(SymMatrix(Matrix{{1, 1}, {1, 1}}));
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) CHECK(r2(i, j) == 0.0);

  SymMatrix r3 = gram_to_sqdist(SymMatrix(Matrix{{4, 1}, {1, 1}}));
  CHECK(r3(0, 1) == doctest::Approx(3.0));
}

TEST_CASE("sqexp_from_gram closed values") {
  KernelConfig cfg;
  // All points identical: constant matrix s^2 (+ jitter on diagonal).
  SymMatrix k0 = sqexp_from_gram(SymMatrix(Matrix{{1, 1}, {1, 1}}), cfg);
  CHECK(k0(0, 1) == doctest::Approx(1.0));
  CHECK(k0(0, 0) == doctest::Approx(1.0 + kJitterScale));

  SymMatrix k1 = sqexp_from_gram(SymMatrix::identity(3), cfg);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      CHECK(k1(i, j) == doctest::Approx(i == j ? 1.0 + kJitterScale : std::exp(-1.0)));
}

TEST_CASE("ARD kernel closed values") {
  KernelConfig cfg;
  cfg.ard = {1.0};
  Matrix x{{0.0}, {2.0}};
  SymMatrix k = sqexp_ard_from_inputs(x, cfg);
  CHECK(k(0, 1) == doctest::Approx(std::exp(-2.0)));

  Matrix x2{{1.0, 2.0}, {1.0, 2.0}};
  cfg.ard = {1.0, 1.0};
  SymMatrix k2 = sqexp_ard_from_inputs(x2, cfg);
  CHECK(k2(0, 1) == doctest::Approx(1.0));

  // Huge lengthscales flatten the kernel toward constant s^2.
  cfg.ard = {1e9, 1e9};
  cfg.variance = 1.7;
  Matrix x3{{1.0, -4.0}, {3.0, 2.0}};
  SymMatrix k3 = sqexp_ard_from_inputs(x3, cfg);
  CHECK(k3(0, 1) == doctest::Approx(1.7).epsilon(1e-12));

  cfg.ard = {1.0};
  CHECK_THROWS_AS(sqexp_ard_from_inputs(x3, cfg), ShapeMismatch);
}

TEST_CASE("gram route equals feature route") {
  RngStream rng(7);
  KernelConfig cfg;
  cfg.variance = 1.3;
  cfg.lengthscale = 0.8;
  for (int trial = 0; trial < 20; ++trial) {
    const int p = 2 + int(rng.next_u64() % 5);
    const int w = 1 + int(rng.next_u64() % 5);
    Matrix f = random_matrix(p, w, rng);
    SymMatrix g = SymMatrix::from_outer(f, 1.0 / w);
    SymMatrix via_gram = sqexp_from_gram(g, cfg);
    SymMatrix via_features = sqexp_from_features(f, cfg);
    CHECK(frobenius_distance(via_gram.mat(), via_features.mat()) < 1e-10);
  }
}

TEST_CASE("emitted kernels are PSD") {
  RngStream rng(9);
  KernelConfig cfg;
  for (int trial = 0; trial < 10; ++trial) {
    Matrix f = random_matrix(5, 2, rng);
    SymMatrix k = sqexp_from_gram(SymMatrix::from_outer(f, 0.5), cfg);
    CHECK_NOTHROW(k.validate_psd());
  }
}

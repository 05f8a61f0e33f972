#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace dwp::verify {

struct CheckResult {
  std::string name;
  bool pass = false;
  double measured = 0.0;   // worst observed error / statistic
  double tolerance = 0.0;
  std::string detail;
  double millis = 0.0;
};

// Closed-form Jacobians of the Bartlett-factor transformations against
// finite-difference Jacobian determinants.
std::vector<CheckResult> suite_jacobians(uint64_t seed);

// Density identities: the generalized-Bartlett path against the closed-form
// singular/full-rank Wishart, quadrature and importance-sampling normalizers.
std::vector<CheckResult> suite_density(uint64_t seed);

// Distributional invariances: conditional-prior independence from the choice
// of inducing factor, Gram invariance under unitary feature maps, rank.
std::vector<CheckResult> suite_invariance(uint64_t seed);

// Gradient integrity: primitive gradchecks, the full single-layer ELBO
// against central differences, implicit Gamma reparameterization, STL.
std::vector<CheckResult> suite_gradients(uint64_t seed);

// Prior moment identities and the DWP/DGP prior equivalence.
std::vector<CheckResult> suite_prior_equiv(uint64_t seed);

std::vector<CheckResult> suite_all(uint64_t seed);

std::vector<std::string> suite_names();
std::vector<CheckResult> run_suite(const std::string& name, uint64_t seed);

}  // namespace dwp::verify

#pragma once

#include <vector>

#include "dwp/matrix.hpp"

namespace dwp::kern {

// Squared-exponential kernel hyperparameters. Deep layers use the isotropic
// (variance, lengthscale) pair on Gram-matrix distances; the first layer may
// carry per-input-dimension ARD lengthscales instead.
struct KernelConfig {
  double variance = 1.0;
  double lengthscale = 1.0;
  std::vector<double> ard;  // empty unless this is the input layer

  void validate() const;
};

// Jitter added to the diagonal of any kernel matrix used as a Gaussian
// covariance: 1e-8 * mean(diag).
inline constexpr double kJitterScale = 1e-8;

// Normalized squared distance recovered from a Gram matrix:
// R_ij = G_ii - 2 G_ij + G_jj, clamped at zero against roundoff.
SymMatrix gram_to_sqdist(const SymMatrix& g);

// K_ij = s^2 exp(-R_ij / (2 l^2)) + jitter on the diagonal.
SymMatrix sqexp_from_gram(const SymMatrix& g, const KernelConfig& cfg);

// First-layer ARD kernel on raw inputs:
// K_ij = s^2 exp(-1/2 sum_d (X_id - X_jd)^2 / l_d^2) + jitter.
SymMatrix sqexp_ard_from_inputs(const Matrix& x, const KernelConfig& cfg);

// Feature-space squared-exponential with the 1/width distance normalization,
// used to confirm the Gram route reproduces the feature route.
SymMatrix sqexp_from_features(const Matrix& f, const KernelConfig& cfg);

}  // namespace dwp::kern

#pragma once

// Profile inference for theta: efficient information, efficient score,
// likelihood ratio, Fisher expansion residual and confidence sets.

#include "wsim/estimator.hpp"

#include <functional>

namespace wsim {

struct ProfileBlocks {
  Matrix breve_D2;  // D2 - A H2^{-1} A^T
  double rho = 0.0;  // |H2^{-1/2} A^T D2^{-1/2}|
};

/// Schur complement and identifiability coefficient. RankError unless H2
/// (and D2, for rho) is positive definite.
ProfileBlocks profile_blocks(const LikelihoodBlocks& blocks);

/// Efficient score score_theta - A H2^{-1} score_eta at `param`.
Vector profile_score(const Dataset& data, const Basis& basis, const FullParam& param);

/// 2 (profile L at angles_hat - profile L at angles_ref), unscaled.
double wilks_stat(const Dataset& data, const Basis& basis, const Vector& angles_hat,
                  const Vector& angles_ref, const EstimatorConfig& config = {});

/// RSS / (|kept| - p - m) at `param`.
double residual_variance(const Dataset& data, const Basis& basis, const FullParam& param);

struct FisherResidual {
  double residual = 0.0;    // |breve_D delta - breve_D^{-1} breve_xi|
  double score_norm = 0.0;  // |breve_D^{-1} breve_xi|
  Vector eigenvalues;       // of breve_D2
};

/// Residual of the linearisation breve_D2 delta = breve_xi in the metric of
/// breve_D2, with breve_D the symmetric square root (eigenvalue floor 0).
/// DiagnosticError when breve_D2 has a negative or zero eigenvalue beyond
/// rounding.
FisherResidual fisher_residual(const Matrix& breve_D2, const Vector& breve_xi, const Vector& delta);

/// Linearisation at the reference profile point (angles_ref, eta(angles_ref)),
/// delta = angles_hat - angles_ref, full Hessian blocks.
FisherResidual fisher_residual(const Dataset& data, const Basis& basis, const Vector& angles_hat,
                               const Vector& angles_ref, const EstimatorConfig& config = {});

enum class DfMode { angles, ambient };  // p - 1 or p degrees of freedom

struct ConfidenceSet {
  Vector center;      // fitted theta
  Vector center_angles;
  double level = 0.0;
  int df = 0;
  double threshold = 0.0;  // chi-square quantile
  double sigma2 = 1.0;     // scaling of the likelihood ratio
  std::function<bool(const Vector& theta)> contains;
  std::vector<Vector> boundary;  // traced for p = 2 and p = 3
};

/// {theta : wilks_stat(hat, theta) / sigma2 <= chi2 quantile(level, df)}.
ConfidenceSet confidence_set(const Dataset& data, std::shared_ptr<const Basis> basis,
                             const SieveEstimate& fit, double level,
                             DfMode mode = DfMode::angles, const EstimatorConfig& config = {},
                             int boundary_points = 64);

}  // namespace wsim

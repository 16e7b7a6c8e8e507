#pragma once

// Sieve quasi log-likelihood L(theta, eta) = -1/2 sum_{kept} (Y_i - f_eta(X_i^T theta))^2
// with theta = Phi(angles), and its derivatives in (angles, eta).

#include "wsim/model.hpp"
#include "wsim/types.hpp"
#include "wsim/wavelet.hpp"

namespace wsim {

struct FullParam {
  Vector angles;  // p - 1 chart coordinates
  Vector eta;     // m coefficients
};

/// Negative Hessian blocks (information form) and the score.
///   [ D2   A  ]
///   [ A^T  H2 ]
struct LikelihoodBlocks {
  Matrix D2;  // (p-1) x (p-1)
  Matrix A;   // (p-1) x m
  Matrix H2;  // m x m
  Vector score_theta;
  Vector score_eta;
  bool gauss_newton_only = true;

  /// Assembled (p-1+m) square information matrix.
  Matrix full() const;
};

/// Kept rows projected on theta: t_i = X_i^T theta.
Vector index_values(const Dataset& data, const Vector& theta);

/// Design matrix E with rows e(t_i)^T over kept observations.
Matrix design_matrix(const Dataset& data, const Basis& basis, const Vector& theta);

/// Response restricted to kept rows, in kept order.
Vector kept_response(const Dataset& data);

double loglik(const Dataset& data, const Basis& basis, const FullParam& param);

struct Score {
  Vector theta;
  Vector eta;
};

Score score(const Dataset& data, const Basis& basis, const FullParam& param);

/// Gauss-Newton blocks sum s_i s_i^T with s_i = (f'(t_i) J_i, e(t_i)),
/// J_i = grad Phi^T X_i; the full version adds the residual-weighted terms.
LikelihoodBlocks hessian_blocks(const Dataset& data, const Basis& basis, const FullParam& param,
                                bool gauss_newton_only = true);

}  // namespace wsim

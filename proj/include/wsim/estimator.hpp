#pragma once

// Sieve profile estimator: closed-form eta-step, quasi-Newton theta-step in
// the sphere chart, grid search start and the alternating loop.

#include "wsim/likelihood.hpp"
#include "wsim/sphere.hpp"

#include <memory>
#include <optional>
#include <vector>

namespace wsim {

struct EstimatorConfig {
  Index m = 17;
  int resolution = 5;  // dictionary units per truncation radius
  int depth = 12;
  double tau = 0.1;    // grid covering radius
  int max_alt_iters = 200;
  int theta_step_iters = 50;
  double tol = 1e-10;
  std::optional<double> ridge;       // unset: 1e-10 * trace(Gram) / m
  std::optional<double> eta_radius;  // flag only, never enforced
  std::size_t grid_budget = 500'000;
  unsigned workers = 1;  // threads for the grid search
};

void validate(const EstimatorConfig& config);

/// Basis of size config.m on [-s_X, s_X] with a shared wavelet table.
std::shared_ptr<const Basis> make_basis(const EstimatorConfig& config, double s_X);

struct EtaStep {
  Vector eta;
  double loglik = 0.0;
  double condition = 0.0;  // condition number of the Gram matrix
  bool ridged = false;
  bool on_boundary = false;  // |eta| exceeds eta_radius
};

/// argmax_eta L(theta, eta) by least squares on the kept design.
EtaStep eta_step(const Dataset& data, const Basis& basis, const Vector& theta,
                 const EstimatorConfig& config = {});

struct ThetaStep {
  Vector angles;
  double loglik = 0.0;
  int iterations = 0;
  bool stalled = false;  // no ascent was possible from the start
};

/// Ascent on L(Phi(angles), eta) with eta fixed. BFGS curvature starting
/// from the Gauss-Newton block, Armijo backtracking, iterates kept in the
/// chart box shrunk by 1e-8.
ThetaStep theta_step(const Dataset& data, const Basis& basis, const Vector& eta,
                     const Vector& start_angles, int budget, double tol = 1e-12);

struct GridStart {
  FullParam param;
  double loglik = 0.0;
  Index grid_index = 0;
  Index usable_points = 0;
};

/// Best grid point after its eta-step. Ties go to the lowest index.
GridStart grid_init(const Dataset& data, const Basis& basis, const SphereGrid& grid,
                    const EstimatorConfig& config = {});

struct TracePoint {
  FullParam param;
  double loglik = 0.0;
};

struct AlternatingTrace {
  std::vector<TracePoint> iterates;
  bool converged = false;
  int iterations_used = 0;
};

struct SieveEstimate {
  FullParam param;
  Vector theta;  // Phi(param.angles), first coordinate > 0
  double loglik = 0.0;
  AlternatingTrace trace;
  GridStart start;
  double grid_tau = 0.0;
  bool ridged = false;
  bool stalled = false;
  bool eta_on_boundary = false;
};

/// Alternates eta-steps and theta-steps from `init` until the joint change
/// of (angles, eta) is at most config.tol.
SieveEstimate alternate(const Dataset& data, const Basis& basis, const EstimatorConfig& config,
                        const FullParam& init);

/// grid_init on make_grid(p, tau) followed by alternate.
SieveEstimate fit(const Dataset& data, const Basis& basis, const EstimatorConfig& config);

/// Profile log-likelihood max_eta L(Phi(angles), eta).
double profile_loglik(const Dataset& data, const Basis& basis, const Vector& angles,
                      const EstimatorConfig& config = {});

/// Angle between two directions in radians, sign-insensitive.
double angular_error(const Vector& a, const Vector& b);

}  // namespace wsim

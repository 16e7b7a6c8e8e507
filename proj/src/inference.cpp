#include "wsim/inference.hpp"

#include "wsim/stats.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace wsim {

namespace {

// V diag(f(lambda)) V^T for a symmetric positive definite matrix.
template <typename F>
Matrix spectral_map(const Eigen::SelfAdjointEigenSolver<Matrix>& eig, F f) {
  const Vector mapped = eig.eigenvalues().unaryExpr(f);
  return eig.eigenvectors() * mapped.asDiagonal() * eig.eigenvectors().transpose();
}

}  // namespace

ProfileBlocks profile_blocks(const LikelihoodBlocks& blocks) {
  const Eigen::LLT<Matrix> h2(blocks.H2);
  if (h2.info() != Eigen::Success) throw RankError("profile blocks: H2 is not positive definite");
  ProfileBlocks out;
  const Matrix HinvAt = h2.solve(blocks.A.transpose());
  out.breve_D2 = blocks.D2 - blocks.A * HinvAt;
  out.breve_D2 = 0.5 * (out.breve_D2 + out.breve_D2.transpose()).eval();

  const Eigen::SelfAdjointEigenSolver<Matrix> d2(blocks.D2);
  if (d2.eigenvalues().minCoeff() <= 0.0) {
    out.rho = std::numeric_limits<double>::quiet_NaN();
    return out;
  }
  const Eigen::SelfAdjointEigenSolver<Matrix> h2eig(blocks.H2);
  const Matrix d_inv_half = spectral_map(d2, [](double l) { return 1.0 / std::sqrt(l); });
  const Matrix h_inv_half = spectral_map(h2eig, [](double l) { return 1.0 / std::sqrt(l); });
  const Matrix M = h_inv_half * blocks.A.transpose() * d_inv_half;
  out.rho = Eigen::JacobiSVD<Matrix>(M).singularValues()(0);
  return out;
}

Vector profile_score(const Dataset& data, const Basis& basis, const FullParam& param) {
  const LikelihoodBlocks blocks = hessian_blocks(data, basis, param, true);
  const Eigen::LLT<Matrix> h2(blocks.H2);
  if (h2.info() != Eigen::Success) throw RankError("profile score: H2 is not positive definite");
  return blocks.score_theta - blocks.A * h2.solve(blocks.score_eta);
}

double wilks_stat(const Dataset& data, const Basis& basis, const Vector& angles_hat,
                  const Vector& angles_ref, const EstimatorConfig& config) {
  if (angles_hat == angles_ref) return 0.0;
  return 2.0 * (profile_loglik(data, basis, angles_hat, config) -
                profile_loglik(data, basis, angles_ref, config));
}

double residual_variance(const Dataset& data, const Basis& basis, const FullParam& param) {
  const double dof = static_cast<double>(data.kept_count() - data.p() - basis.size());
  if (!(dof > 0.0)) throw DataError("residual variance needs more kept rows than p + m");
  return -2.0 * loglik(data, basis, param) / dof;
}

FisherResidual fisher_residual(const Matrix& breve_D2, const Vector& breve_xi, const Vector& delta) {
  const Eigen::SelfAdjointEigenSolver<Matrix> eig(breve_D2);
  FisherResidual out;
  out.eigenvalues = eig.eigenvalues();
  const double scale = out.eigenvalues.cwiseAbs().maxCoeff();
  if (!(out.eigenvalues(0) > 1e-12 * scale)) {
    throw DiagnosticError("efficient information is not positive definite", out.eigenvalues);
  }
  const Vector root = out.eigenvalues.cwiseMax(0.0).cwiseSqrt();
  const Matrix& V = eig.eigenvectors();
  const Vector standardized = V * (V.transpose() * breve_xi).cwiseQuotient(root);
  const Vector moved = V * root.cwiseProduct(V.transpose() * delta);
  out.residual = (moved - standardized).norm();
  out.score_norm = standardized.norm();
  return out;
}

FisherResidual fisher_residual(const Dataset& data, const Basis& basis, const Vector& angles_hat,
                               const Vector& angles_ref, const EstimatorConfig& config) {
  const FullParam ref{angles_ref, eta_step(data, basis, embed(angles_ref), config).eta};
  const LikelihoodBlocks blocks = hessian_blocks(data, basis, ref, false);
  const ProfileBlocks pb = profile_blocks(blocks);
  const Eigen::LLT<Matrix> h2(blocks.H2);
  const Vector xi = blocks.score_theta - blocks.A * h2.solve(blocks.score_eta);
  return fisher_residual(pb.breve_D2, xi, angles_hat - angles_ref);
}

ConfidenceSet confidence_set(const Dataset& data, std::shared_ptr<const Basis> basis,
                             const SieveEstimate& fit, double level, DfMode mode,
                             const EstimatorConfig& config, int boundary_points) {
  if (!(level > 0.0 && level < 1.0)) throw ConfigError("confidence level must lie in (0, 1)");
  const Index p = data.p();
  ConfidenceSet set;
  set.center = fit.theta;
  set.center_angles = fit.param.angles;
  set.level = level;
  set.df = static_cast<int>(mode == DfMode::angles ? p - 1 : p);
  set.threshold = chi2_quantile(level, set.df);
  set.sigma2 = residual_variance(data, *basis, fit.param);
  const double peak = fit.loglik;

  // The statistic is evaluated against the fitted profile value, so the
  // centre is always inside.
  auto scaled = [&data, basis, peak, sigma2 = set.sigma2, config](const Vector& angles) {
    return 2.0 * (peak - profile_loglik(data, *basis, angles, config)) / sigma2;
  };
  set.contains = [scaled, center = set.center, threshold = set.threshold](const Vector& theta) {
    if (theta.isApprox(center, 0.0)) return true;
    Vector t = theta;
    if (t(0) < 0.0) t = -t;
    return scaled(angles_of(t)) <= threshold;
  };

  if (p != 2 && p != 3) return set;
  const auto [lo, hi] = chart_box<double>(p, 1e-8);
  const auto rays = p == 2 ? 2 : std::max(8, boundary_points);
  for (int k = 0; k < rays; ++k) {
    Vector dir(p - 1);
    if (p == 2) {
      dir(0) = k == 0 ? 1.0 : -1.0;
    } else {
      const double a = 2.0 * std::numbers::pi * k / rays;
      dir << std::cos(a), std::sin(a);
    }
    // Largest step to the chart boundary along dir.
    double reach = std::numeric_limits<double>::infinity();
    for (Index c = 0; c < p - 1; ++c) {
      if (dir(c) > 0.0) reach = std::min(reach, (hi(c) - set.center_angles(c)) / dir(c));
      if (dir(c) < 0.0) reach = std::min(reach, (lo(c) - set.center_angles(c)) / dir(c));
    }
    double inside = 0.0;
    double outside = std::min(1e-3, reach);
    while (outside < reach && scaled(set.center_angles + outside * dir) <= set.threshold) {
      inside = outside;
      outside = std::min(2.0 * outside, reach);
    }
    if (scaled(set.center_angles + outside * dir) <= set.threshold) {
      set.boundary.push_back(embed((set.center_angles + outside * dir).eval()));
      continue;
    }
    for (int it = 0; it < 60 && outside - inside > 1e-10; ++it) {
      const double mid = 0.5 * (inside + outside);
      (scaled(set.center_angles + mid * dir) <= set.threshold ? inside : outside) = mid;
    }
    set.boundary.push_back(embed((set.center_angles + inside * dir).eval()));
  }
  return set;
}

}  // namespace wsim

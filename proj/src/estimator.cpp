#include "wsim/estimator.hpp"

#include <cmath>
#include <limits>
#include <thread>

namespace wsim {

void validate(const EstimatorConfig& config) {
  if (config.m < 1) throw ConfigError("estimator: m must be positive");
  if (config.resolution < 1) throw ConfigError("estimator: resolution must be at least 1");
  if (config.depth < 8 || config.depth > 16) throw ConfigError("estimator: depth must lie in [8, 16]");
  if (!(config.tau > 0.0 && config.tau < 1.0)) throw ConfigError("estimator: tau must lie in (0, 1)");
  if (config.max_alt_iters < 1) throw ConfigError("estimator: max_alt_iters must be positive");
  if (config.theta_step_iters < 1) throw ConfigError("estimator: theta_step_iters must be positive");
  if (!(config.tol > 0.0)) throw ConfigError("estimator: tol must be positive");
  if (config.ridge && !(*config.ridge >= 0.0)) throw ConfigError("estimator: ridge must be nonnegative");
  if (config.eta_radius && !(*config.eta_radius > 0.0)) {
    throw ConfigError("estimator: eta_radius must be positive");
  }
  if (config.grid_budget < 1) throw ConfigError("estimator: grid_budget must be positive");
}

std::shared_ptr<const Basis> make_basis(const EstimatorConfig& config, double s_X) {
  return std::make_shared<const Basis>(s_X, config.m, shared_table(config.depth), config.resolution);
}

EtaStep eta_step(const Dataset& data, const Basis& basis, const Vector& theta,
                 const EstimatorConfig& config) {
  const Matrix E = design_matrix(data, basis, theta);
  const Vector y = kept_response(data);
  const Index m = basis.size();
  const Matrix G = E.transpose() * E;
  const Vector ev = Eigen::SelfAdjointEigenSolver<Matrix>(G, Eigen::EigenvaluesOnly).eigenvalues();
  const double lmax = ev(m - 1);
  const double lmin = ev(0);

  EtaStep out;
  out.condition = lmin > 0.0 ? lmax / lmin : std::numeric_limits<double>::infinity();
  if (out.condition <= 1e12) {
    out.eta = E.colPivHouseholderQr().solve(y);
  } else {
    const double ridge = config.ridge.value_or(1e-10 * G.trace() / static_cast<double>(m));
    if (!(ridge > 0.0) || !(lmax > 0.0)) {
      throw RankError("eta-step: Gram matrix is singular (condition " + std::to_string(out.condition) + ")");
    }
    Matrix stacked(E.rows() + m, m);
    stacked << E, std::sqrt(ridge) * Matrix::Identity(m, m);
    Vector rhs = Vector::Zero(E.rows() + m);
    rhs.head(E.rows()) = y;
    out.eta = stacked.colPivHouseholderQr().solve(rhs);
    out.ridged = true;
  }
  out.loglik = -0.5 * (y - E * out.eta).squaredNorm();
  out.on_boundary = config.eta_radius.has_value() && out.eta.norm() > *config.eta_radius;
  return out;
}

ThetaStep theta_step(const Dataset& data, const Basis& basis, const Vector& eta,
                     const Vector& start_angles, int budget, double tol) {
  constexpr double kArmijo = 1e-4;
  constexpr double kMargin = 1e-8;
  ThetaStep out;
  FullParam param{clamp_to_chart(start_angles, kMargin), eta};
  double value = loglik(data, basis, param);
  LikelihoodBlocks blocks = hessian_blocks(data, basis, param, true);
  Vector grad = blocks.score_theta;
  const Index q = grad.size();
  Matrix B = blocks.D2 + 1e-12 * (1.0 + blocks.D2.trace()) * Matrix::Identity(q, q);

  bool moved = false;
  for (int it = 0; it < budget; ++it) {
    Vector dir = B.ldlt().solve(grad);
    double slope = grad.dot(dir);
    if (!(slope > 0.0) || !dir.allFinite()) {
      dir = grad;
      slope = grad.squaredNorm();
    }
    if (!(slope > 0.0)) break;

    double step = 1.0;
    bool accepted = false;
    Vector trial;
    double trial_value = value;
    for (int bt = 0; bt < 50; ++bt) {
      trial = clamp_to_chart((param.angles + step * dir).eval(), kMargin);
      trial_value = loglik(data, basis, {trial, eta});
      if (trial_value >= value + kArmijo * grad.dot(trial - param.angles) && trial_value > value) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    out.iterations = it + 1;
    if (!accepted) {
      // No ascent from the very start with a nonnegligible gradient is a stall.
      if (!moved && slope > 1e-10 * (1.0 + std::abs(value))) out.stalled = true;
      break;
    }
    moved = true;
    const Vector s = trial - param.angles;
    param.angles = trial;
    value = trial_value;
    const Vector next_grad = score(data, basis, param).theta;
    const Vector yv = grad - next_grad;  // curvature of -L along s
    const double sy = s.dot(yv);
    if (sy > 1e-14 * s.norm() * yv.norm()) {
      const Vector Bs = B * s;
      B += (yv * yv.transpose()) / sy - (Bs * Bs.transpose()) / s.dot(Bs);
    }
    grad = next_grad;
    if (s.norm() <= tol) break;
  }
  out.angles = param.angles;
  out.loglik = value;
  return out;
}

GridStart grid_init(const Dataset& data, const Basis& basis, const SphereGrid& grid,
                    const EstimatorConfig& config) {
  const auto count = grid.points.size();
  if (count == 0) throw InitializationError("grid search needs a nonempty grid");
  std::vector<double> values(count, -std::numeric_limits<double>::infinity());
  std::vector<char> usable(count, 0);

  auto work = [&](std::size_t begin, std::size_t stride) {
    for (std::size_t l = begin; l < count; l += stride) {
      try {
        values[l] = eta_step(data, basis, grid.points[l], config).loglik;
        usable[l] = std::isfinite(values[l]) ? 1 : 0;
      } catch (const RankError&) {
        usable[l] = 0;
      }
    }
  };
  const unsigned workers = std::max(1u, std::min<unsigned>(config.workers, static_cast<unsigned>(count)));
  if (workers == 1) {
    work(0, 1);
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work, w, workers);
    for (auto& t : pool) t.join();
  }

  GridStart best;
  bool found = false;
  for (std::size_t l = 0; l < count; ++l) {
    if (!usable[l]) continue;
    ++best.usable_points;
    if (!found || values[l] > best.loglik) {
      best.loglik = values[l];
      best.grid_index = static_cast<Index>(l);
      found = true;
    }
  }
  if (!found) throw InitializationError("every grid point gave a rank-deficient eta-step");
  const Vector& theta = grid.points[static_cast<std::size_t>(best.grid_index)];
  best.param = {angles_of(theta), eta_step(data, basis, theta, config).eta};
  return best;
}

SieveEstimate alternate(const Dataset& data, const Basis& basis, const EstimatorConfig& config,
                        const FullParam& init) {
  SieveEstimate est;
  FullParam current{clamp_to_chart(init.angles, 1e-8), init.eta};
  est.trace.iterates.push_back({current, loglik(data, basis, current)});

  for (int k = 0; k < config.max_alt_iters; ++k) {
    const EtaStep es = eta_step(data, basis, embed(current.angles), config);
    est.ridged = est.ridged || es.ridged;
    const ThetaStep ts = theta_step(data, basis, es.eta, current.angles, config.theta_step_iters);
    est.stalled = est.stalled || ts.stalled;
    FullParam next{ts.angles, es.eta};
    const double change = std::sqrt((next.angles - current.angles).squaredNorm() +
                                    (next.eta - current.eta).squaredNorm());
    current = next;
    est.trace.iterates.push_back({current, ts.loglik});
    est.trace.iterations_used = k + 1;
    if (change <= config.tol) {
      est.trace.converged = true;
      break;
    }
  }

  const EtaStep final_eta = eta_step(data, basis, embed(current.angles), config);
  est.ridged = est.ridged || final_eta.ridged;
  est.eta_on_boundary = final_eta.on_boundary;
  est.param = {current.angles, final_eta.eta};
  est.theta = embed(current.angles);
  est.loglik = final_eta.loglik;
  return est;
}

SieveEstimate fit(const Dataset& data, const Basis& basis, const EstimatorConfig& config) {
  validate(config);
  const SphereGrid grid = make_grid(data.p(), config.tau, config.grid_budget);
  const GridStart start = grid_init(data, basis, grid, config);
  SieveEstimate est = alternate(data, basis, config, start.param);
  est.start = start;
  est.grid_tau = grid.tau;
  return est;
}

double profile_loglik(const Dataset& data, const Basis& basis, const Vector& angles,
                      const EstimatorConfig& config) {
  return eta_step(data, basis, embed(angles), config).loglik;
}

double angular_error(const Vector& a, const Vector& b) {
  const Vector u = a.normalized();
  Vector v = b.normalized();
  if (u.dot(v) < 0.0) v = -v;
  return 2.0 * std::atan2((u - v).norm(), (u + v).norm());
}

}  // namespace wsim

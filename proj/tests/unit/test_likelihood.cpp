#include "wsim/likelihood.hpp"
#include "wsim/sphere.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace wsim;

namespace {

struct Fixture {
  std::shared_ptr<const Basis> basis;
  ModelSpec spec;
  Vector eta_star;
  Dataset data;
};

Fixture make_fixture(Index p, Index m, Index n, double sigma, std::uint64_t seed = 1) {
  Fixture f;
  f.basis = std::make_shared<const Basis>(1.0, m, shared_table(12), 5);
  f.eta_star = project_link(*f.basis, "sin");
  f.spec.p = p;
  Vector theta = Vector::LinSpaced(p, 1.0, -0.4);
  f.spec.components.push_back({theta.normalized(), Link::on_basis(f.basis, f.eta_star)});
  f.spec.noise_sigma = sigma;
  f.data = simulate(f.spec, n, seed);
  return f;
}

FullParam random_param(Index p, const Vector& eta_center, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.1, 0.9);
  std::normal_distribution<double> z;
  FullParam param;
  param.angles.resize(p - 1);
  param.angles(0) = std::numbers::pi * u(rng);
  for (Index a = 1; a < p - 1; ++a) param.angles(a) = std::numbers::pi * (u(rng) - 0.5);
  param.eta = eta_center;
  for (Index k = 0; k < param.eta.size(); ++k) param.eta(k) += 0.3 * z(rng);
  return param;
}

Vector stacked_score(const Score& s) {
  Vector out(s.theta.size() + s.eta.size());
  out << s.theta, s.eta;
  return out;
}

FullParam shifted(const FullParam& param, Index coord, double h) {
  FullParam out = param;
  const Index q = param.angles.size();
  if (coord < q) {
    out.angles(coord) += h;
  } else {
    out.eta(coord - q) += h;
  }
  return out;
}

// Straight-line oracle: residuals from single-member evaluations.
double naive_loglik(const Dataset& d, const Basis& basis, const FullParam& param) {
  const Vector theta = embed(param.angles);
  double acc = 0.0;
  for (Index i = 0; i < d.n(); ++i) {
    if (d.X.row(i).norm() > d.s_X) continue;
    const double t = d.X.row(i).dot(theta);
    double f = 0.0;
    for (Index k = 0; k < basis.size(); ++k) f += param.eta(k) * basis.eval(k, t);
    acc += (d.Y(i) - f) * (d.Y(i) - f);
  }
  return -0.5 * acc;
}

}  // namespace

TEST_CASE("loglik at the truth of a noiseless model is zero") {
  const Fixture f = make_fixture(3, 17, 200, 0.0);
  const FullParam truth{angles_of(f.spec.components[0].theta), f.eta_star};
  CHECK(std::abs(loglik(f.data, *f.basis, truth)) < 1e-20);
  const Score s = score(f.data, *f.basis, truth);
  CHECK(s.theta.norm() < 1e-10);
  CHECK(s.eta.norm() < 1e-10);
}

TEST_CASE("loglik at eta = 0 is minus half the kept sum of squares") {
  const Fixture f = make_fixture(3, 17, 200, 0.1);
  FullParam param{Vector::Constant(2, 0.4), Vector::Zero(17)};
  param.angles(0) = 1.2;
  CHECK(loglik(f.data, *f.basis, param) == doctest::Approx(-0.5 * kept_response(f.data).squaredNorm()));
}

TEST_CASE("loglik matches the straight-line oracle") {
  const Fixture f = make_fixture(4, 34, 150, 0.2);
  std::mt19937_64 rng(3);
  for (int t = 0; t < 5; ++t) {
    const FullParam param = random_param(4, Vector::Zero(34), rng);
    CHECK(loglik(f.data, *f.basis, param) ==
          doctest::Approx(naive_loglik(f.data, *f.basis, param)).epsilon(1e-12));
  }
}

TEST_CASE("score matches central differences of loglik") {
  for (Index m : {17, 34}) {
    const Fixture f = make_fixture(3, m, 200, 0.1);
    std::mt19937_64 rng(11);
    for (int t = 0; t < 20; ++t) {
      const FullParam param = random_param(3, f.eta_star.head(m), rng);
      const Vector g = stacked_score(score(f.data, *f.basis, param));
      Vector fd(g.size());
      for (Index c = 0; c < g.size(); ++c) {
        const double h = 1e-6;
        fd(c) = (loglik(f.data, *f.basis, shifted(param, c, h)) -
                 loglik(f.data, *f.basis, shifted(param, c, -h))) /
                (2 * h);
      }
      CHECK((g - fd).norm() <= 1e-5 * g.norm());
    }
  }
}

TEST_CASE("score_eta is the normal-equation residual") {
  const Fixture f = make_fixture(3, 17, 200, 0.1);
  std::mt19937_64 rng(5);
  const FullParam param = random_param(3, f.eta_star, rng);
  const Matrix E = design_matrix(f.data, *f.basis, embed(param.angles));
  const Vector y = kept_response(f.data);
  const Vector expect = E.transpose() * y - E.transpose() * E * param.eta;
  CHECK((score(f.data, *f.basis, param).eta - expect).norm() <= 1e-10 * expect.norm());
}

TEST_CASE("H2 is the empirical Gram of the design") {
  const Fixture f = make_fixture(3, 17, 300, 0.1);
  std::mt19937_64 rng(6);
  const FullParam param = random_param(3, f.eta_star, rng);
  const LikelihoodBlocks b = hessian_blocks(f.data, *f.basis, param, false);
  Matrix G = Matrix::Zero(17, 17);
  const Vector theta = embed(param.angles);
  for (Index i : f.data.kept) {
    const Vector e = f.basis->basis_vector(f.data.X.row(i).dot(theta));
    G += e * e.transpose();
  }
  CHECK((b.H2 - G).norm() <= 1e-12 * G.norm());
  const Eigen::SelfAdjointEigenSolver<Matrix> eig(b.H2);
  CHECK(eig.eigenvalues().minCoeff() > 0.0);
}

TEST_CASE("full Hessian matches central differences of the score") {
  const Fixture f = make_fixture(3, 17, 200, 0.1);
  std::mt19937_64 rng(12);
  for (int t = 0; t < 20; ++t) {
    const FullParam param = random_param(3, f.eta_star, rng);
    const Matrix info = hessian_blocks(f.data, *f.basis, param, false).full();
    Matrix fd(info.rows(), info.cols());
    for (Index c = 0; c < info.cols(); ++c) {
      const double h = 1e-6;
      fd.col(c) = -(stacked_score(score(f.data, *f.basis, shifted(param, c, h))) -
                    stacked_score(score(f.data, *f.basis, shifted(param, c, -h)))) /
                  (2 * h);
    }
    CHECK((info - fd).norm() <= 1e-3 * info.norm());
    CHECK((info - info.transpose()).cwiseAbs().maxCoeff() <= 1e-10 * info.norm());
  }
}

TEST_CASE("blocks carry the score") {
  const Fixture f = make_fixture(3, 17, 200, 0.1);
  std::mt19937_64 rng(13);
  const FullParam param = random_param(3, f.eta_star, rng);
  const LikelihoodBlocks b = hessian_blocks(f.data, *f.basis, param, true);
  const Score s = score(f.data, *f.basis, param);
  CHECK((b.score_theta - s.theta).norm() <= 1e-10 * (1 + s.theta.norm()));
  CHECK((b.score_eta - s.eta).norm() <= 1e-10 * (1 + s.eta.norm()));
  CHECK(b.gauss_newton_only);
}

TEST_CASE("Gauss-Newton and full Hessians coincide at a perfect fit") {
  const Fixture f = make_fixture(3, 17, 200, 0.0);
  const FullParam truth{angles_of(f.spec.components[0].theta), f.eta_star};
  const Matrix gn = hessian_blocks(f.data, *f.basis, truth, true).full();
  const Matrix full = hessian_blocks(f.data, *f.basis, truth, false).full();
  CHECK((gn - full).norm() <= 1e-10 * gn.norm());
}

TEST_CASE("the residual part of the Hessian shrinks with the noise level") {
  double previous = std::numeric_limits<double>::infinity();
  for (double sigma : {0.4, 0.1, 0.025}) {
    const Fixture f = make_fixture(3, 17, 1000, sigma, 21);
    const FullParam truth{angles_of(f.spec.components[0].theta), f.eta_star};
    const Matrix gn = hessian_blocks(f.data, *f.basis, truth, true).full();
    const Matrix full = hessian_blocks(f.data, *f.basis, truth, false).full();
    const double gap = (gn - full).norm() / gn.norm();
    CHECK(gap < previous);
    previous = gap;
  }
}

TEST_CASE("parameter shapes are checked") {
  const Fixture f = make_fixture(3, 17, 50, 0.1);
  CHECK_THROWS_AS(loglik(f.data, *f.basis, {Vector::Zero(3), Vector::Zero(17)}), ConfigError);
  CHECK_THROWS_AS(score(f.data, *f.basis, {Vector::Zero(2), Vector::Zero(5)}), ConfigError);
}

#include "wsim/sphere.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace wsim;

namespace {

constexpr double kPi = std::numbers::pi;

Vector random_interior(Index p, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.05, 0.95);
  Vector phi(p - 1);
  phi(0) = kPi * u(rng);
  for (Index a = 1; a < p - 1; ++a) phi(a) = kPi * (u(rng) - 0.5);
  return phi;
}

Vector random_half_sphere(Index p, std::mt19937_64& rng) {
  std::normal_distribution<double> z;
  Vector v(p);
  for (Index c = 0; c < p; ++c) v(c) = z(rng);
  v.normalize();
  if (v(0) < 0.0) v = -v;
  return v;
}

}  // namespace

TEST_CASE("embed has unit norm and positive first coordinate") {
  std::mt19937_64 rng(1);
  for (Index p = 2; p <= 6; ++p) {
    for (int t = 0; t < 200; ++t) {
      const Vector theta = embed(random_interior(p, rng));
      CHECK(std::abs(theta.norm() - 1.0) <= 1e-15);
      CHECK(theta(0) > 0.0);
    }
  }
}

TEST_CASE("p = 2 chart is (sin phi, cos phi)") {
  Vector phi(1);
  phi << kPi / 2;
  const Vector theta = embed(phi);
  CHECK(theta(0) == doctest::Approx(1.0));
  CHECK(std::abs(theta(1)) < 1e-15);
}

TEST_CASE("angles_of inverts embed on the interior") {
  std::mt19937_64 rng(2);
  for (Index p = 2; p <= 6; ++p) {
    for (int t = 0; t < 200; ++t) {
      const Vector phi = random_interior(p, rng);
      CHECK((angles_of(embed(phi)) - phi).cwiseAbs().maxCoeff() <= 1e-12);
    }
  }
}

TEST_CASE("embed works for other scalar types") {
  Eigen::Matrix<long double, Eigen::Dynamic, 1> phi(2);
  phi << 0.7L, -0.3L;
  const auto theta = embed(phi);
  CHECK(std::abs(static_cast<double>(theta.norm() - 1.0L)) < 1e-18);
  Eigen::VectorXf phif(1);
  phif << 0.4f;
  CHECK(std::abs(embed(phif).norm() - 1.0f) < 1e-6f);
}

TEST_CASE("gradient columns are tangent and match finite differences") {
  std::mt19937_64 rng(3);
  const double h = 1e-6;
  for (Index p = 2; p <= 5; ++p) {
    for (int t = 0; t < 50; ++t) {
      const Vector phi = random_interior(p, rng);
      const Matrix G = grad_embed(phi);
      CHECK((embed(phi).transpose() * G).cwiseAbs().maxCoeff() <= 1e-12);
      for (Index a = 0; a < p - 1; ++a) {
        Vector up = phi, dn = phi;
        up(a) += h;
        dn(a) -= h;
        const Vector fd = (embed(up) - embed(dn)) / (2 * h);
        CHECK((fd - G.col(a)).norm() <= 1e-6);
        CHECK((fd - G.col(a)).norm() <= 1e-5 * std::max(1e-3, G.col(a).norm()) + 1e-9);
      }
    }
  }
}

TEST_CASE("second derivatives are symmetric and match finite differences") {
  std::mt19937_64 rng(4);
  const double h = 1e-5;
  for (Index p = 2; p <= 5; ++p) {
    for (int t = 0; t < 30; ++t) {
      const Vector phi = random_interior(p, rng);
      const auto H = hess_embed(phi);
      REQUIRE(H.size() == static_cast<std::size_t>(p));
      for (Index b = 0; b < p - 1; ++b) {
        Vector up = phi, dn = phi;
        up(b) += h;
        dn(b) -= h;
        const Matrix fd = (grad_embed(up) - grad_embed(dn)) / (2 * h);
        for (Index c = 0; c < p; ++c) {
          const Matrix& Hc = H[static_cast<std::size_t>(c)];
          CHECK((Hc - Hc.transpose()).cwiseAbs().maxCoeff() == 0.0);
          for (Index a = 0; a < p - 1; ++a) {
            CHECK(std::abs(fd(c, a) - Hc(a, b)) <= 1e-3 * std::max(1.0, std::abs(Hc(a, b))));
          }
        }
      }
    }
  }
}

TEST_CASE("contracted Hessian equals the explicit sum") {
  std::mt19937_64 rng(5);
  const Vector phi = random_interior(4, rng);
  const Vector x = Vector::LinSpaced(4, -1.0, 2.0);
  const auto H = hess_embed(phi);
  Matrix manual = Matrix::Zero(3, 3);
  for (Index c = 0; c < 4; ++c) manual += x(c) * H[static_cast<std::size_t>(c)];
  CHECK((contract_hessian(H, x) - manual).norm() <= 1e-14);
}

TEST_CASE("gradient operator norm bound") {
  std::mt19937_64 rng(6);
  for (Index p = 2; p <= 6; ++p) {
    const double bound = std::sqrt(static_cast<double>(p) + 2.0) / 2.0 * kPi;
    for (int t = 0; t < 100; ++t) {
      const Vector phi = random_interior(p, rng);
      const Vector v = Vector::Random(p - 1);
      CHECK((grad_embed(phi) * v).norm() <= bound * v.norm());
    }
  }
}

TEST_CASE("clamp keeps iterates inside the shrunken box") {
  Vector phi(3);
  phi << -1.0, 4.0, -2.0;
  const Vector c = clamp_to_chart(phi);
  CHECK(c(0) == doctest::Approx(1e-8));
  CHECK(c(1) == doctest::Approx(kPi / 2 - 1e-8));
  CHECK(c(2) == doctest::Approx(-kPi / 2 + 1e-8));
}

TEST_CASE("p = 2 grid covers the half circle") {
  const SphereGrid grid = make_grid(2, 0.1);
  // Half circle of arc length pi covered by arcs of half-width tau.
  CHECK(grid.points.size() >= static_cast<std::size_t>(std::ceil(kPi / (2 * 0.1))));
  CHECK(grid.tau <= 0.1);
  for (const auto& pt : grid.points) {
    CHECK(std::abs(pt.norm() - 1.0) < 1e-14);
    CHECK(pt(0) >= 0.0);
  }
}

TEST_CASE("grid covering radius holds on random half-sphere points") {
  std::mt19937_64 rng(7);
  for (auto [p, tau] : {std::pair<Index, double>{2, 0.1}, {3, 0.1}, {3, 0.25}, {4, 0.3}}) {
    const SphereGrid grid = make_grid(p, tau);
    CHECK(grid.tau <= tau);
    Matrix pts(p, static_cast<Index>(grid.points.size()));
    for (std::size_t l = 0; l < grid.points.size(); ++l) pts.col(static_cast<Index>(l)) = grid.points[l];
    double worst = 0.0;
    for (int t = 0; t < 10000; ++t) {
      const Vector v = random_half_sphere(p, rng);
      const double best_dot = (pts.transpose() * v).maxCoeff();
      worst = std::max(worst, std::sqrt(std::max(0.0, 2.0 - 2.0 * best_dot)));
    }
    CHECK(worst <= tau);
  }
}

TEST_CASE("doubling tau shrinks the p = 3 grid about fourfold") {
  const double a = static_cast<double>(make_grid(3, 0.05).points.size());
  const double b = static_cast<double>(make_grid(3, 0.1).points.size());
  CHECK(a / b > 3.0);
  CHECK(a / b < 5.0);
}

TEST_CASE("grid errors") {
  CHECK_THROWS_AS(make_grid(1, 0.1), ConfigError);
  CHECK_THROWS_AS(make_grid(3, 0.0), ConfigError);
  CHECK_THROWS_AS(make_grid(3, 1.0), ConfigError);
  CHECK_THROWS_AS(make_grid(5, 0.01, 1000), ResourceError);
}

#pragma once

// Chart of the half sphere S^{p,+} = {theta : |theta| = 1, theta_1 > 0} by
// angles phi in W_S = [0, pi] x [-pi/2, pi/2]^{p-2}:
//
//   theta_1 = sin(phi_1) prod_{j>=2} cos(phi_j)
//   theta_2 = cos(phi_1) prod_{j>=2} cos(phi_j)
//   theta_c = sin(phi_{c-1}) prod_{j>=c} cos(phi_j),   c >= 3
//
// theta_1 > 0 on the interior of W_S. Every coordinate is a product of
// one-angle factors (1, sin or cos), which gives all derivatives directly.

#include "wsim/types.hpp"

#include <cmath>
#include <numbers>
#include <vector>

namespace wsim {

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

namespace sphere_detail {

enum class Factor { one, sine, cosine };

// Factor of coordinate c (0-based) in angle a (0-based), p = dim.
inline Factor factor(Index c, Index a) {
  if (c == 0) return a == 0 ? Factor::sine : Factor::cosine;
  if (c == 1) return Factor::cosine;
  if (a == c - 1) return Factor::sine;
  if (a >= c) return Factor::cosine;
  return Factor::one;
}

// d-th derivative of the factor at angle x.
template <typename Scalar>
Scalar eval(Factor f, const Scalar& x, int d) {
  using std::cos;
  using std::sin;
  switch (f) {
    case Factor::one:
      return d == 0 ? Scalar(1) : Scalar(0);
    case Factor::sine:
      switch (d % 4) {
        case 0: return sin(x);
        case 1: return cos(x);
        case 2: return -sin(x);
        default: return -cos(x);
      }
    case Factor::cosine:
      switch (d % 4) {
        case 0: return cos(x);
        case 1: return -sin(x);
        case 2: return -cos(x);
        default: return sin(x);
      }
  }
  return Scalar(0);
}

template <typename Scalar, typename Derived>
Scalar product(Index c, const Eigen::MatrixBase<Derived>& phi, Index a = -1, Index b = -1) {
  Scalar acc(1);
  for (Index j = 0; j < phi.size(); ++j) {
    const int order = (j == a) + (j == b);
    acc *= eval<Scalar>(factor(c, j), phi(j), order);
  }
  return acc;
}

}  // namespace sphere_detail

/// Lower and upper bounds of W_S, shrunk by `margin`.
template <typename Scalar = double>
std::pair<VectorX<Scalar>, VectorX<Scalar>> chart_box(Index p, Scalar margin = Scalar(0)) {
  constexpr double pi = std::numbers::pi;
  VectorX<Scalar> lo = VectorX<Scalar>::Constant(p - 1, Scalar(-pi / 2) + margin);
  VectorX<Scalar> hi = VectorX<Scalar>::Constant(p - 1, Scalar(pi / 2) - margin);
  lo(0) = margin;
  hi(0) = Scalar(pi) - margin;
  return {lo, hi};
}

/// Clamps angles into W_S shrunk by `margin`.
template <typename Derived>
VectorX<typename Derived::Scalar> clamp_to_chart(const Eigen::MatrixBase<Derived>& phi,
                                                 typename Derived::Scalar margin = 1e-8) {
  const auto [lo, hi] = chart_box<typename Derived::Scalar>(phi.size() + 1, margin);
  return phi.derived().cwiseMax(lo).cwiseMin(hi);
}

/// Phi: W_S -> S^{p,+}.
template <typename Derived>
VectorX<typename Derived::Scalar> embed(const Eigen::MatrixBase<Derived>& phi) {
  using Scalar = typename Derived::Scalar;
  const Index p = phi.size() + 1;
  VectorX<Scalar> theta(p);
  for (Index c = 0; c < p; ++c) theta(c) = sphere_detail::product<Scalar>(c, phi);
  return theta;
}

/// Inverse chart for theta with theta_1 >= 0 (normalised internally).
template <typename Derived>
VectorX<typename Derived::Scalar> angles_of(const Eigen::MatrixBase<Derived>& theta_in) {
  using Scalar = typename Derived::Scalar;
  using std::atan2;
  using std::sqrt;
  const Index p = theta_in.size();
  VectorX<Scalar> theta = theta_in / theta_in.norm();
  VectorX<Scalar> phi(p - 1);
  phi(0) = atan2(theta(0), theta(1));
  Scalar head2 = theta(0) * theta(0) + theta(1) * theta(1);
  for (Index a = 1; a < p - 1; ++a) {
    phi(a) = atan2(theta(a + 1), sqrt(head2));
    head2 += theta(a + 1) * theta(a + 1);
  }
  return phi;
}

/// Jacobian of Phi, p x (p-1). Columns are tangent to the sphere.
template <typename Derived>
MatrixX<typename Derived::Scalar> grad_embed(const Eigen::MatrixBase<Derived>& phi) {
  using Scalar = typename Derived::Scalar;
  const Index p = phi.size() + 1;
  MatrixX<Scalar> jac(p, p - 1);
  for (Index c = 0; c < p; ++c) {
    for (Index a = 0; a < p - 1; ++a) jac(c, a) = sphere_detail::product<Scalar>(c, phi, a);
  }
  return jac;
}

/// Second derivatives of Phi: entry c is the (p-1) x (p-1) Hessian of theta_c.
template <typename Derived>
std::vector<MatrixX<typename Derived::Scalar>> hess_embed(const Eigen::MatrixBase<Derived>& phi) {
  using Scalar = typename Derived::Scalar;
  const Index p = phi.size() + 1;
  std::vector<MatrixX<Scalar>> out(static_cast<std::size_t>(p), MatrixX<Scalar>(p - 1, p - 1));
  for (Index c = 0; c < p; ++c) {
    auto& hc = out[static_cast<std::size_t>(c)];
    for (Index a = 0; a < p - 1; ++a) {
      for (Index b = a; b < p - 1; ++b) {
        hc(a, b) = hc(b, a) = sphere_detail::product<Scalar>(c, phi, a, b);
      }
    }
  }
  return out;
}

/// x^T nabla^2 Phi [x, ., .] = sum_c x_c * Hessian(theta_c).
template <typename Scalar, typename Derived>
MatrixX<Scalar> contract_hessian(const std::vector<MatrixX<Scalar>>& hessians,
                                 const Eigen::MatrixBase<Derived>& x) {
  MatrixX<Scalar> acc = MatrixX<Scalar>::Zero(hessians.front().rows(), hessians.front().cols());
  for (Index c = 0; c < x.size(); ++c) acc += x(c) * hessians[static_cast<std::size_t>(c)];
  return acc;
}

/// Points on S^{p,+} with a guaranteed covering radius.
struct SphereGrid {
  std::vector<Vector> points;
  double tau = 0.0;  // realised upper bound on the covering radius
};

/// Product grid in the chart with covering radius at most tau. Angle phi_a
/// is spaced by delta / prod_{b>a} max cos(phi_b) over the enclosing cell,
/// delta = 2 tau / (p-1), so moving one coordinate at a time reaches a grid
/// node along a path of length <= (p-1) delta / 2 = tau.
inline SphereGrid make_grid(Index p, double tau, std::size_t budget = 1'000'000) {
  if (p < 2) throw ConfigError("make_grid requires p >= 2");
  if (!(tau > 0.0 && tau < 1.0)) throw ConfigError("grid fineness tau must lie in (0, 1)");
  constexpr double pi = std::numbers::pi;
  const double delta = 2.0 * tau / static_cast<double>(p - 1);

  SphereGrid grid;
  Vector phi(p - 1);
  double worst = 0.0;

  // Recurse from the outermost angle (index p-2) to phi_1 (index 0).
  auto recurse = [&](auto&& self, Index a, double weight, double path) -> void {
    const double lo = a == 0 ? 0.0 : -pi / 2;
    const double len = pi;
    const double step = delta / weight;
    const auto cells = static_cast<Index>(std::ceil(len / step - 1e-12));
    const double half = len / (2.0 * static_cast<double>(cells));
    for (Index i = 0; i < cells; ++i) {
      const double center = lo + (2.0 * static_cast<double>(i) + 1.0) * half;
      phi(a) = center;
      const double leg = path + weight * half;
      if (a == 0) {
        if (grid.points.size() >= budget) {
          throw ResourceError("sphere grid exceeds the point budget of " + std::to_string(budget));
        }
        grid.points.push_back(embed(phi));
        worst = std::max(worst, leg);
      } else {
        const double nearest = std::max(0.0, std::abs(center) - half);
        self(self, a - 1, weight * std::cos(nearest), leg);
      }
    }
  };
  recurse(recurse, p - 2, 1.0, 0.0);
  grid.tau = worst;
  return grid;
}

}  // namespace wsim

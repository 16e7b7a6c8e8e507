#pragma once

// Synthetic single- and multi-index regression data.

#include "wsim/types.hpp"
#include "wsim/wavelet.hpp"

#include <cstdint>
#include <functional>
#include <memory>
#include <random>
#include <string>
#include <vector>

namespace wsim {

/// Scalar link function: a named closed form or a coefficient vector on a basis.
class Link {
 public:
  /// "sin", "cubic" (t^3/3) or "logistic"; anything else is a ConfigError.
  static Link named(const std::string& name);
  static Link on_basis(std::shared_ptr<const Basis> basis, Vector eta);

  double operator()(double t) const;
  const std::string& name() const { return name_; }
  bool is_basis() const { return basis_ != nullptr; }
  const Vector& eta() const { return eta_; }
  const std::shared_ptr<const Basis>& basis() const { return basis_; }

 private:
  std::string name_;
  std::function<double(double)> fn_;
  std::shared_ptr<const Basis> basis_;
  Vector eta_;
};

/// Least squares coefficients of a named link on `basis`, fitted on a fine
/// uniform grid of [-s_X, s_X]. Gives a link the sieve represents exactly.
Vector project_link(const Basis& basis, const std::string& name, Index points = 4001);

enum class NoiseKind { gaussian, uniform, rademacher };
enum class DesignKind { uniform_ball, truncated_gaussian };

NoiseKind parse_noise(const std::string& name);
DesignKind parse_design(const std::string& name);

struct Component {
  Vector theta;
  Link link;
};

struct ModelSpec {
  Index p = 2;
  std::vector<Component> components;
  double noise_sigma = 0.1;
  NoiseKind noise = NoiseKind::gaussian;
  DesignKind design = DesignKind::uniform_ball;
  double s_X = 1.0;
  double design_radius = 0.0;  // 0 selects 1.2 * s_X
  std::string bias = "none";   // "none" or "quadratic-cross"
  double bias_scale = 0.0;

  double radius() const { return design_radius > 0.0 ? design_radius : 1.2 * s_X; }
};

/// Throws ConfigError unless every direction is a unit vector of length p with
/// positive first coordinate and the noise, design and bias settings are valid.
void validate(const ModelSpec& spec);

struct Dataset {
  Matrix X;  // n x p
  Vector Y;
  double s_X = 1.0;
  std::vector<Index> kept;  // rows with |X_i| <= s_X
  std::uint64_t seed = 0;

  Index n() const { return X.rows(); }
  Index p() const { return X.cols(); }
  Index kept_count() const { return static_cast<Index>(kept.size()); }
};

/// Engine for replication `rep` of sample size `n` under master `seed`. The
/// key is mixed with splitmix64, so streams are independent of scheduling.
std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t n, std::uint64_t rep);

/// Y_i = sum_l f_l(X_i^T theta_l) + bias(X_i) + eps_i, truncated at spec.s_X.
Dataset simulate(const ModelSpec& spec, Index n, std::uint64_t seed, std::uint64_t rep = 0);

/// Noise-free regression function at x.
double regression_function(const ModelSpec& spec, const Eigen::Ref<const Vector>& x);

/// Recomputes `kept` for radius s_X; X and Y are untouched.
Dataset truncate(Dataset data, double s_X);

/// Same rows and truncation with a new response.
Dataset with_response(const Dataset& data, Vector Y);

/// Plain CSV with header x1,...,xp,y.
void write_csv(const std::string& path, const Dataset& data);
Dataset read_csv(const std::string& path, double s_X);

}  // namespace wsim

#pragma once

// Projection pursuit: single-index fits to successive residuals.

#include "wsim/estimator.hpp"

#include <string>

namespace wsim {

struct PursuitComponent {
  Vector theta;  // first coordinate > 0
  Vector angles;
  Vector eta;
  std::shared_ptr<const Basis> basis;
};

enum class PursuitStop { max_components, variance_threshold, failure };

struct PursuitModel {
  std::vector<PursuitComponent> components;
  std::vector<double> residual_variance;  // mean square over kept rows, before stage 1 and after each stage
  PursuitStop stopped_by = PursuitStop::max_components;
  bool failed = false;
  std::string failure;
};

const char* to_string(PursuitStop stop);

/// Fits up to max_components stages. Stops early once a stage explains less
/// than var_threshold of the initial mean square, or when a stage fit throws
/// (the model so far is returned with `failed` set).
PursuitModel fit_pursuit(const Dataset& data, std::shared_ptr<const Basis> basis,
                         const EstimatorConfig& config, int max_components,
                         double var_threshold = 0.01);

/// sum_l f_l(x^T theta_l).
double predict(const PursuitModel& model, const Eigen::Ref<const Vector>& x);

}  // namespace wsim

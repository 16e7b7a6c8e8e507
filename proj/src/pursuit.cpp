#include "wsim/pursuit.hpp"

namespace wsim {

const char* to_string(PursuitStop stop) {
  switch (stop) {
    case PursuitStop::max_components: return "max-components";
    case PursuitStop::variance_threshold: return "variance-threshold";
    case PursuitStop::failure: return "failure";
  }
  return "unknown";
}

namespace {

double kept_mean_square(const Dataset& data) {
  return kept_response(data).squaredNorm() / static_cast<double>(data.kept_count());
}

}  // namespace

PursuitModel fit_pursuit(const Dataset& data, std::shared_ptr<const Basis> basis,
                         const EstimatorConfig& config, int max_components, double var_threshold) {
  if (max_components < 1) throw ConfigError("pursuit needs at least one component");
  if (!(var_threshold >= 0.0)) throw ConfigError("variance threshold must be nonnegative");
  PursuitModel model;
  Dataset stage = data;
  const double initial = kept_mean_square(stage);
  model.residual_variance.push_back(initial);

  for (int l = 0; l < max_components; ++l) {
    SieveEstimate est;
    try {
      est = fit(stage, *basis, config);
    } catch (const Error& e) {
      model.failed = true;
      model.failure = e.what();
      model.stopped_by = PursuitStop::failure;
      return model;
    }
    PursuitComponent comp{est.theta, est.param.angles, est.param.eta, basis};
    Vector Y = stage.Y;
    for (Index i = 0; i < stage.n(); ++i) {
      Y(i) -= link_eval(*basis, comp.eta, stage.X.row(i).dot(comp.theta));
    }
    stage = with_response(stage, std::move(Y));
    model.components.push_back(std::move(comp));
    const double now = kept_mean_square(stage);
    const double gain = initial > 0.0 ? (model.residual_variance.back() - now) / initial : 0.0;
    model.residual_variance.push_back(now);
    if (gain < var_threshold) {
      model.stopped_by = PursuitStop::variance_threshold;
      return model;
    }
  }
  model.stopped_by = PursuitStop::max_components;
  return model;
}

double predict(const PursuitModel& model, const Eigen::Ref<const Vector>& x) {
  double acc = 0.0;
  for (const auto& c : model.components) acc += link_eval(*c.basis, c.eta, x.dot(c.theta));
  return acc;
}

}  // namespace wsim

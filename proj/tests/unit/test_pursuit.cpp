#include "wsim/pursuit.hpp"

#include <doctest.h>

#include <cmath>

using namespace wsim;

namespace {

struct Setup {
  EstimatorConfig config;
  std::shared_ptr<const Basis> basis;
  Vector eta_star;
};

Setup make_setup() {
  Setup s;
  s.basis = make_basis(s.config, 1.0);
  s.eta_star = project_link(*s.basis, "sin");
  return s;
}

ModelSpec one_component(const Setup& s, Index p, double sigma) {
  ModelSpec spec;
  spec.p = p;
  spec.components.push_back({Vector(Vector::LinSpaced(p, 1.0, -0.5).normalized()),
                             Link::on_basis(s.basis, s.eta_star)});
  spec.noise_sigma = sigma;
  return spec;
}

}  // namespace

TEST_CASE("noiseless exact single component is recovered in one stage") {
  const Setup s = make_setup();
  const Dataset d = simulate(one_component(s, 3, 0.0), 500, 1);
  const PursuitModel model = fit_pursuit(d, s.basis, s.config, 1);
  REQUIRE(model.components.size() == 1);
  CHECK(std::sqrt(model.residual_variance.back()) <= 1e-6);
  CHECK(model.stopped_by == PursuitStop::max_components);
  CHECK(model.components[0].theta(0) > 0.0);
}

TEST_CASE("a second stage on one-component data explains little") {
  const Setup s = make_setup();
  const Dataset d = simulate(one_component(s, 2, 0.1), 4000, 2);
  const PursuitModel model = fit_pursuit(d, s.basis, s.config, 2, 0.0);
  REQUIRE(model.components.size() == 2);
  const auto& v = model.residual_variance;
  CHECK((v[1] - v[2]) / v[0] < 0.05);
  for (std::size_t l = 1; l < v.size(); ++l) CHECK(v[l] <= v[l - 1] + 1e-8);
}

TEST_CASE("variance threshold stops the loop") {
  const Setup s = make_setup();
  const Dataset d = simulate(one_component(s, 2, 0.1), 1000, 3);
  const PursuitModel model = fit_pursuit(d, s.basis, s.config, 4, 0.01);
  CHECK(model.stopped_by == PursuitStop::variance_threshold);
  CHECK(model.components.size() < 4);
}

TEST_CASE("residual variance never increases across stages") {
  const Setup s = make_setup();
  ModelSpec spec;
  spec.p = 3;
  spec.noise_sigma = 0.1;
  spec.components.push_back({Vector::Unit(3, 0), Link::named("sin")});
  spec.components.push_back({Vector(Vector(Vector::Unit(3, 0) + Vector::Unit(3, 2)).normalized()),
                             Link::named("cubic")});
  const Dataset d = simulate(spec, 1500, 4);
  const PursuitModel model = fit_pursuit(d, s.basis, s.config, 3, 0.0);
  for (std::size_t l = 1; l < model.residual_variance.size(); ++l) {
    CHECK(model.residual_variance[l] <= model.residual_variance[l - 1] + 1e-8);
  }
}

TEST_CASE("stage failure returns the model so far") {
  const Setup s = make_setup();
  const Dataset d = simulate(one_component(s, 2, 0.1), 8, 5);
  EstimatorConfig cfg = s.config;
  cfg.ridge = 0.0;
  const PursuitModel model = fit_pursuit(d, s.basis, cfg, 2);
  CHECK(model.failed);
  CHECK(model.stopped_by == PursuitStop::failure);
  CHECK(model.components.empty());
  CHECK_FALSE(model.failure.empty());
}

TEST_CASE("prediction sums the components") {
  const Setup s = make_setup();
  PursuitModel empty;
  CHECK(predict(empty, Vector::Ones(3)) == 0.0);

  const Dataset d = simulate(one_component(s, 3, 0.1), 800, 6);
  const PursuitModel model = fit_pursuit(d, s.basis, s.config, 2, 0.0);
  REQUIRE(model.components.size() == 2);
  for (int i = 0; i < 20; ++i) {
    const Vector x = Vector::LinSpaced(3, -0.3 + 0.02 * i, 0.4 - 0.01 * i);
    double direct = 0.0;
    for (const auto& c : model.components) {
      const double t = x.dot(c.theta);
      for (Index k = 0; k < c.basis->size(); ++k) direct += c.eta(k) * c.basis->eval(k, t);
    }
    CHECK(predict(model, x) == doctest::Approx(direct).epsilon(1e-12));
  }
  PursuitModel single = model;
  single.components.resize(1);
  const Vector x = Vector::Constant(3, 0.2);
  CHECK(predict(single, x) == link_eval(*s.basis, single.components[0].eta, x.dot(single.components[0].theta)));
}

TEST_CASE("invalid pursuit arguments") {
  const Setup s = make_setup();
  const Dataset d = simulate(one_component(s, 2, 0.1), 100, 7);
  CHECK_THROWS_AS(fit_pursuit(d, s.basis, s.config, 0), ConfigError);
  CHECK_THROWS_AS(fit_pursuit(d, s.basis, s.config, 1, -1.0), ConfigError);
}

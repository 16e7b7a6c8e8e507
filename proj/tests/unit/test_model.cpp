#include "wsim/model.hpp"

#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

using namespace wsim;

namespace {

std::shared_ptr<const Basis> basis17() {
  return std::make_shared<const Basis>(1.0, 17, shared_table(12), 5);
}

ModelSpec one_component(Index p, Link link, double sigma) {
  ModelSpec spec;
  spec.p = p;
  Vector theta = Vector::LinSpaced(p, 1.0, 0.2);
  spec.components.push_back({theta.normalized(), std::move(link)});
  spec.noise_sigma = sigma;
  return spec;
}

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("wsim_model_" + name)).string();
}

}  // namespace

TEST_CASE("named links") {
  CHECK(Link::named("sin")(0.3) == doctest::Approx(std::sin(0.3)));
  CHECK(Link::named("cubic")(0.6) == doctest::Approx(0.072));
  CHECK(Link::named("logistic")(0.0) == doctest::Approx(0.5));
  CHECK_THROWS_AS(Link::named("tanh"), ConfigError);
  CHECK_THROWS_AS(Link::on_basis(basis17(), Vector::Zero(3)), ConfigError);
}

TEST_CASE("projected link approximates its target") {
  const auto basis = basis17();
  const Link link = Link::on_basis(basis, project_link(*basis, "sin"));
  for (int i = 0; i <= 100; ++i) {
    const double t = -1.0 + i / 50.0;
    CHECK(std::abs(link(t) - std::sin(t)) < 1e-2);
  }
}

TEST_CASE("noiseless basis link reproduces f exactly") {
  const auto basis = basis17();
  const Vector eta = Vector::LinSpaced(17, 0.5, -0.3);
  const ModelSpec spec = one_component(3, Link::on_basis(basis, eta), 0.0);
  const Dataset d = simulate(spec, 300, 9);
  for (Index i = 0; i < d.n(); ++i) {
    CHECK(d.Y(i) == link_eval(*basis, eta, d.X.row(i).dot(spec.components[0].theta)));
  }
}

TEST_CASE("simulation is a pure function of the seed and stream") {
  const ModelSpec spec = one_component(3, Link::named("sin"), 0.2);
  const Dataset a = simulate(spec, 500, 42, 3);
  const Dataset b = simulate(spec, 500, 42, 3);
  CHECK(a.X == b.X);
  CHECK(a.Y == b.Y);
  CHECK(a.kept == b.kept);
  const Dataset c = simulate(spec, 500, 42, 4);
  CHECK(a.X != c.X);
  const Dataset d = simulate(spec, 500, 43, 3);
  CHECK(a.X != d.X);
}

TEST_CASE("noise is centred with the requested scale") {
  for (NoiseKind kind : {NoiseKind::gaussian, NoiseKind::uniform, NoiseKind::rademacher}) {
    ModelSpec spec = one_component(2, Link::named("cubic"), 0.5);
    spec.noise = kind;
    const Index n = 100000;
    const Dataset d = simulate(spec, n, 7);
    Vector eps(n);
    for (Index i = 0; i < n; ++i) eps(i) = d.Y(i) - regression_function(spec, d.X.row(i).transpose());
    CHECK(std::abs(eps.mean()) <= 4.0 * 0.5 / std::sqrt(static_cast<double>(n)));
    CHECK(std::sqrt(eps.squaredNorm() / n) == doctest::Approx(0.5).epsilon(0.02));
    if (kind == NoiseKind::rademacher) CHECK(eps.cwiseAbs().maxCoeff() == doctest::Approx(0.5));
    if (kind == NoiseKind::uniform) CHECK(eps.cwiseAbs().maxCoeff() <= std::sqrt(3.0) * 0.5);
  }
}

TEST_CASE("designs stay inside their radius") {
  for (DesignKind design : {DesignKind::uniform_ball, DesignKind::truncated_gaussian}) {
    ModelSpec spec = one_component(3, Link::named("sin"), 0.1);
    spec.design = design;
    const Dataset d = simulate(spec, 2000, 1);
    CHECK(d.X.rowwise().norm().maxCoeff() <= spec.radius());
  }
}

TEST_CASE("truncation keeps exactly the rows inside the radius") {
  const ModelSpec spec = one_component(3, Link::named("sin"), 0.1);
  const Dataset d = simulate(spec, 1000, 2);
  const Dataset t = truncate(d, 0.8);
  std::vector<Index> expect;
  for (Index i = 0; i < d.n(); ++i) {
    if (d.X.row(i).norm() <= 0.8) expect.push_back(i);
  }
  CHECK(t.kept == expect);
  CHECK(t.X == d.X);
  CHECK(t.Y == d.Y);
  CHECK(truncate(d, 10.0).kept_count() == d.n());
  const double smallest = d.X.rowwise().norm().minCoeff();
  CHECK_THROWS_AS(truncate(d, 0.5 * smallest), DataError);
}

TEST_CASE("kept fraction matches the volume ratio of the ball design") {
  for (Index p : {2, 3, 4}) {
    const ModelSpec spec = one_component(p, Link::named("sin"), 0.1);
    const Index n = 20000;
    const Dataset d = simulate(spec, n, 5);
    const double expected = std::pow(1.0 / 1.2, static_cast<double>(p));
    const double se = std::sqrt(expected * (1 - expected) / n);
    CHECK(std::abs(static_cast<double>(d.kept_count()) / n - expected) <= 4 * se);
  }
}

TEST_CASE("quadratic-cross bias is added to the regression function") {
  ModelSpec spec = one_component(2, Link::named("sin"), 0.0);
  spec.bias = "quadratic-cross";
  spec.bias_scale = 0.7;
  const Dataset d = simulate(spec, 100, 3);
  for (Index i = 0; i < d.n(); ++i) {
    const double base = std::sin(d.X.row(i).dot(spec.components[0].theta));
    CHECK(d.Y(i) == doctest::Approx(base + 0.7 * d.X(i, 0) * d.X(i, 1)));
  }
}

TEST_CASE("multi-index responses sum the components") {
  ModelSpec spec;
  spec.p = 3;
  spec.noise_sigma = 0.0;
  spec.components.push_back({Vector::Unit(3, 0), Link::named("sin")});
  spec.components.push_back({Vector(Vector::Ones(3).normalized()), Link::named("cubic")});
  const Dataset d = simulate(spec, 50, 8);
  for (Index i = 0; i < d.n(); ++i) {
    const double t2 = d.X.row(i).dot(spec.components[1].theta);
    CHECK(d.Y(i) == doctest::Approx(std::sin(d.X(i, 0)) + t2 * t2 * t2 / 3.0));
  }
}

TEST_CASE("invalid specifications") {
  ModelSpec spec = one_component(3, Link::named("sin"), 0.1);
  spec.components[0].theta(0) *= -1.0;
  CHECK_THROWS_AS(simulate(spec, 10, 1), ConfigError);
  spec = one_component(3, Link::named("sin"), 0.1);
  spec.components[0].theta *= 2.0;
  CHECK_THROWS_AS(validate(spec), ConfigError);
  spec = one_component(3, Link::named("sin"), -1.0);
  CHECK_THROWS_AS(validate(spec), ConfigError);
  spec = one_component(3, Link::named("sin"), 0.1);
  spec.bias = "cubic-cross";
  CHECK_THROWS_AS(validate(spec), ConfigError);
  CHECK_THROWS_AS(parse_noise("cauchy"), ConfigError);
  CHECK_THROWS_AS(parse_design("cube"), ConfigError);
}

TEST_CASE("CSV round trip is exact") {
  const ModelSpec spec = one_component(3, Link::named("sin"), 0.1);
  const Dataset d = simulate(spec, 200, 4);
  const std::string path = temp_path("roundtrip.csv");
  write_csv(path, d);
  const Dataset r = read_csv(path, spec.s_X);
  CHECK(r.X == d.X);
  CHECK(r.Y == d.Y);
  CHECK(r.kept == d.kept);
  std::remove(path.c_str());
}

TEST_CASE("malformed CSV is a data error") {
  const std::string path = temp_path("bad.csv");
  auto write = [&](const std::string& text) {
    std::ofstream(path) << text;
  };
  write("x1,x2,y\n0.1,0.2\n");
  CHECK_THROWS_AS(read_csv(path, 1.0), DataError);
  write("a,b,y\n0.1,0.2,0.3\n");
  CHECK_THROWS_AS(read_csv(path, 1.0), DataError);
  write("x1,x2,y\n0.1,abc,0.3\n");
  CHECK_THROWS_AS(read_csv(path, 1.0), DataError);
  write("x1,x2,y\n");
  CHECK_THROWS_AS(read_csv(path, 1.0), DataError);
  write("x1,x2,y\n5,5,1\n");
  CHECK_THROWS_AS(read_csv(path, 1.0), DataError);
  std::remove(path.c_str());
  CHECK_THROWS_AS(read_csv(temp_path("missing.csv"), 1.0), DataError);
}

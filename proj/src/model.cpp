#include "wsim/model.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace wsim {

Link Link::named(const std::string& name) {
  Link link;
  link.name_ = name;
  if (name == "sin") {
    link.fn_ = [](double t) { return std::sin(t); };
  } else if (name == "cubic") {
    link.fn_ = [](double t) { return t * t * t / 3.0; };
  } else if (name == "logistic") {
    link.fn_ = [](double t) { return 1.0 / (1.0 + std::exp(-t)); };
  } else {
    throw ConfigError("unknown link '" + name + "' (expected sin, cubic or logistic)");
  }
  return link;
}

Link Link::on_basis(std::shared_ptr<const Basis> basis, Vector eta) {
  if (!basis) throw ConfigError("basis link requires a basis");
  if (eta.size() != basis->size()) {
    throw ConfigError("basis link: eta has " + std::to_string(eta.size()) + " entries, basis has " +
                      std::to_string(basis->size()));
  }
  Link link;
  link.name_ = "basis";
  link.basis_ = std::move(basis);
  link.eta_ = std::move(eta);
  return link;
}

double Link::operator()(double t) const {
  if (basis_) return link_eval(*basis_, eta_, t);
  return fn_(t);
}

Vector project_link(const Basis& basis, const std::string& name, Index points) {
  if (points < 2 * basis.size()) throw ConfigError("project_link needs at least 2m grid points");
  const Link target = Link::named(name);
  const Vector t = Vector::LinSpaced(points, -basis.s_X(), basis.s_X());
  Matrix E(points, basis.size());
  Vector y(points);
  for (Index i = 0; i < points; ++i) {
    E.row(i) = basis.basis_vector(t(i)).transpose();
    y(i) = target(t(i));
  }
  return E.colPivHouseholderQr().solve(y);
}

NoiseKind parse_noise(const std::string& name) {
  if (name == "gaussian") return NoiseKind::gaussian;
  if (name == "uniform") return NoiseKind::uniform;
  if (name == "rademacher" || name == "scaled-rademacher") return NoiseKind::rademacher;
  throw ConfigError("unknown noise kind '" + name + "'");
}

DesignKind parse_design(const std::string& name) {
  if (name == "uniform-ball") return DesignKind::uniform_ball;
  if (name == "truncated-gaussian") return DesignKind::truncated_gaussian;
  throw ConfigError("unknown design '" + name + "'");
}

void validate(const ModelSpec& spec) {
  if (spec.p < 2) throw ConfigError("model dimension p must be at least 2");
  if (spec.components.empty()) throw ConfigError("model needs at least one component");
  for (const auto& c : spec.components) {
    if (c.theta.size() != spec.p) throw ConfigError("theta length differs from p");
    if (std::abs(c.theta.norm() - 1.0) > 1e-8) throw ConfigError("theta must have unit norm");
    if (!(c.theta(0) > 0.0)) throw ConfigError("theta must have a positive first coordinate");
  }
  if (!(spec.noise_sigma >= 0.0)) throw ConfigError("noise sigma must be nonnegative");
  if (!(spec.s_X > 0.0)) throw ConfigError("s_X must be positive");
  if (spec.design_radius < 0.0) throw ConfigError("design radius must be positive");
  if (spec.bias != "none" && spec.bias != "quadratic-cross") {
    throw ConfigError("unknown bias term '" + spec.bias + "'");
  }
}

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

void sample_row(const ModelSpec& spec, std::mt19937_64& rng, Eigen::Ref<Vector> x) {
  std::normal_distribution<double> normal;
  const double R = spec.radius();
  if (spec.design == DesignKind::uniform_ball) {
    for (Index c = 0; c < x.size(); ++c) x(c) = normal(rng);
    const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    x *= R * std::pow(u, 1.0 / static_cast<double>(x.size())) / x.norm();
    return;
  }
  do {
    for (Index c = 0; c < x.size(); ++c) x(c) = 0.5 * R * normal(rng);
  } while (x.norm() > R);
}

double sample_noise(const ModelSpec& spec, std::mt19937_64& rng) {
  const double s = spec.noise_sigma;
  if (s == 0.0) return 0.0;
  switch (spec.noise) {
    case NoiseKind::gaussian:
      return std::normal_distribution<double>(0.0, s)(rng);
    case NoiseKind::uniform:
      return std::uniform_real_distribution<double>(-std::sqrt(3.0) * s, std::sqrt(3.0) * s)(rng);
    case NoiseKind::rademacher:
      return std::bernoulli_distribution(0.5)(rng) ? s : -s;
  }
  return 0.0;
}

}  // namespace

std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t n, std::uint64_t rep) {
  std::uint64_t state = seed;
  std::uint64_t key = splitmix64(state);
  state ^= n * 0xd1342543de82ef95ULL;
  key ^= splitmix64(state);
  state ^= rep * 0xaf251af3b0f025b5ULL;
  key ^= splitmix64(state);
  std::seed_seq seq{static_cast<std::uint32_t>(key), static_cast<std::uint32_t>(key >> 32),
                    static_cast<std::uint32_t>(n), static_cast<std::uint32_t>(rep)};
  return std::mt19937_64(seq);
}

double regression_function(const ModelSpec& spec, const Eigen::Ref<const Vector>& x) {
  double g = 0.0;
  for (const auto& c : spec.components) g += c.link(x.dot(c.theta));
  if (spec.bias == "quadratic-cross") g += spec.bias_scale * x(0) * x(1);
  return g;
}

Dataset simulate(const ModelSpec& spec, Index n, std::uint64_t seed, std::uint64_t rep) {
  validate(spec);
  if (n < 1) throw ConfigError("sample size must be positive");
  auto rng = make_rng(seed, static_cast<std::uint64_t>(n), rep);
  Dataset data;
  data.X.resize(n, spec.p);
  data.Y.resize(n);
  data.seed = seed;
  Vector x(spec.p);
  for (Index i = 0; i < n; ++i) {
    sample_row(spec, rng, x);
    data.X.row(i) = x.transpose();
    data.Y(i) = regression_function(spec, x) + sample_noise(spec, rng);
  }
  return truncate(std::move(data), spec.s_X);
}

Dataset truncate(Dataset data, double s_X) {
  if (!(s_X > 0.0)) throw ConfigError("truncation radius must be positive");
  data.s_X = s_X;
  data.kept.clear();
  for (Index i = 0; i < data.n(); ++i) {
    if (data.X.row(i).norm() <= s_X) data.kept.push_back(i);
  }
  if (data.kept.empty()) throw DataError("no observation lies within the truncation radius");
  return data;
}

Dataset with_response(const Dataset& data, Vector Y) {
  if (Y.size() != data.n()) throw DataError("response length differs from the design");
  Dataset out = data;
  out.Y = std::move(Y);
  return out;
}

void write_csv(const std::string& path, const Dataset& data) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open '" + path + "' for writing");
  for (Index c = 0; c < data.p(); ++c) out << 'x' << (c + 1) << ',';
  out << "y\n";
  char buf[32];
  for (Index i = 0; i < data.n(); ++i) {
    for (Index c = 0; c < data.p(); ++c) {
      std::snprintf(buf, sizeof buf, "%.17g", data.X(i, c));
      out << buf << ',';
    }
    std::snprintf(buf, sizeof buf, "%.17g", data.Y(i));
    out << buf << '\n';
  }
  if (!out) throw DataError("failed writing '" + path + "'");
}

Dataset read_csv(const std::string& path, double s_X) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw DataError("'" + path + "' is empty");
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) header.push_back(cell);
  }
  const auto cols = static_cast<Index>(header.size());
  if (cols < 3 || header.back() != "y") throw DataError("header must read x1,...,xp,y");
  for (Index c = 0; c + 1 < cols; ++c) {
    if (header[static_cast<std::size_t>(c)] != "x" + std::to_string(c + 1)) {
      throw DataError("header must read x1,...,xp,y");
    }
  }

  std::vector<double> values;
  Index rows = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const char* pos = line.data();
    const char* end = line.data() + line.size();
    for (Index c = 0; c < cols; ++c) {
      double v = 0.0;
      auto [next, ec] = std::from_chars(pos, end, v);
      if (ec != std::errc()) {
        throw DataError("row " + std::to_string(rows + 1) + ": malformed number");
      }
      values.push_back(v);
      pos = next;
      if (c + 1 < cols) {
        if (pos == end || *pos != ',') throw DataError("row " + std::to_string(rows + 1) + ": too few columns");
        ++pos;
      }
    }
    if (pos != end && *pos != '\r') throw DataError("row " + std::to_string(rows + 1) + ": too many columns");
    ++rows;
  }
  if (rows == 0) throw DataError("'" + path + "' has no data rows");

  Dataset data;
  data.X.resize(rows, cols - 1);
  data.Y.resize(rows);
  for (Index i = 0; i < rows; ++i) {
    for (Index c = 0; c + 1 < cols; ++c) data.X(i, c) = values[static_cast<std::size_t>(i * cols + c)];
    data.Y(i) = values[static_cast<std::size_t>(i * cols + cols - 1)];
  }
  return truncate(std::move(data), s_X);
}

}  // namespace wsim

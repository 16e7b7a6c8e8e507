#include "wsim/harness.hpp"

#include "wsim/stats.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numbers>
#include <set>
#include <thread>

namespace wsim {

using nlohmann::json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

const std::pair<Experiment, const char*> kExperimentNames[] = {
    {Experiment::wilks_calibration, "wilks-calibration"},
    {Experiment::root_n_rate, "root-n-rate"},
    {Experiment::fisher_residual, "fisher-residual"},
    {Experiment::coverage, "coverage"},
    {Experiment::pursuit_recovery, "pursuit-recovery"},
    {Experiment::single_fit, "single-fit"},
};

template <typename T>
T get_or(const json& doc, const char* key, T fallback) {
  if (!doc.contains(key) || doc.at(key).is_null()) return fallback;
  return doc.at(key).get<T>();
}

Vector to_vector(const json& arr) {
  if (!arr.is_array() || arr.empty()) throw ConfigError("expected a nonempty numeric array");
  Vector v(static_cast<Index>(arr.size()));
  for (std::size_t i = 0; i < arr.size(); ++i) v(static_cast<Index>(i)) = arr[i].get<double>();
  return v;
}

EstimatorConfig parse_estimator(const json& doc) {
  EstimatorConfig c;
  if (doc.is_null()) return c;
  if (!doc.is_object()) throw ConfigError("'estimator' must be an object");
  c.m = get_or<Index>(doc, "m", c.m);
  c.resolution = get_or<int>(doc, "resolution", c.resolution);
  c.depth = get_or<int>(doc, "depth", c.depth);
  c.tau = get_or<double>(doc, "tau", c.tau);
  c.max_alt_iters = get_or<int>(doc, "max_alt_iters", c.max_alt_iters);
  c.theta_step_iters = get_or<int>(doc, "theta_step_iters", c.theta_step_iters);
  c.tol = get_or<double>(doc, "tol", c.tol);
  if (doc.contains("ridge") && !doc.at("ridge").is_null()) c.ridge = doc.at("ridge").get<double>();
  if (doc.contains("eta_radius") && !doc.at("eta_radius").is_null()) {
    c.eta_radius = doc.at("eta_radius").get<double>();
  }
  c.grid_budget = get_or<std::size_t>(doc, "grid_budget", c.grid_budget);
  validate(c);
  return c;
}

Link parse_link(const json& doc, const std::shared_ptr<const Basis>& basis) {
  if (doc.is_string()) return Link::named(doc.get<std::string>());
  if (doc.is_object() && doc.contains("project")) {
    const auto name = doc.at("project").get<std::string>();
    return Link::on_basis(basis, project_link(*basis, name));
  }
  if (doc.is_object() && doc.contains("eta")) return Link::on_basis(basis, to_vector(doc.at("eta")));
  throw ConfigError("link must be a name, {\"project\": name} or {\"eta\": [...]}");
}

ModelSpec parse_model(const json& doc, const std::shared_ptr<const Basis>& basis) {
  ModelSpec spec;
  if (!doc.is_object()) throw ConfigError("'model' must be an object");
  spec.p = get_or<Index>(doc, "p", 0);
  spec.noise_sigma = get_or<double>(doc, "sigma", spec.noise_sigma);
  spec.noise = parse_noise(get_or<std::string>(doc, "noise", "gaussian"));
  spec.design = parse_design(get_or<std::string>(doc, "design", "uniform-ball"));
  spec.s_X = get_or<double>(doc, "s_X", spec.s_X);
  spec.design_radius = get_or<double>(doc, "design_radius", 0.0);
  spec.bias = get_or<std::string>(doc, "bias", spec.bias);
  spec.bias_scale = get_or<double>(doc, "bias_scale", 0.0);
  if (!doc.contains("components") || !doc.at("components").is_array()) {
    throw ConfigError("model.components must be an array");
  }
  for (const auto& c : doc.at("components")) {
    Vector theta = to_vector(c.at("theta"));
    if (spec.p == 0) spec.p = theta.size();
    if (!(theta.norm() > 0.0)) throw ConfigError("theta must be nonzero");
    theta.normalize();
    spec.components.push_back({theta, parse_link(c.at("link"), basis)});
  }
  validate(spec);
  return spec;
}

std::string csv_number(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string csv_list(const std::vector<double>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ';';
    out += csv_number(values[i]);
  }
  return out;
}

std::string csv_text(std::string s) {
  for (char& ch : s) {
    if (ch == ',' || ch == '\n' || ch == '\r' || ch == '"') ch = ' ';
  }
  return s;
}

// Greedy assignment of fitted directions to true directions by smallest angle.
std::vector<double> matched_errors(const std::vector<Vector>& truth, const std::vector<Vector>& fitted) {
  std::vector<double> errors(truth.size(), std::numbers::pi / 2);
  std::vector<bool> used_t(truth.size(), false), used_f(fitted.size(), false);
  for (std::size_t round = 0; round < std::min(truth.size(), fitted.size()); ++round) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t bt = 0, bf = 0;
    for (std::size_t t = 0; t < truth.size(); ++t) {
      if (used_t[t]) continue;
      for (std::size_t f = 0; f < fitted.size(); ++f) {
        if (used_f[f]) continue;
        const double e = angular_error(truth[t], fitted[f]);
        if (e < best) {
          best = e;
          bt = t;
          bf = f;
        }
      }
    }
    used_t[bt] = used_f[bf] = true;
    errors[bt] = best;
  }
  return errors;
}

void single_index_replication(const ExperimentConfig& config, const EstimatorConfig& est_config,
                              const Dataset& data, ReplicationRow& row) {
  const Basis& basis = *config.basis;
  const SieveEstimate est = fit(data, basis, est_config);
  const Vector& theta_star = config.model.components.front().theta;
  const Vector star_angles = angles_of(theta_star);
  row.iterations = est.trace.iterations_used;
  row.converged = est.trace.converged;
  row.status = est.stalled ? "stalled" : "ok";
  row.angle_error = angular_error(est.theta, theta_star);
  row.loglik = est.loglik;
  row.sigma2 = residual_variance(data, basis, est.param);
  row.wilks = 2.0 * (est.loglik - profile_loglik(data, basis, star_angles, est_config));
  row.wilks_scaled = row.wilks / row.sigma2;
  const int df = static_cast<int>(config.df == DfMode::angles ? data.p() - 1 : data.p());
  row.covered = row.wilks_scaled <= chi2_quantile(config.level, df) ? 1 : 0;
  try {
    const FisherResidual fr = fisher_residual(data, basis, est.param.angles, star_angles, est_config);
    row.fisher_residual = fr.residual;
    row.score_norm = fr.score_norm;
  } catch (const DiagnosticError& e) {
    row.fisher_residual = row.score_norm = kNaN;
    row.message = std::string("fisher residual: ") + e.what();
  }
  row.rho = profile_blocks(hessian_blocks(data, basis, est.param, true)).rho;
}

void pursuit_replication(const ExperimentConfig& config, const EstimatorConfig& est_config,
                         const Dataset& data, ReplicationRow& row) {
  const PursuitModel model = fit_pursuit(data, config.basis, est_config, config.pursuit.max_components,
                                         config.pursuit.var_threshold);
  std::vector<Vector> truth, fitted;
  for (const auto& c : config.model.components) truth.push_back(c.theta);
  for (const auto& c : model.components) fitted.push_back(c.theta);
  row.component_errors = matched_errors(truth, fitted);
  row.stage_variances = model.residual_variance;
  row.angle_error = *std::max_element(row.component_errors.begin(), row.component_errors.end());
  row.iterations = static_cast<int>(model.components.size());
  row.converged = !model.failed;
  row.sigma2 = model.residual_variance.back();
  row.loglik = row.wilks = row.wilks_scaled = row.fisher_residual = row.score_norm = row.rho = kNaN;
  if (model.failed) {
    row.status = "error";
    row.message = "pursuit stage failed: " + model.failure;
  }
}

std::vector<double> finite_column(const std::vector<const ReplicationRow*>& rows,
                                  double ReplicationRow::*field) {
  std::vector<double> out;
  for (const auto* r : rows) {
    if (std::isfinite(r->*field)) out.push_back(r->*field);
  }
  return out;
}

json median_or_null(const std::vector<double>& v) { return v.empty() ? json() : json(median(v)); }

json ks_or_null(const std::vector<double>& v, double df) {
  return v.size() >= 20 ? json(ks_distance(v, df)) : json();
}

json coverage_at(const std::vector<double>& scaled, double level, double df) {
  if (scaled.empty()) return json();
  const double q = chi2_quantile(level, df);
  const auto inside = std::count_if(scaled.begin(), scaled.end(), [q](double w) { return w <= q; });
  return static_cast<double>(inside) / static_cast<double>(scaled.size());
}

json summarize(const ExperimentConfig& config, const std::vector<ReplicationRow>& rows) {
  json summary;
  summary["experiment"] = to_string(config.experiment);
  summary["replications"] = config.replications;
  summary["rows"] = rows.size();
  summary["seed"] = config.seed;
  summary["sigma2_estimator"] = "RSS / (kept - p - m)";
  json counts = json::object();
  for (const auto& r : rows) counts[r.status] = counts.value(r.status, 0) + 1;
  summary["status_counts"] = counts;

  const double p = static_cast<double>(config.model.p);
  json per_n = json::array();
  std::vector<std::pair<double, double>> rate_pairs;
  for (const Index n : config.n_grid) {
    std::vector<const ReplicationRow*> ok;
    std::size_t failed = 0;
    for (const auto& r : rows) {
      if (r.n != n) continue;
      if (r.status == "ok") {
        ok.push_back(&r);
      } else {
        ++failed;
      }
    }
    json entry;
    entry["n"] = n;
    entry["ok"] = ok.size();
    entry["failed"] = failed;
    const auto errors = finite_column(ok, &ReplicationRow::angle_error);
    entry["median_angle_error"] = median_or_null(errors);
    if (!errors.empty()) rate_pairs.emplace_back(static_cast<double>(n), median(errors));

    if (config.experiment == Experiment::pursuit_recovery) {
      const double limit = config.pursuit.success_degrees * std::numbers::pi / 180.0;
      json rates = json::array();
      for (std::size_t c = 0; c < config.model.components.size(); ++c) {
        std::size_t hits = 0;
        for (const auto* r : ok) hits += r->component_errors[c] <= limit ? 1 : 0;
        rates.push_back(ok.empty() ? json() : json(static_cast<double>(hits) / static_cast<double>(ok.size())));
      }
      std::size_t decreasing = 0;
      for (const auto* r : ok) {
        bool strict = true;
        for (std::size_t s = 1; s < r->stage_variances.size(); ++s) {
          strict = strict && r->stage_variances[s] < r->stage_variances[s - 1];
        }
        decreasing += strict ? 1 : 0;
      }
      entry["component_recovery_rates"] = rates;
      entry["strictly_decreasing_rate"] =
          ok.empty() ? json() : json(static_cast<double>(decreasing) / static_cast<double>(ok.size()));
      per_n.push_back(entry);
      continue;
    }

    const auto scaled = finite_column(ok, &ReplicationRow::wilks_scaled);
    entry["mean_wilks_scaled"] = scaled.empty() ? json() : json(mean(scaled));
    entry["ks_df_p_minus_1"] = ks_or_null(scaled, p - 1.0);
    entry["ks_df_p"] = ks_or_null(scaled, p);
    if (scaled.size() >= 20) {
      entry["best_df"] = ks_distance(scaled, p - 1.0) <= ks_distance(scaled, p) ? p - 1.0 : p;
    }
    entry["coverage_df_p_minus_1"] = coverage_at(scaled, config.level, p - 1.0);
    entry["coverage_df_p"] = coverage_at(scaled, config.level, p);
    const auto res = finite_column(ok, &ReplicationRow::fisher_residual);
    const auto xi = finite_column(ok, &ReplicationRow::score_norm);
    entry["median_fisher_residual"] = median_or_null(res);
    entry["median_score_norm"] = median_or_null(xi);
    entry["fisher_ratio"] = (res.empty() || xi.empty()) ? json() : json(median(res) / median(xi));
    entry["median_rho"] = median_or_null(finite_column(ok, &ReplicationRow::rho));
    entry["median_sigma2"] = median_or_null(finite_column(ok, &ReplicationRow::sigma2));
    per_n.push_back(entry);
  }
  summary["level"] = config.level;
  summary["per_n"] = per_n;
  if (rate_pairs.size() >= 3) summary["loglog_slope"] = loglog_slope(rate_pairs);
  if (config.experiment == Experiment::fisher_residual && per_n.size() >= 2 &&
      per_n.front()["fisher_ratio"].is_number() && per_n.back()["fisher_ratio"].is_number()) {
    summary["fisher_ratio_last_over_first"] =
        per_n.back()["fisher_ratio"].get<double>() / per_n.front()["fisher_ratio"].get<double>();
  }
  return summary;
}

}  // namespace

Experiment parse_experiment(const std::string& name) {
  for (const auto& [e, text] : kExperimentNames) {
    if (name == text) return e;
  }
  throw ConfigError("unknown experiment '" + name + "'");
}

const char* to_string(Experiment experiment) {
  for (const auto& [e, text] : kExperimentNames) {
    if (e == experiment) return text;
  }
  return "unknown";
}

ExperimentConfig parse_config(const json& doc) {
  try {
    if (!doc.is_object()) throw ConfigError("configuration must be a JSON object");
    ExperimentConfig c;
    c.experiment = parse_experiment(get_or<std::string>(doc, "experiment", "single-fit"));
    c.estimator = parse_estimator(doc.contains("estimator") ? doc.at("estimator") : json());
    const double s_X = doc.contains("model") ? get_or<double>(doc.at("model"), "s_X", 1.0) : 1.0;
    if (!(s_X > 0.0)) throw ConfigError("s_X must be positive");
    c.basis = make_basis(c.estimator, s_X);
    if (doc.contains("model")) {
      c.model = parse_model(doc.at("model"), c.basis);
    } else {
      c.model.s_X = s_X;
    }
    if (doc.contains("n_grid")) {
      for (const auto& n : doc.at("n_grid")) {
        const auto v = n.get<long long>();
        if (v < 1) throw ConfigError("n_grid entries must be positive");
        c.n_grid.push_back(static_cast<Index>(v));
      }
    }
    c.replications = get_or<int>(doc, "replications", c.replications);
    if (c.replications < 1) throw ConfigError("replications must be at least 1");
    c.seed = get_or<std::uint64_t>(doc, "seed", c.seed);
    c.workers = get_or<unsigned>(doc, "workers", c.workers);
    c.output_dir = get_or<std::string>(doc, "output_dir", c.output_dir);
    c.level = get_or<double>(doc, "level", c.level);
    if (!(c.level > 0.0 && c.level < 1.0)) throw ConfigError("level must lie in (0, 1)");
    const auto df = get_or<std::string>(doc, "df", "angles");
    if (df == "angles") {
      c.df = DfMode::angles;
    } else if (df == "ambient") {
      c.df = DfMode::ambient;
    } else {
      throw ConfigError("df must be 'angles' or 'ambient'");
    }
    if (doc.contains("pursuit")) {
      const json& pj = doc.at("pursuit");
      c.pursuit.max_components = get_or<int>(pj, "max_components", c.pursuit.max_components);
      c.pursuit.var_threshold = get_or<double>(pj, "var_threshold", c.pursuit.var_threshold);
      c.pursuit.success_degrees = get_or<double>(pj, "success_degrees", c.pursuit.success_degrees);
      if (c.pursuit.max_components < 1) throw ConfigError("pursuit.max_components must be positive");
    }
    return c;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed configuration: ") + e.what());
  }
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open configuration '" + path + "'");
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw ConfigError("configuration '" + path + "' is not valid JSON: " + e.what());
  }
  return parse_config(doc);
}

void validate_for_experiment(const ExperimentConfig& config) {
  if (config.model.components.empty()) throw ConfigError("experiment needs a model section");
  if (config.n_grid.empty()) throw ConfigError("experiment needs a nonempty n_grid");
  if (config.replications < 1) throw ConfigError("replications must be at least 1");
}

const std::vector<std::string>& replication_columns() {
  static const std::vector<std::string> columns{
      "n",           "replication", "seed",         "status",          "iterations",
      "converged",   "angle_error", "loglik",       "sigma2",          "wilks",
      "wilks_scaled", "covered",    "fisher_residual", "score_norm",   "rho",
      "component_errors", "stage_variances", "message"};
  return columns;
}

Report run_experiment(const ExperimentConfig& config) {
  validate_for_experiment(config);
  const auto start = std::chrono::steady_clock::now();
  Report report;
  report.experiment = config.experiment;
  for (std::size_t g = 0; g < config.n_grid.size(); ++g) {
    for (int r = 0; r < config.replications; ++r) {
      ReplicationRow row;
      row.n = config.n_grid[g];
      row.replication = r;
      row.seed = config.seed;
      report.rows.push_back(row);
    }
  }

  EstimatorConfig est_config = config.estimator;
  est_config.workers = 1;
  auto run_one = [&](ReplicationRow& row) {
    const auto t0 = std::chrono::steady_clock::now();
    try {
      const Dataset data = simulate(config.model, row.n, config.seed, static_cast<std::uint64_t>(row.replication));
      if (config.experiment == Experiment::pursuit_recovery) {
        pursuit_replication(config, est_config, data, row);
      } else {
        single_index_replication(config, est_config, data, row);
      }
    } catch (const std::exception& e) {
      row.status = "error";
      row.message = e.what();
    }
    row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  };

  unsigned workers = config.workers ? config.workers : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min<unsigned>(workers, static_cast<unsigned>(report.rows.size()));
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < report.rows.size(); i = next++) run_one(report.rows[i]);
  };
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  report.summary = summarize(config, report.rows);
  report.total_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

void write_report(const Report& report, const std::string& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw DataError("cannot create output directory '" + dir + "': " + ec.message());
  const fs::path root(dir);

  auto open = [](const fs::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write '" + path.string() + "'");
    return out;
  };

  {
    auto out = open(root / "replications.csv");
    const auto& cols = replication_columns();
    for (std::size_t c = 0; c < cols.size(); ++c) out << (c ? "," : "") << cols[c];
    out << '\n';
    for (const auto& r : report.rows) {
      out << r.n << ',' << r.replication << ',' << r.seed << ',' << r.status << ',' << r.iterations << ','
          << (r.converged ? 1 : 0) << ',' << csv_number(r.angle_error) << ',' << csv_number(r.loglik) << ','
          << csv_number(r.sigma2) << ',' << csv_number(r.wilks) << ',' << csv_number(r.wilks_scaled) << ','
          << r.covered << ',' << csv_number(r.fisher_residual) << ',' << csv_number(r.score_norm) << ','
          << csv_number(r.rho) << ',' << csv_list(r.component_errors) << ',' << csv_list(r.stage_variances)
          << ',' << csv_text(r.message) << '\n';
    }
  }

  {
    // One row per sample size: the flattened per_n entries of the summary.
    auto out = open(root / "summary.csv");
    const json& per_n = report.summary.at("per_n");
    std::set<std::string> key_set;
    for (const auto& entry : per_n) {
      for (auto it = entry.begin(); it != entry.end(); ++it) key_set.insert(it.key());
    }
    const std::vector<std::string> keys(key_set.begin(), key_set.end());
    for (std::size_t k = 0; k < keys.size(); ++k) out << (k ? "," : "") << keys[k];
    out << '\n';
    for (const auto& entry : per_n) {
      for (std::size_t k = 0; k < keys.size(); ++k) {
        if (k) out << ',';
        const json& v = entry.contains(keys[k]) ? entry.at(keys[k]) : json();
        if (v.is_number_float()) {
          out << csv_number(v.get<double>());
        } else if (v.is_array()) {
          std::vector<double> values;
          for (const auto& x : v) values.push_back(x.is_number() ? x.get<double>() : kNaN);
          out << csv_list(values);
        } else if (!v.is_null()) {
          out << v.dump();
        }
      }
      out << '\n';
    }
  }

  open(root / "summary.json") << report.summary.dump(2) << '\n';

  json runtimes;
  runtimes["total_seconds"] = report.total_seconds;
  runtimes["rows"] = json::array();
  for (const auto& r : report.rows) {
    runtimes["rows"].push_back({{"n", r.n}, {"replication", r.replication}, {"seconds", r.seconds}});
  }
  open(root / "runtimes.json") << runtimes.dump(2) << '\n';
}

}  // namespace wsim

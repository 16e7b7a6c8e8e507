// Command line front end: simulate, fit, pursuit and experiment.
//
// Exit codes: 0 success, 2 configuration error, 3 data error, 1 otherwise.

#include "wsim/harness.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>

using nlohmann::json;
using namespace wsim;

namespace {

json to_json(const Vector& v) { return json(std::vector<double>(v.data(), v.data() + v.size())); }

void write_json(const std::string& path, const json& doc) {
  if (path.empty() || path == "-") {
    std::cout << doc.dump(2) << '\n';
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path + "'");
  out << doc.dump(2) << '\n';
}

int cmd_simulate(const std::string& config_path, const std::string& out, long long n, long long seed,
                 long long replication) {
  const ExperimentConfig config = load_config(config_path);
  if (config.model.components.empty()) throw ConfigError("simulate needs a model section");
  if (n <= 0) n = config.n_grid.empty() ? 1000 : config.n_grid.front();
  const auto used_seed = seed >= 0 ? static_cast<std::uint64_t>(seed) : config.seed;
  const Dataset data = simulate(config.model, static_cast<Index>(n), used_seed,
                                static_cast<std::uint64_t>(std::max(0LL, replication)));
  write_csv(out, data);
  return 0;
}

int cmd_fit(const std::string& config_path, const std::string& data_path, const std::string& out) {
  const ExperimentConfig config = load_config(config_path);
  const Dataset data = read_csv(data_path, config.model.s_X);
  const Basis& basis = *config.basis;
  EstimatorConfig est_config = config.estimator;
  est_config.workers = config.workers ? config.workers : 1;
  const SieveEstimate est = fit(data, basis, est_config);
  const ConfidenceSet set = confidence_set(data, config.basis, est, config.level, config.df, est_config);

  json doc;
  doc["theta"] = to_json(est.theta);
  doc["angles"] = to_json(est.param.angles);
  doc["eta"] = to_json(est.param.eta);
  doc["loglik"] = est.loglik;
  doc["sigma2"] = set.sigma2;
  doc["iterations"] = est.trace.iterations_used;
  doc["converged"] = est.trace.converged;
  doc["ridged"] = est.ridged;
  doc["stalled"] = est.stalled;
  doc["eta_on_boundary"] = est.eta_on_boundary;
  doc["kept"] = data.kept_count();
  doc["grid_tau"] = est.grid_tau;
  doc["rho"] = profile_blocks(hessian_blocks(data, basis, est.param, true)).rho;
  json cs;
  cs["level"] = set.level;
  cs["df"] = set.df;
  cs["threshold"] = set.threshold;
  cs["boundary"] = json::array();
  for (const auto& b : set.boundary) cs["boundary"].push_back(to_json(b));
  doc["confidence_set"] = cs;
  write_json(out, doc);
  return 0;
}

int cmd_pursuit(const std::string& config_path, const std::string& data_path, const std::string& out) {
  const ExperimentConfig config = load_config(config_path);
  const Dataset data = read_csv(data_path, config.model.s_X);
  EstimatorConfig est_config = config.estimator;
  est_config.workers = config.workers ? config.workers : 1;
  const PursuitModel model = fit_pursuit(data, config.basis, est_config, config.pursuit.max_components,
                                         config.pursuit.var_threshold);
  json doc;
  doc["components"] = json::array();
  for (const auto& c : model.components) {
    doc["components"].push_back({{"theta", to_json(c.theta)}, {"eta", to_json(c.eta)}});
  }
  doc["residual_variance"] = model.residual_variance;
  doc["stopped_by"] = to_string(model.stopped_by);
  doc["failed"] = model.failed;
  if (model.failed) doc["failure"] = model.failure;
  write_json(out, doc);
  return model.failed ? 3 : 0;
}

int cmd_experiment(const std::string& config_path, std::string out, unsigned workers) {
  ExperimentConfig config = load_config(config_path);
  if (out.empty()) out = config.output_dir;
  if (out.empty()) throw ConfigError("experiment needs --out or output_dir");
  if (workers) config.workers = workers;
  const Report report = run_experiment(config);
  write_report(report, out);
  std::cout << report.summary.dump(2) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Wavelet sieve single-index estimation and Monte Carlo harness"};
  app.require_subcommand(1);

  std::string config_path, data_path, out;
  long long n = 0, seed = -1, replication = 0;
  unsigned workers = 0;

  auto* sim = app.add_subcommand("simulate", "Draw a dataset from the configured model");
  sim->add_option("--config", config_path, "JSON configuration")->required();
  sim->add_option("--out", out, "Output CSV (x1,...,xp,y)")->required();
  sim->add_option("--n", n, "Sample size (default: first n_grid entry)");
  sim->add_option("--seed", seed, "Seed (default: configuration seed)");
  sim->add_option("--replication", replication, "Replication stream index");

  auto* fit_cmd = app.add_subcommand("fit", "Fit the single-index estimator to a CSV dataset");
  fit_cmd->add_option("--config", config_path, "JSON configuration")->required();
  fit_cmd->add_option("--data", data_path, "Input CSV")->required();
  fit_cmd->add_option("--out", out, "Output JSON (default: stdout)");

  auto* pur = app.add_subcommand("pursuit", "Fit a projection pursuit model to a CSV dataset");
  pur->add_option("--config", config_path, "JSON configuration")->required();
  pur->add_option("--data", data_path, "Input CSV")->required();
  pur->add_option("--out", out, "Output JSON (default: stdout)");

  auto* exp = app.add_subcommand("experiment", "Run a Monte Carlo experiment");
  exp->add_option("--config", config_path, "JSON configuration")->required();
  exp->add_option("--out", out, "Output directory (default: output_dir)");
  exp->add_option("--workers", workers, "Worker threads (default: configuration)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*sim) return cmd_simulate(config_path, out, n, seed, replication);
    if (*fit_cmd) return cmd_fit(config_path, data_path, out);
    if (*pur) return cmd_pursuit(config_path, data_path, out);
    if (*exp) return cmd_experiment(config_path, out, workers);
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return 2;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

#pragma once

// Monte Carlo experiment runner and JSON configuration.

#include "wsim/inference.hpp"
#include "wsim/model.hpp"
#include "wsim/pursuit.hpp"

#include <json.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace wsim {

enum class Experiment { wilks_calibration, root_n_rate, fisher_residual, coverage, pursuit_recovery, single_fit };

Experiment parse_experiment(const std::string& name);
const char* to_string(Experiment experiment);

struct PursuitSettings {
  int max_components = 2;
  double var_threshold = 0.01;
  double success_degrees = 10.0;
};

struct ExperimentConfig {
  Experiment experiment = Experiment::single_fit;
  ModelSpec model;  // components empty when the config has no model section
  EstimatorConfig estimator;
  std::shared_ptr<const Basis> basis;  // sieve of the estimator on [-s_X, s_X]
  std::vector<Index> n_grid;
  int replications = 1;
  std::uint64_t seed = 1;
  unsigned workers = 0;  // 0: one per hardware thread
  std::string output_dir;
  double level = 0.9;
  DfMode df = DfMode::angles;
  PursuitSettings pursuit;
};

/// Parses a configuration document; ConfigError on any invalid field.
///
/// model.components[].link is "sin", "cubic", "logistic", {"project": name}
/// (least squares image of a named link in the sieve) or {"eta": [...]}.
/// Directions are normalised and must have a positive first coordinate.
ExperimentConfig parse_config(const nlohmann::json& doc);
ExperimentConfig load_config(const std::string& path);

/// Checks what run_experiment needs beyond parsing: a model, n_grid and
/// replications.
void validate_for_experiment(const ExperimentConfig& config);

/// One replication. Columns of replications.csv, in order.
struct ReplicationRow {
  Index n = 0;
  int replication = 0;
  std::uint64_t seed = 0;
  std::string status = "ok";  // ok | stalled | error
  std::string message;
  int iterations = 0;
  bool converged = false;
  double angle_error = 0.0;  // radians; largest matched error for pursuit
  double loglik = 0.0;
  double sigma2 = 0.0;
  double wilks = 0.0;         // 2 (profile L(hat) - profile L(theta*))
  double wilks_scaled = 0.0;  // wilks / sigma2
  int covered = -1;           // 1 when theta* lies in the confidence set
  double fisher_residual = 0.0;
  double score_norm = 0.0;
  double rho = 0.0;
  std::vector<double> component_errors;  // pursuit: per true component, radians
  std::vector<double> stage_variances;   // pursuit: residual mean squares
  double seconds = 0.0;                  // not written to the CSV
};

struct Report {
  Experiment experiment = Experiment::single_fit;
  std::vector<ReplicationRow> rows;  // ordered by (n_grid position, replication)
  nlohmann::json summary;
  double total_seconds = 0.0;
};

/// Runs every (n, replication) pair; failures become rows with status
/// "error" and never abort the batch.
Report run_experiment(const ExperimentConfig& config);

/// Writes replications.csv, summary.csv, summary.json and runtimes.json.
void write_report(const Report& report, const std::string& dir);

/// Fixed header of replications.csv.
const std::vector<std::string>& replication_columns();

}  // namespace wsim

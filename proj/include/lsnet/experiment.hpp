#pragma once

#include "lsnet/config.hpp"
#include "lsnet/fit.hpp"
#include "lsnet/init.hpp"
#include "lsnet/io.hpp"
#include "lsnet/simulate.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace lsnet::experiment {

enum class Kind { scaling, init_comparison, kernel_misspec, lscd_eval, single_fit };

std::string to_string(Kind kind);
Kind parse_kind(const std::string& name);

struct ExperimentSpec {
  Kind kind = Kind::scaling;
  std::vector<Index> n_grid;
  std::vector<Index> d_grid;
  /// Empty: fit with k = d.
  std::vector<Index> k_fit_grid;
  std::vector<simulate::KernelKind> kernels;
  std::vector<init::Method> inits;
  int replicates = 10;
  std::uint64_t seed = 1;
  int threads = 1;
  std::filesystem::path out_dir = "out";
  bool trace_errors = false;

  simulate::KernelSpec kernel_params;
  simulate::ModelOptions model;
  fit::FitConfig fit;
  init::InitConfig init;
  int clusters = 2;
  int restarts = 20;

  // single_fit input
  std::string edges_path;
  std::string covariate_path;
  io::CovariateKind covariate_kind = io::CovariateKind::node_attribute_indicator;

  /// Reads the experiment.*, grid.*, fit.*, init.*, simulate.* and lscd.* keys
  /// and fills per-kind default grids for anything left unset.
  static ExperimentSpec from_config(const config::Config& cfg);
  void validate() const;
};

fit::FitConfig fit_config_from(const config::Config& cfg);
init::InitConfig init_config_from(const config::Config& cfg);
simulate::KernelSpec kernel_params_from(const config::Config& cfg);
simulate::ModelOptions model_options_from(const config::Config& cfg);

struct Row {
  int cell = 0;
  int replicate = 0;
  Index n = 0;
  Index d = 0;
  Index k_fit = 0;
  std::string kernel;
  std::string init;
  std::uint64_t model_seed = 0;
  std::uint64_t sample_seed = 0;
  bool ok = false;
  std::string error;
  std::optional<double> rel_err_G;
  std::optional<double> rel_err_Theta;
  std::optional<double> e_t;
  std::optional<double> misclustering;
  std::optional<double> objective_init;
  std::optional<double> objective_final;
  int iterations = 0;
  std::optional<double> beta_hat;
  double wall_time_s = 0.0;
};

struct Outcome {
  std::vector<Row> rows;
  nlohmann::json summary;
  bool any_failed = false;
};

/// Runs the grid and writes results.csv, summary.json and timings.csv (plus
/// trace files where requested) into spec.out_dir. results.csv and
/// summary.json depend only on the spec and seeds.
Outcome run_experiment(const ExperimentSpec& spec);

std::string results_csv(const ExperimentSpec& spec, const std::vector<Row>& rows);
nlohmann::json summarize(const ExperimentSpec& spec, const std::vector<Row>& rows);

/// Least-squares slope of log(y) against log(x).
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);
/// Linear-interpolation quantile of unsorted values, q in [0, 1].
double quantile(std::vector<double> values, double q);

}  // namespace lsnet::experiment

#pragma once

#include "lsnet/simulate.hpp"
#include "lsnet/types.hpp"

#include <optional>
#include <string>
#include <vector>

namespace lsnet::fit {

enum class ProjectionMode { practical, theoretical };

std::string to_string(ProjectionMode mode);
ProjectionMode parse_projection_mode(const std::string& name);

struct FitConfig {
  Index k = 2;
  double eta = 0.2;
  int T = 500;
  ProjectionMode projection_mode = ProjectionMode::practical;
  /// Bound constant for the theoretical constraint sets.
  double M1 = 4.0;
  int dykstra_max_iters = 100;
  double dykstra_tol = 1e-10;
  /// Stop when the relative objective change stays below 1e-9 for 10
  /// consecutive iterations. Off by default.
  bool plateau_stop = false;
  /// Record relative errors and e_t per iteration when a truth is supplied.
  bool trace_errors = false;

  void validate() const;
};

struct StepSizes {
  double Z = 0.0;
  double alpha = 0.0;
  double beta = 0.0;
};

/// eta_Z = eta / ||Z0||_op^2, eta_alpha = eta / (2n), eta_beta = eta / (2 ||X||_F^2).
StepSizes step_sizes(const Matrix& Z0, Index n, const CovariateMatrix& X, double eta);

/// Radius used by the theoretical constraint sets: M1/3, or M1/2 without a covariate.
double constraint_bound(double M1, const CovariateMatrix& X);

struct DykstraResult {
  Matrix Z;
  int iterations = 0;
  bool converged = false;
};

/// Projection onto {JZ = Z} intersected with {max_i ||Z_i||^2 <= bound}.
DykstraResult dykstra_project_Z(const Matrix& Z, double row_norm_sq_bound, int max_iters,
                                double tol);

/// Practical mode centers the columns; theoretical mode runs Dykstra with the
/// squared row norm capped at `bound`.
Matrix project_Z(const Matrix& Z, ProjectionMode mode, double bound, int max_iters = 100,
                 double tol = 1e-10);
Vector project_alpha(const Vector& alpha, double bound);
double project_beta(double beta, const CovariateMatrix& X, double bound);

struct FitTrace {
  std::vector<double> objective;
  // Filled only when a truth is supplied with trace_errors set.
  std::vector<double> rel_err_G;
  std::vector<double> rel_err_Theta;
  std::vector<double> e_t;
  int iterations = 0;
  StepSizes steps;
};

struct FitResult {
  ParameterSet params;
  FitTrace trace;
};

/// Projected gradient descent on the non-convex objective, exactly cfg.T
/// iterations unless plateau_stop is set.
FitResult fit(const AdjacencyMatrix& A, const CovariateMatrix& X, const ParameterSet& init,
              const FitConfig& cfg, const simulate::GroundTruth* truth = nullptr);

}  // namespace lsnet::fit

#pragma once

#include "lsnet/types.hpp"

namespace lsnet::model {

/// Theta_ij = alpha_i + alpha_j + beta X_ij + <Z_i, Z_j>, diagonal included.
ThetaMatrix assemble_theta(const ParameterSet& params, const CovariateMatrix& X);

double sigmoid(double x);
/// Throws std::domain_error unless p is strictly inside (0, 1).
double logit(double p);
Matrix sigmoid(const ThetaMatrix& theta);

/// log(1 + e^x) without overflow.
double softplus(double x);

/// h(Theta) = -sum_{i,j} { A_ij Theta_ij + log(1 - sigma(Theta_ij)) } over all
/// pairs including the diagonal.
double neg_log_likelihood(const AdjacencyMatrix& A, const ThetaMatrix& theta);

/// Objective value and residual A - sigma(Theta) from a single pass over Theta.
struct Evaluation {
  double objective = 0.0;
  Matrix residual;
};
Evaluation evaluate(const AdjacencyMatrix& A, const ThetaMatrix& theta);

struct Gradients {
  Matrix Z;
  Vector alpha;
  double beta = 0.0;
  /// False when the covariate is absent; beta is then reported as 0.
  bool beta_active = false;
};

/// Gradients of neg_log_likelihood(A, assemble_theta(params, X)):
/// dZ = -2 R Z, dalpha = -2 R 1, dbeta = -<R, X> with R = A - sigma(Theta).
Gradients gradients(const AdjacencyMatrix& A, const CovariateMatrix& X,
                    const ParameterSet& params);

/// Objective and gradients from one pass over the lower triangle of Theta,
/// without materializing any n x n matrix. `residual_Z` is (A - sigma(Theta)) Z.
struct FusedEvaluation {
  double objective = 0.0;
  Matrix residual_Z;
  Vector residual_row_sums;
  double residual_dot_X = 0.0;
};
FusedEvaluation evaluate_fused(const AdjacencyMatrix& A, const CovariateMatrix& X,
                               const ParameterSet& params);

/// Same as above from an already computed residual.
Gradients gradients_from_residual(const Matrix& residual, const CovariateMatrix& X,
                                  const ParameterSet& params);

}  // namespace lsnet::model

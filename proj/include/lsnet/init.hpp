#pragma once

#include "lsnet/fit.hpp"
#include "lsnet/linalg.hpp"
#include "lsnet/types.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace lsnet::init {

enum class Method { lifted_pgd, usvt, random };

std::string to_string(Method method);
Method parse_method(const std::string& name);

struct LiftedConfig {
  /// Nuclear-norm weight; estimated as 2 sqrt(n p_hat) when unset.
  std::optional<double> lambda;
  /// Proximal weight; lambda / n when unset.
  std::optional<double> gamma;
  double eta = 0.2;
  int T = 10;
  double M1 = 4.0;
  fit::ProjectionMode projection_mode = fit::ProjectionMode::practical;
  int dykstra_max_iters = 100;
  double dykstra_tol = 1e-10;
};

struct UsvtConfig {
  /// Singular value threshold; sqrt(n p_hat) when unset.
  std::optional<double> tau;
  double M1 = 4.0;
};

struct RandomConfig {
  double scale = 1.0;
  std::uint64_t seed = 0;
};

struct InitConfig {
  Method method = Method::usvt;
  LiftedConfig lifted;
  UsvtConfig usvt;
  RandomConfig random;
};

/// Per-step Frobenius norms recorded by the lifted-space iteration.
struct LiftedStep {
  double G_norm = 0.0;        // ||G^{t+1}||_F
  double G_tilde_norm = 0.0;  // ||G~^{t+1}||_F
  double prev_G_norm = 0.0;   // ||G^t||_F
  double residual_norm = 0.0; // ||A - sigma(Theta^t)||_F
};

struct LiftedResult {
  ParameterSet params;
  Matrix G;
  linalg::SymmetricEigen eigen;  // of G^T, descending
  double lambda = 0.0;
  double gamma = 0.0;
  std::vector<LiftedStep> steps;
  bool symmetrized = false;

  /// Same alpha and beta with Z re-extracted at another latent dimension.
  ParameterSet params_for(Index k) const;
};

/// Proximal projected gradient descent on (G, alpha, beta) from zero, followed
/// by a rank-k factorization of G^T.
LiftedResult lifted_pgd(const AdjacencyMatrix& A, const CovariateMatrix& X, Index k,
                        const LiftedConfig& cfg);
ParameterSet init_lifted_pgd(const AdjacencyMatrix& A, const CovariateMatrix& X, Index k,
                             const LiftedConfig& cfg);

/// Projection of G onto {PSD, JG = G, max |G_ij| <= box}. Without a box the
/// closed form P_S+(J G J) is used; with one, Dykstra alternates it with the clamp.
Matrix project_G(const Matrix& G_tilde, std::optional<double> box, int max_iters, double tol);

/// Degree and covariate coefficients minimizing
/// ||Theta - (alpha 1^T + 1 alpha^T + beta X)||_F^2.
struct DegreeFit {
  Vector alpha;
  double beta = 0.0;
};
DegreeFit least_squares_degree(const Matrix& theta, const CovariateMatrix& X);

/// Everything USVT produces before the rank-k truncation.
struct UsvtDecomposition {
  Vector alpha;
  double beta = 0.0;
  double tau = 0.0;
  Index kept_components = 0;
  Matrix theta_hat;
  linalg::SymmetricEigen residual_eigen;  // eigenpairs of J(Theta_hat - ...)J

  Matrix G_hat() const { return linalg::psd_from_eigen(residual_eigen); }
  ParameterSet params(Index k) const;
};

UsvtDecomposition usvt_decompose(const AdjacencyMatrix& A, const CovariateMatrix& X,
                                 const UsvtConfig& cfg);
ParameterSet init_usvt(const AdjacencyMatrix& A, const CovariateMatrix& X, Index k,
                       const UsvtConfig& cfg);

/// Z ~ N(0, scale^2) entrywise, then centered; alpha = 0, beta = 0.
ParameterSet init_random(Index n, Index k, double scale, std::uint64_t seed);

ParameterSet initialize(const AdjacencyMatrix& A, const CovariateMatrix& X, Index k,
                        const InitConfig& cfg);

}  // namespace lsnet::init

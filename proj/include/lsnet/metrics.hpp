#pragma once

#include "lsnet/simulate.hpp"
#include "lsnet/types.hpp"

#include <optional>
#include <vector>

namespace lsnet::metrics {

struct Procrustes {
  double dist = 0.0;
  Matrix R;  // k x k orthogonal, reflections allowed
};

/// min over orthogonal R of ||Z1 - Z2 R||_F.
Procrustes procrustes_dist(const Matrix& Z1, const Matrix& Z2);

/// Reference factor for e_t: Z* and its squared operator norm, computed once.
struct StarFactor {
  Matrix Z;
  double op_norm_sq = 0.0;
};
StarFactor make_star_factor(const simulate::GroundTruth& truth, Index k);

/// ||Z*||_op^2 dist(Z_t, Z*)^2 + 2n ||alpha_t - alpha*||^2 + (beta_t - beta*)^2 ||X||_F^2
double et_metric(const Matrix& Zt, const Vector& alpha_t, double beta_t,
                 const simulate::GroundTruth& truth, const StarFactor& star);
double et_metric(const Matrix& Zt, const Vector& alpha_t, double beta_t,
                 const simulate::GroundTruth& truth);

struct ErrorReport {
  double rel_err_G = 0.0;
  double rel_err_Theta = 0.0;
  std::optional<double> e_t;
  std::optional<double> dist_Z;
};

/// ||ZZ^T - G*||_F^2 / ||G*||_F^2 and the same for Theta.
ErrorReport relative_errors(const ParameterSet& fit, const simulate::GroundTruth& truth);
ErrorReport relative_errors(const ParameterSet& fit, const simulate::GroundTruth& truth,
                            const StarFactor& star);

/// -logit(sum_ij A_ij / n^2).
double estimate_M2(const AdjacencyMatrix& A);

enum class LambdaRule { empirical, theory };

/// Empirical rule 2 sqrt(n p_hat); theory rule C0 sqrt(max{n e^{-M2}, log n})
/// with M2 estimated from A unless supplied.
double estimate_lambda(const AdjacencyMatrix& A, LambdaRule rule = LambdaRule::empirical,
                       double C0 = 1.0, std::optional<double> M2_hat = std::nullopt);

/// Fraction of misassigned nodes under the best matching of predicted classes
/// to true classes. Brute force over permutations, at most 8 classes.
double misclustering_rate(const std::vector<int>& predicted, const std::vector<int>& truth);

}  // namespace lsnet::metrics

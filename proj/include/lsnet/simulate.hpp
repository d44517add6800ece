#pragma once

#include "lsnet/types.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace lsnet::simulate {

enum class KernelKind { inner_product, distance, gaussian };

struct KernelSpec {
  KernelKind kind = KernelKind::inner_product;
  double gaussian_scale = 4.0;         // c
  double gaussian_bandwidth_sq = 9.0;  // s^2

  /// l(x, y) for the distance and gaussian kernels.
  double operator()(const Eigen::Ref<const Eigen::RowVectorXd>& x,
                    const Eigen::Ref<const Eigen::RowVectorXd>& y) const;
};

std::string to_string(KernelKind kind);
KernelKind parse_kernel(const std::string& name);

struct ModelOptions {
  /// Truncate the N(0,1) draw to [-2, 2] and then shift by the center
  /// (default), or shift first and truncate the shifted variable.
  bool truncate_after_shift = false;
  /// Generate the covariate matrix; when false X is absent and beta* = 0.
  bool with_covariate = true;
  /// When set, the two random centers are moved apart (or together) along
  /// their difference so that ||mu1 - mu2|| equals this value.
  std::optional<double> center_distance;
};

struct GroundTruth {
  ParameterSet params;  // Z* is only filled for the inner-product kernel
  Matrix G_star;
  Matrix theta_star;
  Matrix P;  // edge probabilities, zero diagonal
  CovariateMatrix X;
  KernelSpec kernel;
  Index latent_dim = 0;
  std::uint64_t seed = 0;
  /// Raw latent coordinates before centering, n x d.
  Matrix positions;
  /// max_i ||Z*_i||^2 for the inner-product kernel, max_i G*_ii otherwise.
  double max_row_norm_sq = 0.0;
  /// max_ij |Theta*_ij|, a natural value for the bound constant M1.
  double max_abs_theta = 0.0;

  Index n() const { return G_star.rows(); }
  /// Community membership used by the generator (first floor(n/2) nodes are 0).
  std::vector<int> community_labels() const;
};

/// Ground truth following the two-center simulation protocol.
GroundTruth generate_model(Index n, Index d, const KernelSpec& kernel, std::uint64_t seed,
                           const ModelOptions& options = {});

/// L_ij = l(z_i, z_j) for the rows of `positions`.
Matrix kernel_matrix(const Matrix& positions, const KernelSpec& kernel);

/// Rebuild Theta*, P and the bookkeeping fields from params, G* and X.
void finalize_truth(GroundTruth& truth);

/// Factor of G* used as Z* in the k-dimensional error metrics: Z* itself for
/// inner-product truths when k matches, top-k eigen factor otherwise.
Matrix star_factor(const GroundTruth& truth, Index k);

AdjacencyMatrix sample_adjacency(const GroundTruth& truth, std::uint64_t seed);

/// Upper-triangle Bernoulli draws, mirrored; diagonal ignored.
AdjacencyMatrix sample_adjacency(const Matrix& P, std::uint64_t seed);

/// X_ij = 1 iff labels match and i != j.
template <typename Label>
CovariateMatrix indicator_covariate(const std::vector<Label>& labels) {
  const Index n = static_cast<Index>(labels.size());
  if (n < 2) throw std::invalid_argument("indicator_covariate: need at least 2 nodes");
  Matrix x = Matrix::Zero(n, n);
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < n; ++i)
      if (i != j && labels[i] == labels[j]) x(i, j) = 1.0;
  return CovariateMatrix::from_dense(std::move(x));
}

}  // namespace lsnet::simulate

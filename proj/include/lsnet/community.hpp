#pragma once

#include "lsnet/fit.hpp"
#include "lsnet/init.hpp"
#include "lsnet/types.hpp"

#include <cstdint>
#include <vector>

namespace lsnet::community {

struct KMeansResult {
  std::vector<int> labels;
  Matrix centers;
  double wcss = 0.0;
  int restarts_run = 0;
};

/// Lloyd's algorithm with k-means++ seeding; best of `restarts` runs by
/// within-cluster sum of squares, ties broken by restart index.
KMeansResult kmeans(const Matrix& points, int num_clusters, int restarts, std::uint64_t seed,
                    int max_iters = 300);

double wcss(const Matrix& points, const std::vector<int>& labels, int num_clusters);

struct LscdConfig {
  int num_clusters = 2;
  /// Latent dimension of the fit; defaults to num_clusters when <= 0.
  Index k_fit = 0;
  init::InitConfig init;
  fit::FitConfig fit;
  int restarts = 20;
  std::uint64_t seed = 0;
};

struct LscdResult {
  std::vector<int> labels;
  ParameterSet params;
  fit::FitTrace trace;
  double wcss = 0.0;
};

/// Fit the inner-product model, then cluster the rows of the fitted Z.
LscdResult lscd(const AdjacencyMatrix& A, const CovariateMatrix& X, const LscdConfig& cfg);

}  // namespace lsnet::community

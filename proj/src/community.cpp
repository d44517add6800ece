#include "lsnet/community.hpp"

#include "lsnet/rng.hpp"

#include <limits>
#include <stdexcept>

namespace lsnet::community {

double wcss(const Matrix& points, const std::vector<int>& labels, int num_clusters) {
  const Index d = points.cols();
  Matrix sums = Matrix::Zero(num_clusters, d);
  Vector counts = Vector::Zero(num_clusters);
  for (Index i = 0; i < points.rows(); ++i) {
    sums.row(labels[static_cast<std::size_t>(i)]) += points.row(i);
    counts(labels[static_cast<std::size_t>(i)]) += 1.0;
  }
  double total = 0.0;
  for (Index i = 0; i < points.rows(); ++i) {
    const int c = labels[static_cast<std::size_t>(i)];
    total += (points.row(i) - sums.row(c) / counts(c)).squaredNorm();
  }
  return total;
}

namespace {

Matrix seed_plus_plus(const Matrix& points, int num_clusters, Rng& rng) {
  const Index n = points.rows();
  Matrix centers(num_clusters, points.cols());
  centers.row(0) = points.row(static_cast<Index>(rng.below(static_cast<std::uint64_t>(n))));
  Vector d2 = (points.rowwise() - centers.row(0)).rowwise().squaredNorm();
  for (int c = 1; c < num_clusters; ++c) {
    const double total = d2.sum();
    Index pick = 0;
    if (total > 0.0) {
      double u = rng.uniform() * total;
      pick = n - 1;
      for (Index i = 0; i < n; ++i) {
        u -= d2(i);
        if (u < 0.0) {
          pick = i;
          break;
        }
      }
    } else {
      pick = static_cast<Index>(rng.below(static_cast<std::uint64_t>(n)));
    }
    centers.row(c) = points.row(pick);
    d2 = d2.cwiseMin((points.rowwise() - centers.row(c)).rowwise().squaredNorm());
  }
  return centers;
}

struct Run {
  std::vector<int> labels;
  Matrix centers;
  double wcss = 0.0;
};

Run lloyd(const Matrix& points, Matrix centers, int max_iters) {
  const Index n = points.rows();
  const int K = static_cast<int>(centers.rows());
  Run run;
  run.labels.assign(static_cast<std::size_t>(n), -1);
  Vector dist(n);
  for (int it = 0; it < max_iters; ++it) {
    bool changed = false;
    for (Index i = 0; i < n; ++i) {
      int best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (int c = 0; c < K; ++c) {
        const double d = (points.row(i) - centers.row(c)).squaredNorm();
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      dist(i) = best_d;
      if (run.labels[static_cast<std::size_t>(i)] != best) {
        run.labels[static_cast<std::size_t>(i)] = best;
        changed = true;
      }
    }
    Matrix sums = Matrix::Zero(K, points.cols());
    Vector counts = Vector::Zero(K);
    for (Index i = 0; i < n; ++i) {
      sums.row(run.labels[static_cast<std::size_t>(i)]) += points.row(i);
      counts(run.labels[static_cast<std::size_t>(i)]) += 1.0;
    }
    for (int c = 0; c < K; ++c) {
      if (counts(c) > 0.0) {
        centers.row(c) = sums.row(c) / counts(c);
        continue;
      }
      // Empty cluster: move it to the point farthest from its center.
      Index far = 0;
      dist.maxCoeff(&far);
      centers.row(c) = points.row(far);
      run.labels[static_cast<std::size_t>(far)] = c;
      dist(far) = 0.0;
      changed = true;
    }
    if (!changed) break;
  }
  run.centers = std::move(centers);
  run.wcss = wcss(points, run.labels, K);
  return run;
}

}  // namespace

KMeansResult kmeans(const Matrix& points, int num_clusters, int restarts, std::uint64_t seed,
                    int max_iters) {
  if (num_clusters < 2) throw std::invalid_argument("kmeans: need at least 2 clusters");
  if (points.rows() < num_clusters) throw std::invalid_argument("kmeans: fewer points than clusters");
  if (restarts < 1) throw std::invalid_argument("kmeans: restarts must be positive");

  KMeansResult best;
  best.wcss = std::numeric_limits<double>::infinity();
  for (int r = 0; r < restarts; ++r) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(Stream::kmeans),
                        static_cast<std::uint64_t>(r)));
    Run run = lloyd(points, seed_plus_plus(points, num_clusters, rng), max_iters);
    if (run.wcss < best.wcss) {
      best.labels = std::move(run.labels);
      best.centers = std::move(run.centers);
      best.wcss = run.wcss;
    }
  }
  best.restarts_run = restarts;
  return best;
}

LscdResult lscd(const AdjacencyMatrix& A, const CovariateMatrix& X, const LscdConfig& cfg) {
  if (cfg.num_clusters < 2) throw std::invalid_argument("lscd: need at least 2 clusters");
  fit::FitConfig fcfg = cfg.fit;
  fcfg.k = cfg.k_fit > 0 ? cfg.k_fit : cfg.num_clusters;

  const ParameterSet start = init::initialize(A, X, fcfg.k, cfg.init);
  fit::FitResult fitted = fit::fit(A, X, start, fcfg);
  KMeansResult km = kmeans(fitted.params.Z, cfg.num_clusters, cfg.restarts, cfg.seed);

  LscdResult out;
  out.labels = std::move(km.labels);
  out.wcss = km.wcss;
  out.params = std::move(fitted.params);
  out.trace = std::move(fitted.trace);
  return out;
}

}  // namespace lsnet::community

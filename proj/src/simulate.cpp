#include "lsnet/simulate.hpp"

#include "lsnet/linalg.hpp"
#include "lsnet/model.hpp"
#include "lsnet/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace lsnet::simulate {

double KernelSpec::operator()(const Eigen::Ref<const Eigen::RowVectorXd>& x,
                              const Eigen::Ref<const Eigen::RowVectorXd>& y) const {
  switch (kind) {
    case KernelKind::distance:
      return -(x - y).norm();
    case KernelKind::gaussian:
      return gaussian_scale * std::exp(-(x - y).squaredNorm() / gaussian_bandwidth_sq);
    case KernelKind::inner_product:
      return x.dot(y);
  }
  return 0.0;
}

std::string to_string(KernelKind kind) {
  switch (kind) {
    case KernelKind::inner_product: return "inner_product";
    case KernelKind::distance: return "distance";
    case KernelKind::gaussian: return "gaussian";
  }
  return "unknown";
}

KernelKind parse_kernel(const std::string& name) {
  if (name == "inner_product") return KernelKind::inner_product;
  if (name == "distance") return KernelKind::distance;
  if (name == "gaussian") return KernelKind::gaussian;
  throw std::invalid_argument("unknown kernel '" + name + "'");
}

std::vector<int> GroundTruth::community_labels() const {
  const Index total = n();
  std::vector<int> labels(static_cast<std::size_t>(total), 1);
  for (Index i = 0; i < total / 2; ++i) labels[static_cast<std::size_t>(i)] = 0;
  return labels;
}

Matrix kernel_matrix(const Matrix& positions, const KernelSpec& kernel) {
  const Index n = positions.rows();
  Matrix L(n, n);
  for (Index j = 0; j < n; ++j) {
    for (Index i = j; i < n; ++i) {
      const double v = kernel(positions.row(i), positions.row(j));
      L(i, j) = v;
      L(j, i) = v;
    }
  }
  return L;
}

void finalize_truth(GroundTruth& truth) {
  const Index n = truth.G_star.rows();
  Matrix& theta = truth.theta_star;
  theta = truth.G_star;
  const Vector& a = truth.params.alpha;
  const bool has_x = !truth.X.absent();
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < n; ++i) {
      theta(i, j) += a(i) + a(j);
      if (has_x) theta(i, j) += truth.params.beta * truth.X.dense()(i, j);
    }
  truth.P = model::sigmoid(ThetaMatrix{theta});
  truth.P.diagonal().setZero();
  truth.max_abs_theta = theta.cwiseAbs().maxCoeff();
  if (truth.params.Z.size() > 0) {
    truth.max_row_norm_sq = truth.params.Z.rowwise().squaredNorm().maxCoeff();
  } else {
    truth.max_row_norm_sq = truth.G_star.diagonal().maxCoeff();
  }
}

GroundTruth generate_model(Index n, Index d, const KernelSpec& kernel, std::uint64_t seed,
                           const ModelOptions& options) {
  if (n < 4) throw std::invalid_argument("generate_model: n must be at least 4");
  if (d < 1) throw std::invalid_argument("generate_model: latent dimension must be >= 1");

  GroundTruth truth;
  truth.kernel = kernel;
  truth.latent_dim = d;
  truth.seed = seed;

  // Degree heterogeneity: -a_i / sum_j a_j, a_i ~ U[1, 3].
  {
    Rng rng(seed, Stream::degree);
    Vector a(n);
    for (Index i = 0; i < n; ++i) a(i) = rng.uniform(1.0, 3.0);
    truth.params.alpha = -a / a.sum();
  }

  // Two centers, first floor(n/2) nodes around the first.
  {
    Rng rng(seed, Stream::latent);
    Eigen::RowVectorXd mu1(d), mu2(d);
    for (Index c = 0; c < d; ++c) mu1(c) = rng.uniform(-1.0, 1.0);
    for (Index c = 0; c < d; ++c) mu2(c) = rng.uniform(-1.0, 1.0);
    if (options.center_distance) {
      const Eigen::RowVectorXd mid = 0.5 * (mu1 + mu2);
      Eigen::RowVectorXd dir = mu2 - mu1;
      const double len = dir.norm();
      if (len > 0.0) dir /= len; else dir.setUnit(0);
      mu1 = mid - 0.5 * *options.center_distance * dir;
      mu2 = mid + 0.5 * *options.center_distance * dir;
    }
    Matrix z(n, d);
    const Index half = n / 2;
    for (Index c = 0; c < d; ++c) {
      for (Index i = 0; i < n; ++i) {
        const double center = i < half ? mu1(c) : mu2(c);
        z(i, c) = options.truncate_after_shift
                      ? center + rng.truncated_normal(-2.0 - center, 2.0 - center)
                      : center + rng.truncated_normal(-2.0, 2.0);
      }
    }
    truth.positions = z;
  }

  if (kernel.kind == KernelKind::inner_product) {
    Matrix zs = linalg::center_columns(truth.positions);
    // ||Z Z^T||_F = ||Z^T Z||_F
    const double gram_norm = (zs.transpose() * zs).norm();
    if (gram_norm > 0.0) zs *= std::sqrt(static_cast<double>(n) / gram_norm);
    truth.G_star = Matrix::Zero(n, n);
    truth.G_star.selfadjointView<Eigen::Lower>().rankUpdate(zs);
    truth.G_star.triangularView<Eigen::StrictlyUpper>() = truth.G_star.transpose();
    truth.params.Z = std::move(zs);
  } else {
    truth.G_star = linalg::double_center(kernel_matrix(truth.positions, kernel));
    truth.G_star = 0.5 * (truth.G_star + truth.G_star.transpose());
    truth.params.Z = Matrix(n, 0);
  }

  if (options.with_covariate) {
    Rng rng(seed, Stream::covariate);
    Matrix x = Matrix::Zero(n, n);
    for (Index j = 1; j < n; ++j)
      for (Index i = 0; i < j; ++i) {
        const double v = std::min(std::abs(rng.normal(1.0, 1.0)), 2.0);
        x(i, j) = v;
        x(j, i) = v;
      }
    x *= static_cast<double>(n) / x.norm();
    truth.X = CovariateMatrix::from_dense(std::move(x));
    truth.params.beta = -std::sqrt(2.0);
  } else {
    truth.X = CovariateMatrix::none(n);
    truth.params.beta = 0.0;
  }

  finalize_truth(truth);
  return truth;
}

Matrix star_factor(const GroundTruth& truth, Index k) {
  if (truth.kernel.kind == KernelKind::inner_product && truth.params.Z.cols() == k) {
    return truth.params.Z;
  }
  return linalg::top_k_factor(linalg::eigh_descending(truth.G_star), k);
}

AdjacencyMatrix sample_adjacency(const Matrix& P, std::uint64_t seed) {
  const Index n = P.rows();
  Rng rng(seed, Stream::adjacency);
  Matrix a = Matrix::Zero(n, n);
  for (Index j = 1; j < n; ++j)
    for (Index i = 0; i < j; ++i)
      if (rng.bernoulli(P(i, j))) {
        a(i, j) = 1.0;
        a(j, i) = 1.0;
      }
  return AdjacencyMatrix::from_dense(std::move(a));
}

AdjacencyMatrix sample_adjacency(const GroundTruth& truth, std::uint64_t seed) {
  return sample_adjacency(truth.P, seed);
}

}  // namespace lsnet::simulate

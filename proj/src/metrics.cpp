#include "lsnet/metrics.hpp"

#include "lsnet/linalg.hpp"
#include "lsnet/model.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <stdexcept>

namespace lsnet::metrics {

Procrustes procrustes_dist(const Matrix& Z1, const Matrix& Z2) {
  if (Z1.rows() != Z2.rows() || Z1.cols() != Z2.cols()) {
    throw DimensionError("procrustes_dist: factor shapes differ");
  }
  const Matrix cross = Z2.transpose() * Z1;
  Eigen::JacobiSVD<Matrix> svd(cross, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Procrustes out;
  out.R = svd.matrixU() * svd.matrixV().transpose();
  out.dist = (Z1 - Z2 * out.R).norm();
  return out;
}

StarFactor make_star_factor(const simulate::GroundTruth& truth, Index k) {
  StarFactor s;
  s.Z = simulate::star_factor(truth, k);
  const double op = linalg::operator_norm(s.Z);
  s.op_norm_sq = op * op;
  return s;
}

double et_metric(const Matrix& Zt, const Vector& alpha_t, double beta_t,
                 const simulate::GroundTruth& truth, const StarFactor& star) {
  const double n = static_cast<double>(truth.n());
  const double d = procrustes_dist(Zt, star.Z).dist;
  const double da = (alpha_t - truth.params.alpha).squaredNorm();
  const double db = beta_t - truth.params.beta;
  return star.op_norm_sq * d * d + 2.0 * n * da + db * db * truth.X.frobenius_sq();
}

double et_metric(const Matrix& Zt, const Vector& alpha_t, double beta_t,
                 const simulate::GroundTruth& truth) {
  return et_metric(Zt, alpha_t, beta_t, truth, make_star_factor(truth, Zt.cols()));
}

namespace {

ErrorReport base_errors(const ParameterSet& fit, const simulate::GroundTruth& truth) {
  require_same_size(truth.n(), fit.n(), "fit vs truth size");
  const double g_norm = truth.G_star.squaredNorm();
  const double t_norm = truth.theta_star.squaredNorm();
  if (g_norm == 0.0 || t_norm == 0.0) {
    throw std::domain_error("relative_errors: truth has zero norm");
  }
  const Index n = fit.n();
  Matrix G = Matrix::Zero(n, n);
  G.selfadjointView<Eigen::Lower>().rankUpdate(fit.Z);
  G.triangularView<Eigen::StrictlyUpper>() = G.transpose();

  ErrorReport r;
  r.rel_err_G = (G - truth.G_star).squaredNorm() / g_norm;
  const ThetaMatrix theta = model::assemble_theta(fit, truth.X);
  r.rel_err_Theta = (theta.entries - truth.theta_star).squaredNorm() / t_norm;
  return r;
}

}  // namespace

ErrorReport relative_errors(const ParameterSet& fit, const simulate::GroundTruth& truth,
                            const StarFactor& star) {
  ErrorReport r = base_errors(fit, truth);
  r.dist_Z = procrustes_dist(fit.Z, star.Z).dist;
  r.e_t = et_metric(fit.Z, fit.alpha, fit.beta, truth, star);
  return r;
}

ErrorReport relative_errors(const ParameterSet& fit, const simulate::GroundTruth& truth) {
  return relative_errors(fit, truth, make_star_factor(truth, fit.k()));
}

double estimate_M2(const AdjacencyMatrix& A) {
  const double p = A.density();
  if (!(p > 0.0)) throw std::domain_error("estimate_M2: graph has no edges");
  return -model::logit(p);
}

double estimate_lambda(const AdjacencyMatrix& A, LambdaRule rule, double C0,
                       std::optional<double> M2_hat) {
  const double n = static_cast<double>(A.n());
  const double p = A.density();
  if (!(p > 0.0)) throw std::domain_error("estimate_lambda: graph has no edges");
  if (rule == LambdaRule::empirical) return 2.0 * std::sqrt(n * p);
  const double m2 = M2_hat ? *M2_hat : estimate_M2(A);
  return C0 * std::sqrt(std::max(n * std::exp(-m2), std::log(n)));
}

double misclustering_rate(const std::vector<int>& predicted, const std::vector<int>& truth) {
  if (predicted.size() != truth.size()) {
    throw DimensionError("misclustering_rate: label vectors differ in length");
  }
  if (predicted.empty()) return 0.0;

  auto compress = [](const std::vector<int>& labels, std::vector<int>& out) {
    std::map<int, int> ids;
    out.resize(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) {
      auto it = ids.try_emplace(labels[i], static_cast<int>(ids.size())).first;
      out[i] = it->second;
    }
    return static_cast<int>(ids.size());
  };
  std::vector<int> p, t;
  const int kp = compress(predicted, p);
  const int kt = compress(truth, t);
  const int K = std::max(kp, kt);
  if (K > 8) {
    throw std::invalid_argument(
        "misclustering_rate: more than 8 classes; brute-force matching is capped, "
        "use a Hungarian assignment instead");
  }

  std::vector<std::vector<long>> confusion(K, std::vector<long>(K, 0));
  for (std::size_t i = 0; i < p.size(); ++i) ++confusion[p[i]][t[i]];

  std::vector<int> perm(K);
  std::iota(perm.begin(), perm.end(), 0);
  long best = 0;
  do {
    long hit = 0;
    for (int c = 0; c < K; ++c) hit += confusion[c][perm[c]];
    best = std::max(best, hit);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return 1.0 - static_cast<double>(best) / static_cast<double>(p.size());
}

}  // namespace lsnet::metrics

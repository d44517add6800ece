#include "lsnet/init.hpp"

#include "lsnet/metrics.hpp"
#include "lsnet/model.hpp"
#include "lsnet/rng.hpp"

#include <cmath>
#include <iostream>
#include <stdexcept>

namespace lsnet::init {

std::string to_string(Method method) {
  switch (method) {
    case Method::lifted_pgd: return "lifted_pgd";
    case Method::usvt: return "usvt";
    case Method::random: return "random";
  }
  return "unknown";
}

Method parse_method(const std::string& name) {
  if (name == "lifted_pgd") return Method::lifted_pgd;
  if (name == "usvt") return Method::usvt;
  if (name == "random") return Method::random;
  throw std::invalid_argument("unknown init method '" + name + "'");
}

namespace {

// alpha 1^T + 1 alpha^T + beta X + G
Matrix lifted_theta(const Matrix& G, const Vector& alpha, double beta, const CovariateMatrix& X) {
  const Index n = G.rows();
  Matrix t = G;
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < n; ++i) {
      t(i, j) += alpha(i) + alpha(j);
      if (!X.absent()) t(i, j) += beta * X.dense()(i, j);
    }
  return t;
}

// (n I + 1 1^T)^{-1} v
Vector degree_solve(const Vector& v) {
  const double n = static_cast<double>(v.size());
  return (v.array() - v.sum() / (2.0 * n)).matrix() / n;
}

}  // namespace

Matrix project_G(const Matrix& G_tilde, std::optional<double> box, int max_iters, double tol) {
  auto cone = [](const Matrix& m) {
    return linalg::psd_project(linalg::double_center(0.5 * (m + m.transpose())));
  };
  if (!box) return cone(G_tilde);
  const double b = *box;
  Matrix x = G_tilde;
  Matrix p = Matrix::Zero(x.rows(), x.cols());
  Matrix q = Matrix::Zero(x.rows(), x.cols());
  for (int it = 0; it < max_iters; ++it) {
    const Matrix y = cone(x + p);
    p += x - y;
    Matrix next = (y + q).cwiseMax(-b).cwiseMin(b);
    q += y - next;
    const double change = (next - x).norm();
    x = std::move(next);
    if (change < tol) break;
  }
  return x;
}

LiftedResult lifted_pgd(const AdjacencyMatrix& A, const CovariateMatrix& X, Index k,
                        const LiftedConfig& cfg) {
  const Index n = A.n();
  require_same_size(n, X.n(), "covariate vs adjacency");
  if (k < 1) throw std::invalid_argument("lifted_pgd: k must be at least 1");
  if (cfg.T < 0 || !(cfg.eta >= 0.0)) throw std::invalid_argument("lifted_pgd: invalid T or eta");

  LiftedResult out;
  out.lambda = cfg.lambda ? *cfg.lambda : metrics::estimate_lambda(A);
  out.gamma = cfg.gamma ? *cfg.gamma : out.lambda / static_cast<double>(n);
  const double lambda = out.lambda;
  const double gamma = out.gamma;
  if (lambda < 0.0 || gamma < 0.0) throw std::invalid_argument("lifted_pgd: negative penalty");

  const bool theoretical = cfg.projection_mode == fit::ProjectionMode::theoretical;
  const double bound = fit::constraint_bound(cfg.M1, X);
  const std::optional<double> box = theoretical ? std::optional<double>(bound) : std::nullopt;
  const double x_sq = X.frobenius_sq();
  const double two_n = 2.0 * static_cast<double>(n);

  Matrix G = Matrix::Zero(n, n);
  Vector alpha = Vector::Zero(n);
  double beta = 0.0;

  for (int t = 0; t < cfg.T; ++t) {
    const Matrix theta = lifted_theta(G, alpha, beta, X);
    const Matrix R = A.dense() - model::sigmoid(ThetaMatrix{theta});

    Matrix g_tilde = G + cfg.eta * (R - gamma * G);
    g_tilde.diagonal().array() -= cfg.eta * lambda;
    Vector a_tilde = alpha + cfg.eta * (R.rowwise().sum() / two_n - gamma * alpha);
    double b_tilde = beta;
    if (!X.absent()) {
      b_tilde += cfg.eta * (R.cwiseProduct(X.dense()).sum() / x_sq - gamma * beta);
    }

    LiftedStep step;
    step.prev_G_norm = G.norm();
    step.residual_norm = R.norm();
    step.G_tilde_norm = g_tilde.norm();

    G = project_G(g_tilde, box, cfg.dykstra_max_iters, cfg.dykstra_tol);
    if (theoretical) {
      alpha = fit::project_alpha(a_tilde, bound);
      beta = fit::project_beta(b_tilde, X, bound);
    } else {
      alpha = std::move(a_tilde);
      beta = b_tilde;
    }
    step.G_norm = G.norm();
    out.steps.push_back(step);
  }

  linalg::SymmetricEigen eig = linalg::eigh_descending(G, &out.symmetrized);
  if (out.symmetrized) {
    std::cerr << "warning: lifted_pgd: G drifted from symmetry, symmetrized before "
                 "eigendecomposition\n";
  }
  // G is centered, so this only removes eigensolver round-off
  out.params.Z = linalg::center_columns(linalg::top_k_factor(eig, k));
  out.params.alpha = std::move(alpha);
  out.params.beta = beta;
  out.eigen = std::move(eig);
  out.G = std::move(G);
  return out;
}

ParameterSet LiftedResult::params_for(Index k) const {
  ParameterSet p = params;
  p.Z = linalg::center_columns(linalg::top_k_factor(eigen, k));
  return p;
}

ParameterSet init_lifted_pgd(const AdjacencyMatrix& A, const CovariateMatrix& X, Index k,
                             const LiftedConfig& cfg) {
  return lifted_pgd(A, X, k, cfg).params;
}

DegreeFit least_squares_degree(const Matrix& theta, const CovariateMatrix& X) {
  const Index n = theta.rows();
  require_same_size(n, X.n(), "covariate vs Theta");
  // Normal equations: (nI + 11^T) alpha = Theta 1 - beta X 1 and
  // <Theta, X> - 2 alpha^T X 1 - beta ||X||_F^2 = 0 (Theta symmetrized).
  const Matrix sym = 0.5 * (theta + theta.transpose());
  const Vector c = sym.rowwise().sum();
  DegreeFit out;
  if (X.absent()) {
    out.alpha = degree_solve(c);
    return out;
  }
  const Vector x = X.dense().rowwise().sum();
  const double denom = X.frobenius_sq() - 2.0 * x.dot(degree_solve(x));
  if (!(denom > 1e-12 * X.frobenius_sq())) {
    throw std::domain_error("least_squares_degree: covariate is collinear with degree terms");
  }
  out.beta = (sym.cwiseProduct(X.dense()).sum() - 2.0 * c.dot(degree_solve(x))) / denom;
  out.alpha = degree_solve(c - out.beta * x);
  return out;
}

ParameterSet UsvtDecomposition::params(Index k) const {
  ParameterSet p;
  p.Z = linalg::center_columns(linalg::top_k_factor(residual_eigen, k));
  p.alpha = alpha;
  p.beta = beta;
  return p;
}

UsvtDecomposition usvt_decompose(const AdjacencyMatrix& A, const CovariateMatrix& X,
                                 const UsvtConfig& cfg) {
  const Index n = A.n();
  require_same_size(n, X.n(), "covariate vs adjacency");
  UsvtDecomposition out;
  out.tau = cfg.tau ? *cfg.tau : std::sqrt(static_cast<double>(n) * A.density());
  if (!(out.tau > 0.0)) throw std::invalid_argument("usvt: threshold tau must be positive");

  // A is symmetric, so its singular triplets are (|lambda_i|, u_i, sign(lambda_i) u_i)
  // and sigma_i u_i v_i^T = lambda_i u_i u_i^T.
  const linalg::SymmetricEigen eig = linalg::eigh_descending(A.dense());
  std::vector<Index> keep;
  for (Index i = 0; i < eig.values.size(); ++i)
    if (std::abs(eig.values(i)) >= out.tau) keep.push_back(i);
  out.kept_components = static_cast<Index>(keep.size());

  Matrix p_tilde = Matrix::Zero(n, n);
  if (!keep.empty()) {
    Matrix u(n, static_cast<Index>(keep.size()));
    Vector lam(static_cast<Index>(keep.size()));
    for (std::size_t c = 0; c < keep.size(); ++c) {
      u.col(static_cast<Index>(c)) = eig.vectors.col(keep[c]);
      lam(static_cast<Index>(c)) = eig.values(keep[c]);
    }
    p_tilde.noalias() = u * lam.asDiagonal() * u.transpose();
  }

  const double lo = 0.5 * std::exp(-cfg.M1);
  const double hi = 0.5;
  const Matrix p_hat = p_tilde.cwiseMax(lo).cwiseMin(hi);
  const Eigen::ArrayXXd p_sym = 0.5 * (p_hat + p_hat.transpose()).array();
  out.theta_hat = (p_sym.log() - (1.0 - p_sym).log()).matrix();

  const DegreeFit deg = least_squares_degree(out.theta_hat, X);
  out.alpha = deg.alpha;
  out.beta = deg.beta;

  Matrix resid = out.theta_hat;
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < n; ++i) {
      resid(i, j) -= out.alpha(i) + out.alpha(j);
      if (!X.absent()) resid(i, j) -= out.beta * X.dense()(i, j);
    }
  resid = linalg::double_center(resid);
  out.residual_eigen = linalg::eigh_descending(0.5 * (resid + resid.transpose()));
  return out;
}

ParameterSet init_usvt(const AdjacencyMatrix& A, const CovariateMatrix& X, Index k,
                       const UsvtConfig& cfg) {
  if (k < 1) throw std::invalid_argument("init_usvt: k must be at least 1");
  return usvt_decompose(A, X, cfg).params(k);
}

ParameterSet init_random(Index n, Index k, double scale, std::uint64_t seed) {
  if (k < 1) throw std::invalid_argument("init_random: k must be at least 1");
  Rng rng(seed, Stream::init);
  Matrix z(n, k);
  for (Index c = 0; c < k; ++c)
    for (Index i = 0; i < n; ++i) z(i, c) = scale * rng.normal();
  ParameterSet p;
  p.Z = linalg::center_columns(z);
  p.alpha = Vector::Zero(n);
  p.beta = 0.0;
  return p;
}

ParameterSet initialize(const AdjacencyMatrix& A, const CovariateMatrix& X, Index k,
                        const InitConfig& cfg) {
  switch (cfg.method) {
    case Method::lifted_pgd: return init_lifted_pgd(A, X, k, cfg.lifted);
    case Method::usvt: return init_usvt(A, X, k, cfg.usvt);
    case Method::random: return init_random(A.n(), k, cfg.random.scale, cfg.random.seed);
  }
  throw std::invalid_argument("unknown init method");
}

}  // namespace lsnet::init

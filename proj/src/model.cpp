#include "lsnet/model.hpp"

#include <cmath>
#include <sstream>

namespace lsnet::model {

ThetaMatrix assemble_theta(const ParameterSet& params, const CovariateMatrix& X) {
  params.validate();
  const Index n = params.n();
  require_same_size(n, X.n(), "covariate size vs parameter rows");

  ThetaMatrix theta{Matrix::Zero(n, n)};
  Matrix& t = theta.entries;
  // Lower triangle of ZZ^T, mirrored: exact symmetry regardless of GEMM order.
  t.selfadjointView<Eigen::Lower>().rankUpdate(params.Z);
  t.triangularView<Eigen::StrictlyUpper>() = t.transpose();

  const Vector& a = params.alpha;
  if (X.absent()) {
    for (Index j = 0; j < n; ++j) {
      const double aj = a(j);
      for (Index i = 0; i < n; ++i) t(i, j) += a(i) + aj;
    }
  } else {
    const Matrix& x = X.dense();
    const double b = params.beta;
    for (Index j = 0; j < n; ++j) {
      const double aj = a(j);
      for (Index i = 0; i < n; ++i) t(i, j) += (a(i) + aj) + b * x(i, j);
    }
  }
  return theta;
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double logit(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    std::ostringstream os;
    os << "logit: argument " << p << " outside (0, 1)";
    throw std::domain_error(os.str());
  }
  return std::log(p) - std::log1p(-p);
}

double softplus(double x) {
  return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
}

namespace {

// log1p(e) for arrays via log(1 + e) with a first-order correction; Eigen's
// log1p is not vectorized.
template <typename Derived>
Eigen::ArrayXXd log1p_fast(const Eigen::ArrayBase<Derived>& e) {
  const Eigen::ArrayXXd u = 1.0 + e;
  return u.log() - ((u - 1.0) - e) / u;
}

}  // namespace

Matrix sigmoid(const ThetaMatrix& theta) {
  const auto& x = theta.entries.array();
  const Eigen::ArrayXXd e = (-x.abs()).exp();
  return (x >= 0.0).select(1.0 / (1.0 + e), e / (1.0 + e)).matrix();
}

Evaluation evaluate(const AdjacencyMatrix& A, const ThetaMatrix& theta) {
  require_same_size(A.n(), theta.n(), "Theta size vs adjacency");
  const auto& x = theta.entries.array();
  const auto& a = A.dense().array();
  const Eigen::ArrayXXd e = (-x.abs()).exp();
  Evaluation out;
  out.residual = (a - (x >= 0.0).select(1.0 / (1.0 + e), e / (1.0 + e))).matrix();
  out.objective = (x.max(0.0) + log1p_fast(e) - a * x).sum();
  return out;
}

double neg_log_likelihood(const AdjacencyMatrix& A, const ThetaMatrix& theta) {
  require_same_size(A.n(), theta.n(), "Theta size vs adjacency");
  const auto& x = theta.entries.array();
  const auto& a = A.dense().array();
  return (x.max(0.0) + log1p_fast((-x.abs()).exp()) - a * x).sum();
}

Gradients gradients_from_residual(const Matrix& residual, const CovariateMatrix& X,
                                  const ParameterSet& params) {
  Gradients g;
  g.Z.noalias() = -2.0 * residual * params.Z;
  g.alpha = -2.0 * residual.rowwise().sum();
  g.beta_active = !X.absent();
  g.beta = g.beta_active ? -(residual.cwiseProduct(X.dense())).sum() : 0.0;
  return g;
}

FusedEvaluation evaluate_fused(const AdjacencyMatrix& A, const CovariateMatrix& X,
                               const ParameterSet& params) {
  params.validate();
  const Index n = params.n();
  const Index k = params.k();
  require_same_size(n, A.n(), "parameter rows vs adjacency");
  require_same_size(n, X.n(), "parameter rows vs covariate");

  const Matrix& Z = params.Z;
  const Vector& alpha = params.alpha;
  const Matrix& a = A.dense();
  const bool has_x = !X.absent();

  FusedEvaluation out;
  out.residual_Z = Matrix::Zero(n, k);
  out.residual_row_sums = Vector::Zero(n);
  double objective = 0.0;
  double x_dot = 0.0;

  Eigen::ArrayXd theta(n), e(n), u(n), r(n), terms(n);
  for (Index j = 0; j < n; ++j) {
    // Rows j..n-1 of column j; the diagonal entry is the first element.
    const Index m = n - j;
    auto th = theta.head(m);
    th = (Z.bottomRows(m) * Z.row(j).transpose()).array() + (alpha.tail(m).array() + alpha(j));
    if (has_x) th += params.beta * X.dense().col(j).tail(m).array();

    auto ex = e.head(m);
    auto up = u.head(m);
    auto res = r.head(m);
    auto tm = terms.head(m);
    ex = (-th.abs()).exp();
    up = 1.0 + ex;
    const auto obs = a.col(j).tail(m).array();
    tm = th.max(0.0) + (up.log() - ((up - 1.0) - ex) / up) - obs * th;
    res = obs - (th >= 0.0).select(1.0 / up, ex / up);

    objective += 2.0 * tm.sum() - tm(0);
    out.residual_row_sums.tail(m) += res.matrix();
    out.residual_row_sums(j) += res.sum() - res(0);
    out.residual_Z.bottomRows(m).noalias() += res.matrix() * Z.row(j);
    if (m > 1) {
      out.residual_Z.row(j).noalias() += res.tail(m - 1).matrix().transpose() * Z.bottomRows(m - 1);
      if (has_x) x_dot += 2.0 * (res.tail(m - 1) * X.dense().col(j).tail(m - 1).array()).sum();
    }
  }
  out.objective = objective;
  out.residual_dot_X = x_dot;
  return out;
}

Gradients gradients(const AdjacencyMatrix& A, const CovariateMatrix& X,
                    const ParameterSet& params) {
  const FusedEvaluation ev = evaluate_fused(A, X, params);
  Gradients g;
  g.Z = -2.0 * ev.residual_Z;
  g.alpha = -2.0 * ev.residual_row_sums;
  g.beta_active = !X.absent();
  g.beta = g.beta_active ? -ev.residual_dot_X : 0.0;
  return g;
}

}  // namespace lsnet::model

#include "lsnet/fit.hpp"

#include "lsnet/linalg.hpp"
#include "lsnet/metrics.hpp"
#include "lsnet/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace lsnet::fit {

std::string to_string(ProjectionMode mode) {
  return mode == ProjectionMode::practical ? "practical" : "theoretical";
}

ProjectionMode parse_projection_mode(const std::string& name) {
  if (name == "practical") return ProjectionMode::practical;
  if (name == "theoretical") return ProjectionMode::theoretical;
  throw std::invalid_argument("unknown projection mode '" + name + "'");
}

void FitConfig::validate() const {
  if (k < 1) throw std::invalid_argument("fit: k must be at least 1");
  if (!(eta >= 0.0) || !std::isfinite(eta)) throw std::invalid_argument("fit: eta must be >= 0");
  if (T < 0) throw std::invalid_argument("fit: T must be non-negative");
  if (projection_mode == ProjectionMode::theoretical && !(M1 > 0.0)) {
    throw std::invalid_argument("fit: theoretical projections need M1 > 0");
  }
  if (dykstra_max_iters < 1 || !(dykstra_tol > 0.0)) {
    throw std::invalid_argument("fit: invalid Dykstra controls");
  }
}

StepSizes step_sizes(const Matrix& Z0, Index n, const CovariateMatrix& X, double eta) {
  const double op = linalg::operator_norm(Z0);
  // Round-off from an eigendecomposition of a zero matrix leaves op^2 near
  // 1e-15; treat that as zero rather than taking an enormous step.
  if (!(op * op > 1e-10)) {
    throw std::invalid_argument("step_sizes: degenerate initialization, Z0 = 0");
  }
  StepSizes s;
  s.Z = eta / (op * op);
  s.alpha = eta / (2.0 * static_cast<double>(n));
  s.beta = X.absent() ? 0.0 : eta / (2.0 * X.frobenius_sq());
  return s;
}

double constraint_bound(double M1, const CovariateMatrix& X) {
  return X.absent() ? M1 / 2.0 : M1 / 3.0;
}

namespace {

void cap_rows(Matrix& z, double row_norm_sq_bound) {
  for (Index i = 0; i < z.rows(); ++i) {
    const double sq = z.row(i).squaredNorm();
    if (sq > row_norm_sq_bound) z.row(i) *= std::sqrt(row_norm_sq_bound / sq);
  }
}

}  // namespace

DykstraResult dykstra_project_Z(const Matrix& Z, double row_norm_sq_bound, int max_iters,
                                double tol) {
  DykstraResult out;
  Matrix x = Z;
  Matrix p = Matrix::Zero(Z.rows(), Z.cols());
  Matrix q = Matrix::Zero(Z.rows(), Z.cols());
  for (int it = 0; it < max_iters; ++it) {
    const Matrix y = linalg::center_columns(x + p);
    p += x - y;
    Matrix next = y + q;
    cap_rows(next, row_norm_sq_bound);
    q += y - next;
    const double change = (next - x).norm();
    x = std::move(next);
    out.iterations = it + 1;
    if (change < tol) {
      out.converged = true;
      break;
    }
  }
  out.Z = std::move(x);
  return out;
}

Matrix project_Z(const Matrix& Z, ProjectionMode mode, double bound, int max_iters, double tol) {
  if (mode == ProjectionMode::practical) return linalg::center_columns(Z);
  return dykstra_project_Z(Z, bound, max_iters, tol).Z;
}

Vector project_alpha(const Vector& alpha, double bound) {
  return alpha.cwiseMax(-bound).cwiseMin(bound);
}

double project_beta(double beta, const CovariateMatrix& X, double bound) {
  if (X.absent()) return beta;
  const double cap = bound / X.max_abs();
  return std::clamp(beta, -cap, cap);
}

FitResult fit(const AdjacencyMatrix& A, const CovariateMatrix& X, const ParameterSet& init,
              const FitConfig& cfg, const simulate::GroundTruth* truth) {
  cfg.validate();
  init.validate();
  const Index n = A.n();
  require_same_size(n, init.n(), "init rows vs adjacency");
  require_same_size(n, X.n(), "covariate vs adjacency");
  require_same_size(cfg.k, init.k(), "init latent dimension vs cfg.k");
  if (truth) require_same_size(n, truth->n(), "truth vs adjacency");

  FitResult out;
  out.params = init;
  ParameterSet& p = out.params;
  FitTrace& trace = out.trace;
  trace.objective.reserve(static_cast<std::size_t>(cfg.T) + 1);

  std::optional<metrics::StarFactor> star;
  const bool track = truth != nullptr && cfg.trace_errors;
  if (track) star = metrics::make_star_factor(*truth, cfg.k);

  auto record = [&](double objective, int iter) {
    if (!std::isfinite(objective)) {
      std::ostringstream os;
      os << "fit: non-finite objective at iteration " << iter;
      throw std::runtime_error(os.str());
    }
    trace.objective.push_back(objective);
    if (track) {
      const auto r = metrics::relative_errors(p, *truth, *star);
      trace.rel_err_G.push_back(r.rel_err_G);
      trace.rel_err_Theta.push_back(r.rel_err_Theta);
      trace.e_t.push_back(*r.e_t);
    }
  };

  if (cfg.T == 0) {
    record(model::neg_log_likelihood(A, model::assemble_theta(p, X)), 0);
    return out;
  }

  // Step sizes come from the initializer once and stay fixed.
  trace.steps = step_sizes(init.Z, n, X, cfg.eta);
  const StepSizes& s = trace.steps;
  const bool theoretical = cfg.projection_mode == ProjectionMode::theoretical;
  const double bound = constraint_bound(cfg.M1, X);

  int flat_run = 0;
  for (int t = 0; t < cfg.T; ++t) {
    const model::FusedEvaluation ev = model::evaluate_fused(A, X, p);
    record(ev.objective, t);

    Matrix z_tilde = p.Z + (2.0 * s.Z) * ev.residual_Z;
    Vector a_tilde = p.alpha + (2.0 * s.alpha) * ev.residual_row_sums;
    double b_tilde = p.beta;
    if (!X.absent()) b_tilde += s.beta * ev.residual_dot_X;

    if (theoretical) {
      p.Z = dykstra_project_Z(z_tilde, bound, cfg.dykstra_max_iters, cfg.dykstra_tol).Z;
      p.alpha = project_alpha(a_tilde, bound);
      p.beta = project_beta(b_tilde, X, bound);
    } else {
      p.Z = linalg::center_columns(z_tilde);
      p.alpha = std::move(a_tilde);
      p.beta = b_tilde;
    }
    trace.iterations = t + 1;

    if (cfg.plateau_stop && trace.objective.size() >= 2) {
      const double prev = trace.objective[trace.objective.size() - 2];
      const double rel = std::abs(ev.objective - prev) / std::max(1.0, std::abs(prev));
      flat_run = rel < 1e-9 ? flat_run + 1 : 0;
      if (flat_run >= 10) break;
    }
  }
  record(model::evaluate_fused(A, X, p).objective, trace.iterations);
  return out;
}

}  // namespace lsnet::fit

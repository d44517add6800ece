#include "lsnet/fit.hpp"
#include "lsnet/init.hpp"
#include "lsnet/linalg.hpp"
#include "lsnet/metrics.hpp"
#include "lsnet/model.hpp"
#include "lsnet/simulate.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <random>

using namespace lsnet;

namespace {

struct Problem {
  simulate::GroundTruth truth;
  AdjacencyMatrix A;
};

Problem small_problem(Index n, Index d, std::uint64_t seed) {
  Problem p;
  p.truth = simulate::generate_model(n, d, simulate::KernelSpec{}, seed);
  p.A = simulate::sample_adjacency(p.truth, seed + 1000);
  return p;
}

double max_col_sum(const Matrix& z) { return z.colwise().sum().cwiseAbs().maxCoeff(); }

}  // namespace

TEST_CASE("step sizes: hand example and homogeneity") {
  Matrix Z0 = Matrix::Zero(100, 2);
  Z0(0, 0) = 2.0;
  Matrix X = Matrix::Zero(100, 100);
  X(0, 1) = X(1, 0) = std::sqrt(50.0);
  const auto cov = CovariateMatrix::from_dense(X);
  CHECK(cov.frobenius_sq() == doctest::Approx(100.0));
  const auto s = fit::step_sizes(Z0, 100, cov, 0.2);
  CHECK(s.Z == doctest::Approx(0.05).epsilon(1e-12));
  CHECK(s.alpha == doctest::Approx(0.001).epsilon(1e-12));
  CHECK(s.beta == doctest::Approx(0.001).epsilon(1e-12));

  const auto zero = fit::step_sizes(Z0, 100, cov, 0.0);
  CHECK(zero.Z == 0.0);
  CHECK(zero.alpha == 0.0);
  CHECK(zero.beta == 0.0);

  std::mt19937_64 gen(1);
  const Matrix Z = oracle::random_matrix(30, 3, gen);
  const double c = 3.7;
  const auto s1 = fit::step_sizes(Z, 30, CovariateMatrix::none(30), 0.2);
  const auto s2 = fit::step_sizes(c * Z, 30, CovariateMatrix::none(30), 0.2);
  CHECK(s2.Z == doctest::Approx(s1.Z / (c * c)).epsilon(1e-12));
  // operator norm against an independent SVD
  CHECK(s1.Z == doctest::Approx(0.2 / std::pow(Eigen::JacobiSVD<Matrix>(Z).singularValues()(0), 2)).epsilon(1e-10));

  CHECK_THROWS_AS(fit::step_sizes(Matrix::Zero(5, 2), 5, CovariateMatrix::none(5), 0.2), std::invalid_argument);
}

TEST_CASE("constraint bound switches without a covariate") {
  std::mt19937_64 gen(2);
  CHECK(fit::constraint_bound(6.0, CovariateMatrix::none(4)) == 3.0);
  CHECK(fit::constraint_bound(6.0, CovariateMatrix::from_dense(oracle::random_covariate(4, gen))) == 2.0);
}

TEST_CASE("project_Z: practical mode centers exactly") {
  std::mt19937_64 gen(3);
  const Matrix Z = oracle::random_matrix(50, 3, gen, 5.0);
  const Matrix P = fit::project_Z(Z, fit::ProjectionMode::practical, 0.1);
  CHECK(max_col_sum(P) < 1e-12);
  CHECK((Z - P).rowwise().norm().maxCoeff() == doctest::Approx((Z.colwise().mean()).norm()).epsilon(1e-12));
}

TEST_CASE("project_Z: theoretical mode fixed point") {
  std::mt19937_64 gen(4);
  Matrix Z = oracle::random_centered(20, 2, gen, 0.3);
  const double bound = 1.0 + Z.rowwise().squaredNorm().maxCoeff();
  const Matrix P = fit::project_Z(Z, fit::ProjectionMode::theoretical, bound);
  CHECK((P - Z).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("project_Z: Dykstra matches a dual-ascent reference") {
  std::mt19937_64 gen(5);
  for (int rep = 0; rep < 20; ++rep) {
    const Matrix Z = oracle::random_matrix(6, 2, gen, 1.0) + Matrix::Constant(6, 2, 0.4 * (rep % 3));
    const double bound = 0.3 + 0.1 * (rep % 5);
    const auto d = fit::dykstra_project_Z(Z, bound, 100000, 1e-13);
    const Matrix ref = oracle::centered_ball_projection(Z, bound);
    CHECK(d.converged);
    CHECK((d.Z - ref).norm() < 1e-6);
    CHECK(d.Z.rowwise().squaredNorm().maxCoeff() <= bound + 1e-10);
    CHECK(max_col_sum(d.Z) < 1e-8);
    // default controls are enough at this size
    CHECK((fit::project_Z(Z, fit::ProjectionMode::theoretical, bound) - ref).norm() < 1e-6);
  }
}

TEST_CASE("project_alpha and project_beta closed forms") {
  const Vector inside{{0.2, -0.3}};
  CHECK(fit::project_alpha(inside, 1.0) == inside);
  const Vector big{{10.0, -10.0}};
  const Vector cl = fit::project_alpha(big, 3.0 / 3.0);
  CHECK(cl(0) == 1.0);
  CHECK(cl(1) == -1.0);

  Matrix X = Matrix::Zero(3, 3);
  X(0, 1) = X(1, 0) = 2.0;
  X(1, 2) = X(2, 1) = -1.0;
  const auto cov = CovariateMatrix::from_dense(X);
  CHECK(fit::project_beta(5.0, cov, 6.0 / 3.0) == doctest::Approx(1.0));
  CHECK(fit::project_beta(-5.0, cov, 6.0 / 3.0) == doctest::Approx(-1.0));
  CHECK(fit::project_beta(0.5, cov, 2.0) == 0.5);
}

TEST_CASE("fit: T = 0 returns the init and one objective") {
  const Problem pr = small_problem(40, 2, 1);
  std::mt19937_64 gen(6);
  ParameterSet init = ParameterSet::zeros(40, 2);
  init.Z = oracle::random_matrix(40, 2, gen);  // deliberately uncentered
  fit::FitConfig cfg;
  cfg.T = 0;
  const auto r = fit::fit(pr.A, pr.truth.X, init, cfg);
  CHECK(r.params.Z == init.Z);
  CHECK(r.params.alpha == init.alpha);
  REQUIRE(r.trace.objective.size() == 1);
  CHECK(r.trace.objective[0] ==
        doctest::Approx(oracle::nll(pr.A.dense(), oracle::theta(init.Z, init.alpha, 0.0, pr.truth.X.dense()))));
}

TEST_CASE("fit: eta = 0 leaves a centered init unchanged") {
  const Problem pr = small_problem(40, 2, 2);
  std::mt19937_64 gen(7);
  ParameterSet init;
  init.Z = oracle::random_centered(40, 2, gen);
  init.alpha = oracle::random_matrix(40, 1, gen, 0.1);
  init.beta = 0.3;
  fit::FitConfig cfg;
  cfg.eta = 0.0;
  cfg.T = 5;
  const auto r = fit::fit(pr.A, pr.truth.X, init, cfg);
  CHECK((r.params.Z - init.Z).cwiseAbs().maxCoeff() < 1e-14);
  CHECK(r.params.alpha == init.alpha);
  CHECK(r.params.beta == init.beta);
  CHECK(r.trace.objective.size() == 6);
  for (double h : r.trace.objective) CHECK(h == doctest::Approx(r.trace.objective[0]).epsilon(1e-14));
}

TEST_CASE("fit: invalid inputs") {
  const Problem pr = small_problem(20, 2, 3);
  fit::FitConfig cfg;
  cfg.T = 3;
  CHECK_THROWS(fit::fit(pr.A, pr.truth.X, ParameterSet::zeros(20, 3), cfg));
  CHECK_THROWS(fit::fit(pr.A, pr.truth.X, ParameterSet::zeros(19, 2), cfg));
  CHECK_THROWS(fit::fit(pr.A, pr.truth.X, ParameterSet::zeros(20, 2), cfg));  // Z0 = 0
  cfg.k = 0;
  CHECK_THROWS(cfg.validate());
  cfg = fit::FitConfig{};
  cfg.eta = -1.0;
  CHECK_THROWS(cfg.validate());
}

TEST_CASE("fit: non-finite objective names the iteration") {
  const Problem pr = small_problem(20, 2, 4);
  std::mt19937_64 gen(8);
  ParameterSet init;
  init.Z = oracle::random_centered(20, 2, gen);
  init.alpha = Vector::Constant(20, std::numeric_limits<double>::quiet_NaN());
  fit::FitConfig cfg;
  cfg.T = 3;
  try {
    fit::fit(pr.A, pr.truth.X, init, cfg);
    FAIL("expected an exception");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()).find("iteration 0") != std::string::npos);
  }
}

TEST_CASE("fit: invariants along the trajectory in both modes") {
  const Problem pr = small_problem(80, 2, 5);
  std::mt19937_64 gen(9);
  ParameterSet init;
  init.Z = oracle::random_centered(80, 2, gen, 0.5);
  init.alpha = Vector::Zero(80);
  init.beta = 0.0;
  for (auto mode : {fit::ProjectionMode::practical, fit::ProjectionMode::theoretical}) {
    fit::FitConfig cfg;
    cfg.projection_mode = mode;
    cfg.M1 = 1.5;
    ParameterSet p = init;
    for (int step = 0; step < 15; ++step) {
      cfg.T = 1;
      // one step per call; each call sizes its steps from its own start
      const auto r = fit::fit(pr.A, pr.truth.X, p, cfg);
      p = r.params;
      CHECK(max_col_sum(p.Z) <= 1e-8 * std::sqrt(80.0) * std::max(1.0, p.Z.cwiseAbs().maxCoeff()));
      if (mode == fit::ProjectionMode::theoretical) {
        const double b = cfg.M1 / 3.0;
        CHECK(p.Z.rowwise().squaredNorm().maxCoeff() <= b + 1e-8);
        CHECK(p.alpha.cwiseAbs().maxCoeff() <= b + 1e-12);
        CHECK(std::abs(p.beta) * pr.truth.X.max_abs() <= b + 1e-12);
      }
    }
  }
}

TEST_CASE("fit: rotation equivariance") {
  const Problem pr = small_problem(60, 2, 6);
  std::mt19937_64 gen(10);
  const auto init = init::init_usvt(pr.A, pr.truth.X, 2, init::UsvtConfig{});
  const Matrix Q = oracle::random_orthogonal(2, gen);
  ParameterSet rotated = init;
  rotated.Z = init.Z * Q;
  for (auto mode : {fit::ProjectionMode::practical, fit::ProjectionMode::theoretical}) {
    fit::FitConfig cfg;
    cfg.T = 40;
    cfg.projection_mode = mode;
    cfg.M1 = 2.0;
    const auto a = fit::fit(pr.A, pr.truth.X, init, cfg);
    const auto b = fit::fit(pr.A, pr.truth.X, rotated, cfg);
    const Matrix Ga = a.params.Z * a.params.Z.transpose();
    const Matrix Gb = b.params.Z * b.params.Z.transpose();
    CHECK((Ga - Gb).norm() < 1e-6);
    CHECK(std::abs(a.params.beta - b.params.beta) < 1e-8);
  }
}

TEST_CASE("fit: small steps give a non-increasing objective") {
  const Problem pr = small_problem(100, 2, 7);
  const auto init = init::init_usvt(pr.A, pr.truth.X, 2, init::UsvtConfig{});
  fit::FitConfig cfg;
  cfg.eta = 1e-3;
  cfg.T = 100;
  const auto r = fit::fit(pr.A, pr.truth.X, init, cfg);
  for (std::size_t t = 1; t < r.trace.objective.size(); ++t)
    CHECK(r.trace.objective[t] <= r.trace.objective[t - 1] + 1e-8);
}

TEST_CASE("fit: error traces and improvement over the init") {
  const Problem pr = small_problem(300, 2, 8);
  const auto init = init::init_usvt(pr.A, pr.truth.X, 2, init::UsvtConfig{});
  fit::FitConfig cfg;
  cfg.T = 300;
  cfg.trace_errors = true;
  const auto r = fit::fit(pr.A, pr.truth.X, init, cfg, &pr.truth);
  REQUIRE(r.trace.rel_err_Theta.size() == 301);
  REQUIRE(r.trace.e_t.size() == 301);
  CHECK(r.trace.iterations == 300);
  CHECK(r.trace.objective.back() < r.trace.objective.front());
  CHECK(r.trace.rel_err_Theta.back() < 0.5 * r.trace.rel_err_Theta.front());
  const auto err = metrics::relative_errors(r.params, pr.truth);
  CHECK(err.rel_err_Theta == doctest::Approx(r.trace.rel_err_Theta.back()).epsilon(1e-12));

  fit::FitConfig quiet = cfg;
  quiet.trace_errors = false;
  CHECK(fit::fit(pr.A, pr.truth.X, init, quiet, &pr.truth).trace.e_t.empty());
}

TEST_CASE("fit: absent covariate skips beta") {
  simulate::ModelOptions opt;
  opt.with_covariate = false;
  const auto truth = simulate::generate_model(60, 2, simulate::KernelSpec{}, 9, opt);
  const auto A = simulate::sample_adjacency(truth, 1);
  auto init = init::init_usvt(A, truth.X, 2, init::UsvtConfig{});
  init.beta = 0.25;
  fit::FitConfig cfg;
  cfg.T = 20;
  const auto r = fit::fit(A, truth.X, init, cfg);
  CHECK(r.params.beta == 0.25);
  CHECK(r.trace.steps.beta == 0.0);
}

TEST_CASE("fit: plateau stop ends early on a converged problem") {
  const Problem pr = small_problem(40, 1, 11);
  const auto init = init::init_usvt(pr.A, pr.truth.X, 1, init::UsvtConfig{});
  fit::FitConfig cfg;
  cfg.k = 1;
  cfg.T = 20000;
  cfg.plateau_stop = true;
  const auto r = fit::fit(pr.A, pr.truth.X, init, cfg);
  CHECK(r.trace.iterations < 20000);
  CHECK(r.trace.objective.size() == static_cast<std::size_t>(r.trace.iterations) + 1);
}

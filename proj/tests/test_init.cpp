#include "lsnet/init.hpp"
#include "lsnet/linalg.hpp"
#include "lsnet/metrics.hpp"
#include "lsnet/model.hpp"
#include "lsnet/simulate.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <Eigen/Eigenvalues>

#include <random>

using namespace lsnet;

namespace {

double min_eig(const Matrix& m) {
  return Eigen::SelfAdjointEigenSolver<Matrix>(m, Eigen::EigenvaluesOnly).eigenvalues().minCoeff();
}

Matrix J(Index n) { return Matrix::Identity(n, n) - Matrix::Constant(n, n, 1.0 / n); }

double max_col_sum(const Matrix& z) { return z.size() ? z.colwise().sum().cwiseAbs().maxCoeff() : 0.0; }

}  // namespace

TEST_CASE("psd_project: fixed point, clipping, idempotence, oracle") {
  std::mt19937_64 gen(1);
  const Matrix B = oracle::random_matrix(8, 8, gen);
  const Matrix psd = B * B.transpose();
  CHECK((linalg::psd_project(psd) - psd).cwiseAbs().maxCoeff() < 1e-10);

  const Matrix d{{1.0, 0.0}, {0.0, -2.0}};
  const Matrix expect{{1.0, 0.0}, {0.0, 0.0}};
  CHECK((linalg::psd_project(d) - expect).cwiseAbs().maxCoeff() < 1e-15);

  for (int rep = 0; rep < 20; ++rep) {
    const Matrix M = oracle::random_symmetric(8, gen);
    const Matrix P = linalg::psd_project(M);
    CHECK((linalg::psd_project(P) - P).norm() <= 1e-10 * M.norm());
    // the iterative square root loses digits near zero eigenvalues
    CHECK((P - oracle::psd_part(M)).norm() < 1e-8 * M.norm());
    CHECK(min_eig(P) >= -1e-12);
    // the residual M - P is negative semi-definite and orthogonal to P
    CHECK(min_eig(P - M) >= -1e-12);
    CHECK(std::abs((P.array() * (M - P).array()).sum()) < 1e-10);
  }
}

TEST_CASE("linalg helpers") {
  std::mt19937_64 gen(2);
  const Matrix M = oracle::random_symmetric(9, gen);
  CHECK((linalg::double_center(M) - J(9) * M * J(9)).cwiseAbs().maxCoeff() < 1e-13);
  const Matrix Z = oracle::random_matrix(9, 3, gen);
  CHECK((linalg::center_columns(Z) - J(9) * Z).cwiseAbs().maxCoeff() < 1e-13);
  CHECK(linalg::operator_norm(Z) == doctest::Approx(Eigen::JacobiSVD<Matrix>(Z).singularValues()(0)).epsilon(1e-12));

  const auto eig = linalg::eigh_descending(M);
  for (Index i = 1; i < 9; ++i) CHECK(eig.values(i - 1) >= eig.values(i));
  CHECK((eig.vectors * eig.values.asDiagonal() * eig.vectors.transpose() - M).norm() < 1e-12);

  // top-k factor pads with zeros once the positive spectrum runs out
  const Matrix rank1 = Z.col(0) * Z.col(0).transpose();
  const Matrix f = linalg::top_k_factor(linalg::eigh_descending(rank1), 3);
  CHECK(f.cols() == 3);
  CHECK(f.col(1).norm() < 1e-7);
  CHECK(f.col(2).norm() < 1e-7);
  CHECK((f * f.transpose() - rank1).norm() < 1e-10);
  const Matrix neg = -rank1;
  CHECK(linalg::top_k_factor(linalg::eigh_descending(neg), 2).norm() < 1e-7);

  bool sym = false;
  Matrix skew = M;
  skew(0, 1) += 1e-3;
  linalg::eigh_descending(skew, &sym);
  CHECK(sym);
  linalg::eigh_descending(M, &sym);
  CHECK_FALSE(sym);
}

TEST_CASE("least_squares_degree matches an explicit QR solve") {
  std::mt19937_64 gen(3);
  for (int rep = 0; rep < 10; ++rep) {
    const Index n = 3 + rep % 5;
    const Matrix T = oracle::random_symmetric(n, gen);
    const auto none = init::least_squares_degree(T, CovariateMatrix::none(n));
    const Vector ref0 = oracle::degree_least_squares(T, nullptr);
    CHECK((none.alpha - ref0).norm() < 1e-10);
    CHECK(none.beta == 0.0);

    const Matrix X = oracle::random_covariate(n, gen);
    const auto with = init::least_squares_degree(T, CovariateMatrix::from_dense(X));
    const Vector ref = oracle::degree_least_squares(T, &X);
    CHECK((with.alpha - ref.head(n)).norm() < 1e-10);
    CHECK(std::abs(with.beta - ref(n)) < 1e-10);
  }
  // closed form without a covariate: (2n I + 2 1 1^T)^{-1} Theta 1
  const Index n = 6;
  const Matrix T = oracle::random_symmetric(n, gen);
  const Matrix K = 2.0 * n * Matrix::Identity(n, n) + 2.0 * Matrix::Ones(n, n);
  const Vector ref = K.ldlt().solve(T.rowwise().sum()) * 2.0;
  CHECK((init::least_squares_degree(T, CovariateMatrix::none(n)).alpha - ref).norm() < 1e-10);
}

TEST_CASE("least_squares_degree: exact degree model recovers alpha and leaves no residual") {
  std::mt19937_64 gen(4);
  const Index n = 30;
  const Vector alpha = oracle::random_matrix(n, 1, gen);
  const Matrix T = alpha * Vector::Ones(n).transpose() + Vector::Ones(n) * alpha.transpose();
  const auto fit = init::least_squares_degree(T, CovariateMatrix::none(n));
  CHECK((fit.alpha - alpha).cwiseAbs().maxCoeff() < 1e-8);
  Matrix resid = T - fit.alpha * Vector::Ones(n).transpose() - Vector::Ones(n) * fit.alpha.transpose();
  const Matrix G = linalg::psd_project(linalg::double_center(resid));
  CHECK(G.norm() < 1e-8);
  CHECK(linalg::top_k_factor(linalg::eigh_descending(G), 2).norm() < 1e-4);
}

TEST_CASE("usvt: constant probability model") {
  const Index n = 500;
  const double p = 0.2;
  Matrix P = Matrix::Constant(n, n, p);
  P.diagonal().setZero();
  const auto A = simulate::sample_adjacency(P, 3);
  CHECK(init::usvt_decompose(A, CovariateMatrix::none(n), init::UsvtConfig{}).tau ==
        doctest::Approx(std::sqrt(n * A.density())));
  // The default threshold sits inside the noise bulk (edge 2 sqrt(n p (1 - p))),
  // so use the larger one that keeps only the signal.
  init::UsvtConfig cfg;
  cfg.tau = 1.1 * std::sqrt(static_cast<double>(n));
  const auto dec = init::usvt_decompose(A, CovariateMatrix::none(n), cfg);
  CHECK(dec.kept_components == 1);
  // rank one estimate: entries move with the node degrees, sd about 0.16 here
  double mean = 0.0, sq = 0.0;
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < n; ++i)
      if (i != j) {
        mean += dec.theta_hat(i, j);
        sq += std::pow(dec.theta_hat(i, j) - model::logit(p), 2);
      }
  const double pairs = static_cast<double>(n * (n - 1));
  CHECK(std::abs(mean / pairs - model::logit(p)) < 0.05);
  CHECK(std::sqrt(sq / pairs) < 0.25);
  CHECK(dec.G_hat().norm() / (double(n) * n) < 1e-3);
}

TEST_CASE("usvt: structure of the estimate") {
  const auto truth = simulate::generate_model(300, 2, simulate::KernelSpec{}, 5);
  const auto A = simulate::sample_adjacency(truth, 6);
  init::UsvtConfig cfg;
  const auto dec = init::usvt_decompose(A, truth.X, cfg);
  const Matrix G = dec.G_hat();
  CHECK((J(300) * G * J(300) - G).cwiseAbs().maxCoeff() < 1e-9);
  CHECK(min_eig(G) >= -1e-8 * 300);
  // clamp range of P_hat
  const double lo = model::logit(0.5 * std::exp(-cfg.M1));
  CHECK(dec.theta_hat.minCoeff() >= lo - 1e-9);
  CHECK(dec.theta_hat.maxCoeff() <= 1e-12);
  CHECK((dec.theta_hat - dec.theta_hat.transpose()).cwiseAbs().maxCoeff() == 0.0);

  const auto p = dec.params(2);
  CHECK(max_col_sum(p.Z) < 1e-8);
  CHECK(p.beta < 0.0);
  const auto via_init = init::init_usvt(A, truth.X, 2, cfg);
  CHECK((via_init.Z * via_init.Z.transpose() - p.Z * p.Z.transpose()).norm() < 1e-9);
  const auto err = metrics::relative_errors(p, truth);
  CHECK(err.rel_err_G < 0.5);

  // a threshold above every eigenvalue clamps P to the floor
  init::UsvtConfig high;
  high.tau = 1e9;
  const auto flat = init::usvt_decompose(A, truth.X, high);
  CHECK(flat.kept_components == 0);
  CHECK((flat.theta_hat.array() == model::logit(0.5 * std::exp(-high.M1))).all());
  init::UsvtConfig bad;
  bad.tau = 0.0;
  CHECK_THROWS(init::usvt_decompose(A, truth.X, bad));
}

TEST_CASE("lifted PGD: empty graph with a large penalty stays at zero") {
  const auto A = AdjacencyMatrix::empty(3);
  init::LiftedConfig cfg;
  cfg.T = 1;
  cfg.lambda = 100.0;
  const auto r = init::lifted_pgd(A, CovariateMatrix::none(3), 2, cfg);
  CHECK(r.G.cwiseAbs().maxCoeff() < 1e-12);
  CHECK(r.params.Z.norm() < 1e-6);
  CHECK(r.steps.size() == 1);
  // hand check of the one-step alpha update: R 1 = -3/2 per row
  CHECK(r.params.alpha(0) == doctest::Approx(cfg.eta * (-1.5 / 6.0)));
}

TEST_CASE("lifted PGD: eta = 0 returns zeros") {
  const auto truth = simulate::generate_model(30, 2, simulate::KernelSpec{}, 1);
  const auto A = simulate::sample_adjacency(truth, 2);
  init::LiftedConfig cfg;
  cfg.eta = 0.0;
  const auto p = init::init_lifted_pgd(A, truth.X, 2, cfg);
  CHECK(p.Z.isZero(0.0));
  CHECK(p.alpha.isZero(0.0));
  CHECK(p.beta == 0.0);
}

TEST_CASE("lifted PGD: defaults, bounded iterates, centered output") {
  const auto truth = simulate::generate_model(200, 2, simulate::KernelSpec{}, 7);
  const auto A = simulate::sample_adjacency(truth, 8);
  init::LiftedConfig cfg;
  const auto r = init::lifted_pgd(A, truth.X, 2, cfg);
  const double lam = 2.0 * std::sqrt(200.0 * A.density());
  CHECK(r.lambda == doctest::Approx(lam));
  CHECK(r.gamma == doctest::Approx(lam / 200.0));
  REQUIRE(r.steps.size() == 10);
  for (const auto& s : r.steps) {
    CHECK(s.G_norm <= s.G_tilde_norm + 1e-9);
    CHECK(s.G_tilde_norm <= (1.0 - cfg.eta * r.gamma) * s.prev_G_norm +
                                cfg.eta * (s.residual_norm + r.lambda * std::sqrt(200.0)) + 1e-9);
  }
  CHECK((J(200) * r.G * J(200) - r.G).cwiseAbs().maxCoeff() < 1e-9);
  CHECK(min_eig(r.G) >= -1e-8 * 200);
  CHECK(max_col_sum(r.params.Z) < 1e-8);
  CHECK_FALSE(r.symmetrized);
  const auto p4 = r.params_for(4);
  CHECK(p4.Z.cols() == 4);
  CHECK(p4.alpha == r.params.alpha);
  CHECK((p4.Z.leftCols(2) * p4.Z.leftCols(2).transpose() - r.params.Z * r.params.Z.transpose()).norm() < 1e-9);
}

TEST_CASE("lifted PGD: theoretical mode honours the entrywise box") {
  const auto truth = simulate::generate_model(60, 2, simulate::KernelSpec{}, 9);
  const auto A = simulate::sample_adjacency(truth, 10);
  init::LiftedConfig cfg;
  cfg.projection_mode = fit::ProjectionMode::theoretical;
  cfg.M1 = 0.3;
  cfg.T = 30;
  cfg.eta = 2.0;
  cfg.lambda = 0.5;
  cfg.dykstra_max_iters = 2000;
  const auto r = init::lifted_pgd(A, truth.X, 2, cfg);
  CHECK(r.G.cwiseAbs().maxCoeff() <= 0.1 + 1e-6);
  // Dykstra ends on the box, so PSD holds up to its finite-iteration gap
  CHECK(min_eig(r.G) >= -2e-3 * r.G.norm());
  CHECK(r.params.alpha.cwiseAbs().maxCoeff() <= 0.1 + 1e-12);
}

TEST_CASE("project_G with a box lands in all three sets") {
  std::mt19937_64 gen(11);
  const Matrix M = 3.0 * oracle::random_symmetric(10, gen);
  const Matrix G = init::project_G(M, 0.5, 5000, 1e-12);
  CHECK(G.cwiseAbs().maxCoeff() <= 0.5 + 1e-12);
  CHECK(min_eig(G) >= -1e-8);
  CHECK((J(10) * G - G).cwiseAbs().maxCoeff() < 1e-8);
  const Matrix open = init::project_G(M, std::nullopt, 1, 0.0);
  CHECK((open - linalg::psd_project(J(10) * M * J(10))).norm() < 1e-10);
}

TEST_CASE("random init") {
  const auto z0 = init::init_random(20, 3, 0.0, 1);
  CHECK(z0.Z.isZero(0.0));
  const auto a = init::init_random(20, 3, 1.0, 5);
  const auto b = init::init_random(20, 3, 1.0, 5);
  CHECK(a.Z == b.Z);
  CHECK(max_col_sum(a.Z) < 1e-12);
  CHECK(a.alpha.isZero(0.0));
  CHECK(a.beta == 0.0);
  CHECK(init::init_random(20, 3, 1.0, 6).Z != a.Z);
  CHECK_THROWS(init::init_random(20, 0, 1.0, 5));
}

TEST_CASE("initialize dispatches and every method centers Z") {
  const auto truth = simulate::generate_model(80, 2, simulate::KernelSpec{}, 12);
  const auto A = simulate::sample_adjacency(truth, 13);
  for (auto m : {init::Method::lifted_pgd, init::Method::usvt, init::Method::random}) {
    init::InitConfig cfg;
    cfg.method = m;
    const auto p = init::initialize(A, truth.X, 3, cfg);
    CHECK(p.Z.rows() == 80);
    CHECK(p.Z.cols() == 3);
    CHECK(max_col_sum(p.Z) < 1e-8);
    CHECK(init::parse_method(init::to_string(m)) == m);
  }
  CHECK_THROWS(init::parse_method("spectral"));
}

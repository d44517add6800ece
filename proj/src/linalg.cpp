#include "lsnet/linalg.hpp"

#include <Eigen/Eigenvalues>

#include <stdexcept>
#include <string>

namespace lsnet::linalg {

double max_asymmetry(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  return (m - m.transpose()).cwiseAbs().maxCoeff();
}

SymmetricEigen eigh_descending(const Matrix& m, bool* symmetrized) {
  if (m.rows() != m.cols()) throw DimensionError("eigh_descending: matrix must be square");
  const double scale = std::max(1.0, m.size() ? m.cwiseAbs().maxCoeff() : 0.0);
  const bool drift = max_asymmetry(m) > 1e-8 * scale;
  if (symmetrized) *symmetrized = drift;

  Eigen::SelfAdjointEigenSolver<Matrix> solver;
  if (drift) {
    solver.compute(0.5 * (m + m.transpose()));
  } else {
    // Only the lower triangle is read.
    solver.compute(m);
  }
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("symmetric eigendecomposition failed to converge");
  }
  SymmetricEigen out;
  out.values = solver.eigenvalues().reverse();
  out.vectors = solver.eigenvectors().rowwise().reverse();
  return out;
}

Matrix center_columns(const Matrix& z) {
  Matrix out = z;
  out.rowwise() -= z.colwise().mean();
  return out;
}

Matrix double_center(const Matrix& m) {
  Matrix out = m;
  out.rowwise() -= m.colwise().mean();
  out.colwise() -= out.rowwise().mean();
  return out;
}

Matrix psd_from_eigen(const SymmetricEigen& eig) {
  Index r = 0;
  while (r < eig.values.size() && eig.values(r) > 0.0) ++r;
  if (r == 0) return Matrix::Zero(eig.vectors.rows(), eig.vectors.rows());
  const Matrix scaled = eig.vectors.leftCols(r) * eig.values.head(r).cwiseSqrt().asDiagonal();
  const Index n = eig.vectors.rows();
  Matrix out = Matrix::Zero(n, n);
  out.selfadjointView<Eigen::Lower>().rankUpdate(scaled);
  out.triangularView<Eigen::StrictlyUpper>() = out.transpose();
  return out;
}

Matrix psd_project(const Matrix& m) {
  return psd_from_eigen(eigh_descending(m));
}

Matrix top_k_factor(const SymmetricEigen& eig, Index k) {
  const Index n = eig.vectors.rows();
  Matrix z = Matrix::Zero(n, k);
  const Index avail = std::min<Index>(k, eig.values.size());
  for (Index c = 0; c < avail; ++c) {
    const double v = eig.values(c);
    if (v <= 0.0) break;
    z.col(c) = eig.vectors.col(c) * std::sqrt(v);
  }
  return z;
}

double operator_norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  // k x k Gram matrix; k is small for every caller.
  const Matrix gram = m.cols() <= m.rows() ? Matrix(m.transpose() * m) : Matrix(m * m.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> solver(gram, Eigen::EigenvaluesOnly);
  return std::sqrt(std::max(0.0, solver.eigenvalues().maxCoeff()));
}

}  // namespace lsnet::linalg

#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <stdexcept>
#include <string>

namespace lsnet {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

class DimensionError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Symmetric n x n network with zero diagonal.
///
/// `from_dense` enforces binary entries. `relaxed` only requires a symmetric
/// matrix with entries in [0, 1]; it exists for synthetic checks where the
/// observations are replaced by probabilities.
class AdjacencyMatrix {
public:
  AdjacencyMatrix() = default;

  static AdjacencyMatrix from_dense(Matrix entries);
  static AdjacencyMatrix relaxed(Matrix entries);
  static AdjacencyMatrix empty(Index n);

  Index n() const { return entries_.rows(); }
  const Matrix& dense() const { return entries_; }

  /// Number of undirected edges (i < j with A_ij = 1).
  double edge_count() const;
  /// sum_ij A_ij / n^2
  double density() const;

private:
  explicit AdjacencyMatrix(Matrix entries) : entries_(std::move(entries)) {}
  Matrix entries_;
};

/// Symmetric real edge covariate with zero diagonal. An absent covariate is
/// all zeros and switches off every beta update.
class CovariateMatrix {
public:
  CovariateMatrix() = default;

  static CovariateMatrix none(Index n);
  static CovariateMatrix from_dense(Matrix entries, double symmetry_tol = 1e-9);

  Index n() const { return entries_.rows(); }
  bool absent() const { return absent_; }
  const Matrix& dense() const { return entries_; }

  double frobenius_sq() const { return absent_ ? 0.0 : entries_.squaredNorm(); }
  double max_abs() const { return absent_ ? 0.0 : entries_.cwiseAbs().maxCoeff(); }

private:
  CovariateMatrix(Matrix entries, bool absent)
      : entries_(std::move(entries)), absent_(absent) {}
  Matrix entries_;
  bool absent_ = true;
};

/// Model state: latent positions (rows of Z), degree parameters and the
/// covariate coefficient.
struct ParameterSet {
  Matrix Z;
  Vector alpha;
  double beta = 0.0;

  Index n() const { return Z.rows(); }
  Index k() const { return Z.cols(); }

  static ParameterSet zeros(Index n, Index k);
  void validate() const;
};

/// Logit-scale edge matrix. Symmetric whenever it is built by assemble_theta.
struct ThetaMatrix {
  Matrix entries;
  Index n() const { return entries.rows(); }
};

void require_same_size(Index expected, Index actual, const std::string& what);

}  // namespace lsnet

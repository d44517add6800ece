#include "lsnet/types.hpp"

#include <cmath>
#include <sstream>

namespace lsnet {

namespace {

void require_square(const Matrix& m, const char* what) {
  if (m.rows() != m.cols()) {
    std::ostringstream os;
    os << what << " must be square, got " << m.rows() << "x" << m.cols();
    throw DimensionError(os.str());
  }
}

double max_asymmetry(const Matrix& m) {
  return (m - m.transpose()).cwiseAbs().maxCoeff();
}

}  // namespace

void require_same_size(Index expected, Index actual, const std::string& what) {
  if (expected != actual) {
    std::ostringstream os;
    os << what << ": expected dimension " << expected << ", got " << actual;
    throw DimensionError(os.str());
  }
}

AdjacencyMatrix AdjacencyMatrix::from_dense(Matrix entries) {
  require_square(entries, "adjacency matrix");
  const Index n = entries.rows();
  for (Index j = 0; j < n; ++j) {
    if (entries(j, j) != 0.0) {
      throw std::invalid_argument("adjacency matrix must have a zero diagonal");
    }
    for (Index i = 0; i < n; ++i) {
      const double v = entries(i, j);
      if (v != 0.0 && v != 1.0) {
        throw std::invalid_argument("adjacency matrix entries must be 0 or 1");
      }
      if (v != entries(j, i)) {
        throw std::invalid_argument("adjacency matrix must be symmetric");
      }
    }
  }
  return AdjacencyMatrix(std::move(entries));
}

AdjacencyMatrix AdjacencyMatrix::relaxed(Matrix entries) {
  require_square(entries, "adjacency matrix");
  if (entries.size() > 0) {
    if (entries.minCoeff() < 0.0 || entries.maxCoeff() > 1.0) {
      throw std::invalid_argument("relaxed adjacency entries must lie in [0, 1]");
    }
    if (max_asymmetry(entries) > 0.0) {
      throw std::invalid_argument("adjacency matrix must be symmetric");
    }
  }
  return AdjacencyMatrix(std::move(entries));
}

AdjacencyMatrix AdjacencyMatrix::empty(Index n) {
  return AdjacencyMatrix(Matrix::Zero(n, n));
}

double AdjacencyMatrix::edge_count() const {
  return 0.5 * (entries_.sum() - entries_.diagonal().sum()) ;
}

double AdjacencyMatrix::density() const {
  const double n = static_cast<double>(entries_.rows());
  return n > 0 ? entries_.sum() / (n * n) : 0.0;
}

CovariateMatrix CovariateMatrix::none(Index n) {
  return CovariateMatrix(Matrix::Zero(n, n), true);
}

CovariateMatrix CovariateMatrix::from_dense(Matrix entries, double symmetry_tol) {
  require_square(entries, "covariate matrix");
  if (entries.size() > 0) {
    if (!entries.allFinite()) {
      throw std::invalid_argument("covariate matrix has non-finite entries");
    }
    const double asym = max_asymmetry(entries);
    if (asym > symmetry_tol) {
      std::ostringstream os;
      os.precision(17);
      os << "covariate matrix is not symmetric: max |X_ij - X_ji| = " << asym;
      throw std::invalid_argument(os.str());
    }
    if (entries.diagonal().cwiseAbs().maxCoeff() != 0.0) {
      throw std::invalid_argument("covariate matrix must have a zero diagonal");
    }
  }
  // Average out sub-tolerance asymmetry so downstream Theta stays exactly symmetric.
  Matrix sym = 0.5 * (entries + entries.transpose());
  const bool all_zero = sym.size() == 0 || sym.cwiseAbs().maxCoeff() == 0.0;
  return CovariateMatrix(std::move(sym), all_zero);
}

ParameterSet ParameterSet::zeros(Index n, Index k) {
  return ParameterSet{Matrix::Zero(n, k), Vector::Zero(n), 0.0};
}

void ParameterSet::validate() const {
  require_same_size(Z.rows(), alpha.size(), "alpha length vs rows of Z");
  if (Z.cols() < 1) {
    throw DimensionError("latent dimension k must be at least 1");
  }
}

}  // namespace lsnet

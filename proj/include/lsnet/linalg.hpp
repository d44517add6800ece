#pragma once

#include "lsnet/types.hpp"

namespace lsnet::linalg {

/// Eigenpairs of a symmetric matrix, eigenvalues in descending order.
struct SymmetricEigen {
  Vector values;
  Matrix vectors;
};

/// Symmetrizes inputs with asymmetry above 1e-8 (relative) and reports it via
/// the optional flag.
SymmetricEigen eigh_descending(const Matrix& m, bool* symmetrized = nullptr);

/// JZ: subtract column means.
Matrix center_columns(const Matrix& z);
/// JMJ for square M.
Matrix double_center(const Matrix& m);

/// Nearest positive semi-definite matrix in Frobenius norm (negative
/// eigenvalues clipped).
Matrix psd_project(const Matrix& m);
Matrix psd_from_eigen(const SymmetricEigen& eig);

/// U_k D_k^{1/2} from the k leading eigenpairs, negative eigenvalues clipped
/// to zero. Columns beyond the number of available eigenpairs are zero.
Matrix top_k_factor(const SymmetricEigen& eig, Index k);

/// Largest singular value of a tall matrix.
double operator_norm(const Matrix& m);

double max_asymmetry(const Matrix& m);

}  // namespace lsnet::linalg

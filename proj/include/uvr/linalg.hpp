// Copyright 2026 The uvr authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef UVR_LINALG_HPP
#define UVR_LINALG_HPP

#include <cstddef>
#include <vector>

#include "uvr/matrix.hpp"

namespace uvr {

/// Thin SVD A = U diag(s) V^T with orthonormal U (m x r), V (n x r) and
/// singular values sorted non-increasing. Decomposition is deterministic
/// for a fixed input; equal singular values keep their working-column
/// order, and signs are fixed by making the largest-magnitude entry of
/// each left vector positive.
struct SvdResult {
  Matrix u;
  std::vector<double> singular_values;
  Matrix v;
};

/// Parameters of the implicit covariance S(W, nu) = nu^-1 (W W^T + nu I).
/// The induced squared norm is evaluated through the k x k system
/// (W^T W + nu I), never by forming the m x m matrix.
struct QuadraticNormSpec {
  Matrix w;   // m x k
  double nu;  // > 0
};

/// Symmetric eigendecomposition A = V diag(lambda) V^T, eigenvalues
/// sorted non-increasing, same determinism conventions as SvdResult.
struct EigResult {
  std::vector<double> values;
  Matrix vectors;  // columns are eigenvectors
};

// Full thin SVD (r = min(m, n) triples).
SvdResult svd(const Matrix& a);

// Top-k singular triples, 1 <= k <= min(m, n).
SvdResult truncated_svd(const Matrix& a, std::size_t k);

EigResult sym_eig(const Matrix& a);

// Solves (G) X = B for symmetric positive definite G via Cholesky.
Matrix spd_solve(const Matrix& g, const Matrix& b);

// (W^T W + nu I)^-1 W^T R, the ridge minimizer of |R - W a|_F^2 + nu |a|_F^2.
Matrix ridge_solve(const Matrix& w, const Matrix& r, double nu);

// tr R^T S(W,nu)^-1 R evaluated as |R|_F^2 - <W^T R, ridge_solve(W, R, nu)>.
double quad_norm_sq(const Matrix& r, const QuadraticNormSpec& spec);

// W = U (Lambda - nu I)^(1/2) U^T for Sigma = U Lambda U^T, which gives
// S(W, nu) = nu^-1 Sigma. Proportional to Sigma, so every argmin of
// |.|^2_{S(W,nu)} coincides with the argmin of |.|^2_Sigma. Requires nu
// strictly below the smallest eigenvalue of Sigma and symmetric input
// (asymmetry up to 1e-10 * |Sigma|_F is symmetrized away).
Matrix sigma_to_w(const Matrix& sigma, double nu);

// Sample scores on the leading principal axes of column-centered y.
Matrix pca_coordinates(const Matrix& y, std::size_t n_components);

// Count of singular values above rel_tol * s_max.
std::size_t numerical_rank(const std::vector<double>& singular_values,
                           double rel_tol = 1e-10);

// Orthonormal basis of the column space (columns of the result), rank
// decided at rel_tol relative to the largest singular value. Returns an
// m x 0 matrix for (numerically) zero input.
Matrix orthonormal_basis(const Matrix& a, double rel_tol = 1e-10);

// Columns of y centered to zero mean.
Matrix center_columns(const Matrix& y);

}  // namespace uvr

#endif  // UVR_LINALG_HPP

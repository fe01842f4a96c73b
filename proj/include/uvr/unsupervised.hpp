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

#ifndef UVR_UNSUPERVISED_HPP
#define UVR_UNSUPERVISED_HPP

#include <cstdint>
#include <memory>
#include <vector>

#include "uvr/linalg.hpp"
#include "uvr/matrix.hpp"

namespace uvr {

/// Assignment of samples to clusters 0..k-1; every sample belongs to
/// exactly one cluster, empty clusters are permitted.
struct Partition {
  std::vector<std::size_t> assignments;
  std::size_t k = 0;
};

enum class ConstraintKind { membership, unit_norm_columns, low_rank };

/// Estimate of the factor-of-interest term: x_hat (m x p) under the
/// stated constraint and beta_hat (p x n).
struct FactorEstimate {
  Matrix x_hat;
  Matrix beta_hat;
  ConstraintKind constraint_kind = ConstraintKind::low_rank;

  Matrix xbeta() const;  // x_hat * beta_hat; zero matrix when p == 0
};

struct KMeansResult {
  Partition partition;
  FactorEstimate factor;
  double objective = 0.0;
  std::vector<double> restart_objectives;  // final objective per restart
  std::vector<double> objective_trace;     // winning restart, per iteration
};

// Best-of-restarts Lloyd iterations with k-means++ seeding; empty clusters
// are re-seeded at the point farthest from its center. Deterministic given
// seed; restarts tie-break by lowest restart index.
KMeansResult kmeans(const Matrix& y, std::size_t k, std::size_t n_restarts,
                    std::uint64_t seed);

struct SigmaKMeansResult {
  Partition partition;
  double objective = 0.0;  // |Y - X beta|^2 evaluated under S(W, nu)
};

// Coordinate descent over rows of X under the S(W, nu)-weighted objective,
// alternating with the GLS update of beta. Objective is non-increasing.
SigmaKMeansResult kmeans_sigma_rowwise(const Matrix& y, std::size_t k,
                                       const QuadraticNormSpec& spec,
                                       std::uint64_t seed, std::size_t n_restarts = 8);

// Projected gradient on the row-simplex relaxation of X, rounded to hard
// assignments by row argmax (lowest index wins ties).
SigmaKMeansResult kmeans_sigma_relaxed(const Matrix& y, std::size_t k,
                                       const QuadraticNormSpec& spec,
                                       std::uint64_t seed, std::size_t n_restarts = 8);

struct SparseDictResult {
  FactorEstimate factor;
  double objective = 0.0;  // 0.5 |Y - X beta|_F^2 + lambda |beta|_1
  std::vector<double> objective_trace;  // after each alternation
};

// Per-column lasso fits argmin_b 0.5 |y_j - X b|^2 + lambda |b|_1 by
// coordinate descent; the beta step of sparse_dictionary.
Matrix lasso_columns(const Matrix& y, const Matrix& x, double lambda);

// Alternating minimization: coordinate-descent lasso for beta given X,
// column-wise norm-constrained least squares for X given beta. Initialized
// from the truncated SVD, so the lambda = 0, p = min(m, n) case starts (and
// stays) at the rank-p optimum. No global-optimum claim.
SparseDictResult sparse_dictionary(const Matrix& y, std::size_t p, double lambda,
                                   std::uint64_t seed, std::size_t max_iters = 60);

// Minimizer of |Y - X b|_F^2 + lambda sum_i |b_i - bbar|^2 + nu |bbar|^2
// with bbar the shrunken average of the columns b_i, solved through the
// equivalent joint ridge system in (beta, v).
Matrix map_shrunk_regression(const Matrix& y, const Matrix& x, double lambda,
                             double nu);

/// Handle the iteration engine calls to re-estimate X beta at Sigma = I.
class UnsupervisedEstimator {
 public:
  virtual ~UnsupervisedEstimator() = default;
  virtual FactorEstimate fit(const Matrix& y_tilde) = 0;
};

/// Fixes X beta = 0; turns the iterative engine into the one-shot methods.
class ZeroEstimator : public UnsupervisedEstimator {
 public:
  FactorEstimate fit(const Matrix& y_tilde) override;
};

class KMeansEstimator : public UnsupervisedEstimator {
 public:
  KMeansEstimator(std::size_t k, std::size_t n_restarts, std::uint64_t seed)
      : k_(k), n_restarts_(n_restarts), seed_(seed) {}
  FactorEstimate fit(const Matrix& y_tilde) override;

 private:
  std::size_t k_;
  std::size_t n_restarts_;
  std::uint64_t seed_;
};

class SparseDictionaryEstimator : public UnsupervisedEstimator {
 public:
  SparseDictionaryEstimator(std::size_t p, double lambda, std::uint64_t seed)
      : p_(p), lambda_(lambda), seed_(seed) {}
  FactorEstimate fit(const Matrix& y_tilde) override;
  void set_lambda(double lambda) { lambda_ = lambda; }

 private:
  std::size_t p_;
  double lambda_;
  std::uint64_t seed_;
};

}  // namespace uvr

#endif  // UVR_UNSUPERVISED_HPP

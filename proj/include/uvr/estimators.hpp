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

#ifndef UVR_ESTIMATORS_HPP
#define UVR_ESTIMATORS_HPP

#include <optional>
#include <string>
#include <vector>

#include "uvr/data.hpp"
#include "uvr/matrix.hpp"

namespace uvr {

enum class WSource {
  control_genes,
  replicates,
  combined,
  known_factors,
  residual_updated,
};

std::string to_string(WSource source);
WSource w_source_from_string(const std::string& name);

/// Estimated unwanted-variation basis. w_hat is m x k; the replicate
/// estimator additionally stores its alpha_hat (k x n) so the direct
/// correction Y - W alpha can reuse the loadings observed among the
/// replicate differences instead of refitting them on all of Y.
struct UVModel {
  Matrix w_hat;
  std::optional<Matrix> alpha_hat;
  std::optional<double> nu;
  WSource source = WSource::control_genes;
  std::vector<std::string> parents;  // provenance of combined models

  std::size_t k() const { return w_hat.cols(); }
};

// round(m / 4), at least 1. Cap by the number of replicate differences
// when estimating from them.
std::size_t default_k(std::size_t m);

// W = U Lambda_k from the SVD of the control-gene columns Y_c. Singular
// values at or below 1e-10 * s1 are dropped (with a warning), shrinking
// the effective k; an all-zero Y_c is an error.
UVModel estimate_w_control_genes(const ExpressionMatrix& y, const ControlGeneSet& c,
                                 std::size_t k);

// Replicate-difference estimator: alpha = E_k Q^T from the SVD of the
// difference rows, then W regresses the control-gene columns onto
// alpha_c. `regress_all_features` widens the regression to every feature.
UVModel estimate_w_replicates(const ExpressionMatrix& y, const ControlGeneSet& c,
                              const ReplicateDifferenceSet& d, std::size_t k,
                              bool regress_all_features = false);

// B_r B_r^T from the SVD of w_d at its numerical rank: the projector onto
// the row space of w_d. Off-diagonal structure shows collapsed factors,
// zero diagonal entries show deleted ones.
Matrix replicate_rank_diagnostic(const Matrix& w_d);

// Column concatenation; the implied covariances add.
UVModel combine_w(const UVModel& a, const UVModel& b);

// Top-k left singular directions (scaled by singular values) of the
// residual Y - X beta.
UVModel estimate_w_residuals(const ExpressionMatrix& y, const Matrix& xbeta_hat,
                             std::size_t k);

// One-hot encoding of the cross-classification of the listed factors,
// one column per occupied cell (cells in sorted level-tuple order).
UVModel known_w(const ExpressionMatrix& y, const SampleAnnotations& ann,
                const std::vector<std::string>& factors);

// CSV (m x k, with sample ids) plus a JSON sidecar carrying provenance,
// k and nu. alpha_hat is not persisted.
void save_uv_model(const std::string& basepath, const UVModel& model,
                   const std::vector<std::string>& sample_ids);
UVModel load_uv_model(const std::string& basepath);

}  // namespace uvr

#endif  // UVR_ESTIMATORS_HPP

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

#ifndef UVR_CORRECTION_HPP
#define UVR_CORRECTION_HPP

#include <functional>
#include <string>
#include <vector>

#include "uvr/data.hpp"
#include "uvr/estimators.hpp"
#include "uvr/unsupervised.hpp"

namespace uvr {

struct CorrectionResult {
  ExpressionMatrix y_corrected;
  double removed_energy = 0.0;  // |W alpha|_F
  std::string method;
  std::size_t iterations_run = 0;
};

struct IterationConfig {
  std::size_t max_iters = 30;
  std::size_t w_refresh_period = 10;
  double lambda = 0.0;  // l1 strength of the sparse-dictionary estimator
  double nu = 0.0;      // ridge; 0 selects the fixed-alpha (OLS) mode
  double tol = 1e-6;    // relative objective decrease threshold
};

// Y - W alpha with alpha the least-squares fit at X beta = 0, i.e. the
// projection of Y off the column space of W. Requires rank(W) < m.
CorrectionResult correct_naive_fixed(const ExpressionMatrix& y, const UVModel& w);

// Y - W alpha with alpha = ridge_solve(W, Y, nu). Shrinks each singular
// direction of W by lambda_i / (lambda_i + nu) instead of deleting it.
CorrectionResult correct_random_alpha(const ExpressionMatrix& y, const UVModel& w,
                                      double nu);

// Y - W alpha using the alpha stored in the model (replicate estimator).
CorrectionResult correct_stored_alpha(const ExpressionMatrix& y, const UVModel& w);

// Within each level of `platform_factor`, subtracts the per-feature mean
// of that level's replicate samples from every sample.
CorrectionResult correct_ratio(const ExpressionMatrix& y, const SampleAnnotations& ann,
                               const std::string& platform_factor);

// Largest eigenvalue of W^T W times 1e-3.
double default_nu(const UVModel& w);

// Re-estimates W from the residual matrix during iteration; pipelines bind
// this to the provenance of the initial model.
using WRefresher = std::function<UVModel(const ExpressionMatrix& residual)>;

struct IterateResult {
  CorrectionResult correction;
  FactorEstimate factor;
  // Objective |Y - X beta - W alpha|_F^2 + nu |alpha|_F^2 after every
  // half-step; non-increasing between W refreshes.
  std::vector<double> objective_trace;
  std::vector<std::size_t> refresh_points;  // trace indices where W changed
};

// Alternates the alpha step (ridge when cfg.nu > 0, least squares when
// cfg.nu == 0) with the X beta step delegated to `estimator`. A candidate
// X beta is kept only if it does not increase the data-fit term. Every
// cfg.w_refresh_period iterations W is re-estimated from Y - X beta via
// `refresher` (no refresh when absent).
IterateResult iterate_correction(const ExpressionMatrix& y, const UVModel& w0,
                                 UnsupervisedEstimator& estimator,
                                 const IterationConfig& cfg,
                                 const WRefresher& refresher = nullptr);

// Bisection over lambda until the iterated removed energy lands within 10%
// of target_energy. `energy_of_lambda` reruns the iterative correction;
// lambda0 scales the bracket [1e-6, 1e3] * lambda0.
double calibrate_lambda(const std::function<double(double)>& energy_of_lambda,
                        double lambda0, double target_energy);

}  // namespace uvr

#endif  // UVR_CORRECTION_HPP

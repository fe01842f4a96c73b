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

#include "uvr/correction.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

#include "uvr/errors.hpp"
#include "uvr/kernels.hpp"
#include "uvr/linalg.hpp"

namespace uvr {

namespace {

// Minimum-norm least-squares fit alpha = W^+ R via the SVD of W at its
// numerical rank.
Matrix pinv_solve(const Matrix& w, const Matrix& r) {
  SvdResult dec = svd(w);
  const std::size_t rank = numerical_rank(dec.singular_values);
  Matrix utr(rank, r.cols());
  {
    Matrix full = multiply_at_b(dec.u, r);
    for (std::size_t i = 0; i < rank; ++i)
      for (std::size_t j = 0; j < r.cols(); ++j)
        utr(i, j) = full(i, j) / dec.singular_values[i];
  }
  Matrix v_r(w.cols(), rank);
  for (std::size_t i = 0; i < w.cols(); ++i)
    for (std::size_t j = 0; j < rank; ++j) v_r(i, j) = dec.v(i, j);
  return multiply(v_r, utr);
}

CorrectionResult make_result(const ExpressionMatrix& y, Matrix corrected,
                             double removed, std::string method,
                             std::size_t iterations) {
  CorrectionResult out;
  out.y_corrected = y;
  out.y_corrected.values = std::move(corrected);
  out.removed_energy = removed;
  out.method = std::move(method);
  out.iterations_run = iterations;
  return out;
}

}  // namespace

CorrectionResult correct_naive_fixed(const ExpressionMatrix& y, const UVModel& w) {
  const std::size_t m = y.values.rows();
  if (w.k() == 0 || max_abs(w.w_hat) == 0.0)
    return make_result(y, y.values, 0.0, "naive-fixed(k=0)", 1);
  if (w.w_hat.rows() != m) throw NumericalError("correct_naive_fixed: row mismatch");

  Matrix basis = orthonormal_basis(w.w_hat);
  if (basis.cols() >= m)
    throw NumericalError(
        "correct_naive_fixed: rank(W) >= m would remove the entire matrix");

  Matrix coords = multiply_at_b(basis, y.values);   // r x n
  Matrix removed_part = multiply(basis, coords);    // projection onto col(W)
  Matrix corrected = subtract(y.values, removed_part);
  std::ostringstream label;
  label << "naive-fixed(k=" << w.k() << ")";
  return make_result(y, std::move(corrected), frobenius_norm(removed_part),
                     label.str(), 1);
}

CorrectionResult correct_random_alpha(const ExpressionMatrix& y, const UVModel& w,
                                      double nu) {
  if (nu <= 0.0) throw NumericalError("correct_random_alpha: nu must be positive");
  if (w.w_hat.rows() != y.values.rows())
    throw NumericalError("correct_random_alpha: row mismatch");
  if (w.k() == 0)
    return make_result(y, y.values, 0.0, "random-alpha(k=0)", 1);

  Matrix alpha = ridge_solve(w.w_hat, y.values, nu);
  Matrix removed_part = multiply(w.w_hat, alpha);
  Matrix corrected = subtract(y.values, removed_part);
  std::ostringstream label;
  label << "random-alpha(k=" << w.k() << ",nu=" << nu << ")";
  return make_result(y, std::move(corrected), frobenius_norm(removed_part),
                     label.str(), 1);
}

CorrectionResult correct_stored_alpha(const ExpressionMatrix& y, const UVModel& w) {
  if (!w.alpha_hat)
    throw NumericalError("correct_stored_alpha: model carries no alpha");
  if (w.w_hat.rows() != y.values.rows() || w.alpha_hat->cols() != y.values.cols())
    throw NumericalError("correct_stored_alpha: shape mismatch");
  Matrix removed_part = multiply(w.w_hat, *w.alpha_hat);
  Matrix corrected = subtract(y.values, removed_part);
  std::ostringstream label;
  label << to_string(w.source) << "-direct(k=" << w.k() << ")";
  return make_result(y, std::move(corrected), frobenius_norm(removed_part),
                     label.str(), 1);
}

CorrectionResult correct_ratio(const ExpressionMatrix& y, const SampleAnnotations& ann,
                               const std::string& platform_factor) {
  const std::size_t m = y.values.rows(), n = y.values.cols();
  std::map<std::string, std::vector<std::size_t>> batches;
  for (std::size_t i = 0; i < m; ++i)
    batches[ann.level_of(y.sample_ids[i], platform_factor)].push_back(i);

  Matrix corrected = y.values;
  for (const auto& [level, members] : batches) {
    std::vector<std::size_t> reps;
    for (std::size_t i : members) {
      const auto* info = ann.find(y.sample_ids[i]);
      if (info != nullptr && info->replicate_group) reps.push_back(i);
    }
    if (reps.empty())
      throw DataError("correct_ratio: batch '" + level + "' has no replicate sample");
    for (std::size_t j = 0; j < n; ++j) {
      double mean = 0.0;
      for (std::size_t i : reps) mean += y.values(i, j);
      mean /= static_cast<double>(reps.size());
      for (std::size_t i : members) corrected(i, j) -= mean;
    }
  }
  const double removed = frobenius_norm(subtract(y.values, corrected));
  return make_result(y, std::move(corrected), removed,
                     "ratio(" + platform_factor + ")", 1);
}

double default_nu(const UVModel& w) {
  if (w.k() == 0 || max_abs(w.w_hat) == 0.0)
    throw NumericalError("default_nu: zero model");
  SvdResult dec = truncated_svd(w.w_hat, 1);
  const double s1 = dec.singular_values[0];
  return s1 * s1 * 1e-3;  // largest eigenvalue of W^T W, scaled
}

IterateResult iterate_correction(const ExpressionMatrix& y, const UVModel& w0,
                                 UnsupervisedEstimator& estimator,
                                 const IterationConfig& cfg,
                                 const WRefresher& refresher) {
  if (cfg.max_iters < 1) throw NumericalError("iterate_correction: max_iters >= 1");
  if (cfg.w_refresh_period < 1)
    throw NumericalError("iterate_correction: w_refresh_period >= 1");
  if (cfg.nu < 0.0) throw NumericalError("iterate_correction: nu must be >= 0");

  const std::size_t m = y.values.rows(), n = y.values.cols();
  Matrix w = w0.w_hat;
  auto check_fixed_mode = [&](const Matrix& wm) {
    if (cfg.nu == 0.0 && orthonormal_basis(wm).cols() >= m)
      throw NumericalError(
          "iterate_correction: fixed-alpha mode requires rank(W) < m");
  };
  check_fixed_mode(w);

  Matrix xb(m, n);
  FactorEstimate factor;
  factor.x_hat = Matrix(m, 0);
  factor.beta_hat = Matrix(0, n);

  IterateResult out;
  Matrix alpha;
  Matrix w_alpha(m, n);
  double prev_obj = std::numeric_limits<double>::infinity();
  bool window_start = true;  // first iteration or just after a refresh
  std::size_t iterations = 0;

  for (std::size_t it = 1; it <= cfg.max_iters; ++it) {
    iterations = it;
    if (it > 1 && (it - 1) % cfg.w_refresh_period == 0 && refresher) {
      ExpressionMatrix residual = y;
      residual.values = subtract(y.values, xb);
      UVModel refreshed = refresher(residual);
      w = refreshed.w_hat;
      check_fixed_mode(w);
      out.refresh_points.push_back(out.objective_trace.size());
      window_start = true;
    }

    // alpha step at the current X beta. The first step of a model carrying
    // a stored alpha (replicate estimator) reuses it, so one iteration
    // reproduces that model's own non-iterative correction; later steps
    // refit by ridge against Y - X beta.
    Matrix r = subtract(y.values, xb);
    if (it == 1 && w0.alpha_hat && w0.alpha_hat->cols() == n) {
      alpha = *w0.alpha_hat;
    } else {
      alpha = cfg.nu > 0.0 ? ridge_solve(w, r, cfg.nu) : pinv_solve(w, r);
    }
    w_alpha = multiply(w, alpha);
    const double penalty = cfg.nu * frobenius_norm_sq(alpha);
    const double obj_alpha =
        frobenius_norm_sq(subtract(r, w_alpha)) + penalty;
    out.objective_trace.push_back(obj_alpha);

    // X beta step on the corrected matrix; keep the candidate only if it
    // does not increase the fit term.
    Matrix y_tilde = subtract(y.values, w_alpha);
    FactorEstimate candidate;
    try {
      candidate = estimator.fit(y_tilde);
    } catch (const std::exception& e) {
      throw NumericalError("iterate_correction: estimator failed at iteration " +
                           std::to_string(it) + ": " + e.what());
    }
    Matrix cand_xb = candidate.xbeta();
    const double fit_cand = frobenius_norm_sq(subtract(y_tilde, cand_xb));
    const double fit_prev = frobenius_norm_sq(subtract(y_tilde, xb));
    if (fit_cand <= fit_prev) {
      xb = std::move(cand_xb);
      factor = std::move(candidate);
    }
    const double obj_xb =
        frobenius_norm_sq(subtract(subtract(y.values, xb), w_alpha)) + penalty;
    out.objective_trace.push_back(obj_xb);

    if (!window_start &&
        prev_obj - obj_xb < cfg.tol * std::max(1.0, std::abs(prev_obj))) {
      prev_obj = obj_xb;
      break;
    }
    prev_obj = obj_xb;
    window_start = false;
  }

  Matrix corrected = subtract(y.values, w_alpha);
  std::ostringstream label;
  label << "iterated(" << to_string(w0.source) << ",nu=" << cfg.nu
        << ",lambda=" << cfg.lambda << ")";
  out.correction = make_result(y, std::move(corrected), frobenius_norm(w_alpha),
                               label.str(), iterations);
  out.factor = std::move(factor);
  return out;
}

double calibrate_lambda(const std::function<double(double)>& energy_of_lambda,
                        double lambda0, double target_energy) {
  if (!(lambda0 > 0.0))
    throw NumericalError("calibrate_lambda: lambda0 must be positive");
  if (!(target_energy > 0.0))
    throw NumericalError("calibrate_lambda: target energy must be positive");

  const double band = 0.1 * target_energy;
  auto within = [&](double e) { return std::abs(e - target_energy) <= band; };

  double lo = 1e-6 * lambda0, hi = 1e3 * lambda0;
  double e_lo = energy_of_lambda(lo);
  if (within(e_lo)) return lo;
  double e_hi = energy_of_lambda(hi);
  if (e_hi < target_energy - band && e_lo < target_energy - band)
    throw NumericalError(
        "calibrate_lambda: bisection bracket not found in [1e-6, 1e3] * lambda0");
  if (within(e_hi) && e_lo > target_energy + band) return hi;

  // Removed energy grows toward the non-iterative value as lambda grows.
  for (int it = 0; it < 48; ++it) {
    const double mid = std::sqrt(lo * hi);
    const double e_mid = energy_of_lambda(mid);
    if (within(e_mid)) return mid;
    if (e_mid < target_energy - band)
      lo = mid;
    else
      hi = mid;
    if (hi / lo < 1.0 + 1e-9) break;
  }
  return hi;  // closest achievable endpoint of the shrunken bracket
}

}  // namespace uvr

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

#include "uvr/unsupervised.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "uvr/errors.hpp"
#include "uvr/kernels.hpp"
#include "uvr/rng.hpp"

namespace uvr {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<double> row_norms_sq(const Matrix& y) {
  std::vector<double> out(y.rows(), 0.0);
  for (std::size_t i = 0; i < y.rows(); ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < y.cols(); ++j) s += y(i, j) * y(i, j);
    out[i] = s;
  }
  return out;
}

// k-means++ seeding; returns the initial centers as a k x n matrix.
Matrix seed_centers(const Matrix& y, std::size_t k, Rng& rng) {
  const std::size_t m = y.rows(), n = y.cols();
  Matrix centers(k, n);
  std::vector<double> d2(m, kInf);

  std::size_t first = static_cast<std::size_t>(rng.uniform_index(m));
  for (std::size_t j = 0; j < n; ++j) centers(0, j) = y(first, j);

  for (std::size_t c = 1; c < k; ++c) {
    double total = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        const double diff = y(i, j) - centers(c - 1, j);
        s += diff * diff;
      }
      d2[i] = std::min(d2[i], s);
      total += d2[i];
    }
    std::size_t pick;
    if (total <= 0.0) {
      pick = static_cast<std::size_t>(rng.uniform_index(m));
    } else {
      const double target = rng.uniform01() * total;
      double run = 0.0;
      pick = m - 1;
      for (std::size_t i = 0; i < m; ++i) {
        run += d2[i];
        if (run >= target) {
          pick = i;
          break;
        }
      }
    }
    for (std::size_t j = 0; j < n; ++j) centers(c, j) = y(pick, j);
  }
  return centers;
}

struct LloydRun {
  std::vector<std::size_t> assign;
  Matrix centers;
  double objective = kInf;
  std::vector<double> trace;  // objective after each assign+update round
};

double lloyd_objective(const Matrix& y, const LloydRun& run) {
  double obj = 0.0;
  for (std::size_t i = 0; i < y.rows(); ++i)
    for (std::size_t j = 0; j < y.cols(); ++j) {
      const double d = y(i, j) - run.centers(run.assign[i], j);
      obj += d * d;
    }
  return obj;
}

LloydRun lloyd(const Matrix& y, std::size_t k, Rng& rng) {
  const std::size_t m = y.rows(), n = y.cols();
  LloydRun run;
  run.centers = seed_centers(y, k, rng);
  run.assign.assign(m, 0);

  for (int iter = 0; iter < 200; ++iter) {
    // Assignment: argmin_j |y_i|^2 - 2 y_i . c_j + |c_j|^2, lowest j on ties.
    Matrix cross = multiply_a_bt(y, run.centers);  // m x k
    const std::vector<double> cnorm = row_norms_sq(run.centers);
    bool changed = false;
    for (std::size_t i = 0; i < m; ++i) {
      std::size_t best = 0;
      double bestval = kInf;
      for (std::size_t j = 0; j < k; ++j) {
        const double val = cnorm[j] - 2.0 * cross(i, j);
        if (val < bestval) {
          bestval = val;
          best = j;
        }
      }
      if (run.assign[i] != best) {
        run.assign[i] = best;
        changed = true;
      }
    }
    if (!changed && iter > 0) break;

    // Update step.
    run.centers = Matrix(k, n);
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < m; ++i) {
      counts[run.assign[i]]++;
      for (std::size_t j = 0; j < n; ++j) run.centers(run.assign[i], j) += y(i, j);
    }
    for (std::size_t c = 0; c < k; ++c)
      if (counts[c] > 0)
        for (std::size_t j = 0; j < n; ++j)
          run.centers(c, j) /= static_cast<double>(counts[c]);

    // Empty clusters grab the sample farthest from its current center.
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] > 0) continue;
      std::size_t far = 0;
      double fardist = -1.0;
      for (std::size_t i = 0; i < m; ++i) {
        if (counts[run.assign[i]] <= 1) continue;  // do not empty another cluster
        double s = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
          const double diff = y(i, j) - run.centers(run.assign[i], j);
          s += diff * diff;
        }
        if (s > fardist) {
          fardist = s;
          far = i;
        }
      }
      if (fardist < 0.0) continue;  // fewer distinct points than clusters
      counts[run.assign[far]]--;
      counts[c] = 1;
      run.assign[far] = c;
      for (std::size_t j = 0; j < n; ++j) run.centers(c, j) = y(far, j);
    }
    run.trace.push_back(lloyd_objective(y, run));
  }

  run.objective = lloyd_objective(y, run);
  return run;
}

// I - W (W^T W + nu I)^-1 W^T, the inverse of S(W, nu), formed explicitly
// for the small-m Sigma-aware variants.
Matrix s_inverse(const QuadraticNormSpec& spec, std::size_t m) {
  if (spec.nu <= 0.0) throw NumericalError("sigma k-means: nu must be positive");
  if (spec.w.rows() != m && spec.w.cols() != 0)
    throw NumericalError("sigma k-means: spec row count mismatch");
  Matrix s_inv = Matrix::identity(m);
  if (spec.w.cols() == 0) return s_inv;
  Matrix g = multiply_at_b(spec.w, spec.w);
  for (std::size_t i = 0; i < g.rows(); ++i) g(i, i) += spec.nu;
  Matrix solved = spd_solve(g, transpose(spec.w));   // (W^T W + nu I)^-1 W^T
  Matrix proj = multiply(spec.w, solved);            // W (...) W^T
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) s_inv(i, j) -= proj(i, j);
  return s_inv;
}

double sigma_objective(const Matrix& r, const Matrix& s_inv) {
  return dot(r, multiply(s_inv, r));
}

// GLS update of beta for membership X: solve (X^T S^-1 X) beta = X^T S^-1 Y
// over occupied clusters; empty clusters keep their previous center.
void gls_centers(const Matrix& y, const Matrix& s_inv,
                 const std::vector<std::size_t>& assign, std::size_t k,
                 Matrix& centers) {
  const std::size_t m = y.rows();
  std::vector<std::vector<std::size_t>> members(k);
  for (std::size_t i = 0; i < m; ++i) members[assign[i]].push_back(i);
  std::vector<std::size_t> occupied;
  for (std::size_t c = 0; c < k; ++c)
    if (!members[c].empty()) occupied.push_back(c);
  const std::size_t ko = occupied.size();

  Matrix siy = multiply(s_inv, y);  // m x n
  Matrix lhs(ko, ko);
  Matrix rhs(ko, y.cols());
  for (std::size_t a = 0; a < ko; ++a) {
    for (std::size_t b = 0; b < ko; ++b) {
      double s = 0.0;
      for (std::size_t i : members[occupied[a]])
        for (std::size_t l : members[occupied[b]]) s += s_inv(i, l);
      lhs(a, b) = s;
    }
    for (std::size_t j = 0; j < y.cols(); ++j) {
      double s = 0.0;
      for (std::size_t i : members[occupied[a]]) s += siy(i, j);
      rhs(a, j) = s;
    }
  }
  Matrix sol = spd_solve(lhs, rhs);
  for (std::size_t a = 0; a < ko; ++a)
    for (std::size_t j = 0; j < y.cols(); ++j) centers(occupied[a], j) = sol(a, j);
}

// Projection of a row onto the probability simplex.
void project_simplex(std::vector<double>& u) {
  std::vector<double> sorted = u;
  std::sort(sorted.begin(), sorted.end(), std::greater<double>());
  double cum = 0.0, tau = 0.0;
  for (std::size_t j = 0; j < sorted.size(); ++j) {
    cum += sorted[j];
    const double t = (1.0 - cum) / static_cast<double>(j + 1);
    if (sorted[j] + t > 0.0) tau = t;
  }
  for (double& x : u) x = std::max(0.0, x + tau);
}

double soft_threshold(double x, double t) {
  if (x > t) return x - t;
  if (x < -t) return x + t;
  return 0.0;
}

}  // namespace

Matrix FactorEstimate::xbeta() const {
  if (x_hat.cols() == 0 || x_hat.rows() == 0) return Matrix(x_hat.rows(), beta_hat.cols());
  return multiply(x_hat, beta_hat);
}

KMeansResult kmeans(const Matrix& y, std::size_t k, std::size_t n_restarts,
                    std::uint64_t seed) {
  if (k < 1 || k > y.rows()) throw NumericalError("kmeans: k out of range");
  if (n_restarts < 1) throw NumericalError("kmeans: n_restarts must be >= 1");

  std::vector<LloydRun> runs(n_restarts);
  const std::int64_t r_count = static_cast<std::int64_t>(n_restarts);
#pragma omp parallel for schedule(dynamic)
  for (std::int64_t r = 0; r < r_count; ++r) {
    Rng rng(Rng::mix(seed, static_cast<std::uint64_t>(r)));
    runs[static_cast<std::size_t>(r)] = lloyd(y, k, rng);
  }

  std::size_t best = 0;
  for (std::size_t r = 1; r < n_restarts; ++r)
    if (runs[r].objective < runs[best].objective) best = r;

  const LloydRun& win = runs[best];
  KMeansResult out;
  out.objective = win.objective;
  out.objective_trace = win.trace;
  out.restart_objectives.reserve(n_restarts);
  for (const LloydRun& run : runs) out.restart_objectives.push_back(run.objective);
  out.partition.k = k;
  out.partition.assignments = win.assign;
  out.factor.constraint_kind = ConstraintKind::membership;
  out.factor.x_hat = Matrix(y.rows(), k);
  for (std::size_t i = 0; i < y.rows(); ++i) out.factor.x_hat(i, win.assign[i]) = 1.0;
  out.factor.beta_hat = win.centers;
  return out;
}

SigmaKMeansResult kmeans_sigma_rowwise(const Matrix& y, std::size_t k,
                                       const QuadraticNormSpec& spec,
                                       std::uint64_t seed, std::size_t n_restarts) {
  const std::size_t m = y.rows(), n = y.cols();
  if (k < 1 || k > m) throw NumericalError("kmeans_sigma_rowwise: k out of range");
  Matrix s_inv = s_inverse(spec, m);

  SigmaKMeansResult best;
  best.objective = kInf;

  for (std::size_t r = 0; r < n_restarts; ++r) {
    Rng rng(Rng::mix(seed, 0x5167u + r));
    Matrix centers(k, y.cols());
    std::vector<std::size_t> assign(m, 0);
    if (r % 2 == 1) {
      // Odd restarts start from a uniformly random assignment, which covers
      // partitions a nearest-center seeding can never produce.
      for (std::size_t i = 0; i < m; ++i)
        assign[i] = static_cast<std::size_t>(rng.uniform_index(k));
    } else {
      centers = seed_centers(y, k, rng);
      Matrix cross = multiply_a_bt(y, centers);
      std::vector<double> cnorm = row_norms_sq(centers);
      for (std::size_t i = 0; i < m; ++i) {
        double bestval = kInf;
        for (std::size_t c = 0; c < k; ++c) {
          const double val = cnorm[c] - 2.0 * cross(i, c);
          if (val < bestval) {
            bestval = val;
            assign[i] = c;
          }
        }
      }
    }
    gls_centers(y, s_inv, assign, k, centers);

    Matrix resid(m, n);
    auto rebuild_residual = [&]() {
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) resid(i, j) = y(i, j) - centers(assign[i], j);
    };
    rebuild_residual();
    Matrix msr = multiply(s_inv, resid);  // kept in sync with resid

    for (int sweep = 0; sweep < 100; ++sweep) {
      bool changed = false;
      for (std::size_t i = 0; i < m; ++i) {
        // Delta objective of moving row i to cluster c:
        // 2 d . msr_i + s_inv(i,i) |d|^2 with d = beta_old - beta_new.
        const std::size_t cur = assign[i];
        double best_delta = 0.0;
        std::size_t best_c = cur;
        for (std::size_t c = 0; c < k; ++c) {
          if (c == cur) continue;
          double cross_term = 0.0, d_sq = 0.0;
          for (std::size_t j = 0; j < n; ++j) {
            const double d = centers(cur, j) - centers(c, j);
            cross_term += d * msr(i, j);
            d_sq += d * d;
          }
          const double delta = 2.0 * cross_term + s_inv(i, i) * d_sq;
          if (delta < best_delta - 1e-12) {
            best_delta = delta;
            best_c = c;
          }
        }
        if (best_c != cur) {
          changed = true;
          // resid row i changes by d; msr += s_inv(:,i) d^T.
          std::vector<double> d(n);
          for (std::size_t j = 0; j < n; ++j)
            d[j] = centers(cur, j) - centers(best_c, j);
          assign[i] = best_c;
          for (std::size_t j = 0; j < n; ++j) resid(i, j) += d[j];
          for (std::size_t l = 0; l < m; ++l) {
            const double f = s_inv(l, i);
            if (f == 0.0) continue;
            for (std::size_t j = 0; j < n; ++j) msr(l, j) += f * d[j];
          }
        }
      }
      gls_centers(y, s_inv, assign, k, centers);
      rebuild_residual();
      msr = multiply(s_inv, resid);
      if (!changed) break;
    }

    const double obj = sigma_objective(resid, s_inv);
    if (obj < best.objective) {
      best.objective = obj;
      best.partition.k = k;
      best.partition.assignments = assign;
    }
  }
  return best;
}

SigmaKMeansResult kmeans_sigma_relaxed(const Matrix& y, std::size_t k,
                                       const QuadraticNormSpec& spec,
                                       std::uint64_t seed, std::size_t n_restarts) {
  const std::size_t m = y.rows(), n = y.cols();
  if (k < 1 || k > m) throw NumericalError("kmeans_sigma_relaxed: k out of range");
  Matrix s_inv = s_inverse(spec, m);

  SigmaKMeansResult best;
  best.objective = kInf;

  for (std::size_t r = 0; r < n_restarts; ++r) {
    Rng rng(Rng::mix(seed, 0xae1a0u + r));
    Matrix x(m, k);
    if (r % 2 == 1) {
      for (std::size_t i = 0; i < m; ++i)
        x(i, static_cast<std::size_t>(rng.uniform_index(k))) = 1.0;
    } else {  // feasible start: hard nearest-center memberships
      Matrix centers = seed_centers(y, k, rng);
      Matrix cross = multiply_a_bt(y, centers);
      std::vector<double> cnorm = row_norms_sq(centers);
      for (std::size_t i = 0; i < m; ++i) {
        std::size_t a = 0;
        double bestval = kInf;
        for (std::size_t c = 0; c < k; ++c) {
          const double val = cnorm[c] - 2.0 * cross(i, c);
          if (val < bestval) {
            bestval = val;
            a = c;
          }
        }
        x(i, a) = 1.0;
      }
    }

    auto beta_update = [&](const Matrix& xm) {
      Matrix six = multiply(s_inv, xm);           // m x k
      Matrix lhs = multiply_at_b(xm, six);        // k x k
      for (std::size_t c = 0; c < k; ++c) lhs(c, c) += 1e-10;
      Matrix rhs = multiply_at_b(six, y);         // k x n
      return spd_solve(lhs, rhs);
    };
    Matrix beta = beta_update(x);

    auto objective_of = [&](const Matrix& xm, const Matrix& bm) {
      Matrix resid = subtract(y, multiply(xm, bm));
      return sigma_objective(resid, s_inv);
    };

    double obj = objective_of(x, beta);
    double step = 1.0 / std::max(1e-12, frobenius_norm_sq(s_inv) *
                                            std::max(1.0, frobenius_norm_sq(beta)));
    for (int iter = 0; iter < 300; ++iter) {
      // grad_X = -2 S^-1 (Y - X beta) beta^T
      Matrix resid = subtract(y, multiply(x, beta));
      Matrix grad = scale(multiply(multiply(s_inv, resid), transpose(beta)), -2.0);

      bool accepted = false;
      for (int half = 0; half < 40; ++half) {
        Matrix trial = x;
        for (std::size_t i = 0; i < m; ++i) {
          std::vector<double> row(k);
          for (std::size_t c = 0; c < k; ++c) row[c] = x(i, c) - step * grad(i, c);
          project_simplex(row);
          for (std::size_t c = 0; c < k; ++c) trial(i, c) = row[c];
        }
        const double trial_obj = objective_of(trial, beta);
        if (trial_obj <= obj + 1e-14 * std::abs(obj)) {
          const double moved = max_abs_diff(trial, x);
          x = trial;
          obj = trial_obj;
          accepted = true;
          step *= 1.25;
          if (moved < 1e-12) iter = 300;  // fixed point
          break;
        }
        step *= 0.5;
        if (step < 1e-300)
          throw NumericalError("kmeans_sigma_relaxed: step size underflow");
      }
      if (!accepted) break;
      beta = beta_update(x);
      const double new_obj = objective_of(x, beta);
      if (obj - new_obj < 1e-12 * std::max(1.0, obj) && iter > 3) {
        obj = new_obj;
        break;
      }
      obj = new_obj;
    }

    // Round by row argmax (lowest index on ties) and refit centers.
    std::vector<std::size_t> assign(m, 0);
    for (std::size_t i = 0; i < m; ++i) {
      double bestval = -kInf;
      for (std::size_t c = 0; c < k; ++c) {
        if (x(i, c) > bestval) {
          bestval = x(i, c);
          assign[i] = c;
        }
      }
    }
    Matrix hard_centers(k, n);
    gls_centers(y, s_inv, assign, k, hard_centers);
    Matrix resid(m, n);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j)
        resid(i, j) = y(i, j) - hard_centers(assign[i], j);
    const double hard_obj = sigma_objective(resid, s_inv);
    if (hard_obj < best.objective) {
      best.objective = hard_obj;
      best.partition.k = k;
      best.partition.assignments = assign;
    }
  }
  return best;
}

Matrix lasso_columns(const Matrix& y, const Matrix& x, double lambda) {
  if (x.rows() != y.rows()) throw NumericalError("lasso_columns: row mismatch");
  if (lambda < 0.0) throw NumericalError("lasso_columns: lambda must be >= 0");
  const std::size_t p = x.cols(), n = y.cols();
  Matrix g = multiply_at_b(x, x);    // p x p
  Matrix xty = multiply_at_b(x, y);  // p x n
  Matrix beta(p, n);
  for (std::size_t j = 0; j < n; ++j) {
    for (int sweep = 0; sweep < 500; ++sweep) {
      double max_change = 0.0;
      for (std::size_t l = 0; l < p; ++l) {
        double rho = xty(l, j);
        for (std::size_t q = 0; q < p; ++q)
          if (q != l) rho -= g(l, q) * beta(q, j);
        const double denom = std::max(g(l, l), 1e-12);
        const double updated = soft_threshold(rho, lambda) / denom;
        max_change = std::max(max_change, std::abs(updated - beta(l, j)));
        beta(l, j) = updated;
      }
      if (max_change < 1e-12) break;
    }
  }
  return beta;
}

SparseDictResult sparse_dictionary(const Matrix& y, std::size_t p, double lambda,
                                   std::uint64_t seed, std::size_t max_iters) {
  const std::size_t m = y.rows(), n = y.cols();
  if (p < 1 || p > std::min(m, n)) throw NumericalError("sparse_dictionary: p out of range");
  if (lambda < 0.0) throw NumericalError("sparse_dictionary: lambda must be >= 0");
  (void)seed;  // the SVD initialization is deterministic

  SvdResult init = truncated_svd(y, p);
  Matrix x = init.u;  // orthonormal columns
  Matrix beta(p, n);
  for (std::size_t l = 0; l < p; ++l)
    for (std::size_t j = 0; j < n; ++j)
      beta(l, j) = init.singular_values[l] * init.v(j, l);

  auto objective_of = [&]() {
    Matrix resid = subtract(y, multiply(x, beta));
    double l1 = 0.0;
    const double* bd = beta.data();
    for (std::size_t i = 0; i < beta.size(); ++i) l1 += std::abs(bd[i]);
    return 0.5 * frobenius_norm_sq(resid) + lambda * l1;
  };

  SparseDictResult out;
  double obj = objective_of();
  out.objective_trace.push_back(obj);
  for (std::size_t iter = 0; iter < max_iters; ++iter) {
    beta = lasso_columns(y, x, lambda);

    // X step: each column solves min |E_l - x_l beta_l| over |x_l| = 1.
    Matrix ybt = multiply_a_bt(y, beta);     // m x p
    Matrix bbt = multiply_a_bt(beta, beta);  // p x p
    for (std::size_t l = 0; l < p; ++l) {
      std::vector<double> v(m, 0.0);
      for (std::size_t i = 0; i < m; ++i) {
        double s = ybt(i, l);
        for (std::size_t q = 0; q < p; ++q) s -= x(i, q) * bbt(q, l);
        s += x(i, l) * bbt(l, l);
        v[i] = s;
      }
      double nrm = 0.0;
      for (double t : v) nrm += t * t;
      nrm = std::sqrt(nrm);
      if (nrm > 1e-300) {
        for (std::size_t i = 0; i < m; ++i) x(i, l) = v[i] / nrm;
      }
      // else: the atom is unused (beta_l = 0); keep it as is.
    }

    const double new_obj = objective_of();
    out.objective_trace.push_back(new_obj);
    const bool done = obj - new_obj < 1e-9 * std::max(1.0, obj);
    obj = new_obj;
    if (done) break;
  }

  out.factor.x_hat = std::move(x);
  out.factor.beta_hat = std::move(beta);
  out.factor.constraint_kind = ConstraintKind::unit_norm_columns;
  out.objective = obj;
  return out;
}

Matrix map_shrunk_regression(const Matrix& y, const Matrix& x, double lambda,
                             double nu) {
  if (x.rows() != y.rows()) throw NumericalError("map_shrunk_regression: shape mismatch");
  if (lambda < 0.0 || nu < 0.0)
    throw NumericalError("map_shrunk_regression: penalties must be >= 0");
  const std::size_t p = x.cols(), n = y.cols();
  {
    SvdResult dec = svd(x);
    if (numerical_rank(dec.singular_values) < p)
      throw NumericalError("map_shrunk_regression: x is rank deficient");
  }
  Matrix g = multiply_at_b(x, x);
  Matrix xty = multiply_at_b(x, y);
  if (lambda == 0.0) return spd_solve(g, xty);  // plain (possibly nu-free) OLS

  Matrix g_ridge = g;
  for (std::size_t i = 0; i < p; ++i) g_ridge(i, i) += lambda;

  // r = X^T Y 1 (row sums), v = (nu I + n lambda G M)^-1 lambda M r.
  Matrix r(p, 1);
  for (std::size_t i = 0; i < p; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) s += xty(i, j);
    r(i, 0) = s;
  }
  Matrix mr = spd_solve(g_ridge, r);      // M r
  Matrix gm = multiply(g, spd_solve(g_ridge, Matrix::identity(p)));  // G M
  Matrix lhs(p, p);
  for (std::size_t i = 0; i < p; ++i)
    for (std::size_t j = 0; j < p; ++j)
      lhs(i, j) = (i == j ? nu : 0.0) +
                  static_cast<double>(n) * lambda * 0.5 * (gm(i, j) + gm(j, i));
  Matrix v = spd_solve(lhs, scale(mr, lambda));

  // beta = M (X^T Y - G v 1^T); b = beta + v 1^T.
  Matrix gv = multiply(g, v);  // p x 1
  Matrix rhs = xty;
  for (std::size_t i = 0; i < p; ++i)
    for (std::size_t j = 0; j < n; ++j) rhs(i, j) -= gv(i, 0);
  Matrix beta = spd_solve(g_ridge, rhs);
  for (std::size_t i = 0; i < p; ++i)
    for (std::size_t j = 0; j < n; ++j) beta(i, j) += v(i, 0);
  return beta;
}

FactorEstimate ZeroEstimator::fit(const Matrix& y_tilde) {
  FactorEstimate fe;
  fe.x_hat = Matrix(y_tilde.rows(), 0);
  fe.beta_hat = Matrix(0, y_tilde.cols());
  fe.constraint_kind = ConstraintKind::low_rank;
  return fe;
}

FactorEstimate KMeansEstimator::fit(const Matrix& y_tilde) {
  return kmeans(y_tilde, k_, n_restarts_, seed_).factor;
}

FactorEstimate SparseDictionaryEstimator::fit(const Matrix& y_tilde) {
  return sparse_dictionary(y_tilde, p_, lambda_, seed_).factor;
}

}  // namespace uvr

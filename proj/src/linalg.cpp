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

#include "uvr/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "uvr/errors.hpp"
#include "uvr/kernels.hpp"

namespace uvr {

namespace {

// One-sided Jacobi on a tall matrix stored as d contiguous columns of
// length rows. Orthogonalizes the columns in place and accumulates the
// right rotations into v (d x d, also column-contiguous).
void one_sided_jacobi(std::vector<double>& cols, std::size_t rows, std::size_t d,
                      std::vector<double>& v) {
  v.assign(d * d, 0.0);
  for (std::size_t j = 0; j < d; ++j) v[j * d + j] = 1.0;

  const double tol = 1e-14;
  const int max_sweeps = 64;
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double off = 0.0;
    for (std::size_t i = 0; i + 1 < d; ++i) {
      for (std::size_t j = i + 1; j < d; ++j) {
        double* ci = cols.data() + i * rows;
        double* cj = cols.data() + j * rows;
        double alpha = 0.0, beta = 0.0, gamma = 0.0;
        for (std::size_t l = 0; l < rows; ++l) {
          alpha += ci[l] * ci[l];
          beta += cj[l] * cj[l];
          gamma += ci[l] * cj[l];
        }
        if (alpha == 0.0 || beta == 0.0 || gamma == 0.0) continue;
        const double ratio = std::abs(gamma) / std::sqrt(alpha * beta);
        off = std::max(off, ratio);
        if (ratio <= tol) continue;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = (zeta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (std::size_t l = 0; l < rows; ++l) {
          const double a = ci[l], b = cj[l];
          ci[l] = c * a - s * b;
          cj[l] = s * a + c * b;
        }
        double* vi = v.data() + i * d;
        double* vj = v.data() + j * d;
        for (std::size_t l = 0; l < d; ++l) {
          const double a = vi[l], b = vj[l];
          vi[l] = c * a - s * b;
          vj[l] = s * a + c * b;
        }
      }
    }
    if (off <= tol) break;
  }
}

// Extends the first `have` orthonormal columns of u (m x d) to `want`
// columns using canonical basis vectors, in index order.
void complete_orthonormal(Matrix& u, std::size_t have, std::size_t want) {
  const std::size_t m = u.rows();
  std::size_t next = have;
  for (std::size_t cand = 0; cand < m && next < want; ++cand) {
    std::vector<double> e(m, 0.0);
    e[cand] = 1.0;
    for (std::size_t j = 0; j < next; ++j) {
      double proj = 0.0;
      for (std::size_t l = 0; l < m; ++l) proj += u(l, j) * e[l];
      for (std::size_t l = 0; l < m; ++l) e[l] -= proj * u(l, j);
    }
    double nrm = 0.0;
    for (double x : e) nrm += x * x;
    nrm = std::sqrt(nrm);
    if (nrm < 1e-8) continue;
    for (std::size_t l = 0; l < m; ++l) u(l, next) = e[l] / nrm;
    ++next;
  }
}

}  // namespace

SvdResult svd(const Matrix& a) {
  if (a.rows() == 0 || a.cols() == 0)
    throw NumericalError("svd: empty matrix");
  if (!all_finite(a)) throw NumericalError("svd: non-finite input");

  const bool flip = a.rows() < a.cols();
  const std::size_t big = flip ? a.cols() : a.rows();  // length of each column
  const std::size_t d = flip ? a.rows() : a.cols();    // number of columns

  std::vector<double> cols(big * d);
  for (std::size_t j = 0; j < d; ++j)
    for (std::size_t l = 0; l < big; ++l)
      cols[j * big + l] = flip ? a(j, l) : a(l, j);

  std::vector<double> vacc;
  one_sided_jacobi(cols, big, d, vacc);

  std::vector<double> sigma(d);
  for (std::size_t j = 0; j < d; ++j) {
    double s = 0.0;
    const double* cj = cols.data() + j * big;
    for (std::size_t l = 0; l < big; ++l) s += cj[l] * cj[l];
    sigma[j] = std::sqrt(s);
  }

  // Non-increasing order; ties keep the working-column order.
  std::vector<std::size_t> order(d);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return sigma[x] > sigma[y]; });

  const double smax = sigma[order[0]];
  Matrix left(big, d), right(d, d);
  std::vector<double> s_sorted(d);
  std::size_t nonzero = 0;
  for (std::size_t pos = 0; pos < d; ++pos) {
    const std::size_t j = order[pos];
    s_sorted[pos] = sigma[j];
    for (std::size_t l = 0; l < d; ++l) right(l, pos) = vacc[j * d + l];
    if (sigma[j] > smax * 1e-300 && sigma[j] > 0.0) {
      const double* cj = cols.data() + j * big;
      for (std::size_t l = 0; l < big; ++l) left(l, pos) = cj[l] / sigma[j];
      nonzero = pos + 1;
    }
  }
  if (nonzero < d) complete_orthonormal(left, nonzero, d);

  // Sign convention: largest-magnitude entry of each left vector positive.
  for (std::size_t j = 0; j < d; ++j) {
    std::size_t arg = 0;
    double best = -1.0;
    for (std::size_t l = 0; l < big; ++l) {
      const double v = std::abs(left(l, j));
      if (v > best) {
        best = v;
        arg = l;
      }
    }
    if (left(arg, j) < 0.0) {
      for (std::size_t l = 0; l < big; ++l) left(l, j) = -left(l, j);
      for (std::size_t l = 0; l < d; ++l) right(l, j) = -right(l, j);
    }
  }

  SvdResult out;
  out.singular_values = std::move(s_sorted);
  if (flip) {
    out.u = std::move(right);
    out.v = std::move(left);
  } else {
    out.u = std::move(left);
    out.v = std::move(right);
  }
  return out;
}

SvdResult truncated_svd(const Matrix& a, std::size_t k) {
  const std::size_t d = std::min(a.rows(), a.cols());
  if (k < 1 || k > d) throw NumericalError("truncated_svd: rank out of range");
  SvdResult full = svd(a);
  if (k == d) return full;
  SvdResult out;
  out.singular_values.assign(full.singular_values.begin(),
                             full.singular_values.begin() + k);
  out.u = Matrix(full.u.rows(), k);
  out.v = Matrix(full.v.rows(), k);
  for (std::size_t i = 0; i < full.u.rows(); ++i)
    for (std::size_t j = 0; j < k; ++j) out.u(i, j) = full.u(i, j);
  for (std::size_t i = 0; i < full.v.rows(); ++i)
    for (std::size_t j = 0; j < k; ++j) out.v(i, j) = full.v(i, j);
  return out;
}

EigResult sym_eig(const Matrix& a) {
  if (a.rows() != a.cols() || a.rows() == 0)
    throw NumericalError("sym_eig: square matrix required");
  if (!all_finite(a)) throw NumericalError("sym_eig: non-finite input");
  const std::size_t n = a.rows();
  Matrix w = a;
  Matrix v = Matrix::identity(n);

  double scale = 0.0;
  for (std::size_t i = 0; i < n; ++i) scale = std::max(scale, std::abs(w(i, i)));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) scale = std::max(scale, std::abs(w(i, j)));
  const double stop = (scale > 0.0 ? scale : 1.0) * 1e-15;

  const int max_sweeps = 64;
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = w(p, q);
        off = std::max(off, std::abs(apq));
        if (std::abs(apq) <= stop) continue;
        const double theta = (w(q, q) - w(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(1.0 + theta * theta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (std::size_t l = 0; l < n; ++l) {
          const double wlp = w(l, p), wlq = w(l, q);
          w(l, p) = c * wlp - s * wlq;
          w(l, q) = s * wlp + c * wlq;
        }
        for (std::size_t l = 0; l < n; ++l) {
          const double wpl = w(p, l), wql = w(q, l);
          w(p, l) = c * wpl - s * wql;
          w(q, l) = s * wpl + c * wql;
        }
        for (std::size_t l = 0; l < n; ++l) {
          const double vlp = v(l, p), vlq = v(l, q);
          v(l, p) = c * vlp - s * vlq;
          v(l, q) = s * vlp + c * vlq;
        }
      }
    }
    if (off <= stop) break;
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return w(x, x) > w(y, y); });

  EigResult out;
  out.values.resize(n);
  out.vectors = Matrix(n, n);
  for (std::size_t pos = 0; pos < n; ++pos) {
    const std::size_t j = order[pos];
    out.values[pos] = w(j, j);
    std::size_t arg = 0;
    double best = -1.0;
    for (std::size_t l = 0; l < n; ++l) {
      if (std::abs(v(l, j)) > best) {
        best = std::abs(v(l, j));
        arg = l;
      }
    }
    const double sign = v(arg, j) < 0.0 ? -1.0 : 1.0;
    for (std::size_t l = 0; l < n; ++l) out.vectors(l, pos) = sign * v(l, j);
  }
  return out;
}

Matrix spd_solve(const Matrix& g, const Matrix& b) {
  if (g.rows() != g.cols()) throw NumericalError("spd_solve: square matrix required");
  if (g.rows() != b.rows()) throw NumericalError("spd_solve: non-conforming shapes");
  const std::size_t k = g.rows();
  Matrix l(k, k);
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      double s = g(i, j);
      for (std::size_t p = 0; p < j; ++p) s -= l(i, p) * l(j, p);
      if (i == j) {
        if (s <= 0.0) throw NumericalError("spd_solve: matrix not positive definite");
        l(i, i) = std::sqrt(s);
      } else {
        l(i, j) = s / l(j, j);
      }
    }
  }
  Matrix x = b;
  const std::size_t n = b.cols();
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < k; ++i) {  // L z = b
      double s = x(i, j);
      for (std::size_t p = 0; p < i; ++p) s -= l(i, p) * x(p, j);
      x(i, j) = s / l(i, i);
    }
    for (std::size_t ii = k; ii-- > 0;) {  // L^T x = z
      double s = x(ii, j);
      for (std::size_t p = ii + 1; p < k; ++p) s -= l(p, ii) * x(p, j);
      x(ii, j) = s / l(ii, ii);
    }
  }
  return x;
}

Matrix ridge_solve(const Matrix& w, const Matrix& r, double nu) {
  if (nu <= 0.0) throw NumericalError("ridge_solve: nu must be positive");
  if (w.rows() != r.rows()) throw NumericalError("ridge_solve: non-conforming shapes");
  const std::size_t k = w.cols();
  if (k == 0) return Matrix(0, r.cols());
  Matrix g = multiply_at_b(w, w);
  for (std::size_t i = 0; i < k; ++i) g(i, i) += nu;
  return spd_solve(g, multiply_at_b(w, r));
}

double quad_norm_sq(const Matrix& r, const QuadraticNormSpec& spec) {
  if (spec.nu <= 0.0) throw NumericalError("quad_norm_sq: nu must be positive");
  if (spec.w.rows() != r.rows())
    throw NumericalError("quad_norm_sq: shape mismatch between r and spec.w");
  const double base = frobenius_norm_sq(r);
  if (spec.w.cols() == 0) return base;
  Matrix wtr = multiply_at_b(spec.w, r);
  Matrix alpha = ridge_solve(spec.w, r, spec.nu);
  return std::max(0.0, base - dot(wtr, alpha));
}

Matrix sigma_to_w(const Matrix& sigma, double nu) {
  if (sigma.rows() != sigma.cols())
    throw NumericalError("sigma_to_w: square matrix required");
  double asym = 0.0;
  for (std::size_t i = 0; i < sigma.rows(); ++i)
    for (std::size_t j = i + 1; j < sigma.cols(); ++j)
      asym = std::max(asym, std::abs(sigma(i, j) - sigma(j, i)));
  if (asym > 1e-10 * frobenius_norm(sigma))
    throw NumericalError("sigma_to_w: input asymmetric beyond tolerance");
  Matrix sym = sigma;
  for (std::size_t i = 0; i < sym.rows(); ++i)
    for (std::size_t j = 0; j < sym.cols(); ++j)
      sym(i, j) = 0.5 * (sigma(i, j) + sigma(j, i));

  EigResult eig = sym_eig(sym);
  const double lambda_min = eig.values.back();
  if (nu >= lambda_min)
    throw NumericalError("sigma_to_w: nu must be below the smallest eigenvalue");

  const std::size_t m = sym.rows();
  Matrix scaled = eig.vectors;  // U (Lambda - nu I)^(1/2)
  for (std::size_t j = 0; j < m; ++j) {
    const double f = std::sqrt(eig.values[j] - nu);
    for (std::size_t i = 0; i < m; ++i) scaled(i, j) *= f;
  }
  return multiply_a_bt(scaled, eig.vectors);
}

Matrix center_columns(const Matrix& y) {
  Matrix c = y;
  const std::size_t m = y.rows(), n = y.cols();
  for (std::size_t j = 0; j < n; ++j) {
    double mean = 0.0;
    for (std::size_t i = 0; i < m; ++i) mean += y(i, j);
    mean /= static_cast<double>(m);
    for (std::size_t i = 0; i < m; ++i) c(i, j) -= mean;
  }
  return c;
}

Matrix pca_coordinates(const Matrix& y, std::size_t n_components) {
  if (n_components < 1 || n_components > std::min(y.rows(), y.cols()))
    throw NumericalError("pca_coordinates: component count out of range");
  SvdResult dec = truncated_svd(center_columns(y), n_components);
  Matrix scores(y.rows(), n_components);
  for (std::size_t i = 0; i < y.rows(); ++i)
    for (std::size_t j = 0; j < n_components; ++j)
      scores(i, j) = dec.u(i, j) * dec.singular_values[j];
  return scores;
}

std::size_t numerical_rank(const std::vector<double>& singular_values, double rel_tol) {
  if (singular_values.empty() || singular_values.front() <= 0.0) return 0;
  const double cut = singular_values.front() * rel_tol;
  std::size_t r = 0;
  while (r < singular_values.size() && singular_values[r] > cut) ++r;
  return r;
}

Matrix orthonormal_basis(const Matrix& a, double rel_tol) {
  SvdResult dec = svd(a);
  const std::size_t r = numerical_rank(dec.singular_values, rel_tol);
  Matrix q(a.rows(), r);
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < r; ++j) q(i, j) = dec.u(i, j);
  return q;
}

}  // namespace uvr

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

#include "uvr/kernels.hpp"

#include <cmath>
#include <cstdint>

#include "uvr/errors.hpp"

namespace uvr {

namespace {

void check_inner(std::size_t a, std::size_t b, const char* op) {
  if (a != b) throw NumericalError(std::string(op) + ": non-conforming shapes");
}

}  // namespace

namespace serial {

Matrix multiply(const Matrix& a, const Matrix& b) {
  check_inner(a.cols(), b.rows(), "multiply");
  const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
  Matrix c(m, n);
  for (std::size_t i = 0; i < m; ++i) {
    double* ci = c.data() + i * n;
    const double* ai = a.data() + i * k;
    for (std::size_t l = 0; l < k; ++l) {
      const double ail = ai[l];
      if (ail == 0.0) continue;
      const double* bl = b.data() + l * n;
      for (std::size_t j = 0; j < n; ++j) ci[j] += ail * bl[j];
    }
  }
  return c;
}

Matrix multiply_at_b(const Matrix& a, const Matrix& b) {
  check_inner(a.rows(), b.rows(), "multiply_at_b");
  const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
  Matrix c(k, n);
  for (std::size_t i = 0; i < k; ++i) {
    double* ci = c.data() + i * n;
    for (std::size_t l = 0; l < m; ++l) {
      const double ali = a(l, i);
      if (ali == 0.0) continue;
      const double* bl = b.data() + l * n;
      for (std::size_t j = 0; j < n; ++j) ci[j] += ali * bl[j];
    }
  }
  return c;
}

Matrix multiply_a_bt(const Matrix& a, const Matrix& b) {
  check_inner(a.cols(), b.cols(), "multiply_a_bt");
  const std::size_t m = a.rows(), k = a.cols(), n = b.rows();
  Matrix c(m, n);
  for (std::size_t i = 0; i < m; ++i) {
    const double* ai = a.data() + i * k;
    double* ci = c.data() + i * n;
    for (std::size_t j = 0; j < n; ++j) {
      const double* bj = b.data() + j * k;
      double s = 0.0;
      for (std::size_t l = 0; l < k; ++l) s += ai[l] * bj[l];
      ci[j] = s;
    }
  }
  return c;
}

Matrix transpose(const Matrix& a) {
  Matrix t(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
  return t;
}

void axpy(double alpha, const Matrix& x, Matrix& y) {
  if (x.rows() != y.rows() || x.cols() != y.cols())
    throw NumericalError("axpy: non-conforming shapes");
  const double* xd = x.data();
  double* yd = y.data();
  for (std::size_t i = 0; i < x.size(); ++i) yd[i] += alpha * xd[i];
}

}  // namespace serial

namespace parallel {

Matrix multiply(const Matrix& a, const Matrix& b) {
  check_inner(a.cols(), b.rows(), "multiply");
  const std::int64_t m = static_cast<std::int64_t>(a.rows());
  const std::size_t k = a.cols(), n = b.cols();
  Matrix c(a.rows(), n);
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < m; ++i) {
    double* ci = c.data() + static_cast<std::size_t>(i) * n;
    const double* ai = a.data() + static_cast<std::size_t>(i) * k;
    for (std::size_t l = 0; l < k; ++l) {
      const double ail = ai[l];
      if (ail == 0.0) continue;
      const double* bl = b.data() + l * n;
      for (std::size_t j = 0; j < n; ++j) ci[j] += ail * bl[j];
    }
  }
  return c;
}

Matrix multiply_at_b(const Matrix& a, const Matrix& b) {
  check_inner(a.rows(), b.rows(), "multiply_at_b");
  const std::size_t m = a.rows();
  const std::int64_t k = static_cast<std::int64_t>(a.cols());
  const std::size_t n = b.cols();
  Matrix c(a.cols(), n);
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < k; ++i) {
    double* ci = c.data() + static_cast<std::size_t>(i) * n;
    for (std::size_t l = 0; l < m; ++l) {
      const double ali = a(l, static_cast<std::size_t>(i));
      if (ali == 0.0) continue;
      const double* bl = b.data() + l * n;
      for (std::size_t j = 0; j < n; ++j) ci[j] += ali * bl[j];
    }
  }
  return c;
}

Matrix multiply_a_bt(const Matrix& a, const Matrix& b) {
  check_inner(a.cols(), b.cols(), "multiply_a_bt");
  const std::int64_t m = static_cast<std::int64_t>(a.rows());
  const std::size_t k = a.cols(), n = b.rows();
  Matrix c(a.rows(), n);
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < m; ++i) {
    const double* ai = a.data() + static_cast<std::size_t>(i) * k;
    double* ci = c.data() + static_cast<std::size_t>(i) * n;
    for (std::size_t j = 0; j < n; ++j) {
      const double* bj = b.data() + j * k;
      double s = 0.0;
      for (std::size_t l = 0; l < k; ++l) s += ai[l] * bj[l];
      ci[j] = s;
    }
  }
  return c;
}

Matrix transpose(const Matrix& a) {
  const std::int64_t rows = static_cast<std::int64_t>(a.rows());
  Matrix t(a.cols(), a.rows());
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < a.cols(); ++j)
      t(j, static_cast<std::size_t>(i)) = a(static_cast<std::size_t>(i), j);
  return t;
}

void axpy(double alpha, const Matrix& x, Matrix& y) {
  if (x.rows() != y.rows() || x.cols() != y.cols())
    throw NumericalError("axpy: non-conforming shapes");
  const double* xd = x.data();
  double* yd = y.data();
  const std::int64_t sz = static_cast<std::int64_t>(x.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < sz; ++i) yd[i] += alpha * xd[i];
}

}  // namespace parallel

Matrix subtract(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw NumericalError("subtract: non-conforming shapes");
  Matrix c = a;
  double* cd = c.data();
  const double* bd = b.data();
  for (std::size_t i = 0; i < c.size(); ++i) cd[i] -= bd[i];
  return c;
}

Matrix add(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw NumericalError("add: non-conforming shapes");
  Matrix c = a;
  double* cd = c.data();
  const double* bd = b.data();
  for (std::size_t i = 0; i < c.size(); ++i) cd[i] += bd[i];
  return c;
}

Matrix scale(const Matrix& a, double s) {
  Matrix c = a;
  double* cd = c.data();
  for (std::size_t i = 0; i < c.size(); ++i) cd[i] *= s;
  return c;
}

double frobenius_norm_sq(const Matrix& a) {
  double s = 0.0;
  const double* d = a.data();
  for (std::size_t i = 0; i < a.size(); ++i) s += d[i] * d[i];
  return s;
}

double frobenius_norm(const Matrix& a) { return std::sqrt(frobenius_norm_sq(a)); }

double max_abs(const Matrix& a) {
  double s = 0.0;
  const double* d = a.data();
  for (std::size_t i = 0; i < a.size(); ++i) s = std::max(s, std::abs(d[i]));
  return s;
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw NumericalError("max_abs_diff: non-conforming shapes");
  double s = 0.0;
  const double* ad = a.data();
  const double* bd = b.data();
  for (std::size_t i = 0; i < a.size(); ++i) s = std::max(s, std::abs(ad[i] - bd[i]));
  return s;
}

double dot(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw NumericalError("dot: non-conforming shapes");
  double s = 0.0;
  const double* ad = a.data();
  const double* bd = b.data();
  for (std::size_t i = 0; i < a.size(); ++i) s += ad[i] * bd[i];
  return s;
}

bool all_finite(const Matrix& a) {
  const double* d = a.data();
  for (std::size_t i = 0; i < a.size(); ++i)
    if (!std::isfinite(d[i])) return false;
  return true;
}

}  // namespace uvr

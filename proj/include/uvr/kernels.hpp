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

#ifndef UVR_KERNELS_HPP
#define UVR_KERNELS_HPP

#include "uvr/matrix.hpp"

// Dense kernels in two flavors: uvr::serial holds the plain reference
// loops, uvr::parallel the OpenMP versions. Both compute each output
// element with the same summation order, so results are bitwise equal
// and independent of the thread count. The unqualified uvr:: wrappers
// dispatch to the parallel flavor.

namespace uvr {

namespace serial {

Matrix multiply(const Matrix& a, const Matrix& b);        // A * B
Matrix multiply_at_b(const Matrix& a, const Matrix& b);   // A^T * B
Matrix multiply_a_bt(const Matrix& a, const Matrix& b);   // A * B^T
Matrix transpose(const Matrix& a);
void axpy(double alpha, const Matrix& x, Matrix& y);      // y += alpha * x

}  // namespace serial

namespace parallel {

Matrix multiply(const Matrix& a, const Matrix& b);
Matrix multiply_at_b(const Matrix& a, const Matrix& b);
Matrix multiply_a_bt(const Matrix& a, const Matrix& b);
Matrix transpose(const Matrix& a);
void axpy(double alpha, const Matrix& x, Matrix& y);

}  // namespace parallel

inline Matrix multiply(const Matrix& a, const Matrix& b) { return parallel::multiply(a, b); }
inline Matrix multiply_at_b(const Matrix& a, const Matrix& b) {
  return parallel::multiply_at_b(a, b);
}
inline Matrix multiply_a_bt(const Matrix& a, const Matrix& b) {
  return parallel::multiply_a_bt(a, b);
}
inline Matrix transpose(const Matrix& a) { return parallel::transpose(a); }
inline void axpy(double alpha, const Matrix& x, Matrix& y) { parallel::axpy(alpha, x, y); }

// Small helpers that never dominate runtime; one serial implementation.
Matrix subtract(const Matrix& a, const Matrix& b);
Matrix add(const Matrix& a, const Matrix& b);
Matrix scale(const Matrix& a, double s);
double frobenius_norm(const Matrix& a);
double frobenius_norm_sq(const Matrix& a);
double max_abs(const Matrix& a);
double max_abs_diff(const Matrix& a, const Matrix& b);
double dot(const Matrix& a, const Matrix& b);  // <A, B>_F
bool all_finite(const Matrix& a);

}  // namespace uvr

#endif  // UVR_KERNELS_HPP

#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "uvr/errors.hpp"
#include "uvr/kernels.hpp"
#include "uvr/linalg.hpp"
#include "uvr/rng.hpp"

using uvr::Matrix;

namespace {

Matrix reconstruct(const uvr::SvdResult& dec) {
  Matrix us = dec.u;
  for (std::size_t j = 0; j < dec.singular_values.size(); ++j)
    for (std::size_t i = 0; i < us.rows(); ++i) us(i, j) *= dec.singular_values[j];
  return uvr::multiply_a_bt(us, dec.v);
}

double orthonormality_defect(const Matrix& q) {
  Matrix g = uvr::multiply_at_b(q, q);
  return uvr::max_abs_diff(g, Matrix::identity(q.cols()));
}

}  // namespace

TEST_CASE("truncated_svd identity case") {
  uvr::SvdResult dec = uvr::truncated_svd(Matrix::identity(3), 3);
  for (double s : dec.singular_values) CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(orthonormality_defect(dec.u) < 1e-12);
  CHECK(orthonormality_defect(dec.v) < 1e-12);
}

TEST_CASE("truncated_svd diagonal truncation") {
  Matrix d(3, 3);
  d(0, 0) = 3.0;
  d(1, 1) = 2.0;
  d(2, 2) = 1.0;
  uvr::SvdResult dec = uvr::truncated_svd(d, 2);
  Matrix rec = reconstruct(dec);
  Matrix expect(3, 3);
  expect(0, 0) = 3.0;
  expect(1, 1) = 2.0;
  CHECK(uvr::max_abs_diff(rec, expect) < 1e-12);
}

TEST_CASE("truncated_svd frobenius error equals tail singular values") {
  uvr::Rng rng(21);
  Matrix a = oracles::random_matrix(6, 4, rng);
  uvr::SvdResult full = uvr::svd(a);
  uvr::SvdResult low = uvr::truncated_svd(a, 2);
  const double err = uvr::frobenius_norm(uvr::subtract(a, reconstruct(low)));
  const double expect = std::sqrt(full.singular_values[2] * full.singular_values[2] +
                                  full.singular_values[3] * full.singular_values[3]);
  CHECK(err == doctest::Approx(expect).epsilon(1e-10));
}

TEST_CASE("svd factors are orthonormal and ordered, wide and tall") {
  uvr::Rng rng(22);
  for (auto [m, n] : {std::pair<int, int>{8, 5}, {5, 8}, {6, 6}}) {
    Matrix a = oracles::random_matrix(m, n, rng);
    uvr::SvdResult dec = uvr::svd(a);
    CHECK(orthonormality_defect(dec.u) < 1e-10);
    CHECK(orthonormality_defect(dec.v) < 1e-10);
    for (std::size_t i = 1; i < dec.singular_values.size(); ++i)
      CHECK(dec.singular_values[i - 1] >= dec.singular_values[i]);
    CHECK(uvr::max_abs_diff(reconstruct(dec), a) < 1e-10);
  }
}

TEST_CASE("svd is deterministic for a fixed input") {
  uvr::Rng rng(23);
  Matrix a = oracles::random_matrix(7, 9, rng);
  uvr::SvdResult d1 = uvr::svd(a);
  uvr::SvdResult d2 = uvr::svd(a);
  CHECK(d1.u == d2.u);
  CHECK(d1.v == d2.v);
  CHECK(d1.singular_values == d2.singular_values);
}

TEST_CASE("eckart-young: no random rank-k matrix beats the truncation") {
  uvr::Rng rng(24);
  Matrix a = oracles::random_matrix(6, 5, rng);
  uvr::SvdResult low = uvr::truncated_svd(a, 2);
  const double best = uvr::frobenius_norm_sq(uvr::subtract(a, reconstruct(low)));
  for (int t = 0; t < 100; ++t) {
    Matrix u = oracles::random_matrix(6, 2, rng);
    Matrix v = oracles::random_matrix(2, 5, rng);
    Matrix cand = uvr::multiply(u, v);
    CHECK(uvr::frobenius_norm_sq(uvr::subtract(a, cand)) >= best - 1e-9);
  }
}

TEST_CASE("ridge_solve trivial cases") {
  Matrix w0(4, 2);  // zero design
  uvr::Rng rng(25);
  Matrix r = oracles::random_matrix(4, 3, rng);
  CHECK(uvr::max_abs(uvr::ridge_solve(w0, r, 0.5)) == 0.0);

  Matrix eye = Matrix::identity(2);
  Matrix alpha = uvr::ridge_solve(eye, eye, 1.0);
  CHECK(uvr::max_abs_diff(alpha, uvr::scale(eye, 0.5)) < 1e-14);
}

TEST_CASE("ridge_solve matches the gradient-descent minimizer") {
  uvr::Rng rng(26);
  Matrix w = oracles::random_matrix(5, 2, rng);
  Matrix r = oracles::random_matrix(5, 3, rng);
  Matrix direct = uvr::ridge_solve(w, r, 0.7);
  Matrix iterative = oracles::ridge_by_gradient_descent(w, r, 0.7);
  CHECK(uvr::max_abs_diff(direct, iterative) < 1e-6);
}

TEST_CASE("ridge_solve validates inputs") {
  Matrix w(3, 2), r(4, 2);
  CHECK_THROWS_AS((void)uvr::ridge_solve(w, r, 1.0), uvr::NumericalError);
  CHECK_THROWS_AS((void)uvr::ridge_solve(w, Matrix(3, 2), 0.0), uvr::NumericalError);
}

TEST_CASE("quad_norm_sq reduces to frobenius for W = 0") {
  uvr::Rng rng(27);
  Matrix r = oracles::random_matrix(4, 5, rng);
  uvr::QuadraticNormSpec spec{Matrix(4, 2), 0.9};
  CHECK(uvr::quad_norm_sq(r, spec) ==
        doctest::Approx(uvr::frobenius_norm_sq(r)).epsilon(1e-14));
}

TEST_CASE("proposition-1 identity on 50 random triples") {
  uvr::Rng rng(28);
  for (int t = 0; t < 50; ++t) {
    const std::size_t m = 3 + rng.uniform_index(5);
    const std::size_t k = 1 + rng.uniform_index(4);
    const std::size_t n = 1 + rng.uniform_index(5);
    Matrix w = oracles::random_matrix(m, k, rng);
    Matrix r = oracles::random_matrix(m, n, rng);
    const double nu = 0.05 + rng.uniform01();

    Matrix alpha = uvr::ridge_solve(w, r, nu);
    const double lhs = uvr::frobenius_norm_sq(uvr::subtract(r, uvr::multiply(w, alpha))) +
                       nu * uvr::frobenius_norm_sq(alpha);
    const double rhs = uvr::quad_norm_sq(r, {w, nu});
    CHECK(std::abs(lhs - rhs) <= 1e-8 * std::max(1.0, std::abs(rhs)));
  }
}

TEST_CASE("quad_norm_sq equals the explicit dense inverse") {
  uvr::Rng rng(29);
  Matrix w = oracles::random_matrix(4, 2, rng);
  Matrix r = oracles::random_matrix(4, 4, rng);
  const double nu = 0.6;

  // S = nu^-1 (W W^T + nu I); oracle inverts it densely.
  Matrix s = oracles::matmul(w, oracles::transpose(w));
  for (std::size_t i = 0; i < 4; ++i) s(i, i) += nu;
  s = uvr::scale(s, 1.0 / nu);
  Matrix s_inv = oracles::invert(s);
  const double expect = oracles::fro_sq_weighted(r, s_inv);
  CHECK(uvr::quad_norm_sq(r, {w, nu}) == doctest::Approx(expect).epsilon(1e-8));
}

TEST_CASE("woodbury consistency on random instances") {
  uvr::Rng rng(30);
  for (int t = 0; t < 10; ++t) {
    const std::size_t m = 3 + rng.uniform_index(4);
    const std::size_t k = 1 + rng.uniform_index(3);
    Matrix w = oracles::random_matrix(m, k, rng);
    const double nu = 0.1 + rng.uniform01();

    Matrix g = uvr::multiply_at_b(w, w);
    for (std::size_t i = 0; i < k; ++i) g(i, i) += nu;
    Matrix inner = uvr::multiply(w, uvr::spd_solve(g, uvr::transpose(w)));
    Matrix left = Matrix::identity(m);
    left = uvr::subtract(left, inner);  // I - W (W^T W + nu I)^-1 W^T

    Matrix s = uvr::multiply_a_bt(w, w);
    for (std::size_t i = 0; i < m; ++i) s(i, i) += nu;
    s = uvr::scale(s, 1.0 / nu);  // nu^-1 (W W^T + nu I)

    CHECK(uvr::max_abs_diff(uvr::multiply(left, s), Matrix::identity(m)) < 1e-8);
  }
}

TEST_CASE("sigma_to_w spherical and diagonal closed forms") {
  Matrix sph = uvr::scale(Matrix::identity(3), 2.0);
  Matrix w = uvr::sigma_to_w(sph, 1.0);
  CHECK(uvr::max_abs_diff(w, Matrix::identity(3)) < 1e-12);

  Matrix d(2, 2);
  d(0, 0) = 4.0;
  d(1, 1) = 3.0;
  Matrix wd = uvr::sigma_to_w(d, 1.0);
  Matrix expect(2, 2);
  expect(0, 0) = std::sqrt(3.0);
  expect(1, 1) = std::sqrt(2.0);
  CHECK(uvr::max_abs_diff(wd, expect) < 1e-12);
}

TEST_CASE("sigma_to_w reconstructs nu^-1 sigma") {
  uvr::Rng rng(31);
  Matrix b = oracles::random_matrix(5, 5, rng);
  Matrix sigma = oracles::matmul(b, oracles::transpose(b));
  for (std::size_t i = 0; i < 5; ++i) sigma(i, i) += 1.5;  // lambda_min > 1
  const double nu = 0.5;
  Matrix w = uvr::sigma_to_w(sigma, nu);

  Matrix s = uvr::multiply_a_bt(w, w);
  for (std::size_t i = 0; i < 5; ++i) s(i, i) += nu;
  s = uvr::scale(s, 1.0 / nu);
  CHECK(uvr::max_abs_diff(s, uvr::scale(sigma, 1.0 / nu)) < 1e-8);
}

TEST_CASE("sigma_to_w rejects bad inputs") {
  Matrix asym(2, 2);
  asym(0, 0) = 2.0;
  asym(1, 1) = 2.0;
  asym(0, 1) = 0.5;
  asym(1, 0) = -0.5;
  CHECK_THROWS_AS((void)uvr::sigma_to_w(asym, 0.1), uvr::NumericalError);
  CHECK_THROWS_AS((void)uvr::sigma_to_w(Matrix::identity(2), 1.0),
                  uvr::NumericalError);  // nu not below lambda_min
}

TEST_CASE("scale invariance of sigma-weighted argmins") {
  // argmin over a candidate set under |.|^2_Sigma equals the argmin under
  // |.|^2_{c Sigma}: evaluate both quadratic norms on fixed candidates.
  uvr::Rng rng(32);
  Matrix b = oracles::random_matrix(4, 4, rng);
  Matrix sigma = oracles::matmul(b, oracles::transpose(b));
  for (std::size_t i = 0; i < 4; ++i) sigma(i, i) += 2.0;
  Matrix s_inv = oracles::invert(sigma);
  Matrix s_inv_scaled = oracles::invert(uvr::scale(sigma, 3.7));

  Matrix y = oracles::random_matrix(4, 3, rng);
  std::size_t best = 0, best_scaled = 0;
  double val = 1e300, val_scaled = 1e300;
  for (std::size_t c = 0; c < 8; ++c) {
    Matrix cand = oracles::random_matrix(4, 3, rng);
    Matrix resid = uvr::subtract(y, cand);
    const double v = oracles::fro_sq_weighted(resid, s_inv);
    const double vs = oracles::fro_sq_weighted(resid, s_inv_scaled);
    if (v < val) {
      val = v;
      best = c;
    }
    if (vs < val_scaled) {
      val_scaled = vs;
      best_scaled = c;
    }
  }
  CHECK(best == best_scaled);
}

TEST_CASE("pca_coordinates trivial cases") {
  // Points on a line in 2-D: second component vanishes.
  Matrix line(5, 2);
  for (std::size_t i = 0; i < 5; ++i) {
    line(i, 0) = static_cast<double>(i);
    line(i, 1) = 2.0 * static_cast<double>(i) + 1.0;
  }
  Matrix scores = uvr::pca_coordinates(line, 2);
  for (std::size_t i = 0; i < 5; ++i) CHECK(std::abs(scores(i, 1)) < 1e-10);

  // Identical rows: all scores zero.
  Matrix same(4, 3, 1.25);
  Matrix zs = uvr::pca_coordinates(same, 2);
  CHECK(uvr::max_abs(zs) < 1e-12);
}

TEST_CASE("pca score covariance matches covariance eigenvalues") {
  uvr::Rng rng(33);
  Matrix y = oracles::random_matrix(10, 6, rng);
  Matrix scores = uvr::pca_coordinates(y, 6);

  // Score covariance should be diagonal.
  Matrix cov = uvr::multiply_at_b(scores, scores);
  cov = uvr::scale(cov, 1.0 / 9.0);
  for (std::size_t i = 0; i < 6; ++i)
    for (std::size_t j = 0; j < 6; ++j)
      if (i != j) CHECK(std::abs(cov(i, j)) < 1e-10);

  // Its diagonal should match the eigenvalues of the feature covariance.
  Matrix centered = uvr::center_columns(y);
  Matrix feat_cov = uvr::scale(uvr::multiply_at_b(centered, centered), 1.0 / 9.0);
  uvr::EigResult eig = uvr::sym_eig(feat_cov);
  for (std::size_t i = 0; i < 6; ++i)
    CHECK(cov(i, i) == doctest::Approx(eig.values[i]).epsilon(1e-8));
}

TEST_CASE("pca_coordinates rejects out-of-range component counts") {
  CHECK_THROWS_AS((void)uvr::pca_coordinates(Matrix(3, 2), 3), uvr::NumericalError);
}

TEST_CASE("svd rejects non-finite input") {
  Matrix bad(2, 2);
  bad(0, 0) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS((void)uvr::svd(bad), uvr::NumericalError);
}

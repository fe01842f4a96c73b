#include <doctest.h>

#include <cmath>
#include <vector>

#include "oracles.hpp"
#include "uvr/correction.hpp"
#include "uvr/errors.hpp"
#include "uvr/evaluation.hpp"
#include "uvr/kernels.hpp"
#include "uvr/linalg.hpp"
#include "uvr/synthgen.hpp"

using uvr::Matrix;

namespace {

uvr::ExpressionMatrix wrap(const Matrix& values) {
  uvr::ExpressionMatrix em;
  em.values = values;
  for (std::size_t i = 0; i < values.rows(); ++i)
    em.sample_ids.push_back("s" + std::to_string(i));
  for (std::size_t j = 0; j < values.cols(); ++j)
    em.feature_ids.push_back("g" + std::to_string(j));
  return em;
}

uvr::UVModel model_of(const Matrix& w,
                      uvr::WSource source = uvr::WSource::control_genes) {
  uvr::UVModel m;
  m.w_hat = w;
  m.source = source;
  return m;
}

// Modified Gram-Schmidt projector onto col(W); independent of uvr::svd.
Matrix gs_projected(const Matrix& w, const Matrix& y) {
  std::vector<std::vector<double>> basis;
  const std::size_t m = w.rows();
  for (std::size_t c = 0; c < w.cols(); ++c) {
    std::vector<double> v(m);
    for (std::size_t i = 0; i < m; ++i) v[i] = w(i, c);
    for (const auto& q : basis) {
      double d = 0.0;
      for (std::size_t i = 0; i < m; ++i) d += q[i] * v[i];
      for (std::size_t i = 0; i < m; ++i) v[i] -= d * q[i];
    }
    double nrm = 0.0;
    for (double x : v) nrm += x * x;
    nrm = std::sqrt(nrm);
    if (nrm > 1e-10) {
      for (double& x : v) x /= nrm;
      basis.push_back(v);
    }
  }
  Matrix out(m, y.cols());
  for (const auto& q : basis) {
    for (std::size_t j = 0; j < y.cols(); ++j) {
      double d = 0.0;
      for (std::size_t i = 0; i < m; ++i) d += q[i] * y(i, j);
      for (std::size_t i = 0; i < m; ++i) out(i, j) += d * q[i];
    }
  }
  return out;
}

class ThrowingEstimator : public uvr::UnsupervisedEstimator {
 public:
  uvr::FactorEstimate fit(const Matrix&) override {
    throw std::runtime_error("boom");
  }
};

}  // namespace

TEST_CASE("correct_naive_fixed trivial cases") {
  uvr::Rng rng(60);
  Matrix y = oracles::random_matrix(5, 4, rng);
  uvr::ExpressionMatrix em = wrap(y);

  // Zero-column model: no-op.
  uvr::CorrectionResult none = uvr::correct_naive_fixed(em, model_of(Matrix(5, 0)));
  CHECK(uvr::max_abs_diff(none.y_corrected.values, y) == 0.0);
  CHECK(none.removed_energy == 0.0);

  // Y entirely inside col(W): everything removed.
  Matrix w = oracles::random_matrix(5, 2, rng);
  Matrix coeff = oracles::random_matrix(2, 4, rng);
  uvr::ExpressionMatrix span = wrap(uvr::multiply(w, coeff));
  uvr::CorrectionResult wiped = uvr::correct_naive_fixed(span, model_of(w));
  CHECK(uvr::max_abs(wiped.y_corrected.values) < 1e-10);
}

TEST_CASE("correct_naive_fixed equals the Gram-Schmidt projector oracle") {
  uvr::Rng rng(61);
  Matrix y = oracles::random_matrix(6, 5, rng);
  Matrix w = oracles::random_matrix(6, 2, rng);
  uvr::ExpressionMatrix em = wrap(y);
  uvr::CorrectionResult fixed = uvr::correct_naive_fixed(em, model_of(w));

  Matrix expected = uvr::subtract(y, gs_projected(w, y));
  CHECK(uvr::max_abs_diff(fixed.y_corrected.values, expected) < 1e-10);

  // W^T Y_tilde = 0 and idempotence.
  CHECK(uvr::max_abs(uvr::multiply_at_b(w, fixed.y_corrected.values)) < 1e-8);
  uvr::CorrectionResult again = uvr::correct_naive_fixed(fixed.y_corrected, model_of(w));
  CHECK(uvr::max_abs_diff(again.y_corrected.values, fixed.y_corrected.values) < 1e-10);
}

TEST_CASE("correct_naive_fixed rejects full-rank W") {
  uvr::Rng rng(62);
  Matrix y = oracles::random_matrix(4, 6, rng);
  Matrix w = oracles::random_matrix(4, 4, rng);
  CHECK_THROWS_AS((void)uvr::correct_naive_fixed(wrap(y), model_of(w)),
                  uvr::NumericalError);
}

TEST_CASE("correct_random_alpha closed form for orthonormal W") {
  uvr::Rng rng(63);
  Matrix y = oracles::random_matrix(4, 5, rng);
  Matrix w(4, 2);  // orthonormal columns
  w(0, 0) = 1.0;
  w(2, 1) = 1.0;
  uvr::CorrectionResult r = uvr::correct_random_alpha(wrap(y), model_of(w), 1.0);
  Matrix expected =
      uvr::subtract(y, uvr::scale(uvr::multiply(w, uvr::multiply_at_b(w, y)), 0.5));
  CHECK(uvr::max_abs_diff(r.y_corrected.values, expected) < 1e-12);
}

TEST_CASE("correct_random_alpha removed energy is nu-monotone and below naive") {
  uvr::Rng rng(64);
  Matrix y = oracles::random_matrix(6, 7, rng);
  Matrix w = oracles::random_matrix(6, 3, rng);
  uvr::ExpressionMatrix em = wrap(y);
  const double naive_energy =
      uvr::correct_naive_fixed(em, model_of(w)).removed_energy;

  double prev = 1e300;
  for (double nu : {0.01, 0.1, 1.0, 10.0, 100.0}) {
    const double e = uvr::correct_random_alpha(em, model_of(w), nu).removed_energy;
    CHECK(e < prev);
    CHECK(e <= naive_energy + 1e-12);
    CHECK(e < naive_energy);  // strict: W^T Y != 0 for random data
    prev = e;
  }
}

TEST_CASE("correct_random_alpha shrinks each singular direction by l/(l+nu)") {
  uvr::Rng rng(65);
  Matrix y = oracles::random_matrix(5, 6, rng);
  Matrix w = oracles::random_matrix(5, 2, rng);
  const double nu = 0.8;
  uvr::CorrectionResult r = uvr::correct_random_alpha(wrap(y), model_of(w), nu);

  uvr::SvdResult dec = uvr::svd(w);
  for (std::size_t c = 0; c < 2; ++c) {
    const double lambda = dec.singular_values[c] * dec.singular_values[c];
    for (std::size_t j = 0; j < 6; ++j) {
      double uy = 0.0, ur = 0.0;
      for (std::size_t i = 0; i < 5; ++i) {
        uy += dec.u(i, c) * y(i, j);
        ur += dec.u(i, c) * (y(i, j) - r.y_corrected.values(i, j));
      }
      CHECK(ur == doctest::Approx(uy * lambda / (lambda + nu)).epsilon(1e-8));
    }
  }
}

TEST_CASE("fixed correction is the nu->0 limit of the random one") {
  uvr::Rng rng(66);
  Matrix y = oracles::random_matrix(6, 4, rng);
  Matrix w = oracles::random_matrix(6, 2, rng);  // rank 2 < m
  uvr::ExpressionMatrix em = wrap(y);
  const double s1 = uvr::truncated_svd(w, 1).singular_values[0];
  const double nu = 1e-12 * s1 * s1;
  uvr::CorrectionResult fixed = uvr::correct_naive_fixed(em, model_of(w));
  uvr::CorrectionResult random = uvr::correct_random_alpha(em, model_of(w), nu);
  CHECK(uvr::max_abs_diff(fixed.y_corrected.values, random.y_corrected.values) < 1e-6);
}

TEST_CASE("correct_ratio with all-replicates equals mean centering") {
  uvr::Rng rng(67);
  Matrix y = oracles::random_matrix(6, 4, rng);
  uvr::ExpressionMatrix em = wrap(y);
  uvr::SampleAnnotations ann;
  for (std::size_t i = 0; i < 6; ++i) {
    auto& info = ann.samples[em.sample_ids[i]];
    info.levels["batch"] = i < 3 ? "b1" : "b2";
    info.replicate_group = "r" + std::to_string(i);
  }
  uvr::CorrectionResult ratio = uvr::correct_ratio(em, ann, "batch");
  uvr::ExpressionMatrix centered = uvr::center_by_factor(em, ann, {"batch"});
  CHECK(uvr::max_abs_diff(ratio.y_corrected.values, centered.values) < 1e-12);
}

TEST_CASE("correct_ratio subtracts the single replicate profile") {
  uvr::Rng rng(68);
  Matrix y = oracles::random_matrix(4, 3, rng);
  uvr::ExpressionMatrix em = wrap(y);
  uvr::SampleAnnotations ann;
  for (std::size_t i = 0; i < 4; ++i)
    ann.samples[em.sample_ids[i]].levels["batch"] = i < 2 ? "b1" : "b2";
  ann.samples["s0"].replicate_group = "r1";
  ann.samples["s2"].replicate_group = "r1";

  uvr::CorrectionResult r = uvr::correct_ratio(em, ann, "batch");
  for (std::size_t j = 0; j < 3; ++j) {
    CHECK(r.y_corrected.values(1, j) ==
          doctest::Approx(y(1, j) - y(0, j)).epsilon(1e-14));
    CHECK(r.y_corrected.values(3, j) ==
          doctest::Approx(y(3, j) - y(2, j)).epsilon(1e-14));
  }

  // A batch without replicates is an error.
  ann.samples["s2"].replicate_group.reset();
  CHECK_THROWS_AS((void)uvr::correct_ratio(em, ann, "batch"), uvr::DataError);
}

TEST_CASE("correct_ratio aligns replicate samples across batches") {
  uvr::GeneratorSpec spec;
  spec.m = 24;
  spec.n = 200;
  spec.p = 2;
  spec.k_uv = 2;
  spec.design = uvr::DesignKind::confounded;
  spec.confounding_strength = 1.0;
  spec.n_replicate_groups = 2;
  spec.group_size = 2;
  spec.sigma_alpha = 3.0;
  spec.sigma_eps = 0.1;
  spec.seed = 5;
  uvr::GeneratedData data = uvr::generate(spec);
  uvr::CorrectionResult r = uvr::correct_ratio(data.y, data.annotations, "batch");

  // Replicate pair rows agree across batches up to noise after correction.
  const Matrix& c = r.y_corrected.values;
  for (std::size_t g = 0; g < 2; ++g) {
    double diff = 0.0, base = 0.0;
    for (std::size_t j = 0; j < spec.n; ++j) {
      const double d = c(2 * g, j) - c(2 * g + 1, j);
      diff += d * d;
      base += c(2 * g, j) * c(2 * g, j);
    }
    CHECK(diff < 0.05 * std::max(1.0, base));
  }
}

TEST_CASE("default_nu formula and oracle") {
  uvr::Rng rng(69);
  Matrix ortho(4, 2);
  ortho(0, 0) = 1.0;
  ortho(3, 1) = 1.0;
  CHECK(uvr::default_nu(model_of(ortho)) == doctest::Approx(1e-3).epsilon(1e-12));

  Matrix w = oracles::random_matrix(5, 3, rng);
  const double nu1 = uvr::default_nu(model_of(w));
  const double nu10 = uvr::default_nu(model_of(uvr::scale(w, 10.0)));
  CHECK(nu10 == doctest::Approx(100.0 * nu1).epsilon(1e-10));

  const double power = oracles::top_eigenvalue_power(w);
  CHECK(nu1 == doctest::Approx(power * 1e-3).epsilon(1e-6));

  CHECK_THROWS_AS((void)uvr::default_nu(model_of(Matrix(4, 2))), uvr::NumericalError);
}

TEST_CASE("iterate_correction with one iteration and zero estimator is non-iterative") {
  uvr::Rng rng(70);
  Matrix y = oracles::random_matrix(6, 5, rng);
  Matrix w = oracles::random_matrix(6, 2, rng);
  uvr::ExpressionMatrix em = wrap(y);
  uvr::UVModel model = model_of(w);

  uvr::ZeroEstimator zero;
  uvr::IterationConfig cfg;
  cfg.max_iters = 1;
  cfg.nu = 0.5;
  uvr::IterateResult it = uvr::iterate_correction(em, model, zero, cfg);
  uvr::CorrectionResult direct = uvr::correct_random_alpha(em, model, 0.5);
  CHECK(uvr::max_abs_diff(it.correction.y_corrected.values,
                          direct.y_corrected.values) < 1e-12);
  CHECK(it.correction.removed_energy ==
        doctest::Approx(direct.removed_energy).epsilon(1e-12));

  // Fixed-alpha mode reduces to the projection.
  cfg.nu = 0.0;
  uvr::IterateResult fixed_it = uvr::iterate_correction(em, model, zero, cfg);
  uvr::CorrectionResult fixed = uvr::correct_naive_fixed(em, model);
  CHECK(uvr::max_abs_diff(fixed_it.correction.y_corrected.values,
                          fixed.y_corrected.values) < 1e-10);
}

TEST_CASE("iterate_correction objective is non-increasing between refreshes") {
  uvr::GeneratorSpec spec;
  spec.m = 18;
  spec.n = 80;
  spec.p = 2;
  spec.k_uv = 2;
  spec.n_replicate_groups = 2;
  spec.group_size = 2;
  spec.seed = 3;
  uvr::GeneratedData data = uvr::generate(spec);
  uvr::UVModel model = uvr::estimate_w_control_genes(data.y, data.controls, 4);

  uvr::KMeansEstimator estimator(2, 8, 42);
  uvr::IterationConfig cfg;
  cfg.max_iters = 12;
  cfg.nu = uvr::default_nu(model);
  cfg.w_refresh_period = 5;
  cfg.tol = 0.0;  // run all iterations
  uvr::WRefresher refresher = [&](const uvr::ExpressionMatrix& resid) {
    return uvr::estimate_w_control_genes(resid, data.controls, 4);
  };
  uvr::IterateResult it = uvr::iterate_correction(data.y, model, estimator, cfg,
                                                  refresher);

  std::size_t next_refresh = 0;
  for (std::size_t i = 1; i < it.objective_trace.size(); ++i) {
    const bool boundary = next_refresh < it.refresh_points.size() &&
                          it.refresh_points[next_refresh] == i;
    if (boundary) {
      ++next_refresh;
      continue;  // a refresh may move the objective either way
    }
    CHECK(it.objective_trace[i] <=
          it.objective_trace[i - 1] * (1.0 + 1e-12) + 1e-9);
  }
}

TEST_CASE("iterate_correction propagates estimator failures with the iteration") {
  uvr::Rng rng(71);
  uvr::ExpressionMatrix em = wrap(oracles::random_matrix(4, 3, rng));
  uvr::UVModel model = model_of(oracles::random_matrix(4, 1, rng));
  ThrowingEstimator bad;
  uvr::IterationConfig cfg;
  cfg.nu = 0.5;
  CHECK_THROWS_WITH_AS((void)uvr::iterate_correction(em, model, bad, cfg),
                       doctest::Contains("iteration 1"), uvr::NumericalError);
}

TEST_CASE("calibrate_lambda hits the band or reports bracket failure") {
  // Monotone toy energy: e(lambda) = target * lambda / (lambda + 1).
  const double target = 10.0;
  auto energy = [&](double l) { return target * l / (l + 1.0); };
  const double lambda = uvr::calibrate_lambda(energy, 1.0, target);
  CHECK(std::abs(energy(lambda) - target) <= 0.1 * target);

  // Large lambda reaches the target exactly: accepted immediately.
  auto saturated = [&](double) { return target; };
  CHECK(uvr::calibrate_lambda(saturated, 1.0, target) > 0.0);

  // Energy never approaches the target: bracket failure.
  auto hopeless = [&](double) { return 0.01 * target; };
  CHECK_THROWS_AS((void)uvr::calibrate_lambda(hopeless, 1.0, target),
                  uvr::NumericalError);
}

TEST_CASE("figure-style property: ridge keeps the interest association") {
  // With X and W1 strongly correlated, the hard projection loses far more
  // of the interest signal than the ridge correction.
  int ridge_wins = 0;
  const int n_seeds = 12;
  for (int seed = 0; seed < n_seeds; ++seed) {
    uvr::TwoFeatureDemoSpec spec;
    spec.seed = 100 + seed;
    spec.x_w1_correlation = 0.94;
    uvr::TwoFeatureDemo demo = uvr::two_feature_demo(spec);

    uvr::UVModel w1 = uvr::estimate_w_control_genes(demo.y, demo.controls, 1);
    uvr::UVModel w_full = uvr::estimate_w_control_genes(demo.y, demo.controls, 2);
    uvr::CorrectionResult naive = uvr::correct_naive_fixed(demo.y, w1);
    uvr::CorrectionResult ridge =
        uvr::correct_random_alpha(demo.y, w_full, uvr::default_nu(w_full));

    // Association with the interest factor: canonical correlation between
    // the gene coordinates (genes as observations) and the true loadings.
    Matrix beta_t = oracles::transpose(demo.beta);
    const double assoc_naive = uvr::first_canonical_correlation(
        oracles::transpose(naive.y_corrected.values), beta_t);
    const double assoc_ridge = uvr::first_canonical_correlation(
        oracles::transpose(ridge.y_corrected.values), beta_t);
    if (assoc_ridge > assoc_naive) ++ridge_wins;
  }
  CHECK(ridge_wins >= (n_seeds * 9) / 10);
}

TEST_CASE("projection direction ignores the spread along W2") {
  // Whether the unwanted variation is anisotropic or nearly spherical, the
  // k=1 estimate identifies the same direction, so the projection removes
  // the same subspace.
  uvr::TwoFeatureDemoSpec narrow;
  narrow.seed = 77;
  narrow.n = 3000;
  narrow.w2_scale = 0.2;
  uvr::TwoFeatureDemoSpec broad = narrow;
  broad.w2_scale = 0.6;

  uvr::TwoFeatureDemo d1 = uvr::two_feature_demo(narrow);
  uvr::TwoFeatureDemo d2 = uvr::two_feature_demo(broad);
  uvr::UVModel w1 = uvr::estimate_w_control_genes(d1.y, d1.controls, 1);
  uvr::UVModel w2 = uvr::estimate_w_control_genes(d2.y, d2.controls, 1);

  auto cos_to_true = [&](const uvr::UVModel& m, const uvr::TwoFeatureDemo& d) {
    Matrix u = uvr::orthonormal_basis(m.w_hat);
    return std::abs(u(0, 0) * d.w1_direction(0, 0) + u(1, 0) * d.w1_direction(1, 0));
  };
  const double cos5 = std::cos(5.0 * 3.14159265358979323846 / 180.0);
  CHECK(cos_to_true(w1, d1) > cos5);
  CHECK(cos_to_true(w2, d2) > cos5);

  const double agree = std::abs(
      uvr::orthonormal_basis(w1.w_hat)(0, 0) * uvr::orthonormal_basis(w2.w_hat)(0, 0) +
      uvr::orthonormal_basis(w1.w_hat)(1, 0) * uvr::orthonormal_basis(w2.w_hat)(1, 0));
  CHECK(agree > cos5);
}

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <set>

#include "oracles.hpp"
#include "uvr/data.hpp"
#include "uvr/errors.hpp"
#include "uvr/evaluation.hpp"
#include "uvr/kernels.hpp"
#include "uvr/linalg.hpp"
#include "uvr/rng.hpp"

using uvr::Matrix;
using uvr::Partition;

namespace {

Partition random_partition(std::size_t m, std::size_t k, uvr::Rng& rng) {
  Partition p;
  p.k = k;
  for (std::size_t i = 0; i < m; ++i)
    p.assignments.push_back(static_cast<std::size_t>(rng.uniform_index(k)));
  return p;
}

// Direct double-loop recomputation over explicit cluster sets.
double distance_oracle(const Partition& a, const Partition& b) {
  std::vector<std::set<std::size_t>> ca(a.k), cb(b.k);
  for (std::size_t i = 0; i < a.assignments.size(); ++i) {
    ca[a.assignments[i]].insert(i);
    cb[b.assignments[i]].insert(i);
  }
  double sum = 0.0;
  for (const auto& ci : ca) {
    if (ci.empty()) continue;
    for (const auto& cj : cb) {
      if (cj.empty()) continue;
      std::size_t inter = 0;
      for (std::size_t x : ci) inter += cj.count(x);
      sum += static_cast<double>(inter) * static_cast<double>(inter) /
             (static_cast<double>(ci.size()) * static_cast<double>(cj.size()));
    }
  }
  return static_cast<double>(a.k) - sum;
}

uvr::ExpressionMatrix wrap(const Matrix& values) {
  uvr::ExpressionMatrix em;
  em.values = values;
  for (std::size_t i = 0; i < values.rows(); ++i)
    em.sample_ids.push_back("s" + std::to_string(i));
  for (std::size_t j = 0; j < values.cols(); ++j)
    em.feature_ids.push_back("g" + std::to_string(j));
  return em;
}

}  // namespace

TEST_CASE("clustering_distance trivial and paper-quoted values") {
  Partition a{{0, 0, 1, 1}, 2};
  CHECK(uvr::clustering_distance(a, a).value == doctest::Approx(0.0));

  // Balanced independent partitions reach the k-1 extreme.
  Partition b{{0, 1, 0, 1}, 2};
  CHECK(uvr::clustering_distance(a, b).value == doctest::Approx(1.0));
}

TEST_CASE("clustering_distance matches the double-loop oracle on random pairs") {
  uvr::Rng rng(100);
  for (int t = 0; t < 60; ++t) {
    const std::size_t m = 4 + rng.uniform_index(12);
    Partition a = random_partition(m, 3, rng);
    Partition b = random_partition(m, 3, rng);
    const double mine = uvr::clustering_distance(a, b).value;
    CHECK(mine == doctest::Approx(distance_oracle(a, b)).epsilon(1e-12));
    CHECK(mine >= -1e-12);
    CHECK(mine <= 2.0 + 1e-12);
    CHECK(mine == doctest::Approx(uvr::clustering_distance(b, a).value));
  }
}

TEST_CASE("clustering_distance is zero exactly for relabelings") {
  uvr::Rng rng(101);
  Partition a = random_partition(10, 3, rng);
  Partition b = a;
  for (auto& c : b.assignments) c = (c + 2) % 3;
  CHECK(uvr::clustering_distance(a, b).value == doctest::Approx(0.0).epsilon(1e-12));

  // A genuinely different partition has positive distance.
  Partition c = a;
  c.assignments[0] = (c.assignments[0] + 1) % 3;
  CHECK(uvr::clustering_distance(a, c).value > 1e-6);

  Partition wrong_m{{0, 1}, 3};
  CHECK_THROWS_AS((void)uvr::clustering_distance(a, wrong_m), uvr::DataError);
}

TEST_CASE("variance_filter keeps the top-variance features") {
  uvr::Rng rng(102);
  Matrix y = oracles::random_matrix(6, 10, rng);
  uvr::ExpressionMatrix em = wrap(y);
  uvr::ExpressionMatrix kept = uvr::variance_filter(em, 3);
  REQUIRE(kept.feature_ids.size() == 3);

  // Sort-by-variance oracle.
  std::vector<std::pair<double, std::string>> var;
  for (std::size_t j = 0; j < 10; ++j) {
    double mean = 0.0;
    for (std::size_t i = 0; i < 6; ++i) mean += y(i, j);
    mean /= 6.0;
    double s = 0.0;
    for (std::size_t i = 0; i < 6; ++i) s += (y(i, j) - mean) * (y(i, j) - mean);
    var.push_back({s, em.feature_ids[j]});
  }
  std::sort(var.begin(), var.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  std::set<std::string> expect{var[0].second, var[1].second, var[2].second};
  std::set<std::string> got(kept.feature_ids.begin(), kept.feature_ids.end());
  CHECK(got == expect);
}

TEST_CASE("variance_filter no-op, constant-feature drop and validation") {
  uvr::Rng rng(103);
  Matrix y = oracles::random_matrix(5, 4, rng);
  for (std::size_t i = 0; i < 5; ++i) y(i, 2) = 3.0;  // constant feature
  uvr::ExpressionMatrix em = wrap(y);

  uvr::ExpressionMatrix all = uvr::variance_filter(em, 4);
  CHECK(all.values == em.values);
  CHECK(all.feature_ids == em.feature_ids);

  uvr::ExpressionMatrix dropped = uvr::variance_filter(em, 3);
  CHECK(std::find(dropped.feature_ids.begin(), dropped.feature_ids.end(), "g2") ==
        dropped.feature_ids.end());

  CHECK_THROWS_AS((void)uvr::variance_filter(em, 0), uvr::DataError);
  CHECK_THROWS_AS((void)uvr::variance_filter(em, 5), uvr::DataError);
}

TEST_CASE("variance_filter kept set survives a column permutation") {
  uvr::Rng rng(104);
  Matrix y = oracles::random_matrix(5, 6, rng);
  uvr::ExpressionMatrix em = wrap(y);
  uvr::ExpressionMatrix perm;
  perm.sample_ids = em.sample_ids;
  const std::size_t order[6] = {3, 0, 5, 1, 4, 2};
  perm.values = Matrix(5, 6);
  for (std::size_t j = 0; j < 6; ++j) {
    perm.feature_ids.push_back(em.feature_ids[order[j]]);
    for (std::size_t i = 0; i < 5; ++i) perm.values(i, j) = y(i, order[j]);
  }
  std::set<std::string> a, b;
  for (const auto& id : uvr::variance_filter(em, 3).feature_ids) a.insert(id);
  for (const auto& id : uvr::variance_filter(perm, 3).feature_ids) b.insert(id);
  CHECK(a == b);
}

TEST_CASE("cca_per_feature endpoints and regression oracle") {
  uvr::Rng rng(105);
  const std::size_t m = 12;
  Matrix x = oracles::random_matrix(m, 2, rng);

  Matrix y(m, 3);
  // Feature 0: exact linear function of X.
  for (std::size_t i = 0; i < m; ++i) y(i, 0) = 2.0 * x(i, 0) - x(i, 1);
  // Feature 1: orthogonal to col(X) after centering.
  {
    Matrix q = uvr::orthonormal_basis(uvr::center_columns(x));
    uvr::Rng rng2(1);
    std::vector<double> v(m);
    double mean = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      v[i] = rng2.normal();
      mean += v[i];
    }
    for (std::size_t i = 0; i < m; ++i) v[i] -= mean / m;
    for (std::size_t c = 0; c < q.cols(); ++c) {
      double d = 0.0;
      for (std::size_t i = 0; i < m; ++i) d += q(i, c) * v[i];
      for (std::size_t i = 0; i < m; ++i) v[i] -= d * q(i, c);
    }
    for (std::size_t i = 0; i < m; ++i) y(i, 1) = v[i];
  }
  // Feature 2: noisy mix.
  for (std::size_t i = 0; i < m; ++i) y(i, 2) = x(i, 0) + rng.normal();

  std::vector<double> cca = uvr::cca_per_feature(y, x);
  CHECK(cca[0] == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(cca[1] == doctest::Approx(0.0).epsilon(1e-8));

  // sqrt(R^2) oracle via the normal equations on centered data.
  {
    Matrix xc = uvr::center_columns(x);
    Matrix g = oracles::matmul(oracles::transpose(xc), xc);
    Matrix yc(m, 1);
    double mean = 0.0;
    for (std::size_t i = 0; i < m; ++i) mean += y(i, 2);
    mean /= m;
    for (std::size_t i = 0; i < m; ++i) yc(i, 0) = y(i, 2) - mean;
    Matrix rhs = oracles::matmul(oracles::transpose(xc), yc);
    Matrix beta = oracles::matmul(oracles::invert(g), rhs);
    Matrix fit = oracles::matmul(xc, beta);
    const double r2 = oracles::fro_sq(fit) / oracles::fro_sq(yc);
    CHECK(cca[2] == doctest::Approx(std::sqrt(r2)).epsilon(1e-10));
  }

  Matrix degenerate(m, 2);
  for (std::size_t i = 0; i < m; ++i) degenerate(i, 0) = degenerate(i, 1) = 1.0;
  CHECK_THROWS_AS((void)uvr::cca_per_feature(y, degenerate), uvr::NumericalError);
}

TEST_CASE("eigenspace_cca_curve saturates, aligns and stays monotone") {
  uvr::Rng rng(106);
  const std::size_t m = 8, n = 40;
  Matrix y = oracles::random_matrix(m, n, rng);
  Matrix x = oracles::random_matrix(m, 1, rng);
  std::vector<std::size_t> all;
  for (std::size_t j = 0; j < n; ++j) all.push_back(j);

  std::vector<double> curve = uvr::eigenspace_cca_curve(y, all, x, m);
  for (std::size_t k = 1; k < m; ++k) {
    CHECK(curve[k] >= curve[k - 1] - 1e-12);
    CHECK(curve[k] >= 0.0);
    CHECK(curve[k] <= 1.0 + 1e-12);
  }
  CHECK(curve[m - 1] == doctest::Approx(1.0).epsilon(1e-8));  // full space

  // Planted top direction: X equal to the dominant eigvector gives 1 at k=1.
  Matrix spike(m, 1);
  for (std::size_t i = 0; i < m; ++i) spike(i, 0) = (i % 2 == 0) ? 1.0 : -1.0;
  Matrix planted(m, n);
  uvr::Rng rng2(3);
  for (std::size_t j = 0; j < n; ++j) {
    const double load = 5.0 * rng2.normal();
    for (std::size_t i = 0; i < m; ++i)
      planted(i, j) = spike(i, 0) * load + 0.01 * rng2.normal();
  }
  std::vector<double> aligned = uvr::eigenspace_cca_curve(planted, all, spike, 2);
  CHECK(aligned[0] > 0.999);

  CHECK_THROWS_AS((void)uvr::eigenspace_cca_curve(y, {}, x, 2), uvr::DataError);
}

TEST_CASE("eigenspace_cca_curve stays low until k passes rank(W) for planted W") {
  // W spans 2 directions orthogonal to X (mutually orthogonal balanced
  // sign patterns); the X association only appears once the eigenspace
  // grows past rank(W).
  const std::size_t m = 8, n = 300;
  Matrix x(m, 1), w(m, 2);
  for (std::size_t i = 0; i < m; ++i) {
    x(i, 0) = (i % 2 == 0) ? 1.0 : -1.0;
    w(i, 0) = ((i / 2) % 2 == 0) ? 1.0 : -1.0;
    w(i, 1) = (i == 0 || i == 3 || i == 5 || i == 6) ? 1.0 : -1.0;
  }
  Matrix y(m, n);
  uvr::Rng draws(9);
  for (std::size_t j = 0; j < n; ++j) {
    const double a0 = 8.0 * draws.normal();
    const double a1 = 6.0 * draws.normal();
    const double xb = 0.4 * draws.normal();
    for (std::size_t i = 0; i < m; ++i)
      y(i, j) = w(i, 0) * a0 + w(i, 1) * a1 + x(i, 0) * xb + 0.05 * draws.normal();
  }
  std::vector<std::size_t> all;
  for (std::size_t j = 0; j < n; ++j) all.push_back(j);
  std::vector<double> curve = uvr::eigenspace_cca_curve(y, all, x, 4);
  CHECK(curve[0] < 0.2);
  CHECK(curve[1] < 0.2);
  CHECK(curve[2] > 0.95);  // X enters at k = rank(W) + 1
}

TEST_CASE("emit_plot_data writes and round-trips the sweep") {
  namespace fs = std::filesystem;
  const std::string dir = (fs::temp_directory_path() / "uvr_eval_tests").string();
  fs::create_directories(dir);

  std::vector<uvr::SweepPoint> points{{"replicate", 1000, 0.25, 7},
                                      {"replicate", 500, 1.0 / 3.0, 7}};
  uvr::PcaTable pca;
  pca.label_names = {"truth"};
  pca.sample_ids = {"s0", "s1"};
  pca.pc1 = {0.5, -0.5};
  pca.pc2 = {1.25, -1.25};
  pca.labels = {{"t1"}, {"t2"}};
  uvr::emit_plot_data(points, pca, dir);

  std::vector<uvr::SweepPoint> back = uvr::load_sweep_points(dir + "/scores.csv");
  REQUIRE(back.size() == 2);
  CHECK(back[0].method == "replicate");
  CHECK(back[0].n_genes_kept == 1000);
  CHECK(back[0].error == 0.25);
  CHECK(back[1].error == 1.0 / 3.0);  // bitwise via %.17g
  CHECK(back[1].seed == 7);

  CHECK_THROWS_AS(uvr::emit_plot_data({}, pca, dir), uvr::DataError);
}

TEST_CASE("partition save/load round-trip") {
  namespace fs = std::filesystem;
  const std::string path =
      (fs::temp_directory_path() / "uvr_eval_tests" / "part.csv").string();
  fs::create_directories(fs::path(path).parent_path());
  Partition p{{0, 2, 1, 2}, 3};
  uvr::save_partition(path, p, {"a", "b", "c", "d"});
  std::vector<std::string> ids;
  Partition back = uvr::load_partition(path, &ids);
  CHECK(back.assignments == p.assignments);
  CHECK(back.k == 3);
  CHECK(ids == std::vector<std::string>{"a", "b", "c", "d"});
}

TEST_CASE("partition_from_labels uses sorted level order") {
  Partition p = uvr::partition_from_labels({"b", "a", "b", "c"});
  CHECK(p.k == 3);
  CHECK(p.assignments == std::vector<std::size_t>{1, 0, 1, 2});
}

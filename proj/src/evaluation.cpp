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

#include "uvr/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "uvr/errors.hpp"
#include "uvr/kernels.hpp"
#include "uvr/linalg.hpp"

namespace uvr {

namespace {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

ClusteringScore clustering_distance(const Partition& a, const Partition& b) {
  if (a.assignments.size() != b.assignments.size())
    throw DataError("clustering_distance: sample-count mismatch");
  if (a.k != b.k) throw DataError("clustering_distance: cluster-count mismatch");
  const std::size_t k = a.k;
  const std::size_t m = a.assignments.size();

  std::vector<std::vector<std::size_t>> overlap(k, std::vector<std::size_t>(k, 0));
  std::vector<std::size_t> size_a(k, 0), size_b(k, 0);
  for (std::size_t i = 0; i < m; ++i) {
    overlap[a.assignments[i]][b.assignments[i]]++;
    size_a[a.assignments[i]]++;
    size_b[b.assignments[i]]++;
  }

  double sum = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    if (size_a[i] == 0) continue;
    for (std::size_t j = 0; j < k; ++j) {
      if (size_b[j] == 0) continue;
      const double o = static_cast<double>(overlap[i][j]);
      sum += o * o / (static_cast<double>(size_a[i]) * static_cast<double>(size_b[j]));
    }
  }
  ClusteringScore score;
  score.k = k;
  score.value = static_cast<double>(k) - sum;
  return score;
}

ExpressionMatrix variance_filter(const ExpressionMatrix& y, std::size_t n_keep) {
  const std::size_t m = y.values.rows(), n = y.values.cols();
  if (n_keep < 1 || n_keep > n)
    throw DataError("variance_filter: n_keep out of range");

  std::vector<double> var(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    double mean = 0.0;
    for (std::size_t i = 0; i < m; ++i) mean += y.values(i, j);
    mean /= static_cast<double>(m);
    double s = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      const double d = y.values(i, j) - mean;
      s += d * d;
    }
    var[j] = m > 1 ? s / static_cast<double>(m - 1) : 0.0;
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (var[a] != var[b]) return var[a] > var[b];
    return y.feature_ids[a] < y.feature_ids[b];
  });
  std::vector<std::size_t> kept(order.begin(), order.begin() + n_keep);
  std::sort(kept.begin(), kept.end());  // keep original column order

  ExpressionMatrix out;
  out.sample_ids = y.sample_ids;
  out.values = select_columns(y.values, kept);
  for (std::size_t j : kept) out.feature_ids.push_back(y.feature_ids[j]);
  return out;
}

double first_canonical_correlation(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows())
    throw DataError("first_canonical_correlation: row mismatch");
  Matrix qa = orthonormal_basis(center_columns(a));
  Matrix qb = orthonormal_basis(center_columns(b));
  if (qa.cols() == 0 || qb.cols() == 0) return 0.0;
  SvdResult dec = svd(multiply_at_b(qa, qb));
  return std::clamp(dec.singular_values[0], 0.0, 1.0);
}

std::vector<double> cca_per_feature(const Matrix& y, const Matrix& x_truth) {
  if (y.rows() != x_truth.rows()) throw DataError("cca_per_feature: row mismatch");
  Matrix qx = orthonormal_basis(center_columns(x_truth));
  if (qx.cols() < x_truth.cols())
    throw NumericalError("cca_per_feature: degenerate X");

  const std::size_t m = y.rows(), n = y.cols();
  std::vector<double> out(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    std::vector<double> col(m);
    double mean = 0.0;
    for (std::size_t i = 0; i < m; ++i) mean += y(i, j);
    mean /= static_cast<double>(m);
    double nrm = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      col[i] = y(i, j) - mean;
      nrm += col[i] * col[i];
    }
    nrm = std::sqrt(nrm);
    if (nrm < 1e-300) continue;  // constant feature: no association
    double proj_sq = 0.0;
    for (std::size_t c = 0; c < qx.cols(); ++c) {
      double d = 0.0;
      for (std::size_t i = 0; i < m; ++i) d += qx(i, c) * col[i];
      proj_sq += d * d;
    }
    out[j] = std::clamp(std::sqrt(proj_sq) / nrm, 0.0, 1.0);
  }
  return out;
}

std::vector<double> eigenspace_cca_curve(const Matrix& y,
                                         const std::vector<std::size_t>& feature_set,
                                         const Matrix& x_truth, std::size_t k_max) {
  if (feature_set.empty()) throw DataError("eigenspace_cca_curve: empty feature set");
  if (k_max < 1 || k_max > y.rows())
    throw DataError("eigenspace_cca_curve: k_max out of range");

  Matrix ys = select_columns(y, feature_set);
  // Empirical covariance across features (features are the observations):
  // center against the mean feature profile.
  const std::size_t m = ys.rows(), ns = ys.cols();
  std::vector<double> mean(m, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < ns; ++j) mean[i] += ys(i, j);
    mean[i] /= static_cast<double>(ns);
  }
  Matrix centered = ys;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < ns; ++j) centered(i, j) -= mean[i];
  Matrix cov = multiply_a_bt(centered, centered);
  const double denom = ns > 1 ? static_cast<double>(ns - 1) : 1.0;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) cov(i, j) /= denom;

  EigResult eig = sym_eig(cov);
  std::vector<double> curve(k_max, 0.0);
  for (std::size_t k = 1; k <= k_max; ++k) {
    Matrix top(m, k);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < k; ++j) top(i, j) = eig.vectors(i, j);
    curve[k - 1] = first_canonical_correlation(x_truth, top);
  }
  // The spans are nested, so enforce monotonicity against rounding noise.
  for (std::size_t k = 1; k < k_max; ++k) curve[k] = std::max(curve[k], curve[k - 1]);
  return curve;
}

void emit_plot_data(const std::vector<SweepPoint>& results, const PcaTable& pca,
                    const std::string& dir) {
  if (results.empty()) throw DataError("emit_plot_data: no results");
  {
    const std::string path = dir + "/scores.csv";
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write file: " + path);
    out << "method,n_genes_kept,error,seed\n";
    for (const auto& p : results)
      out << p.method << ',' << p.n_genes_kept << ',' << format_double(p.error) << ','
          << p.seed << '\n';
    if (!out) throw DataError("write failed: " + path);
  }
  if (!pca.sample_ids.empty()) {
    const std::string path = dir + "/pca.csv";
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write file: " + path);
    out << "sample_id,pc1,pc2";
    for (const auto& name : pca.label_names) out << ',' << name;
    out << '\n';
    for (std::size_t i = 0; i < pca.sample_ids.size(); ++i) {
      out << pca.sample_ids[i] << ',' << format_double(pca.pc1[i]) << ','
          << format_double(pca.pc2[i]);
      for (const auto& label : pca.labels[i]) out << ',' << label;
      out << '\n';
    }
    if (!out) throw DataError("write failed: " + path);
  }
}

std::vector<SweepPoint> load_sweep_points(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open file: " + path);
  std::string line;
  if (!std::getline(in, line) || line.rfind("method,", 0) != 0)
    throw DataError(path + ": missing scores header");
  std::vector<SweepPoint> out;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream ss(line);
    SweepPoint p;
    std::string field;
    std::getline(ss, p.method, ',');
    std::getline(ss, field, ',');
    p.n_genes_kept = static_cast<std::size_t>(std::stoull(field));
    std::getline(ss, field, ',');
    p.error = std::strtod(field.c_str(), nullptr);
    std::getline(ss, field, ',');
    p.seed = static_cast<std::uint64_t>(std::stoull(field));
    out.push_back(std::move(p));
  }
  return out;
}

void save_partition(const std::string& path, const Partition& p,
                    const std::vector<std::string>& sample_ids) {
  if (sample_ids.size() != p.assignments.size())
    throw DataError("save_partition: id count mismatch");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write file: " + path);
  out << "sample_id,cluster\n";
  for (std::size_t i = 0; i < sample_ids.size(); ++i)
    out << sample_ids[i] << ',' << p.assignments[i] + 1 << '\n';
  if (!out) throw DataError("write failed: " + path);
}

Partition load_partition(const std::string& path, std::vector<std::string>* sample_ids) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open file: " + path);
  std::string line;
  if (!std::getline(in, line) || line.rfind("sample_id,", 0) != 0)
    throw DataError(path + ": missing partition header");
  Partition p;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw DataError(path + ": malformed row");
    if (sample_ids) sample_ids->push_back(line.substr(0, comma));
    const std::size_t cluster = std::stoull(line.substr(comma + 1));
    if (cluster < 1) throw DataError(path + ": cluster indices are 1-based");
    p.assignments.push_back(cluster - 1);
    p.k = std::max(p.k, cluster);
  }
  return p;
}

Partition partition_from_labels(const std::vector<std::string>& labels) {
  std::set<std::string> levels(labels.begin(), labels.end());
  std::map<std::string, std::size_t> index;
  std::size_t next = 0;
  for (const auto& level : levels) index[level] = next++;
  Partition p;
  p.k = levels.size();
  for (const auto& label : labels) p.assignments.push_back(index[label]);
  return p;
}

}  // namespace uvr

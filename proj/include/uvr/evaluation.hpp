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

#ifndef UVR_EVALUATION_HPP
#define UVR_EVALUATION_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "uvr/data.hpp"
#include "uvr/matrix.hpp"
#include "uvr/unsupervised.hpp"

namespace uvr {

/// Partition dissimilarity in [0, k-1]: 0 iff equal up to relabeling,
/// k-1 for completely different balanced partitions.
struct ClusteringScore {
  double value = 0.0;
  std::size_t k = 0;
};

// k - sum_ij |c_i intersect c'_j|^2 / (|c_i| |c'_j|); terms with an empty
// cluster contribute 0. Symmetric and relabel-invariant.
ClusteringScore clustering_distance(const Partition& a, const Partition& b);

// Keeps the n_keep features of highest sample variance; ties broken by
// feature id order. Surviving features keep their original column order.
ExpressionMatrix variance_filter(const ExpressionMatrix& y, std::size_t n_keep);

// First canonical correlation between the (column-centered) spans of a
// and b; 0 when either centers to rank zero.
double first_canonical_correlation(const Matrix& a, const Matrix& b);

// Per feature: the first canonical correlation between that single column
// and x_truth, i.e. the multiple correlation of the feature on X.
std::vector<double> cca_per_feature(const Matrix& y, const Matrix& x_truth);

// For k = 1..k_max: first canonical correlation of x_truth with the span
// of the top-k eigenvectors of the empirical covariance computed on the
// given feature subset. Non-decreasing in k.
std::vector<double> eigenspace_cca_curve(const Matrix& y,
                                         const std::vector<std::size_t>& feature_set,
                                         const Matrix& x_truth, std::size_t k_max);

/// One point of a clustering-error-vs-filter-size sweep.
struct SweepPoint {
  std::string method;
  std::size_t n_genes_kept = 0;
  double error = 0.0;
  std::uint64_t seed = 0;
};

/// Sample coordinates on the first two principal components plus label
/// columns for external plotting.
struct PcaTable {
  std::vector<std::string> label_names;
  std::vector<std::string> sample_ids;
  std::vector<double> pc1;
  std::vector<double> pc2;
  std::vector<std::vector<std::string>> labels;  // one row per sample
};

// Writes <dir>/scores.csv (method,n_genes_kept,error,seed) and
// <dir>/pca.csv (sample_id,pc1,pc2,<label columns>).
void emit_plot_data(const std::vector<SweepPoint>& results, const PcaTable& pca,
                    const std::string& dir);

std::vector<SweepPoint> load_sweep_points(const std::string& path);

void save_partition(const std::string& path, const Partition& p,
                    const std::vector<std::string>& sample_ids);
Partition load_partition(const std::string& path,
                         std::vector<std::string>* sample_ids = nullptr);

// Partition induced by a per-sample label column (levels in sorted order).
Partition partition_from_labels(const std::vector<std::string>& labels);

}  // namespace uvr

#endif  // UVR_EVALUATION_HPP

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

#ifndef UVR_DATA_HPP
#define UVR_DATA_HPP

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "uvr/matrix.hpp"

namespace uvr {

/// Samples x features matrix with row/column identifiers. Ids are unique,
/// counts match the matrix dimensions, and every value is finite.
struct ExpressionMatrix {
  Matrix values;
  std::vector<std::string> sample_ids;
  std::vector<std::string> feature_ids;

  void validate() const;  // throws DataError on any violated invariant
  std::size_t sample_index(const std::string& id) const;
};

/// Per-sample factor levels plus the two dedicated annotations used by
/// replicate machinery and scoring.
struct SampleAnnotations {
  struct Info {
    std::map<std::string, std::string> levels;
    std::optional<std::string> replicate_group;
    std::optional<std::string> truth_label;
  };
  std::map<std::string, Info> samples;

  const Info* find(const std::string& sample_id) const;
  // Level of `factor` for `sample_id`; throws DataError when missing.
  const std::string& level_of(const std::string& sample_id,
                              const std::string& factor) const;
};

/// Indices of negative control features (into feature_ids).
struct ControlGeneSet {
  std::vector<std::size_t> indices;

  void validate(std::size_t n_features) const;
};

enum class DifferenceScheme { all_pairs, vs_group_mean };

/// Difference profiles of replicate samples. Each row is a within-group
/// difference of rows of Y, so any contribution that is constant inside
/// a replicate group cancels exactly.
struct ReplicateDifferenceSet {
  Matrix d_rows;  // |d| x n
  DifferenceScheme scheme = DifferenceScheme::all_pairs;
  // all_pairs: (first sample id, second sample id); vs_group_mean:
  // (member sample id, group id).
  std::vector<std::pair<std::string, std::string>> provenance;
};

/// Delimiter and layout options of the on-disk matrix format.
struct MatrixFormat {
  char delimiter = ',';
};

// Chooses tab for .tsv / .tab paths, comma otherwise.
MatrixFormat format_for_path(const std::string& path);

ExpressionMatrix load_matrix(const std::string& path, const MatrixFormat& format);
void save_matrix(const std::string& path, const ExpressionMatrix& em,
                 const MatrixFormat& format);

SampleAnnotations load_annotations(const std::string& path);
void save_annotations(const std::string& path, const SampleAnnotations& ann);

// One feature id per line; blank lines ignored.
std::vector<std::string> load_id_list(const std::string& path);
void save_id_list(const std::string& path, const std::vector<std::string>& ids);

ControlGeneSet control_set_from_ids(const ExpressionMatrix& em,
                                    const std::vector<std::string>& ids);

// Rows are ordered by (group id, lexicographic member ids); the all_pairs
// scheme subtracts the later id from the earlier one.
ReplicateDifferenceSet build_differences(const ExpressionMatrix& y,
                                         const SampleAnnotations& ann,
                                         DifferenceScheme scheme);

// Centers each cell of the cross-classification of `factors` so per-cell
// per-feature means are zero. Idempotent.
ExpressionMatrix center_by_factor(const ExpressionMatrix& y,
                                  const SampleAnnotations& ann,
                                  const std::vector<std::string>& factors);

// Column / row selections used throughout the estimators.
Matrix select_columns(const Matrix& a, const std::vector<std::size_t>& cols);
Matrix select_rows(const Matrix& a, const std::vector<std::size_t>& rows);

}  // namespace uvr

#endif  // UVR_DATA_HPP

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

#ifndef UVR_SYNTHGEN_HPP
#define UVR_SYNTHGEN_HPP

#include <cstdint>

#include "uvr/data.hpp"
#include "uvr/matrix.hpp"

namespace uvr {

enum class DesignKind { orthogonal_full, confounded };
enum class ControlQuality { clean, leaky };

/// Configuration of the synthetic model Y = X beta + W alpha + eps with a
/// membership design X over p groups and a batch-structured W.
struct GeneratorSpec {
  std::size_t m = 90;
  std::size_t n = 2000;
  std::size_t p = 3;     // interest-factor rank (groups)
  std::size_t k_uv = 3;  // unwanted-variation rank (batches)

  double sigma_alpha = 3.0;
  double sigma_eps = 0.3;
  double sigma_beta_c = 0.0;  // control leak scale (leaky quality)
  // Group-center separation: beta entries are beta_scale * N(0,1). Any
  // nonzero value separates the noiseless group centers exactly.
  double beta_scale = 1.0;

  DesignKind design = DesignKind::orthogonal_full;
  // 0 = batches independent of groups, 1 = batches aligned with groups;
  // W rows of non-replicate samples interpolate linearly between the two
  // one-hot encodings.
  double confounding_strength = 0.0;

  std::size_t n_replicate_groups = 5;
  std::size_t group_size = 3;

  double control_fraction = 0.1;  // in (0, 1]
  ControlQuality control_quality = ControlQuality::clean;

  std::uint64_t seed = 1;
};

struct GroundTruth {
  Matrix x;      // m x p membership
  Matrix beta;   // p x n
  Matrix w;      // m x k_uv
  Matrix alpha;  // k_uv x n
  std::vector<std::string> labels;        // truth group per sample
  std::vector<std::string> batch_labels;  // annotated batch per sample
};

struct GeneratedData {
  ExpressionMatrix y;
  SampleAnnotations annotations;  // factor "batch", replicate groups, truth labels
  ControlGeneSet controls;
  GroundTruth truth;
};

// Draws are bit-reproducible for a fixed seed. Replicate groups share one
// X row and spread their members across batches; control genes get beta_c
// per control_quality.
GeneratedData generate(const GeneratorSpec& spec);

/// Two-coordinate analog with a dominant unwanted-variation direction W1
/// correlated with the interest direction X; genes are the observations.
struct TwoFeatureDemoSpec {
  std::size_t n = 400;
  double x_w1_correlation = 0.94;  // cosine between X and W1
  double alpha1_scale = 3.0;
  double w2_scale = 0.4;  // magnitude of the W2 loadings relative to alpha1
  double sigma_eps = 0.1;
  double beta_scale = 1.0;
  double control_fraction = 0.2;
  std::uint64_t seed = 1;
};

struct TwoFeatureDemo {
  ExpressionMatrix y;      // 2 x n
  ControlGeneSet controls;
  Matrix x_direction;      // 2 x 1 unit vector
  Matrix w1_direction;     // 2 x 1 unit vector
  Matrix w2_direction;     // 2 x 1 unit vector, orthogonal to w1
  Matrix beta;             // 1 x n true loadings (zero on controls)
};

TwoFeatureDemo two_feature_demo(const TwoFeatureDemoSpec& spec);

}  // namespace uvr

#endif  // UVR_SYNTHGEN_HPP

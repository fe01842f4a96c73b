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

#include "uvr/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "uvr/errors.hpp"
#include "uvr/kernels.hpp"
#include "uvr/rng.hpp"

namespace uvr {

namespace {

std::string padded_id(const char* prefix, std::size_t index, std::size_t total) {
  std::size_t width = 1;
  for (std::size_t t = total; t >= 10; t /= 10) ++width;
  std::string digits = std::to_string(index + 1);
  return std::string(prefix) + std::string(width - std::min(width, digits.size()), '0') +
         digits;
}

void validate(const GeneratorSpec& spec) {
  if (spec.m < 1 || spec.n < 1) throw ConfigError("generator: dims must be positive");
  if (spec.p < 1 || spec.p > spec.m) throw ConfigError("generator: p out of range");
  if (spec.k_uv < 1) throw ConfigError("generator: k_uv must be positive");
  if (spec.confounding_strength < 0.0 || spec.confounding_strength > 1.0)
    throw ConfigError("generator: confounding_strength must be in [0,1]");
  if (spec.group_size > spec.m ||
      spec.n_replicate_groups * spec.group_size > spec.m)
    throw ConfigError("generator: infeasible replicate layout");
  if (!(spec.control_fraction > 0.0 && spec.control_fraction <= 1.0))
    throw ConfigError("generator: control_fraction must be in (0,1]");
  if (spec.sigma_alpha < 0.0 || spec.sigma_eps < 0.0 || spec.sigma_beta_c < 0.0)
    throw ConfigError("generator: scales must be nonnegative");
}

}  // namespace

GeneratedData generate(const GeneratorSpec& spec) {
  validate(spec);
  const std::size_t m = spec.m, n = spec.n, p = spec.p, k = spec.k_uv;
  const std::size_t n_rep = spec.n_replicate_groups * spec.group_size;
  Rng rng(spec.seed);

  // Layout. Replicate samples come first; each group shares one interest
  // group and spreads its members across batches.
  std::vector<std::size_t> tissue(m), batch(m);
  std::vector<long> rep_group(m, -1);
  std::vector<std::size_t> indep_counter(p, 0);
  for (std::size_t i = 0; i < m; ++i) {
    if (i < n_rep) {
      const std::size_t g = i / spec.group_size;
      const std::size_t member = i % spec.group_size;
      rep_group[i] = static_cast<long>(g);
      tissue[i] = g % p;
      batch[i] = member % k;
    } else {
      tissue[i] = (i - n_rep) % p;
      // Independent batches rotate within each interest group, which keeps
      // the orthogonal design balanced.
      batch[i] = indep_counter[tissue[i]]++ % k;
    }
  }

  GroundTruth truth;
  truth.x = Matrix(m, p);
  truth.w = Matrix(m, k);
  const double s = spec.design == DesignKind::confounded ? spec.confounding_strength : 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    truth.x(i, tissue[i]) = 1.0;
    if (rep_group[i] >= 0) {
      truth.w(i, batch[i]) = 1.0;  // replicates always cross batches
    } else {
      const std::size_t aligned = tissue[i] % k;
      truth.w(i, batch[i]) += 1.0 - s;
      truth.w(i, aligned) += s;
    }
  }

  // Draw order is fixed: beta, alpha, eps, control subset, control leak.
  truth.beta = Matrix(p, n);
  for (std::size_t g = 0; g < p; ++g)
    for (std::size_t j = 0; j < n; ++j)
      truth.beta(g, j) = spec.beta_scale * rng.normal();
  truth.alpha = Matrix(k, n);
  for (std::size_t c = 0; c < k; ++c)
    for (std::size_t j = 0; j < n; ++j)
      truth.alpha(c, j) = spec.sigma_alpha * rng.normal();
  Matrix eps(m, n);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) eps(i, j) = spec.sigma_eps * rng.normal();

  const std::size_t n_ctl = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::llround(spec.control_fraction * n)));
  std::vector<std::size_t> feature_order(n);
  std::iota(feature_order.begin(), feature_order.end(), 0);
  rng.shuffle(feature_order);
  std::vector<std::size_t> controls(feature_order.begin(),
                                    feature_order.begin() + n_ctl);
  std::sort(controls.begin(), controls.end());

  for (std::size_t j : controls) {
    for (std::size_t g = 0; g < p; ++g) {
      truth.beta(g, j) = spec.control_quality == ControlQuality::clean
                             ? 0.0
                             : spec.sigma_beta_c * rng.normal();
    }
  }

  GeneratedData out;
  out.y.values = add(add(multiply(truth.x, truth.beta), multiply(truth.w, truth.alpha)),
                     eps);
  for (std::size_t i = 0; i < m; ++i)
    out.y.sample_ids.push_back(padded_id("s", i, m));
  for (std::size_t j = 0; j < n; ++j)
    out.y.feature_ids.push_back(padded_id("g", j, n));
  out.y.validate();

  for (std::size_t i = 0; i < m; ++i) {
    auto& info = out.annotations.samples[out.y.sample_ids[i]];
    // The annotated batch is the dominant component of the W row.
    std::size_t annotated = batch[i];
    if (rep_group[i] < 0 && spec.design == DesignKind::confounded && s >= 0.5)
      annotated = tissue[i] % k;
    info.levels["batch"] = "b" + std::to_string(annotated + 1);
    info.truth_label = "t" + std::to_string(tissue[i] + 1);
    if (rep_group[i] >= 0)
      info.replicate_group = "r" + std::to_string(rep_group[i] + 1);
    truth.labels.push_back(*info.truth_label);
    truth.batch_labels.push_back(info.levels["batch"]);
  }

  out.controls.indices = std::move(controls);
  out.truth = std::move(truth);
  return out;
}

TwoFeatureDemo two_feature_demo(const TwoFeatureDemoSpec& spec) {
  if (spec.n < 4) throw ConfigError("two_feature_demo: n too small");
  if (!(spec.x_w1_correlation >= -1.0 && spec.x_w1_correlation <= 1.0))
    throw ConfigError("two_feature_demo: correlation must be in [-1,1]");
  Rng rng(spec.seed);

  TwoFeatureDemo demo;
  demo.x_direction = Matrix(2, 1);
  demo.x_direction(0, 0) = 1.0;
  const double c = spec.x_w1_correlation;
  const double sn = std::sqrt(std::max(0.0, 1.0 - c * c));
  demo.w1_direction = Matrix(2, 1);
  demo.w1_direction(0, 0) = c;
  demo.w1_direction(1, 0) = sn;
  demo.w2_direction = Matrix(2, 1);
  demo.w2_direction(0, 0) = -sn;
  demo.w2_direction(1, 0) = c;

  const std::size_t n = spec.n;
  demo.beta = Matrix(1, n);
  for (std::size_t j = 0; j < n; ++j) demo.beta(0, j) = spec.beta_scale * rng.normal();

  std::vector<double> alpha1(n), alpha2(n);
  for (std::size_t j = 0; j < n; ++j) alpha1[j] = spec.alpha1_scale * rng.normal();
  for (std::size_t j = 0; j < n; ++j)
    alpha2[j] = spec.alpha1_scale * spec.w2_scale * rng.normal();

  Matrix eps(2, n);
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < n; ++j) eps(i, j) = spec.sigma_eps * rng.normal();

  const std::size_t n_ctl = std::max<std::size_t>(
      2, static_cast<std::size_t>(std::llround(spec.control_fraction * n)));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(order);
  demo.controls.indices.assign(order.begin(), order.begin() + n_ctl);
  std::sort(demo.controls.indices.begin(), demo.controls.indices.end());
  for (std::size_t j : demo.controls.indices) demo.beta(0, j) = 0.0;

  demo.y.values = Matrix(2, n);
  for (std::size_t i = 0; i < 2; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      demo.y.values(i, j) = demo.x_direction(i, 0) * demo.beta(0, j) +
                            demo.w1_direction(i, 0) * alpha1[j] +
                            demo.w2_direction(i, 0) * alpha2[j] + eps(i, j);
    }
  }
  demo.y.sample_ids = {"s1", "s2"};
  for (std::size_t j = 0; j < n; ++j)
    demo.y.feature_ids.push_back(padded_id("g", j, n));
  demo.y.validate();
  return demo;
}

}  // namespace uvr

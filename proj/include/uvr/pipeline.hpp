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

#ifndef UVR_PIPELINE_HPP
#define UVR_PIPELINE_HPP

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "uvr/correction.hpp"
#include "uvr/evaluation.hpp"
#include "uvr/synthgen.hpp"

namespace uvr {

enum class MethodName {
  none,
  mean_center,
  ratio,
  naive_ruv2,
  replicate,
  random_alpha,
  combined,
};

std::string to_string(MethodName name);
MethodName method_from_string(const std::string& name);

enum class SigmaVariant { none, rowwise, relaxed };

struct MethodSpec {
  MethodName name = MethodName::none;
  bool iterative = false;
  SigmaVariant sigma_variant = SigmaVariant::none;

  std::string label() const;
};

// "replicate", "random-alpha+iterative", "naive-ruv2+rowwise", ...
MethodSpec method_spec_from_string(const std::string& text);

/// Hyperparameters; absent optionals resolve via the documented formulas
/// (k heuristic, default_nu, lambda calibration).
struct HyperParams {
  std::optional<std::size_t> k;
  std::optional<double> nu;
  std::optional<double> lambda;
  std::optional<std::size_t> p;
  std::size_t restarts = 200;
  std::vector<std::size_t> filter_sizes;  // empty = geometric grid from n
  std::uint64_t seed = 1;
  std::size_t max_iters = 30;
  std::size_t w_refresh_period = 10;
};

struct PipelineConfig {
  // Exactly one input source: file paths or a generator spec.
  std::optional<std::string> matrix_path;
  std::optional<std::string> annotations_path;
  std::optional<std::string> controls_path;
  std::optional<GeneratorSpec> generator;

  MethodSpec method;
  HyperParams hyper;
  std::vector<std::string> batch_factors = {"batch"};
  std::optional<std::size_t> cluster_k;  // enables filter-sweep/cluster/score
  std::string out_dir;

  void validate() const;  // throws ConfigError
};

nlohmann::json generator_to_json(const GeneratorSpec& spec);
GeneratorSpec generator_from_json(const nlohmann::json& j);

nlohmann::json config_to_json(const PipelineConfig& cfg);
PipelineConfig config_from_json(const nlohmann::json& j);

struct PipelineOutcome {
  CorrectionResult correction;
  std::vector<SweepPoint> sweep;
  nlohmann::json resolved;  // hyperparameters after "auto" resolution
};

// correct -> filter sweep -> cluster -> score; writes the corrected matrix,
// partitions, scores, plot data and a manifest into cfg.out_dir.
PipelineOutcome run_pipeline(const PipelineConfig& cfg);

// In-memory variant used by the benchmark driver and tests (no file output
// unless out_dir is non-empty).
PipelineOutcome run_pipeline_core(const PipelineConfig& cfg,
                                  const GeneratedData* pregenerated = nullptr);

struct BenchmarkConfig {
  std::map<std::string, GeneratorSpec> designs;
  std::vector<MethodSpec> methods;
  std::vector<std::uint64_t> seeds;
  HyperParams hyper;
  std::optional<std::size_t> cluster_k;
  std::vector<std::string> batch_factors = {"batch"};
  std::size_t workers = 1;
  std::string out_dir;
};

nlohmann::json benchmark_to_json(const BenchmarkConfig& cfg);
BenchmarkConfig benchmark_from_json(const nlohmann::json& j);

struct BenchmarkCellResult {
  std::string design;
  std::string method;
  std::uint64_t seed = 0;
  std::vector<SweepPoint> sweep;
  bool failed = false;
  std::string error;
};

struct BenchmarkSummary {
  std::vector<BenchmarkCellResult> cells;
  // (design, method, n_kept) -> {median, min, max} across seeds
  nlohmann::json table;
};

// Runs each design x method x seed cell through the pipeline in a worker
// pool; failures are recorded and the suite continues. Writes summary.csv,
// summary.json, per-cell scores and a rerunnable manifest.
BenchmarkSummary run_benchmark(const BenchmarkConfig& cfg);

// Writes content to path via a temp file plus rename.
void atomic_write_file(const std::string& path, const std::string& content);

}  // namespace uvr

#endif  // UVR_PIPELINE_HPP

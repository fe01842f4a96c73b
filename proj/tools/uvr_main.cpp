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

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "uvr/errors.hpp"
#include "uvr/pipeline.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json load_json(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw uvr::ConfigError("cannot open config: " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw uvr::ConfigError(path + ": " + e.what());
  }
}

// Accepts either a raw config or a manifest written by a previous run.
json unwrap_manifest(json j, const char* key) {
  if (j.contains(key)) return j[key];
  return j;
}

std::vector<std::size_t> parse_size_list(const std::string& text) {
  std::vector<std::size_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(std::stoull(item));
  }
  return out;
}

void write_plain_matrix(const std::string& path, const uvr::Matrix& m,
                        const std::string& row_prefix,
                        const std::string& col_prefix) {
  uvr::ExpressionMatrix em;
  em.values = m;
  for (std::size_t i = 0; i < m.rows(); ++i)
    em.sample_ids.push_back(row_prefix + std::to_string(i + 1));
  for (std::size_t j = 0; j < m.cols(); ++j)
    em.feature_ids.push_back(col_prefix + std::to_string(j + 1));
  uvr::save_matrix(path, em, uvr::MatrixFormat{});
}

struct CorrectArgs {
  std::string config_path;
  std::string out_dir;
  std::optional<std::string> method;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> k;
  std::optional<double> nu;
  std::optional<double> lambda;
  std::optional<std::size_t> restarts;
  std::optional<std::string> filter_sizes;
};

int cmd_correct(const CorrectArgs& args) {
  uvr::PipelineConfig cfg =
      uvr::config_from_json(unwrap_manifest(load_json(args.config_path), "config"));
  // Flags override config fields.
  if (args.method) cfg.method = uvr::method_spec_from_string(*args.method);
  if (args.seed) {
    cfg.hyper.seed = *args.seed;
    if (cfg.generator) cfg.generator->seed = *args.seed;
  }
  if (args.k) cfg.hyper.k = *args.k;
  if (args.nu) cfg.hyper.nu = *args.nu;
  if (args.lambda) cfg.hyper.lambda = *args.lambda;
  if (args.restarts) cfg.hyper.restarts = *args.restarts;
  if (args.filter_sizes) cfg.hyper.filter_sizes = parse_size_list(*args.filter_sizes);
  cfg.out_dir = args.out_dir;

  uvr::PipelineOutcome outcome = uvr::run_pipeline(cfg);
  std::cout << "method: " << outcome.correction.method << "\n"
            << "removed_energy: " << outcome.correction.removed_energy << "\n"
            << "outputs: " << cfg.out_dir << "\n";
  return 0;
}

int cmd_cluster(const std::string& matrix_path, std::size_t k, std::size_t restarts,
                std::uint64_t seed, const std::string& out_path) {
  uvr::ExpressionMatrix y =
      uvr::load_matrix(matrix_path, uvr::format_for_path(matrix_path));
  uvr::KMeansResult result = uvr::kmeans(y.values, k, restarts, seed);
  uvr::save_partition(out_path, result.partition, y.sample_ids);
  std::cout << "objective: " << result.objective << "\npartition: " << out_path << "\n";
  return 0;
}

int cmd_score(const std::string& a_path, const std::string& b_path,
              const std::string& out_path) {
  std::vector<std::string> ids_a, ids_b;
  uvr::Partition a = uvr::load_partition(a_path, &ids_a);
  uvr::Partition b = uvr::load_partition(b_path, &ids_b);
  if (ids_a != ids_b)
    throw uvr::DataError("score: partitions list different samples");
  a.k = b.k = std::max(a.k, b.k);
  uvr::ClusteringScore score = uvr::clustering_distance(a, b);
  std::cout << score.value << "\n";
  if (!out_path.empty()) {
    json j;
    j["distance"] = score.value;
    j["k"] = score.k;
    uvr::atomic_write_file(out_path, j.dump(2) + "\n");
  }
  return 0;
}

int cmd_generate(const std::string& config_path, const std::string& out_dir,
                 std::optional<std::uint64_t> seed) {
  uvr::GeneratorSpec spec;
  if (!config_path.empty())
    spec = uvr::generator_from_json(unwrap_manifest(load_json(config_path), "generator"));
  if (seed) spec.seed = *seed;

  uvr::GeneratedData data = uvr::generate(spec);
  fs::create_directories(out_dir);
  fs::create_directories(out_dir + "/ground_truth");
  uvr::save_matrix(out_dir + "/matrix.csv", data.y, uvr::MatrixFormat{});
  uvr::save_annotations(out_dir + "/annotations.csv", data.annotations);
  std::vector<std::string> control_ids;
  for (std::size_t j : data.controls.indices)
    control_ids.push_back(data.y.feature_ids[j]);
  uvr::save_id_list(out_dir + "/controls.txt", control_ids);

  write_plain_matrix(out_dir + "/ground_truth/x.csv", data.truth.x, "s", "p");
  write_plain_matrix(out_dir + "/ground_truth/w.csv", data.truth.w, "s", "k");
  write_plain_matrix(out_dir + "/ground_truth/beta.csv", data.truth.beta, "p", "g");
  write_plain_matrix(out_dir + "/ground_truth/alpha.csv", data.truth.alpha, "k", "g");
  {
    std::ostringstream ss;
    ss << "sample_id,truth,batch\n";
    for (std::size_t i = 0; i < data.y.sample_ids.size(); ++i)
      ss << data.y.sample_ids[i] << ',' << data.truth.labels[i] << ','
         << data.truth.batch_labels[i] << '\n';
    uvr::atomic_write_file(out_dir + "/ground_truth/labels.csv", ss.str());
  }
  json manifest;
  manifest["generator"] = uvr::generator_to_json(spec);
  uvr::atomic_write_file(out_dir + "/manifest.json", manifest.dump(2) + "\n");
  std::cout << "generated " << data.y.values.rows() << "x" << data.y.values.cols()
            << " into " << out_dir << "\n";
  return 0;
}

int cmd_benchmark(const std::string& config_path, const std::string& out_dir,
                  std::optional<std::size_t> workers) {
  uvr::BenchmarkConfig cfg =
      uvr::benchmark_from_json(unwrap_manifest(load_json(config_path), "benchmark"));
  if (const char* env = std::getenv("UVR_WORKERS"))
    cfg.workers = static_cast<std::size_t>(std::stoull(env));
  if (workers) cfg.workers = *workers;
  cfg.out_dir = out_dir;
  uvr::BenchmarkSummary summary = uvr::run_benchmark(cfg);
  std::size_t failed = 0;
  for (const auto& cell : summary.cells)
    if (cell.failed) ++failed;
  std::cout << summary.cells.size() << " cells, " << failed << " failed; summary in "
            << out_dir << "\n";
  return 0;
}

int cmd_diagnose(const std::string& matrix_path, const std::string& ann_path,
                 const std::string& controls_path, const std::string& out_dir) {
  uvr::ExpressionMatrix y =
      uvr::load_matrix(matrix_path, uvr::format_for_path(matrix_path));
  uvr::SampleAnnotations ann = uvr::load_annotations(ann_path);
  uvr::ControlGeneSet controls =
      uvr::control_set_from_ids(y, uvr::load_id_list(controls_path));

  std::vector<std::string> labels;
  for (const auto& id : y.sample_ids) {
    const auto* info = ann.find(id);
    if (info == nullptr || !info->truth_label)
      throw uvr::DataError("diagnose: sample '" + id + "' has no truth_label");
    labels.push_back(*info->truth_label);
  }
  uvr::Partition truth = uvr::partition_from_labels(labels);
  uvr::Matrix x(y.values.rows(), truth.k);
  for (std::size_t i = 0; i < y.values.rows(); ++i)
    x(i, truth.assignments[i]) = 1.0;

  fs::create_directories(out_dir);
  std::vector<bool> is_control(y.values.cols(), false);
  for (std::size_t j : controls.indices) is_control[j] = true;

  {
    std::vector<double> cca = uvr::cca_per_feature(y.values, x);
    std::ostringstream ss;
    ss << "feature_id,is_control,cca\n";
    ss.precision(17);
    for (std::size_t j = 0; j < y.values.cols(); ++j)
      ss << y.feature_ids[j] << ',' << (is_control[j] ? 1 : 0) << ',' << cca[j] << '\n';
    uvr::atomic_write_file(out_dir + "/cca_per_feature.csv", ss.str());
  }
  {
    std::vector<std::size_t> ctl = controls.indices;
    std::vector<std::size_t> rest;
    for (std::size_t j = 0; j < y.values.cols(); ++j)
      if (!is_control[j]) rest.push_back(j);
    const std::size_t k_max = y.values.rows();
    std::vector<double> curve_ctl =
        uvr::eigenspace_cca_curve(y.values, ctl, x, k_max);
    std::vector<double> curve_rest =
        rest.empty() ? curve_ctl : uvr::eigenspace_cca_curve(y.values, rest, x, k_max);
    std::ostringstream ss;
    ss << "k,controls,non_controls\n";
    ss.precision(17);
    for (std::size_t k = 0; k < k_max; ++k)
      ss << k + 1 << ',' << curve_ctl[k] << ',' << curve_rest[k] << '\n';
    uvr::atomic_write_file(out_dir + "/eigenspace_cca.csv", ss.str());
  }
  std::cout << "diagnostics in " << out_dir << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"uvr: unwanted-variation estimation, removal and evaluation"};
  app.require_subcommand(1);

  CorrectArgs cargs;
  auto* correct = app.add_subcommand(
      "correct", "Run the correction pipeline (correct, filter, cluster, score)");
  correct->add_option("--config", cargs.config_path, "pipeline config or manifest JSON")
      ->required();
  correct->add_option("--out", cargs.out_dir, "output directory")->required();
  std::string method_flag, filter_flag;
  std::uint64_t seed_flag = 0;
  std::size_t k_flag = 0, restarts_flag = 0;
  double nu_flag = 0.0, lambda_flag = 0.0;
  auto* mf = correct->add_option("--method", method_flag, "override method");
  auto* sf = correct->add_option("--seed", seed_flag, "override seed");
  auto* kf = correct->add_option("--k", k_flag, "override k");
  auto* nf = correct->add_option("--nu", nu_flag, "override nu");
  auto* lf = correct->add_option("--lambda", lambda_flag, "override lambda");
  auto* rf = correct->add_option("--restarts", restarts_flag, "override restarts");
  auto* ff = correct->add_option("--filter-sizes", filter_flag,
                                 "override filter sizes (comma separated)");

  std::string cl_matrix, cl_out;
  std::size_t cl_k = 2, cl_restarts = 200;
  std::uint64_t cl_seed = 1;
  auto* cluster = app.add_subcommand("cluster", "k-means a matrix into a partition");
  cluster->add_option("--matrix", cl_matrix)->required();
  cluster->add_option("--k", cl_k)->required();
  cluster->add_option("--restarts", cl_restarts);
  cluster->add_option("--seed", cl_seed);
  cluster->add_option("--out", cl_out, "partition CSV path")->required();

  std::string sc_a, sc_b, sc_out;
  auto* score = app.add_subcommand("score", "clustering distance between partitions");
  score->add_option("--a", sc_a)->required();
  score->add_option("--b", sc_b)->required();
  score->add_option("--out", sc_out, "optional JSON output");

  std::string gen_config, gen_out;
  std::uint64_t gen_seed = 0;
  auto* gen = app.add_subcommand("generate", "emit a synthetic dataset");
  gen->add_option("--config", gen_config, "generator spec JSON");
  auto* gsf = gen->add_option("--seed", gen_seed, "override seed");
  gen->add_option("--out", gen_out, "output directory")->required();

  std::string bm_config, bm_out;
  std::size_t bm_workers = 0;
  auto* bench = app.add_subcommand("benchmark", "run a design x method x seed suite");
  bench->add_option("--config", bm_config)->required();
  bench->add_option("--out", bm_out)->required();
  auto* bwf = bench->add_option("--workers", bm_workers, "worker pool width");

  std::string dg_matrix, dg_ann, dg_controls, dg_out;
  auto* diag = app.add_subcommand("diagnose", "control-gene CCA diagnostics");
  diag->add_option("--matrix", dg_matrix)->required();
  diag->add_option("--annotations", dg_ann)->required();
  diag->add_option("--controls", dg_controls)->required();
  diag->add_option("--out", dg_out)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*correct) {
      if (*mf) cargs.method = method_flag;
      if (*sf) cargs.seed = seed_flag;
      if (*kf) cargs.k = k_flag;
      if (*nf) cargs.nu = nu_flag;
      if (*lf) cargs.lambda = lambda_flag;
      if (*rf) cargs.restarts = restarts_flag;
      if (*ff) cargs.filter_sizes = filter_flag;
      return cmd_correct(cargs);
    }
    if (*cluster) return cmd_cluster(cl_matrix, cl_k, cl_restarts, cl_seed, cl_out);
    if (*score) return cmd_score(sc_a, sc_b, sc_out);
    if (*gen)
      return cmd_generate(gen_config, gen_out,
                          *gsf ? std::optional(gen_seed) : std::nullopt);
    if (*bench)
      return cmd_benchmark(bm_config, bm_out,
                           *bwf ? std::optional(bm_workers) : std::nullopt);
    if (*diag) return cmd_diagnose(dg_matrix, dg_ann, dg_controls, dg_out);
  } catch (const uvr::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const uvr::DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 3;
  } catch (const uvr::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

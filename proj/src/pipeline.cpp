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

#include "uvr/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include "uvr/errors.hpp"
#include "uvr/kernels.hpp"
#include "uvr/linalg.hpp"

namespace fs = std::filesystem;

namespace uvr {

namespace {

constexpr const char* kVersion = "0.1.0";

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

struct LoadedInput {
  ExpressionMatrix y;
  SampleAnnotations ann;
  bool has_annotations = false;
  std::optional<ControlGeneSet> controls;
};

LoadedInput load_input(const PipelineConfig& cfg, const GeneratedData* pregenerated) {
  LoadedInput in;
  if (cfg.generator) {
    GeneratedData data = pregenerated ? *pregenerated : generate(*cfg.generator);
    in.y = std::move(data.y);
    in.ann = std::move(data.annotations);
    in.has_annotations = true;
    in.controls = std::move(data.controls);
    return in;
  }
  in.y = load_matrix(*cfg.matrix_path, format_for_path(*cfg.matrix_path));
  if (cfg.annotations_path) {
    in.ann = load_annotations(*cfg.annotations_path);
    in.has_annotations = true;
  }
  if (cfg.controls_path)
    in.controls = control_set_from_ids(in.y, load_id_list(*cfg.controls_path));
  return in;
}

const ControlGeneSet& require_controls(const LoadedInput& in, const MethodSpec& method) {
  if (!in.controls)
    throw ConfigError("method '" + method.label() + "' requires a control gene list");
  return *in.controls;
}

struct ResolvedCorrection {
  CorrectionResult correction;
  std::optional<UVModel> model;
  nlohmann::json resolved;
};

// Non-iterative corrections plus the W model they are based on.
ResolvedCorrection correct_base(const LoadedInput& in, const PipelineConfig& cfg) {
  const MethodSpec& method = cfg.method;
  const HyperParams& h = cfg.hyper;
  const std::size_t m = in.y.values.rows();
  ResolvedCorrection out;

  switch (method.name) {
    case MethodName::none: {
      out.correction.y_corrected = in.y;
      out.correction.removed_energy = 0.0;
      out.correction.method = "none";
      out.correction.iterations_run = 0;
      break;
    }
    case MethodName::mean_center: {
      ExpressionMatrix centered = center_by_factor(in.y, in.ann, cfg.batch_factors);
      out.correction.removed_energy =
          frobenius_norm(subtract(in.y.values, centered.values));
      out.correction.y_corrected = std::move(centered);
      out.correction.method = "mean-center";
      out.correction.iterations_run = 1;
      break;
    }
    case MethodName::ratio: {
      out.correction = correct_ratio(in.y, in.ann, cfg.batch_factors.front());
      break;
    }
    case MethodName::naive_ruv2: {
      const ControlGeneSet& c = require_controls(in, method);
      const std::size_t k =
          h.k ? *h.k : std::min(default_k(m), std::min(m, c.indices.size()));
      UVModel model = estimate_w_control_genes(in.y, c, k);
      out.resolved["k"] = model.k();
      out.correction = correct_naive_fixed(in.y, model);
      out.model = std::move(model);
      break;
    }
    case MethodName::replicate: {
      ReplicateDifferenceSet d =
          build_differences(in.y, in.ann, DifferenceScheme::all_pairs);
      const std::size_t cap = std::min(d.d_rows.rows(), in.y.values.cols());
      const std::size_t k = std::min(h.k ? *h.k : default_k(m), cap);
      UVModel model;
      if (in.controls) {
        model = estimate_w_replicates(in.y, *in.controls, d, k);
      } else {
        ControlGeneSet all;
        all.indices.resize(in.y.values.cols());
        for (std::size_t j = 0; j < all.indices.size(); ++j) all.indices[j] = j;
        model = estimate_w_replicates(in.y, all, d, k, /*regress_all_features=*/true);
      }
      out.resolved["k"] = model.k();
      out.resolved["n_differences"] = d.d_rows.rows();
      out.correction = correct_stored_alpha(in.y, model);
      out.model = std::move(model);
      break;
    }
    case MethodName::random_alpha: {
      const ControlGeneSet& c = require_controls(in, method);
      const std::size_t k = h.k ? *h.k : std::min(m, c.indices.size());
      UVModel model = estimate_w_control_genes(in.y, c, k);
      const double nu = h.nu ? *h.nu : default_nu(model);
      model.nu = nu;
      out.resolved["k"] = model.k();
      out.resolved["nu"] = nu;
      out.correction = correct_random_alpha(in.y, model, nu);
      out.model = std::move(model);
      break;
    }
    case MethodName::combined: {
      const ControlGeneSet& c = require_controls(in, method);
      ReplicateDifferenceSet d =
          build_differences(in.y, in.ann, DifferenceScheme::all_pairs);
      UVModel w2 = estimate_w_control_genes(in.y, c, std::min(m, c.indices.size()));
      const std::size_t k_rep =
          std::min(h.k ? *h.k : default_k(m),
                   std::min(d.d_rows.rows(), in.y.values.cols()));
      UVModel wr = estimate_w_replicates(in.y, c, d, k_rep);
      UVModel model = combine_w(w2, wr);
      const double nu = h.nu ? *h.nu : default_nu(model);
      model.nu = nu;
      out.resolved["k"] = model.k();
      out.resolved["nu"] = nu;
      out.correction = correct_random_alpha(in.y, model, nu);
      out.model = std::move(model);
      break;
    }
  }
  return out;
}

// Re-estimation of W from residuals follows the provenance of the initial
// model, so the control-gene and replicate method families stay distinct.
WRefresher make_refresher(const LoadedInput& in,
                          const UVModel& model) {
  const std::size_t k = model.k();
  switch (model.source) {
    case WSource::control_genes: {
      ControlGeneSet c = *in.controls;
      return [c, k](const ExpressionMatrix& residual) {
        return estimate_w_control_genes(residual, c,
                                        std::min(k, std::min(residual.values.rows(),
                                                             c.indices.size())));
      };
    }
    case WSource::replicates: {
      SampleAnnotations ann = in.ann;
      std::optional<ControlGeneSet> c = in.controls;
      return [ann, c, k](const ExpressionMatrix& residual) {
        ReplicateDifferenceSet d =
            build_differences(residual, ann, DifferenceScheme::all_pairs);
        const std::size_t kk =
            std::min(k, std::min(d.d_rows.rows(), residual.values.cols()));
        if (c) return estimate_w_replicates(residual, *c, d, kk);
        ControlGeneSet all;
        all.indices.resize(residual.values.cols());
        for (std::size_t j = 0; j < all.indices.size(); ++j) all.indices[j] = j;
        return estimate_w_replicates(residual, all, d, kk, true);
      };
    }
    case WSource::combined: {
      SampleAnnotations ann = in.ann;
      ControlGeneSet c = *in.controls;
      return [ann, c](const ExpressionMatrix& residual) {
        const std::size_t m = residual.values.rows();
        UVModel w2 = estimate_w_control_genes(residual, c,
                                              std::min(m, c.indices.size()));
        ReplicateDifferenceSet d =
            build_differences(residual, ann, DifferenceScheme::all_pairs);
        UVModel wr = estimate_w_replicates(
            residual, c, d,
            std::min(default_k(m), std::min(d.d_rows.rows(), residual.values.cols())));
        return combine_w(w2, wr);
      };
    }
    default: {
      return [k](const ExpressionMatrix& residual) {
        return estimate_w_residuals(residual, Matrix(residual.values.rows(),
                                                     residual.values.cols()),
                                    k);
      };
    }
  }
}

ResolvedCorrection correct_stage(const LoadedInput& in, const PipelineConfig& cfg) {
  ResolvedCorrection base = correct_base(in, cfg);
  if (!cfg.method.iterative) return base;
  if (!base.model)
    throw ConfigError("method '" + cfg.method.label() + "' has no iterative form");

  const HyperParams& h = cfg.hyper;
  const std::size_t m = in.y.values.rows(), n = in.y.values.cols();
  const std::size_t p = h.p ? *h.p : std::min(default_k(m), std::min(m, n));

  IterationConfig icfg;
  icfg.max_iters = h.max_iters;
  icfg.w_refresh_period = h.w_refresh_period;
  icfg.nu = cfg.method.name == MethodName::naive_ruv2
                ? 0.0
                : (h.nu ? *h.nu : default_nu(*base.model));
  WRefresher refresher = make_refresher(in, *base.model);

  auto run_with_lambda = [&](double lambda) {
    SparseDictionaryEstimator estimator(p, lambda, h.seed);
    IterationConfig c = icfg;
    c.lambda = lambda;
    return iterate_correction(in.y, *base.model, estimator, c, refresher);
  };

  double lambda;
  if (h.lambda) {
    lambda = *h.lambda;
  } else {
    const double target = base.correction.removed_energy;
    // lambda0 = max absolute entry of the unpenalized beta at the SVD
    // initialization of the dictionary estimator.
    Matrix x0 = truncated_svd(base.correction.y_corrected.values, p).u;
    const double lambda0 =
        std::max(1e-12, max_abs(multiply_at_b(x0, base.correction.y_corrected.values)));
    lambda = calibrate_lambda(
        [&](double l) { return run_with_lambda(l).correction.removed_energy; },
        lambda0, target);
    base.resolved["lambda0"] = lambda0;
    base.resolved["target_energy"] = target;
  }

  IterateResult iterated = run_with_lambda(lambda);
  base.resolved["lambda"] = lambda;
  base.resolved["p"] = p;
  base.resolved["iter_nu"] = icfg.nu;
  base.resolved["iterations_run"] = iterated.correction.iterations_run;
  base.correction = std::move(iterated.correction);
  return base;
}

std::vector<std::size_t> default_filter_grid(std::size_t n, std::size_t cluster_k) {
  std::vector<std::size_t> sizes;
  const std::size_t floor_size = std::max<std::size_t>(16, 4 * cluster_k);
  for (std::size_t s = n; s >= floor_size && sizes.size() < 8; s /= 2) sizes.push_back(s);
  if (sizes.empty()) sizes.push_back(n);
  std::reverse(sizes.begin(), sizes.end());  // ascending
  return sizes;
}

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

void write_text(const std::string& path, const std::string& content) {
  atomic_write_file(path, content);
}

}  // namespace

std::string to_string(MethodName name) {
  switch (name) {
    case MethodName::none: return "none";
    case MethodName::mean_center: return "mean-center";
    case MethodName::ratio: return "ratio";
    case MethodName::naive_ruv2: return "naive-ruv2";
    case MethodName::replicate: return "replicate";
    case MethodName::random_alpha: return "random-alpha";
    case MethodName::combined: return "combined";
  }
  return "unknown";
}

MethodName method_from_string(const std::string& name) {
  if (name == "none") return MethodName::none;
  if (name == "mean-center") return MethodName::mean_center;
  if (name == "ratio") return MethodName::ratio;
  if (name == "naive-ruv2") return MethodName::naive_ruv2;
  if (name == "replicate") return MethodName::replicate;
  if (name == "random-alpha") return MethodName::random_alpha;
  if (name == "combined") return MethodName::combined;
  throw ConfigError("unknown method: " + name);
}

std::string MethodSpec::label() const {
  std::string out = to_string(name);
  if (iterative) out += "+iterative";
  if (sigma_variant == SigmaVariant::rowwise) out += "+rowwise";
  if (sigma_variant == SigmaVariant::relaxed) out += "+relaxed";
  return out;
}

MethodSpec method_spec_from_string(const std::string& text) {
  MethodSpec spec;
  std::string base = text;
  std::vector<std::string> mods;
  std::size_t plus;
  while ((plus = base.rfind('+')) != std::string::npos) {
    mods.push_back(base.substr(plus + 1));
    base = base.substr(0, plus);
  }
  spec.name = method_from_string(base);
  for (const auto& mod : mods) {
    if (mod == "iterative") {
      spec.iterative = true;
    } else if (mod == "rowwise") {
      spec.sigma_variant = SigmaVariant::rowwise;
    } else if (mod == "relaxed") {
      spec.sigma_variant = SigmaVariant::relaxed;
    } else {
      throw ConfigError("unknown method modifier: " + mod);
    }
  }
  return spec;
}

void PipelineConfig::validate() const {
  const bool has_files = matrix_path.has_value();
  const bool has_gen = generator.has_value();
  if (has_files == has_gen)
    throw ConfigError("config must name exactly one input source (files or generator)");
  if (batch_factors.empty())
    throw ConfigError("batch_factors must not be empty");
  if (hyper.restarts < 1) throw ConfigError("restarts must be >= 1");
  if (cluster_k && *cluster_k < 1) throw ConfigError("cluster_k must be >= 1");
}

nlohmann::json generator_to_json(const GeneratorSpec& s) {
  nlohmann::json j;
  j["m"] = s.m;
  j["n"] = s.n;
  j["p"] = s.p;
  j["k_uv"] = s.k_uv;
  j["sigma_alpha"] = s.sigma_alpha;
  j["sigma_eps"] = s.sigma_eps;
  j["sigma_beta_c"] = s.sigma_beta_c;
  j["beta_scale"] = s.beta_scale;
  j["design"] = s.design == DesignKind::confounded ? "confounded" : "orthogonal-full";
  j["confounding_strength"] = s.confounding_strength;
  j["n_replicate_groups"] = s.n_replicate_groups;
  j["group_size"] = s.group_size;
  j["control_fraction"] = s.control_fraction;
  j["control_quality"] =
      s.control_quality == ControlQuality::leaky ? "leaky" : "clean";
  j["seed"] = s.seed;
  return j;
}

GeneratorSpec generator_from_json(const nlohmann::json& j) {
  GeneratorSpec s;
  s.m = j.value("m", s.m);
  s.n = j.value("n", s.n);
  s.p = j.value("p", s.p);
  s.k_uv = j.value("k_uv", s.k_uv);
  s.sigma_alpha = j.value("sigma_alpha", s.sigma_alpha);
  s.sigma_eps = j.value("sigma_eps", s.sigma_eps);
  s.sigma_beta_c = j.value("sigma_beta_c", s.sigma_beta_c);
  s.beta_scale = j.value("beta_scale", s.beta_scale);
  if (j.contains("design")) {
    const std::string d = j["design"].get<std::string>();
    if (d == "confounded")
      s.design = DesignKind::confounded;
    else if (d == "orthogonal-full")
      s.design = DesignKind::orthogonal_full;
    else
      throw ConfigError("unknown design: " + d);
  }
  s.confounding_strength = j.value("confounding_strength", s.confounding_strength);
  s.n_replicate_groups = j.value("n_replicate_groups", s.n_replicate_groups);
  s.group_size = j.value("group_size", s.group_size);
  s.control_fraction = j.value("control_fraction", s.control_fraction);
  if (j.contains("control_quality")) {
    const std::string q = j["control_quality"].get<std::string>();
    if (q == "leaky")
      s.control_quality = ControlQuality::leaky;
    else if (q == "clean")
      s.control_quality = ControlQuality::clean;
    else
      throw ConfigError("unknown control quality: " + q);
  }
  s.seed = j.value("seed", s.seed);
  return s;
}

namespace {

nlohmann::json hyper_to_json(const HyperParams& h) {
  nlohmann::json j;
  if (h.k) j["k"] = *h.k;
  if (h.nu) j["nu"] = *h.nu;
  if (h.lambda) j["lambda"] = *h.lambda;
  if (h.p) j["p"] = *h.p;
  j["restarts"] = h.restarts;
  if (!h.filter_sizes.empty()) j["filter_sizes"] = h.filter_sizes;
  j["seed"] = h.seed;
  j["max_iters"] = h.max_iters;
  j["w_refresh_period"] = h.w_refresh_period;
  return j;
}

HyperParams hyper_from_json(const nlohmann::json& j) {
  HyperParams h;
  auto opt_size = [&](const char* key) -> std::optional<std::size_t> {
    if (!j.contains(key) || j[key].is_string()) return std::nullopt;  // "auto"
    return j[key].get<std::size_t>();
  };
  auto opt_double = [&](const char* key) -> std::optional<double> {
    if (!j.contains(key) || j[key].is_string()) return std::nullopt;
    return j[key].get<double>();
  };
  h.k = opt_size("k");
  h.nu = opt_double("nu");
  h.lambda = opt_double("lambda");
  h.p = opt_size("p");
  h.restarts = j.value("restarts", h.restarts);
  if (j.contains("filter_sizes") && j["filter_sizes"].is_array())
    h.filter_sizes = j["filter_sizes"].get<std::vector<std::size_t>>();
  h.seed = j.value("seed", h.seed);
  h.max_iters = j.value("max_iters", h.max_iters);
  h.w_refresh_period = j.value("w_refresh_period", h.w_refresh_period);
  return h;
}

}  // namespace

nlohmann::json config_to_json(const PipelineConfig& cfg) {
  nlohmann::json j;
  nlohmann::json input;
  if (cfg.generator) {
    input["generator"] = generator_to_json(*cfg.generator);
  } else {
    if (cfg.matrix_path) input["matrix"] = *cfg.matrix_path;
    if (cfg.annotations_path) input["annotations"] = *cfg.annotations_path;
    if (cfg.controls_path) input["controls"] = *cfg.controls_path;
  }
  j["input"] = input;
  j["method"] = cfg.method.label();
  j["hyper"] = hyper_to_json(cfg.hyper);
  j["batch_factors"] = cfg.batch_factors;
  if (cfg.cluster_k) j["cluster_k"] = *cfg.cluster_k;
  return j;
}

PipelineConfig config_from_json(const nlohmann::json& j) {
  PipelineConfig cfg;
  if (!j.contains("input")) throw ConfigError("config: missing 'input'");
  const auto& input = j["input"];
  if (input.contains("generator")) {
    cfg.generator = generator_from_json(input["generator"]);
  } else {
    if (input.contains("matrix")) cfg.matrix_path = input["matrix"].get<std::string>();
    if (input.contains("annotations"))
      cfg.annotations_path = input["annotations"].get<std::string>();
    if (input.contains("controls"))
      cfg.controls_path = input["controls"].get<std::string>();
  }
  if (!j.contains("method")) throw ConfigError("config: missing 'method'");
  cfg.method = method_spec_from_string(j["method"].get<std::string>());
  if (j.contains("hyper")) cfg.hyper = hyper_from_json(j["hyper"]);
  if (j.contains("batch_factors"))
    cfg.batch_factors = j["batch_factors"].get<std::vector<std::string>>();
  if (j.contains("cluster_k")) cfg.cluster_k = j["cluster_k"].get<std::size_t>();
  cfg.validate();
  return cfg;
}

PipelineOutcome run_pipeline_core(const PipelineConfig& cfg,
                                  const GeneratedData* pregenerated) {
  cfg.validate();
  LoadedInput in = load_input(cfg, pregenerated);
  ResolvedCorrection corrected = correct_stage(in, cfg);

  PipelineOutcome out;
  out.resolved = corrected.resolved;
  out.resolved["method"] = cfg.method.label();
  out.resolved["seed"] = cfg.hyper.seed;

  // Truth partition, if every sample carries a label.
  std::optional<Partition> truth;
  if (in.has_annotations) {
    std::vector<std::string> labels;
    bool complete = true;
    for (const auto& id : in.y.sample_ids) {
      const auto* info = in.ann.find(id);
      if (info == nullptr || !info->truth_label) {
        complete = false;
        break;
      }
      labels.push_back(*info->truth_label);
    }
    if (complete) truth = partition_from_labels(labels);
  }

  std::vector<std::pair<std::size_t, Partition>> partitions;
  if (cfg.cluster_k) {
    const std::size_t ck = *cfg.cluster_k;
    const std::string label = cfg.method.label();

    if (cfg.method.sigma_variant != SigmaVariant::none) {
      if (!corrected.model)
        throw ConfigError("sigma variant requires a W-producing method");
      QuadraticNormSpec spec;
      spec.w = corrected.model->w_hat;
      spec.nu = corrected.model->nu ? *corrected.model->nu
                                    : default_nu(*corrected.model);
      SigmaKMeansResult r =
          cfg.method.sigma_variant == SigmaVariant::rowwise
              ? kmeans_sigma_rowwise(in.y.values, ck, spec, cfg.hyper.seed)
              : kmeans_sigma_relaxed(in.y.values, ck, spec, cfg.hyper.seed);
      partitions.emplace_back(in.y.values.cols(), r.partition);
      if (truth) {
        Partition a = r.partition, b = *truth;
        a.k = b.k = std::max(a.k, b.k);
        out.sweep.push_back({label, in.y.values.cols(),
                             clustering_distance(a, b).value, cfg.hyper.seed});
      }
    } else {
      std::vector<std::size_t> sizes = cfg.hyper.filter_sizes;
      if (sizes.empty())
        sizes = default_filter_grid(corrected.correction.y_corrected.values.cols(), ck);
      for (std::size_t n_keep : sizes) {
        ExpressionMatrix filtered =
            variance_filter(corrected.correction.y_corrected, n_keep);
        KMeansResult km =
            kmeans(filtered.values, ck, cfg.hyper.restarts, cfg.hyper.seed);
        partitions.emplace_back(n_keep, km.partition);
        if (truth) {
          Partition a = km.partition, b = *truth;
          a.k = b.k = std::max(a.k, b.k);
          out.sweep.push_back(
              {label, n_keep, clustering_distance(a, b).value, cfg.hyper.seed});
        }
      }
    }
  }

  out.correction = std::move(corrected.correction);

  if (!cfg.out_dir.empty()) {
    fs::create_directories(cfg.out_dir);
    const std::string dir = cfg.out_dir;

    {  // corrected matrix
      const std::string tmp = dir + "/corrected.csv.tmp";
      save_matrix(tmp, out.correction.y_corrected, MatrixFormat{});
      fs::rename(tmp, dir + "/corrected.csv");
    }

    nlohmann::json sidecar;
    sidecar["method"] = out.correction.method;
    sidecar["removed_energy"] = out.correction.removed_energy;
    sidecar["iterations_run"] = out.correction.iterations_run;
    sidecar["resolved"] = out.resolved;
    write_text(dir + "/method.json", sidecar.dump(2) + "\n");

    for (const auto& [n_keep, partition] : partitions) {
      const std::string tmp = dir + "/partition_" + std::to_string(n_keep) + ".csv.tmp";
      save_partition(tmp, partition, in.y.sample_ids);
      fs::rename(tmp, dir + "/partition_" + std::to_string(n_keep) + ".csv");
    }

    if (!out.sweep.empty()) {
      PcaTable pca;
      const auto& ym = out.correction.y_corrected.values;
      if (ym.rows() >= 2 && ym.cols() >= 2) {
        Matrix coords = pca_coordinates(ym, 2);
        pca.label_names = {"truth", "batch"};
        for (std::size_t i = 0; i < ym.rows(); ++i) {
          const std::string& id = out.correction.y_corrected.sample_ids[i];
          pca.sample_ids.push_back(id);
          pca.pc1.push_back(coords(i, 0));
          pca.pc2.push_back(coords(i, 1));
          const auto* info = in.has_annotations ? in.ann.find(id) : nullptr;
          std::string truth_label =
              info && info->truth_label ? *info->truth_label : "";
          std::string batch;
          if (info) {
            auto it = info->levels.find(cfg.batch_factors.front());
            if (it != info->levels.end()) batch = it->second;
          }
          pca.labels.push_back({truth_label, batch});
        }
      }
      emit_plot_data(out.sweep, pca, dir);
    }

    nlohmann::json manifest;
    manifest["uvr_version"] = kVersion;
    manifest["config"] = config_to_json(cfg);
    manifest["resolved"] = out.resolved;
    write_text(dir + "/manifest.json", manifest.dump(2) + "\n");
  }
  return out;
}

PipelineOutcome run_pipeline(const PipelineConfig& cfg) {
  if (cfg.out_dir.empty()) throw ConfigError("run_pipeline: out_dir required");
  return run_pipeline_core(cfg);
}

nlohmann::json benchmark_to_json(const BenchmarkConfig& cfg) {
  nlohmann::json j;
  nlohmann::json designs;
  for (const auto& [name, spec] : cfg.designs) designs[name] = generator_to_json(spec);
  j["designs"] = designs;
  std::vector<std::string> methods;
  for (const auto& spec : cfg.methods) methods.push_back(spec.label());
  j["methods"] = methods;
  j["seeds"] = cfg.seeds;
  j["hyper"] = hyper_to_json(cfg.hyper);
  if (cfg.cluster_k) j["cluster_k"] = *cfg.cluster_k;
  j["batch_factors"] = cfg.batch_factors;
  j["workers"] = cfg.workers;
  return j;
}

BenchmarkConfig benchmark_from_json(const nlohmann::json& j) {
  BenchmarkConfig cfg;
  if (!j.contains("designs") || !j.contains("methods") || !j.contains("seeds"))
    throw ConfigError("benchmark config: designs, methods and seeds are required");
  for (const auto& [name, spec] : j["designs"].items())
    cfg.designs[name] = generator_from_json(spec);
  for (const auto& item : j["methods"])
    cfg.methods.push_back(method_spec_from_string(item.get<std::string>()));
  cfg.seeds = j["seeds"].get<std::vector<std::uint64_t>>();
  if (j.contains("hyper")) cfg.hyper = hyper_from_json(j["hyper"]);
  if (j.contains("cluster_k")) cfg.cluster_k = j["cluster_k"].get<std::size_t>();
  if (j.contains("batch_factors"))
    cfg.batch_factors = j["batch_factors"].get<std::vector<std::string>>();
  cfg.workers = j.value("workers", cfg.workers);
  if (cfg.designs.empty() || cfg.methods.empty() || cfg.seeds.empty())
    throw ConfigError("benchmark config: empty suite");
  return cfg;
}

BenchmarkSummary run_benchmark(const BenchmarkConfig& cfg) {
  if (cfg.out_dir.empty()) throw ConfigError("run_benchmark: out_dir required");
  fs::create_directories(cfg.out_dir);

  // One work unit per (design, seed): generation is shared across methods.
  struct Unit {
    std::string design;
    std::uint64_t seed;
  };
  std::vector<Unit> units;
  for (const auto& [name, spec] : cfg.designs)
    for (std::uint64_t seed : cfg.seeds) units.push_back({name, seed});

  std::vector<std::vector<BenchmarkCellResult>> unit_results(units.size());
  std::atomic<std::size_t> next{0};
  const std::size_t width = std::max<std::size_t>(1, cfg.workers);

  auto worker = [&]() {
    for (;;) {
      const std::size_t u = next.fetch_add(1);
      if (u >= units.size()) return;
      const Unit& unit = units[u];
      GeneratorSpec gspec = cfg.designs.at(unit.design);
      gspec.seed = unit.seed;
      std::optional<GeneratedData> data;
      std::string gen_error;
      try {
        data = generate(gspec);
      } catch (const std::exception& e) {
        gen_error = e.what();
      }
      for (const auto& method : cfg.methods) {
        BenchmarkCellResult cell;
        cell.design = unit.design;
        cell.method = method.label();
        cell.seed = unit.seed;
        if (!data) {
          cell.failed = true;
          cell.error = gen_error;
        } else {
          PipelineConfig pc;
          pc.generator = gspec;
          pc.method = method;
          pc.hyper = cfg.hyper;
          pc.hyper.seed = unit.seed;
          pc.batch_factors = cfg.batch_factors;
          pc.cluster_k = cfg.cluster_k ? cfg.cluster_k : std::optional(gspec.p);
          try {
            PipelineOutcome outcome = run_pipeline_core(pc, &*data);
            cell.sweep = std::move(outcome.sweep);
          } catch (const std::exception& e) {
            cell.failed = true;
            cell.error = e.what();
          }
        }
        unit_results[u].push_back(std::move(cell));
      }
    }
  };

  if (width == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < width; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  BenchmarkSummary summary;
  for (auto& cells : unit_results)
    for (auto& cell : cells) summary.cells.push_back(std::move(cell));

  // cells.csv: one row per (cell, filter size); failures.csv separately.
  std::ostringstream cells_csv, failures_csv;
  cells_csv << "design,method,seed,n_genes_kept,error\n";
  failures_csv << "design,method,seed,error\n";
  std::map<std::tuple<std::string, std::string, std::size_t>, std::vector<double>>
      grouped;
  for (const auto& cell : summary.cells) {
    if (cell.failed) {
      failures_csv << cell.design << ',' << cell.method << ',' << cell.seed << ",\""
                   << cell.error << "\"\n";
      continue;
    }
    for (const auto& point : cell.sweep) {
      cells_csv << cell.design << ',' << cell.method << ',' << cell.seed << ','
                << point.n_genes_kept << ',' << format_double(point.error) << '\n';
      grouped[{cell.design, cell.method, point.n_genes_kept}].push_back(point.error);
    }
  }

  std::ostringstream summary_csv;
  summary_csv << "design,method,n_genes_kept,median,min,max,n_seeds\n";
  nlohmann::json table = nlohmann::json::array();
  for (const auto& [key, values] : grouped) {
    const auto& [design, method, n_kept] = key;
    const double med = median_of(values);
    const double mn = *std::min_element(values.begin(), values.end());
    const double mx = *std::max_element(values.begin(), values.end());
    summary_csv << design << ',' << method << ',' << n_kept << ','
                << format_double(med) << ',' << format_double(mn) << ','
                << format_double(mx) << ',' << values.size() << '\n';
    nlohmann::json row;
    row["design"] = design;
    row["method"] = method;
    row["n_genes_kept"] = n_kept;
    row["median"] = med;
    row["min"] = mn;
    row["max"] = mx;
    row["n_seeds"] = values.size();
    table.push_back(row);
  }
  summary.table = table;

  atomic_write_file(cfg.out_dir + "/cells.csv", cells_csv.str());
  atomic_write_file(cfg.out_dir + "/failures.csv", failures_csv.str());
  atomic_write_file(cfg.out_dir + "/summary.csv", summary_csv.str());
  nlohmann::json sj;
  sj["uvr_version"] = kVersion;
  sj["table"] = table;
  atomic_write_file(cfg.out_dir + "/summary.json", sj.dump(2) + "\n");
  nlohmann::json manifest;
  manifest["uvr_version"] = kVersion;
  manifest["benchmark"] = benchmark_to_json(cfg);
  atomic_write_file(cfg.out_dir + "/manifest.json", manifest.dump(2) + "\n");
  return summary;
}

void atomic_write_file(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw DataError("cannot write file: " + tmp);
    out << content;
    if (!out) throw DataError("write failed: " + tmp);
  }
  fs::rename(tmp, path);
}

}  // namespace uvr

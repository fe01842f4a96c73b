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

#include "uvr/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <set>

#include <json.hpp>

#include "uvr/errors.hpp"
#include "uvr/kernels.hpp"
#include "uvr/linalg.hpp"

namespace uvr {

namespace {

constexpr double kDropTol = 1e-10;  // relative singular-value cutoff

// Applies the singularity rule: keeps at most k leading triples, dropping
// singular values <= kDropTol * s1. Errors on an all-zero spectrum.
std::size_t effective_rank(const std::vector<double>& s, std::size_t k,
                           const char* who) {
  if (s.empty() || s.front() <= 0.0)
    throw NumericalError(std::string(who) + ": input is numerically zero");
  std::size_t r = 0;
  while (r < std::min(k, s.size()) && s[r] > kDropTol * s.front()) ++r;
  if (r < k)
    std::cerr << "uvr: warning: " << who << " reduced k from " << k << " to " << r
              << " (near-zero singular values dropped)\n";
  return r;
}

Matrix scaled_left_vectors(const SvdResult& dec, std::size_t r) {
  Matrix w(dec.u.rows(), r);
  for (std::size_t i = 0; i < dec.u.rows(); ++i)
    for (std::size_t j = 0; j < r; ++j) w(i, j) = dec.u(i, j) * dec.singular_values[j];
  return w;
}

}  // namespace

std::string to_string(WSource source) {
  switch (source) {
    case WSource::control_genes: return "control-genes";
    case WSource::replicates: return "replicates";
    case WSource::combined: return "combined";
    case WSource::known_factors: return "known-factors";
    case WSource::residual_updated: return "residual-updated";
  }
  return "unknown";
}

WSource w_source_from_string(const std::string& name) {
  if (name == "control-genes") return WSource::control_genes;
  if (name == "replicates") return WSource::replicates;
  if (name == "combined") return WSource::combined;
  if (name == "known-factors") return WSource::known_factors;
  if (name == "residual-updated") return WSource::residual_updated;
  throw DataError("unknown UV model provenance: " + name);
}

std::size_t default_k(std::size_t m) {
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(
                                      static_cast<double>(m) / 4.0)));
}

UVModel estimate_w_control_genes(const ExpressionMatrix& y, const ControlGeneSet& c,
                                 std::size_t k) {
  c.validate(y.values.cols());
  const std::size_t m = y.values.rows();
  if (k < 1 || k > std::min(m, c.indices.size()))
    throw NumericalError("estimate_w_control_genes: k out of range");

  Matrix yc = select_columns(y.values, c.indices);
  SvdResult dec = svd(yc);
  const std::size_t r = effective_rank(dec.singular_values, k,
                                       "estimate_w_control_genes");
  UVModel model;
  model.w_hat = scaled_left_vectors(dec, r);
  model.source = WSource::control_genes;
  return model;
}

UVModel estimate_w_replicates(const ExpressionMatrix& y, const ControlGeneSet& c,
                              const ReplicateDifferenceSet& d, std::size_t k,
                              bool regress_all_features) {
  c.validate(y.values.cols());
  const std::size_t nd = d.d_rows.rows();
  const std::size_t n = y.values.cols();
  if (d.d_rows.cols() != n)
    throw NumericalError("estimate_w_replicates: difference width mismatch");
  if (k < 1 || k > std::min(nd, n))
    throw NumericalError("estimate_w_replicates: k exceeds the difference count");

  SvdResult dec = svd(d.d_rows);
  const std::size_t r = effective_rank(dec.singular_values, k,
                                       "estimate_w_replicates");

  // alpha = E_k Q^T, the main variations among the replicate differences.
  Matrix alpha(r, n);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < n; ++j)
      alpha(i, j) = dec.singular_values[i] * dec.v(j, i);

  Matrix alpha_c = regress_all_features ? alpha : select_columns(alpha, c.indices);
  Matrix yc = regress_all_features ? y.values : select_columns(y.values, c.indices);

  Matrix gram = multiply_a_bt(alpha_c, alpha_c);  // r x r
  Matrix rhs = multiply_a_bt(alpha_c, yc);        // r x m
  Matrix w_t;
  try {
    w_t = spd_solve(gram, rhs);
  } catch (const NumericalError&) {
    throw NumericalError(
        "estimate_w_replicates: singular alpha_c alpha_c^T (degenerate replicate "
        "structure)");
  }

  UVModel model;
  model.w_hat = transpose(w_t);
  model.alpha_hat = std::move(alpha);
  model.source = WSource::replicates;
  return model;
}

Matrix replicate_rank_diagnostic(const Matrix& w_d) {
  if (max_abs(w_d) == 0.0)
    throw NumericalError("replicate_rank_diagnostic: zero matrix");
  SvdResult dec = svd(w_d);
  const std::size_t r = numerical_rank(dec.singular_values, kDropTol);
  Matrix b_r(w_d.cols(), r);
  for (std::size_t i = 0; i < w_d.cols(); ++i)
    for (std::size_t j = 0; j < r; ++j) b_r(i, j) = dec.v(i, j);
  return multiply_a_bt(b_r, b_r);
}

UVModel combine_w(const UVModel& a, const UVModel& b) {
  if (a.w_hat.rows() != b.w_hat.rows())
    throw NumericalError("combine_w: row mismatch");
  UVModel model;
  model.w_hat = Matrix(a.w_hat.rows(), a.k() + b.k());
  for (std::size_t i = 0; i < a.w_hat.rows(); ++i) {
    for (std::size_t j = 0; j < a.k(); ++j) model.w_hat(i, j) = a.w_hat(i, j);
    for (std::size_t j = 0; j < b.k(); ++j) model.w_hat(i, a.k() + j) = b.w_hat(i, j);
  }
  model.source = WSource::combined;
  model.parents = {to_string(a.source), to_string(b.source)};
  return model;
}

UVModel estimate_w_residuals(const ExpressionMatrix& y, const Matrix& xbeta_hat,
                             std::size_t k) {
  if (xbeta_hat.rows() != y.values.rows() || xbeta_hat.cols() != y.values.cols())
    throw NumericalError("estimate_w_residuals: shape mismatch");
  const std::size_t m = y.values.rows(), n = y.values.cols();
  if (k < 1 || k > std::min(m, n))
    throw NumericalError("estimate_w_residuals: rank out of range");

  Matrix residual = subtract(y.values, xbeta_hat);
  SvdResult dec = svd(residual);
  const std::size_t r = effective_rank(dec.singular_values, k,
                                       "estimate_w_residuals");
  UVModel model;
  model.w_hat = scaled_left_vectors(dec, r);
  model.source = WSource::residual_updated;
  return model;
}

UVModel known_w(const ExpressionMatrix& y, const SampleAnnotations& ann,
                const std::vector<std::string>& factors) {
  if (factors.empty()) throw DataError("known_w: no factors given");
  for (const auto& factor : factors) {
    bool known = false;
    for (const auto& [id, info] : ann.samples)
      if (info.levels.count(factor)) known = true;
    if (!known) throw DataError("unknown factor name: " + factor);
  }

  const std::size_t m = y.values.rows();
  std::vector<std::vector<std::string>> keys(m);
  std::set<std::vector<std::string>> cells;
  for (std::size_t i = 0; i < m; ++i) {
    for (const auto& factor : factors)
      keys[i].push_back(ann.level_of(y.sample_ids[i], factor));
    cells.insert(keys[i]);
  }

  std::map<std::vector<std::string>, std::size_t> column_of;
  std::size_t next = 0;
  for (const auto& cell : cells) column_of[cell] = next++;

  UVModel model;
  model.w_hat = Matrix(m, cells.size());
  for (std::size_t i = 0; i < m; ++i) model.w_hat(i, column_of[keys[i]]) = 1.0;
  model.source = WSource::known_factors;
  return model;
}

void save_uv_model(const std::string& basepath, const UVModel& model,
                   const std::vector<std::string>& sample_ids) {
  ExpressionMatrix em;
  em.values = model.w_hat;
  em.sample_ids = sample_ids;
  for (std::size_t j = 0; j < model.k(); ++j)
    em.feature_ids.push_back("w" + std::to_string(j + 1));
  save_matrix(basepath + ".csv", em, MatrixFormat{});

  nlohmann::json meta;
  meta["provenance"] = to_string(model.source);
  meta["k"] = model.k();
  if (model.nu) meta["nu"] = *model.nu;
  if (!model.parents.empty()) meta["parents"] = model.parents;
  std::ofstream out(basepath + ".json", std::ios::binary);
  if (!out) throw DataError("cannot write file: " + basepath + ".json");
  out << meta.dump(2) << '\n';
}

UVModel load_uv_model(const std::string& basepath) {
  ExpressionMatrix em = load_matrix(basepath + ".csv", MatrixFormat{});
  std::ifstream in(basepath + ".json", std::ios::binary);
  if (!in) throw DataError("cannot open file: " + basepath + ".json");
  nlohmann::json meta = nlohmann::json::parse(in);

  UVModel model;
  model.w_hat = em.values;
  model.source = w_source_from_string(meta.at("provenance").get<std::string>());
  if (meta.contains("nu")) model.nu = meta["nu"].get<double>();
  if (meta.contains("parents"))
    model.parents = meta["parents"].get<std::vector<std::string>>();
  return model;
}

}  // namespace uvr

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

#include "uvr/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "uvr/errors.hpp"

namespace uvr {

namespace {

std::vector<std::string> split_line(const std::string& line, char delim) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == delim) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  out.push_back(cur);
  return out;
}

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open file: " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  return lines;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

double parse_cell(const std::string& token, std::size_t line_no, std::size_t col_no,
                  const std::string& sample_id, const std::string& feature_id) {
  const char* begin = token.c_str();
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  const bool consumed = (end == begin + token.size()) && !token.empty();
  if (!consumed || !std::isfinite(v)) {
    std::ostringstream msg;
    msg << "non-numeric cell '" << token << "' at line " << line_no << ", column "
        << col_no << " (sample '" << sample_id << "', feature '" << feature_id << "')";
    throw DataError(msg.str());
  }
  return v;
}

void check_unique(const std::vector<std::string>& ids, const char* kind) {
  std::set<std::string> seen;
  for (const auto& id : ids) {
    if (!seen.insert(id).second)
      throw DataError(std::string("duplicate ") + kind + " id: " + id);
  }
}

}  // namespace

void ExpressionMatrix::validate() const {
  if (values.rows() < 1 || values.cols() < 1)
    throw DataError("expression matrix must have at least one row and one column");
  if (sample_ids.size() != values.rows())
    throw DataError("sample id count does not match row count");
  if (feature_ids.size() != values.cols())
    throw DataError("feature id count does not match column count");
  check_unique(sample_ids, "sample");
  check_unique(feature_ids, "feature");
  for (std::size_t i = 0; i < values.rows(); ++i)
    for (std::size_t j = 0; j < values.cols(); ++j)
      if (!std::isfinite(values(i, j)))
        throw DataError("non-finite value for sample '" + sample_ids[i] +
                        "', feature '" + feature_ids[j] + "'");
}

std::size_t ExpressionMatrix::sample_index(const std::string& id) const {
  for (std::size_t i = 0; i < sample_ids.size(); ++i)
    if (sample_ids[i] == id) return i;
  throw DataError("unknown sample id: " + id);
}

const SampleAnnotations::Info* SampleAnnotations::find(
    const std::string& sample_id) const {
  auto it = samples.find(sample_id);
  return it == samples.end() ? nullptr : &it->second;
}

const std::string& SampleAnnotations::level_of(const std::string& sample_id,
                                               const std::string& factor) const {
  const Info* info = find(sample_id);
  if (info == nullptr)
    throw DataError("sample '" + sample_id + "' has no annotations");
  auto it = info->levels.find(factor);
  if (it == info->levels.end())
    throw DataError("sample '" + sample_id + "' not annotated for factor '" + factor +
                    "'");
  return it->second;
}

void ControlGeneSet::validate(std::size_t n_features) const {
  if (indices.empty()) throw DataError("control gene set is empty");
  std::set<std::size_t> seen;
  for (std::size_t idx : indices) {
    if (idx >= n_features) throw DataError("control gene index out of range");
    if (!seen.insert(idx).second) throw DataError("duplicate control gene index");
  }
}

MatrixFormat format_for_path(const std::string& path) {
  MatrixFormat fmt;
  auto ends_with = [&](const char* suffix) {
    const std::string s(suffix);
    return path.size() >= s.size() && path.compare(path.size() - s.size(), s.size(), s) == 0;
  };
  if (ends_with(".tsv") || ends_with(".tab")) fmt.delimiter = '\t';
  return fmt;
}

ExpressionMatrix load_matrix(const std::string& path, const MatrixFormat& format) {
  const auto lines = read_lines(path);
  if (lines.size() < 2) throw DataError(path + ": expected a header and data rows");

  const auto header = split_line(lines[0], format.delimiter);
  if (header.size() < 2) throw DataError(path + ": header has no feature ids");

  ExpressionMatrix em;
  em.feature_ids.assign(header.begin() + 1, header.end());
  const std::size_t n = em.feature_ids.size();
  em.values = Matrix(lines.size() - 1, n);
  em.sample_ids.reserve(lines.size() - 1);

  for (std::size_t r = 1; r < lines.size(); ++r) {
    const auto fields = split_line(lines[r], format.delimiter);
    if (fields.size() != n + 1) {
      std::ostringstream msg;
      msg << path << ": ragged row at line " << r + 1 << " (expected " << n + 1
          << " fields, got " << fields.size() << ")";
      throw DataError(msg.str());
    }
    em.sample_ids.push_back(fields[0]);
    for (std::size_t j = 0; j < n; ++j)
      em.values(r - 1, j) =
          parse_cell(fields[j + 1], r + 1, j + 2, fields[0], em.feature_ids[j]);
  }
  em.validate();
  return em;
}

void save_matrix(const std::string& path, const ExpressionMatrix& em,
                 const MatrixFormat& format) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write file: " + path);
  const char d = format.delimiter;
  out << "sample_id";
  for (const auto& f : em.feature_ids) out << d << f;
  out << '\n';
  for (std::size_t i = 0; i < em.values.rows(); ++i) {
    out << em.sample_ids[i];
    for (std::size_t j = 0; j < em.values.cols(); ++j)
      out << d << format_double(em.values(i, j));
    out << '\n';
  }
  if (!out) throw DataError("write failed: " + path);
}

SampleAnnotations load_annotations(const std::string& path) {
  const auto lines = read_lines(path);
  if (lines.empty() || split_line(lines[0], ',') !=
                           std::vector<std::string>{"sample_id", "factor", "level"})
    throw DataError(path + ": expected header 'sample_id,factor,level'");
  SampleAnnotations ann;
  for (std::size_t r = 1; r < lines.size(); ++r) {
    if (lines[r].empty()) continue;
    const auto fields = split_line(lines[r], ',');
    if (fields.size() != 3) {
      std::ostringstream msg;
      msg << path << ": expected 3 fields at line " << r + 1;
      throw DataError(msg.str());
    }
    auto& info = ann.samples[fields[0]];
    if (fields[1] == "replicate_group") {
      info.replicate_group = fields[2];
    } else if (fields[1] == "truth_label") {
      info.truth_label = fields[2];
    } else {
      info.levels[fields[1]] = fields[2];
    }
  }
  return ann;
}

void save_annotations(const std::string& path, const SampleAnnotations& ann) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write file: " + path);
  out << "sample_id,factor,level\n";
  for (const auto& [id, info] : ann.samples) {
    for (const auto& [factor, level] : info.levels)
      out << id << ',' << factor << ',' << level << '\n';
    if (info.replicate_group)
      out << id << ",replicate_group," << *info.replicate_group << '\n';
    if (info.truth_label) out << id << ",truth_label," << *info.truth_label << '\n';
  }
  if (!out) throw DataError("write failed: " + path);
}

std::vector<std::string> load_id_list(const std::string& path) {
  std::vector<std::string> ids;
  for (const auto& line : read_lines(path))
    if (!line.empty()) ids.push_back(line);
  return ids;
}

void save_id_list(const std::string& path, const std::vector<std::string>& ids) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write file: " + path);
  for (const auto& id : ids) out << id << '\n';
  if (!out) throw DataError("write failed: " + path);
}

ControlGeneSet control_set_from_ids(const ExpressionMatrix& em,
                                    const std::vector<std::string>& ids) {
  ControlGeneSet set;
  for (const auto& id : ids) {
    bool found = false;
    for (std::size_t j = 0; j < em.feature_ids.size(); ++j) {
      if (em.feature_ids[j] == id) {
        set.indices.push_back(j);
        found = true;
        break;
      }
    }
    if (!found) throw DataError("control gene id not in matrix: " + id);
  }
  set.validate(em.feature_ids.size());
  return set;
}

ReplicateDifferenceSet build_differences(const ExpressionMatrix& y,
                                         const SampleAnnotations& ann,
                                         DifferenceScheme scheme) {
  // group id -> member ids, both in lexicographic order via std::map/set.
  std::map<std::string, std::vector<std::string>> groups;
  {
    std::map<std::string, std::set<std::string>> collect;
    for (const auto& [id, info] : ann.samples) {
      if (!info.replicate_group) continue;
      y.sample_index(id);  // annotated sample must exist in the matrix
      collect[*info.replicate_group].insert(id);
    }
    for (auto& [gid, members] : collect)
      groups[gid] = std::vector<std::string>(members.begin(), members.end());
  }

  const std::size_t n = y.values.cols();
  std::vector<std::vector<double>> rows;
  ReplicateDifferenceSet out;
  out.scheme = scheme;

  for (const auto& [gid, members] : groups) {
    if (members.size() < 2) continue;
    std::vector<std::size_t> idx(members.size());
    for (std::size_t i = 0; i < members.size(); ++i) idx[i] = y.sample_index(members[i]);

    if (scheme == DifferenceScheme::all_pairs) {
      for (std::size_t i = 0; i < members.size(); ++i) {
        for (std::size_t j = i + 1; j < members.size(); ++j) {
          std::vector<double> row(n);
          for (std::size_t f = 0; f < n; ++f)
            row[f] = y.values(idx[i], f) - y.values(idx[j], f);
          rows.push_back(std::move(row));
          out.provenance.emplace_back(members[i], members[j]);
        }
      }
    } else {
      for (std::size_t i = 0; i < members.size(); ++i) {
        std::vector<double> row(n, 0.0);
        for (std::size_t j = 0; j < members.size(); ++j) {
          if (j == i) continue;
          for (std::size_t f = 0; f < n; ++f) row[f] += y.values(idx[j], f);
        }
        const double denom = static_cast<double>(members.size() - 1);
        for (std::size_t f = 0; f < n; ++f)
          row[f] = y.values(idx[i], f) - row[f] / denom;
        rows.push_back(std::move(row));
        out.provenance.emplace_back(members[i], gid);
      }
    }
  }

  if (rows.empty())
    throw DataError("build_differences: no replicate group of size >= 2");

  out.d_rows = Matrix(rows.size(), n);
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t f = 0; f < n; ++f) out.d_rows(i, f) = rows[i][f];
  return out;
}

ExpressionMatrix center_by_factor(const ExpressionMatrix& y,
                                  const SampleAnnotations& ann,
                                  const std::vector<std::string>& factors) {
  if (factors.empty()) throw DataError("center_by_factor: no factors given");
  // Any factor unknown to every sample is a config mistake, not a data gap.
  for (const auto& factor : factors) {
    bool known = false;
    for (const auto& [id, info] : ann.samples)
      if (info.levels.count(factor)) known = true;
    if (!known) throw DataError("unknown factor name: " + factor);
  }

  std::map<std::vector<std::string>, std::vector<std::size_t>> cells;
  for (std::size_t i = 0; i < y.sample_ids.size(); ++i) {
    std::vector<std::string> key;
    key.reserve(factors.size());
    for (const auto& factor : factors)
      key.push_back(ann.level_of(y.sample_ids[i], factor));
    cells[key].push_back(i);
  }

  ExpressionMatrix out = y;
  const std::size_t n = y.values.cols();
  for (const auto& [key, members] : cells) {
    for (std::size_t f = 0; f < n; ++f) {
      double mean = 0.0;
      for (std::size_t i : members) mean += y.values(i, f);
      mean /= static_cast<double>(members.size());
      for (std::size_t i : members) out.values(i, f) -= mean;
    }
  }
  return out;
}

Matrix select_columns(const Matrix& a, const std::vector<std::size_t>& cols) {
  Matrix out(a.rows(), cols.size());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < cols.size(); ++j) out(i, j) = a(i, cols[j]);
  return out;
}

Matrix select_rows(const Matrix& a, const std::vector<std::size_t>& rows) {
  Matrix out(rows.size(), a.cols());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) out(i, j) = a(rows[i], j);
  return out;
}

}  // namespace uvr

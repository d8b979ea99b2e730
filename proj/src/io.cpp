// Copyright 2026 The mmcca Authors
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
#include "mmcca/io.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <vector>

#include <json.hpp>

#include "mmcca/error.hpp"

namespace mmcca {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string format_double(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view field, const std::string& path, std::size_t line) {
  while (!field.empty() && (field.front() == ' ' || field.front() == '\t')) field.remove_prefix(1);
  while (!field.empty() && (field.back() == ' ' || field.back() == '\t' || field.back() == '\r')) field.remove_suffix(1);
  if (!field.empty() && field.front() == '+') field.remove_prefix(1);
  double value = 0.0;
  const auto res = std::from_chars(field.data(), field.data() + field.size(), value);
  if (field.empty() || res.ec != std::errc() || res.ptr != field.data() + field.size()) {
    throw Error(Errc::parse, path + ":" + std::to_string(line) + ": not a number: '" + std::string(field) + "'");
  }
  return value;
}

long long parse_integer(const std::string& token, const std::string& path, std::size_t line, const char* what) {
  long long value = 0;
  const auto res = std::from_chars(token.data(), token.data() + token.size(), value);
  if (res.ec != std::errc() || res.ptr != token.data() + token.size()) {
    throw Error(Errc::parse, path + ":" + std::to_string(line) + ": " + what + " is not an integer: '" + token + "'");
  }
  return value;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io, "cannot open '" + path + "' for reading");
  return in;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::io, "cannot open '" + path + "' for writing");
  return out;
}

std::string join(const std::string& dir, const char* name) { return (fs::path(dir) / name).string(); }

json matrix_shape(const Matrix& A) { return json::array({A.rows(), A.cols()}); }

}  // namespace

DataFormat parse_format(const std::string& name) {
  if (name == "dense-csv" || name == "csv" || name == "dense") return DataFormat::dense_csv;
  if (name == "docword" || name == "docword-triplets" || name == "triplets") return DataFormat::docword;
  throw Error(Errc::invalid_argument, "unknown data format '" + name + "' (expected dense-csv or docword-triplets)");
}

DataFormat detect_format(const std::string& path) {
  const std::string ext = fs::path(path).extension().string();
  if (ext == ".txt" || ext == ".docword" || ext == ".triplets") return DataFormat::docword;
  return DataFormat::dense_csv;
}

void ensure_directory(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw Error(Errc::io, "cannot create directory '" + dir + "': " + ec.message());
}

std::string read_text(const std::string& path) {
  std::ifstream in = open_in(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out = open_out(path);
  out << text;
  if (!out) throw Error(Errc::io, "write to '" + path + "' failed");
}

void write_dense_csv(const std::string& path, const Matrix& A) {
  std::string text = std::to_string(A.rows()) + "," + std::to_string(A.cols()) + "\n";
  for (Index i = 0; i < A.rows(); ++i) {
    for (Index j = 0; j < A.cols(); ++j) {
      if (j > 0) text += ',';
      text += format_double(A(i, j));
    }
    text += '\n';
  }
  write_text(path, text);
}

Matrix read_dense_csv(const std::string& path) {
  std::ifstream in = open_in(path);
  std::string line;
  if (!std::getline(in, line)) throw Error(Errc::empty_data, path + ": empty file");
  const auto comma = line.find(',');
  if (comma == std::string::npos) throw Error(Errc::parse, path + ":1: expected header 'M,N'");
  const double m = parse_double(std::string_view(line).substr(0, comma), path, 1);
  const double n = parse_double(std::string_view(line).substr(comma + 1), path, 1);
  if (m < 0 || n < 0 || m != std::floor(m) || n != std::floor(n)) {
    throw Error(Errc::parse, path + ":1: header dimensions must be nonnegative integers");
  }
  const Index M = static_cast<Index>(m), N = static_cast<Index>(n);
  if (M == 0 || N == 0) throw Error(Errc::empty_data, path + ": matrix has no entries");
  Matrix A(M, N);
  for (Index i = 0; i < M; ++i) {
    const std::size_t lineno = static_cast<std::size_t>(i) + 2;
    if (!std::getline(in, line)) {
      throw Error(Errc::parse, path + ": expected " + std::to_string(M) + " data rows, found " + std::to_string(i));
    }
    std::string_view rest(line);
    for (Index j = 0; j < N; ++j) {
      const auto pos = rest.find(',');
      if ((pos == std::string_view::npos) != (j == N - 1)) {
        throw Error(Errc::parse, path + ":" + std::to_string(lineno) + ": expected " + std::to_string(N) + " values");
      }
      A(i, j) = parse_double(rest.substr(0, pos), path, lineno);
      if (pos != std::string_view::npos) rest.remove_prefix(pos + 1);
    }
  }
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") != std::string::npos) throw Error(Errc::parse, path + ": trailing data after matrix");
  }
  return A;
}

ViewMatrix read_docword(const std::string& path, Index M_hint) {
  std::ifstream in = open_in(path);
  std::string line;
  std::size_t lineno = 0;
  Index M = -1, N = -1, max_var = 0, max_sample = 0;
  std::vector<Eigen::Triplet<double>> triplets;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream fields(line);
    std::string first;
    if (!(fields >> first)) continue;
    if (first[0] == '#') {
      std::string rest = line.substr(line.find('#') + 1);
      std::istringstream header(rest);
      std::string a, b, extra;
      if (header >> a >> b && !(header >> extra) && triplets.empty() && M < 0) {
        M = parse_integer(a, path, lineno, "M");
        N = parse_integer(b, path, lineno, "N");
        if (M < 1 || N < 1) throw Error(Errc::parse, path + ":" + std::to_string(lineno) + ": header dimensions must be positive");
      }
      continue;
    }
    std::string var_tok, count_tok, extra;
    if (!(fields >> var_tok >> count_tok) || (fields >> extra)) {
      throw Error(Errc::parse, path + ":" + std::to_string(lineno) + ": expected 'sample variable count'");
    }
    const long long sample = parse_integer(first, path, lineno, "sample id");
    const long long var = parse_integer(var_tok, path, lineno, "variable id");
    const double count = parse_double(count_tok, path, lineno);
    if (sample < 1 || var < 1) throw Error(Errc::parse, path + ":" + std::to_string(lineno) + ": ids are 1-based");
    if (count < 0 || count != std::floor(count)) {
      throw Error(Errc::parse, path + ":" + std::to_string(lineno) + ": count must be a nonnegative integer");
    }
    if ((M > 0 && var > M) || (N > 0 && sample > N)) {
      throw Error(Errc::parse, path + ":" + std::to_string(lineno) + ": id outside the declared dimensions");
    }
    max_var = std::max<Index>(max_var, var);
    max_sample = std::max<Index>(max_sample, sample);
    triplets.emplace_back(static_cast<Index>(var - 1), static_cast<Index>(sample - 1), count);
  }
  if (M < 0) {
    if (triplets.empty()) throw Error(Errc::empty_data, path + ": no count triplets");
    M = std::max(max_var, M_hint);
    N = max_sample;
  }
  return ViewMatrix::from_triplets(M, N, triplets);
}

void write_docword(const std::string& path, const ViewMatrix& X) {
  const ViewMatrix sp = X.is_sparse() ? X : X.to_sparse();
  std::string text = "# " + std::to_string(sp.variables()) + " " + std::to_string(sp.samples()) + "\n";
  const SparseCounts& S = sp.sparse_values();
  for (Index n = 0; n < S.outerSize(); ++n) {
    for (SparseCounts::InnerIterator it(S, n); it; ++it) {
      if (it.value() == 0.0) continue;
      text += std::to_string(n + 1) + " " + std::to_string(it.row() + 1) + " " + format_double(it.value()) + "\n";
    }
  }
  write_text(path, text);
}

ViewMatrix read_view(const std::string& path, DataFormat format) {
  if (format == DataFormat::docword) return read_docword(path);
  return ViewMatrix::dense(read_dense_csv(path));
}

void write_view(const std::string& path, const ViewMatrix& X) {
  if (X.is_sparse()) {
    write_docword(path, X);
  } else {
    write_dense_csv(path, X.dense_values());
  }
}

std::pair<ViewMatrix, ViewMatrix> ingest_pair(const std::string& path1, const std::string& path2, DataFormat format) {
  ViewMatrix X1 = read_view(path1, format);
  ViewMatrix X2 = read_view(path2, format);
  if (X1.samples() != X2.samples()) {
    throw Error(Errc::dimension, "views are not sample-aligned: '" + path1 + "' has " + std::to_string(X1.samples()) +
                                     " samples, '" + path2 + "' has " + std::to_string(X2.samples()));
  }
  return {std::move(X1), std::move(X2)};
}

std::string diagnostics_json(const FitDiagnostics& d, const FitConfig& config) {
  json j;
  j["model"] = model_name(config.model);
  j["method"] = method_name(config.method);
  j["K"] = config.K;
  j["delta"] = config.delta;
  j["seed"] = config.seed;
  j["whitening"] = config.whitening == WhiteningMethod::exact ? "exact" : "randomized";
  j["sweeps"] = d.sweeps;
  j["final_off"] = d.final_off;
  j["converged"] = d.converged;
  j["off_increased"] = d.off_increased;
  j["diagonalizer_condition"] = d.diagonalizer_condition;
  j["whitening_residual"] = d.whitening_residual;
  j["whitening_condition"] = d.whitening_condition;
  j["imaginary_ratio"] = d.imaginary_ratio;
  j["num_targets"] = d.num_targets;
  j["identifiability_gap"] = std::isfinite(d.identifiability_gap) ? json(d.identifiability_gap) : json(nullptr);
  j["flagged"] = d.flagged;
  j["runtime_seconds"] = d.runtime_seconds;
  json dropped = json::array();
  for (const DroppedPoint& p : d.dropped) dropped.push_back({{"index", p.index}, {"reason", p.reason}});
  j["dropped_points"] = dropped;
  j["warnings"] = d.warnings;
  json trace = json::array();
  for (const SweepRecord& r : d.trace) trace.push_back({{"sweep", r.sweep}, {"off", r.off}, {"normality", r.normality}});
  j["trace"] = trace;
  return j.dump(2) + "\n";
}

void write_fit(const std::string& dir, const FitResult& fit, const FitConfig& config) {
  ensure_directory(dir);
  write_dense_csv(join(dir, "D1.csv"), fit.loadings.D1);
  write_dense_csv(join(dir, "D2.csv"), fit.loadings.D2);
  write_text(join(dir, "diagnostics.json"), diagnostics_json(fit.diagnostics, config));
}

Loadings read_loadings(const std::string& dir) {
  Loadings L;
  L.D1 = read_dense_csv(join(dir, "D1.csv"));
  L.D2 = read_dense_csv(join(dir, "D2.csv"));
  if (L.D1.cols() != L.D2.cols()) throw Error(Errc::dimension, dir + ": D1 and D2 have different column counts");
  return L;
}

void write_instance(const std::string& dir, const DiscreteInstance& inst) {
  ensure_directory(dir);
  write_dense_csv(join(dir, "D1.csv"), inst.D1);
  write_dense_csv(join(dir, "D2.csv"), inst.D2);
  write_dense_csv(join(dir, "F1.csv"), inst.F1);
  write_dense_csv(join(dir, "F2.csv"), inst.F2);
  const DiscreteParams& p = inst.params;
  json j = {{"generator", "discrete"},
            {"mode", p.mode == LoadingMode::fixed2d ? "fixed2d" : "dirichlet"},
            {"M1", p.M1}, {"M2", p.M2}, {"K", p.K}, {"K1", p.K1}, {"K2", p.K2},
            {"c", p.c}, {"c1", p.c1}, {"c2", p.c2}, {"Ls", p.Ls}, {"Ln", p.Ln},
            {"b", inst.b}, {"b1", inst.b1}, {"b2", inst.b2},
            {"D1_shape", matrix_shape(inst.D1)}, {"D2_shape", matrix_shape(inst.D2)}};
  write_text(join(dir, "instance.json"), j.dump(2) + "\n");
}

void write_instance(const std::string& dir, const ContinuousInstance& inst) {
  ensure_directory(dir);
  write_dense_csv(join(dir, "D1.csv"), inst.D1);
  write_dense_csv(join(dir, "D2.csv"), inst.D2);
  write_dense_csv(join(dir, "F1.csv"), inst.F1);
  write_dense_csv(join(dir, "F2.csv"), inst.F2);
  const ContinuousParams& p = inst.params;
  json j = {{"generator", "continuous"},
            {"M1", p.M1}, {"M2", p.M2}, {"K", p.K}, {"K1", p.K1}, {"K2", p.K2},
            {"c", p.c}, {"c1", p.c1}, {"c2", p.c2}, {"Ls", p.Ls}, {"Ln", p.Ln},
            {"b", inst.b}, {"b1", inst.b1}, {"b2", inst.b2},
            {"D1_shape", matrix_shape(inst.D1)}, {"D2_shape", matrix_shape(inst.D2)}};
  write_text(join(dir, "instance.json"), j.dump(2) + "\n");
}

Loadings read_instance_loadings(const std::string& dir) { return read_loadings(dir); }

}  // namespace mmcca

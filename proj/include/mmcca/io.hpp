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
#pragma once

#include <string>
#include <utility>

#include "mmcca/linalg.hpp"
#include "mmcca/moments.hpp"
#include "mmcca/pipeline.hpp"
#include "mmcca/synthetic.hpp"

namespace mmcca {

enum class DataFormat { dense_csv, docword };

/// "dense-csv" / "csv" or "docword" / "docword-triplets".
DataFormat parse_format(const std::string& name);
/// docword for .txt / .docword / .triplets, dense CSV otherwise.
DataFormat detect_format(const std::string& path);

/// First line "M,N", then M lines of N comma-separated values in shortest
/// round-trip form.
void write_dense_csv(const std::string& path, const Matrix& A);
Matrix read_dense_csv(const std::string& path);

/// Whitespace triplets "sample variable count", 1-based, optionally preceded
/// by a "# M N" header. Without a header, M and N are the largest ids seen
/// (or M_hint when larger).
ViewMatrix read_docword(const std::string& path, Index M_hint = 0);
void write_docword(const std::string& path, const ViewMatrix& X);

ViewMatrix read_view(const std::string& path, DataFormat format);
/// Sparse views are written as docword, dense views as CSV.
void write_view(const std::string& path, const ViewMatrix& X);

/// Two sample-aligned views; throws dimension on differing sample counts.
std::pair<ViewMatrix, ViewMatrix> ingest_pair(const std::string& path1, const std::string& path2, DataFormat format);

std::string diagnostics_json(const FitDiagnostics& d, const FitConfig& config);

/// D1.csv, D2.csv and diagnostics.json in dir (created if missing).
void write_fit(const std::string& dir, const FitResult& fit, const FitConfig& config);
Loadings read_loadings(const std::string& dir);

/// D1/D2/F1/F2 CSVs plus instance.json with the generator parameters.
void write_instance(const std::string& dir, const DiscreteInstance& inst);
void write_instance(const std::string& dir, const ContinuousInstance& inst);
/// The true loadings of a saved instance.
Loadings read_instance_loadings(const std::string& dir);

void ensure_directory(const std::string& dir);
std::string read_text(const std::string& path);
void write_text(const std::string& path, const std::string& text);

}  // namespace mmcca

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

#include <stdexcept>
#include <string>
#include <utility>

namespace mmcca {

/// Failure categories raised by the library. The first group are caller or
/// data-format mistakes; the second group are numerical failures of an
/// otherwise well-formed problem.
enum class Errc {
  // validation
  dimension,
  invalid_argument,
  insufficient_samples,
  size_limit,
  empty_data,
  parse,
  io,
  // numerical
  degenerate_weights,
  rank_deficient,
  no_convergence,
  ill_conditioned,
  insufficient_targets,
  singular,
  scale,
};

const char* errc_name(Errc code) noexcept;
bool is_numerical(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(message), code_(code) {}
  Error(Errc code, std::string stage, const std::string& message)
      : std::runtime_error(stage + ": " + message), code_(code), stage_(std::move(stage)) {}

  Errc code() const noexcept { return code_; }
  const std::string& stage() const noexcept { return stage_; }

  /// Same error with a pipeline stage prefix. Keeps an existing stage.
  Error with_stage(const std::string& stage) const {
    if (!stage_.empty()) return *this;
    return Error(code_, stage, what());
  }

 private:
  Errc code_;
  std::string stage_;
};

}  // namespace mmcca

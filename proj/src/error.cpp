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
#include "mmcca/error.hpp"

namespace mmcca {

const char* errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::dimension: return "dimension";
    case Errc::invalid_argument: return "invalid_argument";
    case Errc::insufficient_samples: return "insufficient_samples";
    case Errc::size_limit: return "size_limit";
    case Errc::empty_data: return "empty_data";
    case Errc::parse: return "parse";
    case Errc::io: return "io";
    case Errc::degenerate_weights: return "degenerate_weights";
    case Errc::rank_deficient: return "rank_deficient";
    case Errc::no_convergence: return "no_convergence";
    case Errc::ill_conditioned: return "ill_conditioned";
    case Errc::insufficient_targets: return "insufficient_targets";
    case Errc::singular: return "singular";
    case Errc::scale: return "scale";
  }
  return "unknown";
}

bool is_numerical(Errc code) noexcept { return code >= Errc::degenerate_weights; }

}  // namespace mmcca

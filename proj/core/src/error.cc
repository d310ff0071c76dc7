// Copyright 2026 The Episode Forge Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "episode_forge/error.h"

namespace episode_forge {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kDimensionMismatch: return "dimension_mismatch";
    case ErrorCode::kEmptyInput: return "empty_input";
    case ErrorCode::kInvalidArgument: return "invalid_argument";
    case ErrorCode::kUnknownItem: return "unknown_item";
    case ErrorCode::kInfeasibleK: return "infeasible_k";
    case ErrorCode::kEnumerationTooLarge: return "enumeration_too_large";
    case ErrorCode::kParse: return "parse_error";
    case ErrorCode::kDuplicateClass: return "duplicate_class";
    case ErrorCode::kRaggedRow: return "ragged_row";
    case ErrorCode::kPoolTooSmall: return "pool_too_small";
    case ErrorCode::kMissingEmbedding: return "missing_embedding";
    case ErrorCode::kWrongKind: return "wrong_kind";
    case ErrorCode::kNonFinite: return "non_finite";
    case ErrorCode::kDegenerateVariance: return "degenerate_variance";
    case ErrorCode::kZeroUniformDiversity: return "zero_uniform_diversity";
    case ErrorCode::kIo: return "io_error";
  }
  return "unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(message), code_(code) {}

}  // namespace episode_forge

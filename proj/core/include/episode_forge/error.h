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

#ifndef EPISODE_FORGE_ERROR_H_
#define EPISODE_FORGE_ERROR_H_

#include <stdexcept>
#include <string>
#include <string_view>

namespace episode_forge {

enum class ErrorCode {
  kDimensionMismatch,
  kEmptyInput,
  kInvalidArgument,
  kUnknownItem,
  kInfeasibleK,
  kEnumerationTooLarge,
  kParse,
  kDuplicateClass,
  kRaggedRow,
  kPoolTooSmall,
  kMissingEmbedding,
  kWrongKind,
  kNonFinite,
  kDegenerateVariance,
  kZeroUniformDiversity,
  kIo,
};

std::string_view ErrorCodeName(ErrorCode code);

// All library failures surface as this exception; `code()` is stable and
// machine-readable, `what()` carries the human detail.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace episode_forge

#endif  // EPISODE_FORGE_ERROR_H_

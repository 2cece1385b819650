/*
 * Copyright 2026 The fastfield Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace fastfield {

enum class ErrorCode {
  kParse,
  kIo,
  kVersionMismatch,
  kMissingField,
  kDimensionMismatch,
  kUninitializedField,
  kNonUnitDirection,
  kDegenerateAabb,
  kSizeGuardExceeded,
  kInvalidSparsity,
  kInvalidArgument,
  kTooSmall,
  kEmptyMesh,
  kOutOfImage,
};

std::string_view to_string(ErrorCode code);

/// The single exception type thrown by the library. The code identifies the
/// failure class; the message carries context (file, field, dimensions).
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace fastfield

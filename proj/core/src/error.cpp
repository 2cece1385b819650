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

#include "fastfield/error.hpp"

namespace fastfield {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kParse: return "ParseError";
    case ErrorCode::kIo: return "IoError";
    case ErrorCode::kVersionMismatch: return "VersionMismatch";
    case ErrorCode::kMissingField: return "MissingField";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kUninitializedField: return "UninitializedField";
    case ErrorCode::kNonUnitDirection: return "NonUnitDirection";
    case ErrorCode::kDegenerateAabb: return "DegenerateAabb";
    case ErrorCode::kSizeGuardExceeded: return "SizeGuardExceeded";
    case ErrorCode::kInvalidSparsity: return "InvalidSparsity";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kTooSmall: return "TooSmall";
    case ErrorCode::kEmptyMesh: return "EmptyMesh";
    case ErrorCode::kOutOfImage: return "OutOfImage";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

}  // namespace fastfield

// Copyright 2026 The hti Authors
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

#include "hti/error.hpp"

namespace hti {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kMalformedInput: return "MalformedInput";
    case ErrorCode::kDanglingReference: return "DanglingReference";
    case ErrorCode::kDuplicateId: return "DuplicateId";
    case ErrorCode::kEmptyTemplates: return "EmptyTemplates";
    case ErrorCode::kNoPresentLabel: return "NoPresentLabel";
    case ErrorCode::kUnknownItem: return "UnknownItem";
    case ErrorCode::kUnknownValue: return "UnknownValue";
    case ErrorCode::kEmptyReference: return "EmptyReference";
    case ErrorCode::kTargetLacksValue: return "TargetLacksValue";
    case ErrorCode::kGallerySizeExceedsPool: return "GallerySizeExceedsPool";
    case ErrorCode::kMalformedIndex: return "MalformedIndex";
    case ErrorCode::kInconsistentTranscript: return "InconsistentTranscript";
    case ErrorCode::kEmptyGroup: return "EmptyGroup";
    case ErrorCode::kEmptyInput: return "EmptyInput";
    case ErrorCode::kAgentProtocolError: return "AgentProtocolError";
    case ErrorCode::kTimeout: return "Timeout";
    case ErrorCode::kInvalidConfig: return "InvalidConfig";
    case ErrorCode::kInvariantViolation: return "InvariantViolation";
    case ErrorCode::kIo: return "Io";
  }
  return "Unknown";
}

}  // namespace hti
